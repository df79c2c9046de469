/**
 * Wire protocol spoken with the session service: one JSON object per
 * websocket frame, {kind, seq, t, payload} from the service with seq
 * strictly increasing per connection.
 */

export type Vec = [number, number];

export interface PointState {
  position: Vec;
  velocity: Vec;
}

export interface TargetState {
  center: Vec;
  width: number;
}

export interface TickStatePayload {
  point: PointState;
  target: TargetState | null;
  obstacle: [Vec, Vec] | null;
  phase: string;
  robot_force: Vec;
}

export interface HelloPayload {
  session_id: string;
  mode: string;
  trial_count: number;
  completed: number;
  state: TickStatePayload;
}

export interface TrialEventPayload {
  event: string;
  trial_id: number;
  time: number;
  movement_time?: number;
  collided?: boolean;
}

export interface SessionSummaryPayload {
  mode: string;
  trial_count: number;
  success_count: number;
  collision_count: number;
  collisions: string;
  mean_ip: number | null;
  per_condition_mt: Record<string, number | null>;
  tlx_total: number | null;
}

export type ServerKind =
  | "hello"
  | "session_start"
  | "tick_state"
  | "trial_event"
  | "session_summary"
  | "error";

export interface ServerMessage {
  kind: ServerKind;
  seq: number;
  t: number;
  payload: unknown;
}

export interface InputMessage {
  kind: "input";
  payload: { cursor: Vec };
}

export interface TlxSubmitMessage {
  kind: "tlx_submit";
  payload: { ratings: number[]; pairs: string[] };
}

const SERVER_KINDS = new Set<string>([
  "hello",
  "session_start",
  "tick_state",
  "trial_event",
  "session_summary",
  "error",
]);

function isVec(v: unknown): v is Vec {
  return (
    Array.isArray(v) && v.length === 2 &&
    typeof v[0] === "number" && typeof v[1] === "number" &&
    Number.isFinite(v[0]) && Number.isFinite(v[1])
  );
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const m = data as Record<string, unknown>;
  if (typeof m.kind !== "string" || !SERVER_KINDS.has(m.kind)) return null;
  if (typeof m.seq !== "number" || typeof m.t !== "number") return null;
  return m as unknown as ServerMessage;
}

export function isTickState(p: unknown): p is TickStatePayload {
  if (typeof p !== "object" || p === null) return false;
  const s = p as Record<string, unknown>;
  const point = s.point as Record<string, unknown> | undefined;
  if (!point || !isVec(point.position) || !isVec(point.velocity)) return false;
  if (s.target !== null) {
    const t = s.target as Record<string, unknown> | undefined;
    if (!t || !isVec(t.center) || typeof t.width !== "number") return false;
  }
  if (s.obstacle !== null) {
    const o = s.obstacle as unknown[];
    if (!Array.isArray(o) || o.length !== 2 || !isVec(o[0]) || !isVec(o[1])) return false;
  }
  return typeof s.phase === "string" && isVec(s.robot_force);
}

export function isSessionSummary(p: unknown): p is SessionSummaryPayload {
  if (typeof p !== "object" || p === null) return false;
  const s = p as Record<string, unknown>;
  return (
    typeof s.mode === "string" &&
    typeof s.collisions === "string" &&
    typeof s.trial_count === "number" &&
    (s.mean_ip === null || typeof s.mean_ip === "number")
  );
}
