/**
 * Session dashboard model: IP bars per mode and the collision table. Values
 * come verbatim from the service's session_summary frames; nothing is
 * recomputed client-side, so the dashboard always matches the persisted
 * summaries exactly.
 */

import type { SessionSummaryPayload } from "./protocol.js";

export const MODE_LABELS: Record<string, string> = {
  individual: "individual task",
  robot_follower: "robot follower collaboration",
  robot_equal: "robot equal collaboration",
  robot_leader: "robot leader collaboration",
  human_pair_replay: "replayed human pair",
};

export interface IpBar {
  mode: string;
  label: string;
  meanIp: number | null;
  /** raw JSON number rendering, byte-identical to the service summary */
  meanIpText: string;
  relativeWidth: number; // 0..1 against the largest bar in the set
}

export interface CollisionRow {
  mode: string;
  label: string;
  collisions: string; // "n/total" exactly as the service rendered it
}

export class Dashboard {
  private summaries = new Map<string, SessionSummaryPayload>();

  addSummary(summary: SessionSummaryPayload): void {
    this.summaries.set(summary.mode, summary);
  }

  ipBars(): IpBar[] {
    const entries = [...this.summaries.values()];
    const max = Math.max(1e-12, ...entries.map((s) => s.mean_ip ?? 0));
    return entries.map((s) => ({
      mode: s.mode,
      label: MODE_LABELS[s.mode] ?? s.mode,
      meanIp: s.mean_ip,
      meanIpText: s.mean_ip === null ? "-" : JSON.stringify(s.mean_ip),
      relativeWidth: s.mean_ip === null ? 0 : s.mean_ip / max,
    }));
  }

  collisionRows(): CollisionRow[] {
    return [...this.summaries.values()].map((s) => ({
      mode: s.mode,
      label: MODE_LABELS[s.mode] ?? s.mode,
      collisions: s.collisions,
    }));
  }

  tlxTotals(): Array<{ mode: string; total: number | null }> {
    return [...this.summaries.values()].map((s) => ({ mode: s.mode, total: s.tlx_total }));
  }
}
