/**
 * Session-service connection: parses server frames into a latest-state cell
 * (no queueing: the render loop reads the newest state, never history),
 * publishes the cursor throttled to at most 120 msg/s with a 10 Hz heartbeat
 * while stationary (the service's stale-input guard needs a pulse), and
 * reconnects with backoff, dropping silently while disconnected.
 */

import {
  HelloPayload,
  SessionSummaryPayload,
  TickStatePayload,
  TrialEventPayload,
  Vec,
  isSessionSummary,
  isTickState,
  parseServerMessage,
} from "./protocol.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export interface ClientHooks {
  onHello?(payload: HelloPayload): void;
  onTickState?(payload: TickStatePayload): void;
  onTrialEvent?(payload: TrialEventPayload): void;
  onSummary?(payload: SessionSummaryPayload): void;
  onProtocolError?(message: string): void;
  onConnection?(connected: boolean): void;
}

export interface ClientOptions {
  socketFactory?: (url: string) => WebSocketLike;
  autoReconnect?: boolean;
  maxSendHz?: number;
  heartbeatHz?: number;
}

const DEFAULT_MAX_SEND_HZ = 120;
const DEFAULT_HEARTBEAT_HZ = 10;

export class SessionClient {
  latestState: TickStatePayload | null = null;
  lastSeq = 0;
  seqGaps = 0;
  connected = false;

  private socket: WebSocketLike | null = null;
  private readonly minSendIntervalMs: number;
  private readonly heartbeatIntervalMs: number;
  private lastSendAt = -Infinity;
  private lastCursor: Vec | null = null;
  private reconnectDelayMs = 500;
  private closedByUser = false;

  constructor(
    private readonly url: string,
    private readonly hooks: ClientHooks = {},
    private readonly options: ClientOptions = {},
  ) {
    this.minSendIntervalMs = 1000 / (options.maxSendHz ?? DEFAULT_MAX_SEND_HZ);
    this.heartbeatIntervalMs = 1000 / (options.heartbeatHz ?? DEFAULT_HEARTBEAT_HZ);
  }

  connect(): void {
    this.closedByUser = false;
    const factory =
      this.options.socketFactory ??
      ((u: string) => new (globalThis as { WebSocket: new (url: string) => WebSocketLike }).WebSocket(u));
    const socket = factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.connected = true;
      this.lastSeq = 0; // new connection, new seq epoch
      this.reconnectDelayMs = 500;
      this.hooks.onConnection?.(true);
    };
    socket.onmessage = (ev) => this.handleFrame(String(ev.data));
    socket.onclose = () => {
      this.connected = false;
      this.socket = null;
      this.hooks.onConnection?.(false);
      if (!this.closedByUser && (this.options.autoReconnect ?? true)) {
        const delay = this.reconnectDelayMs;
        this.reconnectDelayMs = Math.min(this.reconnectDelayMs * 2, 4000);
        setTimeout(() => {
          if (!this.closedByUser) this.connect();
        }, delay);
      }
    };
    socket.onerror = () => {
      // close handler owns recovery
    };
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
    this.socket = null;
    this.connected = false;
  }

  private handleFrame(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.hooks.onProtocolError?.(`malformed frame: ${raw.slice(0, 120)}`);
      return; // render skipped, logged
    }
    if (this.lastSeq !== 0 && msg.seq !== this.lastSeq + 1) {
      this.seqGaps += 1;
      this.hooks.onProtocolError?.(`seq gap: ${this.lastSeq} -> ${msg.seq}`);
    }
    this.lastSeq = msg.seq;
    switch (msg.kind) {
      case "hello": {
        const hello = msg.payload as HelloPayload;
        if (isTickState(hello?.state)) this.latestState = hello.state;
        this.hooks.onHello?.(hello);
        break;
      }
      case "tick_state":
        if (isTickState(msg.payload)) {
          this.latestState = msg.payload;
          this.hooks.onTickState?.(msg.payload);
        } else {
          this.hooks.onProtocolError?.("malformed tick_state payload");
        }
        break;
      case "trial_event":
        this.hooks.onTrialEvent?.(msg.payload as TrialEventPayload);
        break;
      case "session_summary":
        if (isSessionSummary(msg.payload)) this.hooks.onSummary?.(msg.payload);
        else this.hooks.onProtocolError?.("malformed session_summary payload");
        break;
      case "session_start":
      case "error":
        break;
    }
  }

  /**
   * Publish the cursor (world meters). Throttled to the send budget; while
   * disconnected it drops silently. Returns true when a frame went out.
   */
  publishCursor(world: Vec, nowMs: number = Date.now()): boolean {
    this.lastCursor = world;
    if (!this.connected || this.socket === null) return false;
    if (nowMs - this.lastSendAt < this.minSendIntervalMs) return false;
    this.sendCursor(world, nowMs);
    return true;
  }

  /**
   * Heartbeat hook, call at >= 10 Hz: re-sends the last cursor when nothing
   * has gone out for a heartbeat interval, so a stationary cursor still
   * feeds the service's stale-input guard.
   */
  heartbeat(nowMs: number = Date.now()): boolean {
    if (
      this.lastCursor === null ||
      !this.connected ||
      this.socket === null ||
      nowMs - this.lastSendAt < this.heartbeatIntervalMs
    ) {
      return false;
    }
    this.sendCursor(this.lastCursor, nowMs);
    return true;
  }

  private sendCursor(world: Vec, nowMs: number): void {
    this.socket!.send(JSON.stringify({ kind: "input", payload: { cursor: world } }));
    this.lastSendAt = nowMs;
  }

  submitTlx(payload: { ratings: number[]; pairs: string[] }): void {
    if (!this.connected || this.socket === null) {
      throw new Error("not connected");
    }
    this.socket.send(JSON.stringify({ kind: "tlx_submit", payload }));
  }
}
