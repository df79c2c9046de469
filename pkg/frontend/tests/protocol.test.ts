import { describe, expect, it } from "vitest";

import { isSessionSummary, isTickState, parseServerMessage } from "../src/protocol.js";

const TICK = {
  point: { position: [0.1, 0.0], velocity: [0.0, 0.0] },
  target: { center: [0.15, 0], width: 0.02 },
  obstacle: [
    [0.075, -0.02],
    [0.075, 0.02],
  ],
  phase: "moving",
  robot_force: [0, 0],
};

describe("parseServerMessage", () => {
  it("accepts a well-formed frame", () => {
    const raw = JSON.stringify({ kind: "tick_state", seq: 3, t: 1.25, payload: TICK });
    const msg = parseServerMessage(raw);
    expect(msg).not.toBeNull();
    expect(msg!.kind).toBe("tick_state");
    expect(msg!.seq).toBe(3);
  });

  it("rejects malformed JSON and unknown kinds", () => {
    expect(parseServerMessage("{not json")).toBeNull();
    expect(parseServerMessage(JSON.stringify({ kind: "nope", seq: 1, t: 0, payload: {} }))).toBeNull();
    expect(parseServerMessage(JSON.stringify({ kind: "tick_state", t: 0, payload: {} }))).toBeNull();
  });
});

describe("payload guards", () => {
  it("accepts valid tick state", () => {
    expect(isTickState(TICK)).toBe(true);
    expect(isTickState({ ...TICK, target: null, obstacle: null })).toBe(true);
  });

  it("rejects missing or non-finite fields", () => {
    expect(isTickState({ ...TICK, point: { position: [NaN, 0], velocity: [0, 0] } })).toBe(false);
    expect(isTickState({ ...TICK, robot_force: [0] })).toBe(false);
    expect(isTickState({ ...TICK, phase: 7 })).toBe(false);
    expect(isTickState(null)).toBe(false);
  });

  it("validates session summaries", () => {
    expect(
      isSessionSummary({
        mode: "individual",
        trial_count: 45,
        success_count: 43,
        collision_count: 2,
        collisions: "2/45",
        mean_ip: 2.1,
        per_condition_mt: {},
        tlx_total: null,
      }),
    ).toBe(true);
    expect(isSessionSummary({ mode: "x" })).toBe(false);
  });
});
