/**
 * Scene building: a pure function of (latest tick state, transform). No
 * client-side physics, no extrapolation; what the service last said is what
 * gets drawn. The display mirrors the task screen: start dot (black), target
 * dot (red), obstacle line (black), controlled point (white, outlined).
 */

import type { TickStatePayload, Vec } from "./protocol.js";
import type { ViewTransform } from "./transform.js";

export type SceneItem =
  | { kind: "dot"; x: number; y: number; r: number; fill: string; stroke?: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; width: number; color: string };

export interface SceneOptions {
  start: Vec;
  startRadius: number; // m
  pointRadius: number; // m
}

export const DEFAULT_SCENE_OPTIONS: SceneOptions = {
  start: [0, 0],
  startRadius: 0.005,
  pointRadius: 0.004,
};

export function buildScene(
  state: TickStatePayload,
  transform: ViewTransform,
  options: SceneOptions = DEFAULT_SCENE_OPTIONS,
): SceneItem[] {
  const items: SceneItem[] = [];

  const [sx, sy] = transform.worldToScreen(options.start);
  items.push({
    kind: "dot",
    x: sx,
    y: sy,
    r: transform.lengthToPixels(options.startRadius),
    fill: "#111",
  });

  if (state.target) {
    const [tx, ty] = transform.worldToScreen(state.target.center);
    items.push({
      kind: "dot",
      x: tx,
      y: ty,
      r: transform.lengthToPixels(state.target.width / 2),
      fill: "#d22",
    });
  }

  if (state.obstacle) {
    const [a, b] = state.obstacle;
    const [ax, ay] = transform.worldToScreen(a);
    const [bx, by] = transform.worldToScreen(b);
    items.push({ kind: "line", x1: ax, y1: ay, x2: bx, y2: by, width: 3, color: "#111" });
  }

  const [px, py] = transform.worldToScreen(state.point.position);
  items.push({
    kind: "dot",
    x: px,
    y: py,
    r: transform.lengthToPixels(options.pointRadius),
    fill: "#fff",
    stroke: "#333",
  });

  return items;
}

/** The controlled point's screen position in a built scene (the last dot). */
export function scenePointPosition(items: SceneItem[]): Vec {
  for (let i = items.length - 1; i >= 0; i--) {
    const item = items[i];
    if (item.kind === "dot") return [item.x, item.y];
  }
  throw new Error("scene has no point dot");
}
