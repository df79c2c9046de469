/**
 * World (meters) to screen (pixels) mapping. One scale for both axes keeps
 * circles circular; y flips so world +y points up on screen. Invertible by
 * construction.
 */

import type { Vec } from "./protocol.js";

export class ViewTransform {
  /** @param scale pixels per meter (> 0) */
  constructor(
    public readonly scale: number,
    public readonly originX: number,
    public readonly originY: number,
  ) {
    if (!(scale > 0) || !Number.isFinite(scale)) {
      throw new Error(`scale must be a positive number, got ${scale}`);
    }
    if (!Number.isFinite(originX) || !Number.isFinite(originY)) {
      throw new Error("origin must be finite");
    }
  }

  worldToScreen([x, y]: Vec): Vec {
    return [this.originX + this.scale * x, this.originY - this.scale * y];
  }

  screenToWorld([px, py]: Vec): Vec {
    return [(px - this.originX) / this.scale, (this.originY - py) / this.scale];
  }

  /** Lengths scale uniformly (aspect preserved). */
  lengthToPixels(meters: number): number {
    return this.scale * meters;
  }
}

/** Transform that centers a workspace box on the canvas. */
export function fitWorkspace(
  canvasWidth: number,
  canvasHeight: number,
  worldCenter: Vec,
  worldSpan: number,
): ViewTransform {
  const scale = Math.min(canvasWidth, canvasHeight) / worldSpan;
  return new ViewTransform(
    scale,
    canvasWidth / 2 - scale * worldCenter[0],
    canvasHeight / 2 + scale * worldCenter[1],
  );
}
