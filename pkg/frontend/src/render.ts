/** Canvas drawing of a built scene (kept trivially thin: all geometry was
 * decided in buildScene, which is what the tests cover). */

import type { SceneItem } from "./scene.js";

export function drawScene(
  ctx: CanvasRenderingContext2D,
  items: SceneItem[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#e8e8e8";
  ctx.fillRect(0, 0, width, height);
  for (const item of items) {
    if (item.kind === "line") {
      ctx.strokeStyle = item.color;
      ctx.lineWidth = item.width;
      ctx.beginPath();
      ctx.moveTo(item.x1, item.y1);
      ctx.lineTo(item.x2, item.y2);
      ctx.stroke();
    } else {
      ctx.fillStyle = item.fill;
      ctx.beginPath();
      ctx.arc(item.x, item.y, item.r, 0, 2 * Math.PI);
      ctx.fill();
      if (item.stroke) {
        ctx.strokeStyle = item.stroke;
        ctx.lineWidth = 1.5;
        ctx.stroke();
      }
    }
  }
}
