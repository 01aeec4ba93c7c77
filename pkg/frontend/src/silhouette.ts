// Silhouette polyline drawing, canvas-context agnostic for testability.

export interface PathSink {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
}

/**
 * Draw a closed unit-perimeter silhouette scaled to fit a box, preserving
 * aspect ratio, deck up.
 */
export function drawSilhouette(
  ctx: PathSink,
  points: number[][],
  width: number,
  height: number,
  pad = 6,
): void {
  if (points.length < 2) return;
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const [x, y] of points) {
    if (x < minX) minX = x;
    if (x > maxX) maxX = x;
    if (y < minY) minY = y;
    if (y > maxY) maxY = y;
  }
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
  const ox = (width - spanX * scale) / 2;
  const oy = (height - spanY * scale) / 2;

  ctx.beginPath();
  points.forEach(([x, y], i) => {
    const px = ox + (x - minX) * scale;
    const py = oy + (y - minY) * scale; // y grows downward in both frames
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.closePath();
  ctx.stroke();
}
