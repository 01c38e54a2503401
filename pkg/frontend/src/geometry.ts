/**
 * Coordinate spaces and the view transform.
 *
 * Three spaces are involved:
 *  - normalized: [0,1] x [0,1], what label files and the API store;
 *  - image: continuous pixels, (0,0) at the top-left corner of pixel (0,0),
 *    so pixel i's centre sits at i + 0.5;
 *  - canvas: CSS pixels on screen, related to image space by a uniform
 *    scale and offset (zoom/pan). The transform is presentation-only;
 *    geometry is stored normalized the moment it is captured.
 */

export interface Point {
  x: number;
  y: number;
}

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const MIN_ZOOM = 0.25;
export const MAX_ZOOM = 8;

export function clamp(v: number, lo: number, hi: number): number {
  return v < lo ? lo : v > hi ? hi : v;
}

export function clamp01(v: number): number {
  return clamp(v, 0, 1);
}

export function imageToCanvas(t: ViewTransform, p: Point): Point {
  return { x: p.x * t.scale + t.offsetX, y: p.y * t.scale + t.offsetY };
}

export function canvasToImage(t: ViewTransform, p: Point): Point {
  return { x: (p.x - t.offsetX) / t.scale, y: (p.y - t.offsetY) / t.scale };
}

export function imageToNormalized(p: Point, width: number, height: number): Point {
  return { x: p.x / width, y: p.y / height };
}

export function normalizedToImage(p: Point, width: number, height: number): Point {
  return { x: p.x * width, y: p.y * height };
}

export function canvasToNormalized(
  t: ViewTransform,
  p: Point,
  width: number,
  height: number,
): Point {
  return imageToNormalized(canvasToImage(t, p), width, height);
}

export function normalizedToCanvas(
  t: ViewTransform,
  p: Point,
  width: number,
  height: number,
): Point {
  return imageToCanvas(t, normalizedToImage(p, width, height));
}

/** Initial transform: fit the image inside the canvas, centred. */
export function fitTransform(
  canvasWidth: number,
  canvasHeight: number,
  imageWidth: number,
  imageHeight: number,
): ViewTransform {
  const scale = Math.min(canvasWidth / imageWidth, canvasHeight / imageHeight);
  return {
    scale,
    offsetX: (canvasWidth - imageWidth * scale) / 2,
    offsetY: (canvasHeight - imageHeight * scale) / 2,
  };
}

/** Zoom by `factor` keeping the canvas point `pivot` fixed on screen. */
export function zoomAround(t: ViewTransform, factor: number, pivot: Point): ViewTransform {
  const scale = clamp(t.scale * factor, MIN_ZOOM, MAX_ZOOM);
  const actual = scale / t.scale;
  return {
    scale,
    offsetX: pivot.x - (pivot.x - t.offsetX) * actual,
    offsetY: pivot.y - (pivot.y - t.offsetY) * actual,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

/** Squared distance helper for vertex hit-testing. */
export function distance2(a: Point, b: Point): number {
  const dx = a.x - b.x;
  const dy = a.y - b.y;
  return dx * dx + dy * dy;
}
