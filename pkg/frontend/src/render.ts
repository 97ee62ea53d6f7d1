/** Rasterize a per-vertex scalar field on the regular plate grid.
 *
 *  Plate vertices are row-major (vertex = iy * nx + ix), so a field maps
 *  1:1 onto an nx-by-ny pixel buffer; the canvas layer upscales it with
 *  smoothing for display. DOM-free so it is unit-testable.
 */

import { colorize, type Scheme } from "./colormap.js";

export interface GridSpec {
  nx: number;
  ny: number;
}

export interface RasterizedField {
  rgba: Uint8ClampedArray<ArrayBuffer>; // nx * ny * 4, row-major, opaque
  width: number;
  height: number;
}

export function rasterizeGridField(
  values: ArrayLike<number>,
  grid: GridSpec,
  range: [number, number],
  scheme: Scheme,
): RasterizedField {
  if (grid.nx < 2 || grid.ny < 2) throw new Error("grid must be at least 2x2");
  if (values.length !== grid.nx * grid.ny) {
    throw new Error(`field length ${values.length} does not match ${grid.nx}x${grid.ny} grid`);
  }
  return { rgba: colorize(values, range, scheme), width: grid.nx, height: grid.ny };
}

/** Constant fields must render a single uniform color. */
export function isUniform(image: RasterizedField): boolean {
  const [r, g, b] = [image.rgba[0], image.rgba[1], image.rgba[2]];
  for (let i = 4; i < image.rgba.length; i += 4) {
    if (image.rgba[i] !== r || image.rgba[i + 1] !== g || image.rgba[i + 2] !== b) return false;
  }
  return true;
}
