/** Color mapping for per-vertex fields. Diverging (blue-white-red) is
 *  centered at 0 mm for signed difference views; sequential (white-violet)
 *  suits raw magnitudes. Side-by-side views must share one range. */

export type Scheme = "diverging" | "sequential";

export type Rgb = [number, number, number];

const clamp01 = (t: number) => Math.min(1, Math.max(0, t));

export function divergingColor(t: number): Rgb {
  // t in [0, 1]; 0 -> blue, 0.5 -> white, 1 -> red
  const s = clamp01(t);
  if (s < 0.5) {
    const u = s / 0.5;
    return [Math.round(59 + (255 - 59) * u), Math.round(76 + (255 - 76) * u), Math.round(192 + (255 - 192) * u)];
  }
  const u = (s - 0.5) / 0.5;
  return [Math.round(255 - (255 - 180) * u), Math.round(255 - (255 - 4) * u), Math.round(255 - (255 - 38) * u)];
}

export function sequentialColor(t: number): Rgb {
  const s = clamp01(t);
  return [Math.round(255 - (255 - 84) * s), Math.round(255 - (255 - 39) * s), Math.round(255 - (255 - 143) * s)];
}

/** One shared range across several fields so colors are comparable.
 *  Diverging ranges are symmetric about 0. */
export function sharedRange(fields: ArrayLike<number>[], scheme: Scheme): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const field of fields) {
    for (let i = 0; i < field.length; i++) {
      const v = field[i];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (scheme === "diverging") {
    const extent = Math.max(Math.abs(lo), Math.abs(hi), 1e-12);
    return [-extent, extent];
  }
  if (lo === hi) return [lo, lo + 1e-12];
  return [lo, hi];
}

/** Map field values to RGBA bytes (opaque) under a fixed range. */
export function colorize(values: ArrayLike<number>, range: [number, number], scheme: Scheme): Uint8ClampedArray<ArrayBuffer> {
  const [lo, hi] = range;
  const width = hi - lo;
  if (!(width > 0)) throw new Error("colormap range must have lo < hi");
  const pick = scheme === "diverging" ? divergingColor : sequentialColor;
  const out = new Uint8ClampedArray(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    const [r, g, b] = pick((values[i] - lo) / width);
    out[4 * i] = r;
    out[4 * i + 1] = g;
    out[4 * i + 2] = b;
    out[4 * i + 3] = 255;
  }
  return out;
}

export function legendTicks(range: [number, number], count = 5): number[] {
  const [lo, hi] = range;
  const ticks: number[] = [];
  for (let i = 0; i < count; i++) ticks.push(lo + ((hi - lo) * i) / (count - 1));
  return ticks;
}
