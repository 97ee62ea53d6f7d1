/** Boxplot panel layout: pure geometry over report statistics. The numbers
 *  come straight from the comparison report; nothing is recomputed here. */

import type { BoxRow, ComparisonReport, ImpactFieldRef } from "./api.js";

export interface BoxGeometry {
  modelId: string;
  parameter: string;
  x: number;
  width: number;
  boxTop: number; // y of q3
  boxBottom: number; // y of q1
  medianY: number;
  whiskerLoY: number;
  whiskerHiY: number;
  outlierYs: number[];
}

/** Value range of the axis; the outlier toggle widens it to include them. */
export function valueAxisRange(report: ComparisonReport, includeOutliers: boolean): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const model of report.models) {
    for (const name of report.parameters) {
      const row = model.stats[name];
      lo = Math.min(lo, row.whisker_lo);
      hi = Math.max(hi, row.whisker_hi);
      if (includeOutliers) {
        for (const o of row.outliers) {
          lo = Math.min(lo, o);
          hi = Math.max(hi, o);
        }
      }
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) return [0, 1];
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

export function layoutBoxes(
  report: ComparisonReport,
  width: number,
  height: number,
  includeOutliers: boolean,
): BoxGeometry[] {
  const [lo, hi] = valueAxisRange(report, includeOutliers);
  const toY = (v: number) => height * (1 - (v - lo) / (hi - lo));

  const groups = report.parameters.length;
  const perGroup = report.models.length;
  const groupWidth = width / Math.max(groups, 1);
  const boxWidth = (0.8 * groupWidth) / Math.max(perGroup, 1);

  const out: BoxGeometry[] = [];
  report.parameters.forEach((parameter, g) => {
    report.models.forEach((model, m) => {
      const row: BoxRow = model.stats[parameter];
      const x = g * groupWidth + 0.1 * groupWidth + m * boxWidth;
      out.push({
        modelId: model.model_id,
        parameter,
        x,
        width: boxWidth,
        boxTop: toY(row.q3),
        boxBottom: toY(row.q1),
        medianY: toY(row.median),
        whiskerLoY: toY(row.whisker_lo),
        whiskerHiY: toY(row.whisker_hi),
        outlierYs: includeOutliers ? row.outliers.map(toY) : [],
      });
    });
  });
  return out;
}

/** Which box was clicked, if any (x/y in panel coordinates). */
export function hitTest(boxes: BoxGeometry[], x: number, y: number): BoxGeometry | null {
  for (const box of boxes) {
    const within = x >= box.x && x <= box.x + box.width && y >= box.whiskerHiY && y <= box.whiskerLoY;
    if (within) return box;
  }
  return null;
}

/** Impact field matching a clicked box; outlier mode loads the full span. */
export function impactFieldFor(
  whisker: ImpactFieldRef[],
  fullSpan: ImpactFieldRef[],
  modelId: string,
  parameter: string,
  outlierMode: boolean,
): ImpactFieldRef | undefined {
  const pool = outlierMode ? fullSpan : whisker;
  return pool.find((ref) => ref.model_id === modelId && ref.parameter === parameter);
}
