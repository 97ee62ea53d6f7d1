/** Browser wiring: sliders, 3D-domain canvas, linked boxplot panel.
 *
 *  All numerics arrive from the service; this layer only routes requests and
 *  paints responses. State lives in the URL fragment so sessions can be
 *  shared by copying the address.
 */

import { PrevisClient, type CompareResponse } from "./api.js";
import { impactFieldFor, hitTest, layoutBoxes, type BoxGeometry } from "./boxplot.js";
import { legendTicks, sharedRange, type Scheme } from "./colormap.js";
import { rasterizeGridField, type GridSpec } from "./render.js";
import { SliderScheduler } from "./scheduler.js";
import { clampSliders, decodeState, encodeState, type ViewState } from "./state.js";

const PARAM_NAMES = ["Hinge_X", "Hinge_Y", "Lock_L", "Lock_R", "Buffer_L", "Buffer_R"];

interface AppContext {
  client: PrevisClient;
  grid: GridSpec;
  state: ViewState;
  compare: CompareResponse | null;
  boxes: BoxGeometry[];
}

function paintField(canvas: HTMLCanvasElement, values: number[], grid: GridSpec, range: [number, number], scheme: Scheme): void {
  const image = rasterizeGridField(values, grid, range, scheme);
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const offscreen = new OffscreenCanvas(image.width, image.height);
  const octx = offscreen.getContext("2d");
  if (!octx) return;
  octx.putImageData(new ImageData(image.rgba, image.width, image.height), 0, 0);
  ctx.imageSmoothingEnabled = true;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  // flip vertically: grid row 0 is the bottom of the plate
  ctx.save();
  ctx.scale(1, -1);
  ctx.drawImage(offscreen, 0, -canvas.height, canvas.width, canvas.height);
  ctx.restore();
}

function paintLegend(element: HTMLElement, range: [number, number]): void {
  element.textContent = legendTicks(range)
    .map((v) => `${v.toFixed(3)} mm`)
    .join("  |  ");
}

function showError(message: string): void {
  const banner = document.getElementById("error-banner");
  if (banner) {
    banner.textContent = message;
    banner.classList.add("visible");
    setTimeout(() => banner.classList.remove("visible"), 4000);
  }
}

function syncFragment(state: ViewState): void {
  window.history.replaceState(null, "", `#${encodeState(state)}`);
}

export async function startApp(): Promise<void> {
  const client = new PrevisClient("");
  const artifacts = await client.artifacts();
  const meshEntry = artifacts.artifacts.find((a) => a.kind === "mesh");
  const basisEntry = artifacts.artifacts.find((a) => a.kind === "basis");
  const ensembleEntry = artifacts.artifacts.find((a) => a.kind === "ensemble");
  if (!meshEntry || !basisEntry) {
    showError("store has no mesh/basis artifacts; run the pipeline first");
    return;
  }
  const grid: GridSpec = {
    nx: Number(meshEntry.meta.nx),
    ny: Number(meshEntry.meta.ny),
  };

  const context: AppContext = {
    client,
    grid,
    state: decodeState(window.location.hash, PARAM_NAMES.length),
    compare: null,
    boxes: [],
  };
  if (!context.state.basisId) context.state.basisId = basisEntry.id;

  const fieldCanvas = document.getElementById("field-view") as HTMLCanvasElement;
  const legend = document.getElementById("legend") as HTMLElement;
  const status = document.getElementById("status") as HTMLElement;

  const scheduler = new SliderScheduler<number[], { field: number[]; elapsed_ms: number }>(
    50,
    (params) => client.interpolate(context.state.basisId as string, params),
    (response) => {
      const range = sharedRange([response.field], "sequential");
      paintField(fieldCanvas, response.field, grid, range, "sequential");
      paintLegend(legend, range);
      status.textContent = `interpolated in ${response.elapsed_ms.toFixed(1)} ms`;
    },
    (error) => showError(String(error)),
  );

  const sliderBox = document.getElementById("sliders") as HTMLElement;
  PARAM_NAMES.forEach((name, index) => {
    const label = document.createElement("label");
    label.textContent = `${name} (mm)`;
    const input = document.createElement("input");
    input.type = "range";
    input.min = "-1";
    input.max = "1";
    input.step = "0.01";
    input.value = String(context.state.sliders[index]);
    input.addEventListener("input", () => {
      context.state.sliders[index] = Number(input.value);
      context.state.sliders = clampSliders(context.state.sliders);
      syncFragment(context.state);
      scheduler.schedule([...context.state.sliders]);
    });
    label.appendChild(input);
    sliderBox.appendChild(label);
  });

  const boxplotCanvas = document.getElementById("boxplot-view") as HTMLCanvasElement;
  const outlierToggle = document.getElementById("outlier-toggle") as HTMLInputElement;

  async function loadImpact(box: BoxGeometry): Promise<void> {
    if (!context.compare) return;
    const ref = impactFieldFor(
      context.compare.impact_fields,
      context.compare.full_span_fields,
      box.modelId,
      box.parameter,
      outlierToggle.checked,
    );
    if (!ref) return;
    try {
      const payload = await context.client.fieldValues(ref.field_id);
      const range = sharedRange([payload.values], "sequential");
      paintField(fieldCanvas, payload.values, context.grid, range, "sequential");
      paintLegend(legend, range);
      status.textContent = `${ref.model_id} / ${ref.parameter} (${ref.kind})`;
    } catch (error) {
      showError(String(error));
    }
  }

  function paintBoxplots(): void {
    if (!context.compare) return;
    const ctx = boxplotCanvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, boxplotCanvas.width, boxplotCanvas.height);
    context.boxes = layoutBoxes(
      context.compare.comparison,
      boxplotCanvas.width,
      boxplotCanvas.height,
      outlierToggle.checked,
    );
    const palette = ["#3a6fb7", "#b73a3a", "#3ab76f"];
    context.boxes.forEach((box, i) => {
      ctx.strokeStyle = palette[i % context.compare!.comparison.models.length];
      ctx.strokeRect(box.x, box.boxTop, box.width, box.boxBottom - box.boxTop);
      ctx.beginPath();
      ctx.moveTo(box.x, box.medianY);
      ctx.lineTo(box.x + box.width, box.medianY);
      ctx.stroke();
      const mid = box.x + box.width / 2;
      ctx.beginPath();
      ctx.moveTo(mid, box.boxTop);
      ctx.lineTo(mid, box.whiskerHiY);
      ctx.moveTo(mid, box.boxBottom);
      ctx.lineTo(mid, box.whiskerLoY);
      ctx.stroke();
      for (const y of box.outlierYs) {
        ctx.beginPath();
        ctx.arc(mid, y, 2, 0, 2 * Math.PI);
        ctx.stroke();
      }
    });
  }

  boxplotCanvas.addEventListener("click", (event) => {
    const rect = boxplotCanvas.getBoundingClientRect();
    const hit = hitTest(context.boxes, event.clientX - rect.left, event.clientY - rect.top);
    if (hit) void loadImpact(hit);
  });
  outlierToggle.addEventListener("change", () => {
    context.state.panel = outlierToggle.checked ? "outliers" : "compare";
    syncFragment(context.state);
    paintBoxplots();
  });

  const compareButton = document.getElementById("compare-button") as HTMLButtonElement;
  compareButton.addEventListener("click", async () => {
    const modelEntries = artifacts.artifacts.filter((a) => a.kind === "model");
    if (!ensembleEntry || modelEntries.length === 0) {
      showError("need trained models and a test ensemble");
      return;
    }
    try {
      context.compare = await client.compare(
        modelEntries.map((m) => m.id),
        ensembleEntry.id,
      );
      context.state.modelIds = modelEntries.map((m) => m.id);
      syncFragment(context.state);
      paintBoxplots();
    } catch (error) {
      showError(String(error));
    }
  });

  // initial paint from the fragment's slider state
  scheduler.schedule([...context.state.sliders]);
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.addEventListener("DOMContentLoaded", () => void startApp());
}
