/** Typed client for the field-interpolation service. All numerics shown in
 *  the UI come from these responses; nothing is recomputed client-side. */

export interface MeshInfo {
  id: string;
  mesh_id: string;
  vertex_count: number;
  triangle_count: number;
}

export interface InterpolateResponse {
  field: number[];
  elapsed_ms: number;
  within_bounds: boolean;
}

export interface BoxRow {
  q1: number;
  median: number;
  q3: number;
  whisker_lo: number;
  whisker_hi: number;
  outliers: number[];
  count: number;
}

export interface ModelStats {
  model_id: string;
  relative: boolean;
  stats: Record<string, BoxRow>;
}

export interface ComparisonReport {
  parameters: string[];
  models: ModelStats[];
}

export interface ImpactFieldRef {
  field_id: string;
  model_id: string;
  parameter: string;
  kind: string;
  span: [number, number];
}

export interface CompareResponse {
  report_id: string;
  comparison: ComparisonReport;
  impact_fields: ImpactFieldRef[];
  full_span_fields: ImpactFieldRef[];
}

export interface ArtifactEntry {
  id: string;
  kind: string;
  created_at: number;
  meta: Record<string, unknown>;
}

export interface ArtifactsResponse {
  artifacts: ArtifactEntry[];
  session: Record<string, unknown>;
}

export interface TrainProgress {
  model_id: string;
  status: "queued" | "running" | "done" | "failed";
  epoch: number;
  epochs: number;
  loss: number | null;
  error: string | null;
}

export type FetchLike = typeof fetch;

export class ApiError extends Error {
  constructor(public readonly status: number, detail: string) {
    super(`service error ${status}: ${detail}`);
  }
}

export class PrevisClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createMesh(nx: number, ny: number, width: number, height: number): Promise<MeshInfo> {
    return this.post("/meshes", { nx, ny, width, height });
  }

  createEnsemble(
    meshId: string,
    design: { kind: "factorial3" | "lhs"; n_samples?: number; seed?: number },
  ): Promise<{ id: string; rows: number; kind: string }> {
    return this.post("/ensembles", { mesh_id: meshId, design });
  }

  createBasis(ensembleId: string, k = 10): Promise<{ id: string; k: number; explained_variance: number }> {
    return this.post("/bases", { ensemble_id: ensembleId, k });
  }

  trainModel(
    ensembleId: string,
    kind: "olff" | "gcn",
    options: { epochs?: number; lr?: number; mu?: number; fc?: number; seed?: number } = {},
  ): Promise<{ model_id: string; status: string }> {
    const { epochs, lr, seed, ...arch } = options;
    return this.post("/models/train", {
      ensemble_id: ensembleId,
      kind,
      optimizer: { epochs, lr, seed },
      seed,
      ...arch,
    });
  }

  trainProgress(modelId: string): Promise<TrainProgress> {
    return this.request(`/models/${modelId}/progress`);
  }

  /** Poll until a queued training job finishes (or fails). */
  async waitForModel(modelId: string, timeoutMs = 300_000, pollMs = 100): Promise<TrainProgress> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const progress = await this.trainProgress(modelId);
      if (progress.status === "done") return progress;
      if (progress.status === "failed") throw new Error(`training failed: ${progress.error}`);
      if (Date.now() > deadline) throw new Error(`training ${modelId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }

  interpolate(basisId: string, params: number[]): Promise<InterpolateResponse> {
    return this.post("/interpolate", { basis_id: basisId, params });
  }

  compare(modelIds: string[], testEnsembleId: string): Promise<CompareResponse> {
    return this.post("/compare", { model_ids: modelIds, test_ensemble_id: testEnsembleId });
  }

  fieldValues(fieldId: string): Promise<{ values: number[]; model_id: string; parameter: string; kind: string }> {
    return this.request(`/fields/${fieldId}?format=json`);
  }

  artifacts(): Promise<ArtifactsResponse> {
    return this.request("/artifacts");
  }
}
