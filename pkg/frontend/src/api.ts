/** Typed client for the grading service's /api/v1 surface.
 *
 * The fetch implementation is injectable so tests can run the whole UI
 * workflow against an in-memory mock service.
 */

export interface DatasetModelInfo {
  pipeline: string;
  job_id: string;
  trained_at: string;
}

export interface DatasetRecord {
  name: string;
  score_max: number;
  created_at: string;
  model: DatasetModelInfo | null;
  runs: Record<string, unknown>[];
}

export interface CurvePoint {
  attempt: number;
  epoch: number;
  train_loss: number;
  val_loss: number;
  val_rmse_scaled: number;
  val_pearson: number | null;
}

export interface JobProgress {
  epochs_done?: number;
  total_epochs?: number;
  attempt?: number;
}

export interface TrainResult {
  accepted?: boolean;
  chosen_attempt?: number;
  chosen_epoch?: number;
  val_pearson?: number | null;
  val_rmse_scaled?: number;
  pipeline?: string;
  [key: string]: unknown;
}

export interface Job {
  id: string;
  kind: "train" | "score";
  dataset: string;
  state: "queued" | "running" | "done" | "failed";
  progress: JobProgress;
  error: string | null;
  result: TrainResult;
  curve?: CurvePoint[];
}

export interface ScoreRow {
  id: string;
  question_id: string;
  question_text: string;
  reference_answer: string;
  student_answer: string;
  score: number;
}

export type PivotBy = "question_id" | "reference_answer";
export type PivotAgg = "mean" | "min" | "max" | "count";

export interface PivotGroup {
  key: string;
  count: number;
  value: number;
}

export interface PivotResponse {
  by: PivotBy;
  agg: PivotAgg;
  groups: PivotGroup[];
  totals: { count: number; value: number | null };
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
    else if (body.detail !== undefined) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  listDatasets(): Promise<{ datasets: DatasetRecord[] }> {
    return this.json("/datasets");
  }

  getDataset(name: string): Promise<DatasetRecord> {
    return this.json(`/datasets/${encodeURIComponent(name)}`);
  }

  createDataset(name: string, scoreMax: number): Promise<DatasetRecord> {
    return this.json("/datasets", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, score_max: scoreMax }),
    });
  }

  private upload(path: string, file: File | Blob, filename: string): Promise<Job> {
    const body = new FormData();
    body.append("file", file, filename);
    return this.json(path, { method: "POST", body });
  }

  startTrain(name: string, file: File | Blob, pipeline = "head"): Promise<Job> {
    const query = pipeline === "head" ? "" : `?pipeline=${encodeURIComponent(pipeline)}`;
    return this.upload(`/datasets/${encodeURIComponent(name)}/train${query}`, file, "train.csv");
  }

  startScore(name: string, file: File | Blob): Promise<Job> {
    return this.upload(`/datasets/${encodeURIComponent(name)}/score`, file, "test.csv");
  }

  getJob(id: string): Promise<Job> {
    return this.json(`/jobs/${encodeURIComponent(id)}`);
  }

  getResults(name: string, jobId: string): Promise<{ rows: ScoreRow[] }> {
    return this.json(`/datasets/${encodeURIComponent(name)}/results/${encodeURIComponent(jobId)}`);
  }

  resultsCsvUrl(name: string, jobId: string): string {
    return `${this.base}/datasets/${encodeURIComponent(name)}/results/${encodeURIComponent(jobId)}/csv`;
  }

  getPivot(name: string, jobId: string, by: PivotBy, agg: PivotAgg): Promise<PivotResponse> {
    const params = new URLSearchParams({ job: jobId, by, agg });
    return this.json(`/datasets/${encodeURIComponent(name)}/pivot?${params}`);
  }
}
