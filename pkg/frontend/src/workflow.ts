/** The professor workflow: train new (or reuse) then score.
 *
 * Both CSV files are validated client-side before any network call.
 * Train jobs are polled every 2 seconds with gentle backoff while the
 * learning curve grows; a failed or aborted-out run surfaces its error
 * inline. On completion the test CSV is uploaded, the score job polled,
 * and the score table plus download link handed to the caller.
 */

import { ApiClient, ApiError } from "./api.js";
import type { CurvePoint, Job, ScoreRow, TrainResult } from "./api.js";
import { validateCsvHeader } from "./csv.js";
import type { UiSession } from "./session.js";

export interface WorkflowEvents {
  onStatus?(message: string): void;
  onError?(message: string): void;
  onCurve?(points: CurvePoint[], job: Job): void;
  onTrainFinished?(result: TrainResult): void;
  onScoreTable?(rows: ScoreRow[], downloadUrl: string): void;
}

export interface PollingOptions {
  intervalMs?: number;
  backoffFactor?: number;
  maxIntervalMs?: number;
  sleep?(ms: number): Promise<void>;
}

export interface TrainAndScoreRequest {
  datasetName: string;
  scoreMax: number;
  trainNew: boolean;
  trainCsv?: string;
  testCsv: string;
  pipeline?: string;
}

export interface WorkflowOutcome {
  trained: boolean;
  scoreJobId: string | null;
  rows: ScoreRow[] | null;
}

const realSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.detail;
  return error instanceof Error ? error.message : String(error);
}

async function pollUntilSettled(
  client: ApiClient,
  jobId: string,
  events: WorkflowEvents,
  options: PollingOptions,
): Promise<Job> {
  const sleep = options.sleep ?? realSleep;
  const backoff = options.backoffFactor ?? 1.5;
  const cap = options.maxIntervalMs ?? 10_000;
  let interval = options.intervalMs ?? 2_000;
  for (;;) {
    const job = await client.getJob(jobId);
    if (job.kind === "train" && job.curve) {
      events.onCurve?.(job.curve, job);
    }
    if (job.state === "done" || job.state === "failed") {
      return job;
    }
    await sleep(interval);
    interval = Math.min(interval * backoff, cap);
  }
}

async function ensureDataset(client: ApiClient, name: string, scoreMax: number): Promise<void> {
  try {
    await client.createDataset(name, scoreMax);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) return; // already registered
    throw error;
  }
}

export async function trainAndScore(
  client: ApiClient,
  session: UiSession,
  request: TrainAndScoreRequest,
  events: WorkflowEvents = {},
  options: PollingOptions = {},
): Promise<WorkflowOutcome> {
  // reject bad files before any network traffic
  if (request.trainNew) {
    if (request.trainCsv === undefined) {
      events.onError?.("select a training CSV or switch to reusing the trained model");
      return { trained: false, scoreJobId: null, rows: null };
    }
    const check = validateCsvHeader(request.trainCsv, "train");
    if (!check.ok) {
      events.onError?.(check.error ?? "invalid training CSV");
      return { trained: false, scoreJobId: null, rows: null };
    }
  }
  const testCheck = validateCsvHeader(request.testCsv, "test");
  if (!testCheck.ok) {
    events.onError?.(testCheck.error ?? "invalid test CSV");
    return { trained: false, scoreJobId: null, rows: null };
  }

  session.dataset = request.datasetName;
  let trained = false;

  if (request.trainNew) {
    try {
      await ensureDataset(client, request.datasetName, request.scoreMax);
      events.onStatus?.(`training on dataset "${request.datasetName}"…`);
      session.trainActive = true;
      const job = await client.startTrain(
        request.datasetName,
        new Blob([request.trainCsv as string], { type: "text/csv" }),
        request.pipeline ?? "head",
      );
      session.trainJobId = job.id;
      const finished = await pollUntilSettled(client, job.id, events, options);
      if (finished.state === "failed") {
        events.onError?.(finished.error ?? "training failed");
        return { trained: false, scoreJobId: null, rows: null };
      }
      trained = true;
      events.onTrainFinished?.(finished.result);
      events.onStatus?.("training finished; scoring the test file…");
    } catch (error) {
      events.onError?.(describe(error));
      return { trained: false, scoreJobId: null, rows: null };
    } finally {
      session.trainActive = false;
    }
  } else {
    events.onStatus?.(`reusing the trained model of "${request.datasetName}"…`);
  }

  try {
    const job = await client.startScore(
      request.datasetName,
      new Blob([request.testCsv], { type: "text/csv" }),
    );
    session.scoreJobId = job.id;
    const finished = await pollUntilSettled(client, job.id, events, options);
    if (finished.state === "failed") {
      events.onError?.(finished.error ?? "scoring failed");
      return { trained, scoreJobId: job.id, rows: null };
    }
    const { rows } = await client.getResults(request.datasetName, job.id);
    session.scoreRows = rows;
    events.onScoreTable?.(rows, client.resultsCsvUrl(request.datasetName, job.id));
    events.onStatus?.(`scored ${rows.length} answers`);
    return { trained, scoreJobId: job.id, rows };
  } catch (error) {
    events.onError?.(describe(error));
    return { trained, scoreJobId: null, rows: null };
  }
}
