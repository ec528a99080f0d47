/** Browser bootstrap: wires DOM controls to the workflow and renderers.
 *
 * All logic lives in the imported modules; this file only moves strings
 * between the DOM and the typed API.
 */

import { ApiClient } from "./api.js";
import type { CurvePoint, Job, PivotAgg, PivotBy } from "./api.js";
import { renderLearningCurve } from "./curve.js";
import { renderPivot } from "./pivot.js";
import { renderScoreTable } from "./scoreTable.js";
import { newSession } from "./session.js";
import { trainAndScore } from "./workflow.js";

const client = new ApiClient("/api/v1");
const session = newSession();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const datasetInput = el<HTMLInputElement>("dataset-name");
const scoreMaxInput = el<HTMLInputElement>("score-max");
const trainNewToggle = el<HTMLInputElement>("train-new");
const trainFileInput = el<HTMLInputElement>("train-file");
const testFileInput = el<HTMLInputElement>("test-file");
const startButton = el<HTMLButtonElement>("start");
const statusArea = el<HTMLElement>("status");
const errorArea = el<HTMLElement>("error");
const curveArea = el<HTMLElement>("curve");
const tableArea = el<HTMLElement>("table");
const pivotArea = el<HTMLElement>("pivot");
const pivotBySelect = el<HTMLSelectElement>("pivot-by");
const pivotAggSelect = el<HTMLSelectElement>("pivot-agg");
const trainFileRow = el<HTMLElement>("train-file-row");

trainNewToggle.addEventListener("change", () => {
  trainFileRow.style.display = trainNewToggle.checked ? "" : "none";
});

async function readFile(input: HTMLInputElement): Promise<string | undefined> {
  const file = input.files?.[0];
  if (!file) return undefined;
  return file.text();
}

function showCurve(points: CurvePoint[], job: Job): void {
  const aborted = points.length > 0 && job.state === "failed" ? points[points.length - 1]?.epoch : null;
  curveArea.innerHTML = renderLearningCurve(points, {
    chosenEpoch: (job.result?.chosen_epoch as number | undefined) ?? null,
    abortedAtEpoch: aborted ?? null,
  });
}

async function refreshPivot(): Promise<void> {
  if (!session.dataset || !session.scoreJobId) return;
  const pivot = await client.getPivot(
    session.dataset,
    session.scoreJobId,
    pivotBySelect.value as PivotBy,
    pivotAggSelect.value as PivotAgg,
  );
  session.pivotBy = pivot.by;
  session.pivotAgg = pivot.agg;
  pivotArea.innerHTML = renderPivot(pivot);
}

pivotBySelect.addEventListener("change", () => void refreshPivot());
pivotAggSelect.addEventListener("change", () => void refreshPivot());

startButton.addEventListener("click", async () => {
  errorArea.textContent = "";
  tableArea.innerHTML = "";
  pivotArea.innerHTML = "";
  startButton.disabled = true;
  try {
    const trainCsv = trainNewToggle.checked ? await readFile(trainFileInput) : undefined;
    const testCsv = await readFile(testFileInput);
    if (testCsv === undefined) {
      errorArea.textContent = "select a test CSV to score";
      return;
    }
    const outcome = await trainAndScore(
      client,
      session,
      {
        datasetName: datasetInput.value.trim(),
        scoreMax: Number(scoreMaxInput.value) || 5,
        trainNew: trainNewToggle.checked,
        trainCsv,
        testCsv,
      },
      {
        onStatus: (message) => (statusArea.textContent = message),
        onError: (message) => (errorArea.textContent = message),
        onCurve: showCurve,
        onScoreTable: (rows, url) => (tableArea.innerHTML = renderScoreTable(rows, url)),
      },
    );
    if (outcome.rows) await refreshPivot();
  } finally {
    startButton.disabled = session.trainActive;
  }
});
