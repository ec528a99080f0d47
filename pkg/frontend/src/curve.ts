/** Learning-curve chart as an inline SVG string.
 *
 * Train and validation loss per epoch, growing live while a train job
 * is polled; the early-stopped (minimum validation loss) epoch gets a
 * marker, and an aborted attempt gets an abort marker at its last
 * epoch.
 */

import type { CurvePoint } from "./api.js";

const WIDTH = 640;
const HEIGHT = 280;
const PAD = 36;

export interface CurveAnnotations {
  chosenEpoch?: number | null;
  abortedAtEpoch?: number | null;
}

function scaleX(epoch: number, maxEpoch: number): number {
  if (maxEpoch <= 1) return PAD;
  return PAD + ((epoch - 1) / (maxEpoch - 1)) * (WIDTH - 2 * PAD);
}

function scaleY(loss: number, maxLoss: number): number {
  if (maxLoss <= 0) return HEIGHT - PAD;
  return HEIGHT - PAD - (loss / maxLoss) * (HEIGHT - 2 * PAD);
}

function polyline(points: CurvePoint[], pick: (p: CurvePoint) => number, maxEpoch: number, maxLoss: number, cls: string): string {
  const coords = points
    .map((p) => `${scaleX(p.epoch, maxEpoch).toFixed(1)},${scaleY(pick(p), maxLoss).toFixed(1)}`)
    .join(" ");
  return `<polyline class="${cls}" fill="none" points="${coords}" />`;
}

export function renderLearningCurve(points: CurvePoint[], annotations: CurveAnnotations = {}): string {
  if (points.length === 0) {
    return '<p class="empty-state">Waiting for the first epoch…</p>';
  }
  const maxEpoch = Math.max(...points.map((p) => p.epoch));
  const maxLoss = Math.max(...points.map((p) => Math.max(p.train_loss, p.val_loss)), 1e-12);

  const parts: string[] = [
    `<svg class="learning-curve" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="learning curves">`,
    `<line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" y2="${HEIGHT - PAD}" />`,
    `<line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${HEIGHT - PAD}" />`,
    polyline(points, (p) => p.train_loss, maxEpoch, maxLoss, "train-loss"),
    polyline(points, (p) => p.val_loss, maxEpoch, maxLoss, "val-loss"),
  ];

  const chosen = annotations.chosenEpoch ?? null;
  if (chosen !== null) {
    const at = points.find((p) => p.epoch === chosen);
    if (at) {
      const x = scaleX(at.epoch, maxEpoch).toFixed(1);
      const y = scaleY(at.val_loss, maxLoss).toFixed(1);
      parts.push(
        `<circle class="chosen-epoch-marker" cx="${x}" cy="${y}" r="6" data-epoch="${chosen}" />`,
        `<text class="chosen-epoch-label" x="${x}" y="${(Number(y) - 10).toFixed(1)}">early stop: epoch ${chosen}</text>`,
      );
    }
  }

  const aborted = annotations.abortedAtEpoch ?? null;
  if (aborted !== null) {
    const x = scaleX(aborted, maxEpoch).toFixed(1);
    parts.push(
      `<line class="abort-marker" x1="${x}" y1="${PAD}" x2="${x}" y2="${HEIGHT - PAD}" data-epoch="${aborted}" />`,
      `<text class="abort-label" x="${x}" y="${PAD - 6}">aborted at epoch ${aborted}</text>`,
    );
  }

  parts.push(
    `<text class="legend train" x="${WIDTH - PAD - 150}" y="${PAD}">train loss</text>`,
    `<text class="legend val" x="${WIDTH - PAD - 150}" y="${PAD + 16}">validation loss</text>`,
    "</svg>",
  );
  return parts.join("\n");
}
