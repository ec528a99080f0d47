/** Tiny HTML-string helpers shared by the view renderers. */

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Scores render with 4 decimal places, like the downloadable CSV. */
export function formatScore(value: number): string {
  return value.toFixed(4);
}

export function formatMetric(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "–";
  return value.toFixed(4);
}
