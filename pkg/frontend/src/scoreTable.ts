/** The scored-answers table plus the CSV download link.
 *
 * Every rendered number comes straight from a service response field;
 * the UI holds no truth of its own.
 */

import type { ScoreRow } from "./api.js";
import { escapeHtml, formatScore } from "./render.js";

export function renderScoreTable(rows: ScoreRow[], downloadUrl: string): string {
  if (rows.length === 0) {
    return '<p class="empty-state">No rows were scored.</p>';
  }
  const body = rows
    .map(
      (row) => `<tr>
  <td>${escapeHtml(row.id)}</td>
  <td>${escapeHtml(row.question_id)}</td>
  <td>${escapeHtml(row.student_answer)}</td>
  <td>${escapeHtml(row.reference_answer)}</td>
  <td class="score">${formatScore(row.score)}</td>
</tr>`,
    )
    .join("\n");
  return `<div class="score-table">
<p><a class="download-link" href="${escapeHtml(downloadUrl)}" download>Download scores as CSV</a></p>
<table>
<thead><tr><th>id</th><th>question</th><th>student answer</th><th>reference answer</th><th>score</th></tr></thead>
<tbody>
${body}
</tbody>
</table>
<p class="row-count">${rows.length} answers scored</p>
</div>`;
}
