/** Pivot-table rendering: grouped aggregates with a totals row. */

import type { PivotResponse } from "./api.js";
import { escapeHtml } from "./render.js";

function formatValue(agg: string, value: number | null): string {
  if (value === null) return "–";
  return agg === "count" ? String(value) : value.toFixed(4);
}

export function renderPivot(pivot: PivotResponse): string {
  if (pivot.groups.length === 0) {
    return '<p class="empty-state">No scored rows yet – run a scoring job first.</p>';
  }
  const rows = pivot.groups
    .map(
      (group) => `<tr>
  <td>${escapeHtml(group.key)}</td>
  <td>${group.count}</td>
  <td>${formatValue(pivot.agg, group.value)}</td>
</tr>`,
    )
    .join("\n");
  return `<table class="pivot-table">
<thead><tr><th>${escapeHtml(pivot.by)}</th><th>count</th><th>${escapeHtml(pivot.agg)}</th></tr></thead>
<tbody>
${rows}
</tbody>
<tfoot>
<tr class="totals"><td>Totals</td><td>${pivot.totals.count}</td><td>${formatValue(
    pivot.agg,
    pivot.totals.value,
  )}</td></tr>
</tfoot>
</table>`;
}
