/** Distribution bars and the best-per-dataset table, rendered from bundle
 * fields verbatim: every letter and number shown is a server response value
 * (indices are only reformatted for display, never recomputed).
 */

import { RATING_LETTERS, type BestRow } from "./types.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderDistributions(
  histograms: Record<string, Record<string, number>>,
): string {
  const rows: string[] = [];
  for (const [name, counts] of Object.entries(histograms)) {
    const total = RATING_LETTERS.reduce((sum, letter) => sum + (counts[letter] ?? 0), 0);
    const segments = RATING_LETTERS.filter((letter) => (counts[letter] ?? 0) > 0)
      .map((letter) => {
        const count = counts[letter] ?? 0;
        const share = total > 0 ? (count / total) * 100 : 0;
        return (
          `<span class="segment rating-${letter}" style="width:${share.toFixed(2)}%" ` +
          `title="${letter}: ${count}">${count}</span>`
        );
      })
      .join("");
    rows.push(
      `<div class="dist-row" data-group="${esc(name)}">` +
        `<span class="dist-name">${esc(name)}</span>` +
        `<span class="dist-bar">${segments}</span></div>`,
    );
  }
  return rows.join("");
}

export function renderBestTable(rows: BestRow[], displayed: string[]): string {
  const head =
    "<tr><th>dataset</th><th>method</th><th>compound</th>" +
    displayed.map((key) => `<th>${esc(key)} index</th>`).join("") +
    "</tr>";
  const body = rows
    .map((row) => {
      const cells = displayed
        .map((key) => {
          const cell = row.metrics[key];
          if (!cell) {
            return "<td></td>";
          }
          return (
            `<td><span class="chip rating-${esc(cell.rating)}">${esc(cell.rating)}</span> ` +
            `${cell.index.toFixed(2)}</td>`
          );
        })
        .join("");
      return (
        `<tr data-experiment="${esc(row.experiment)}">` +
        `<td>${esc(row.dataset)}</td><td>${esc(row.method)}</td>` +
        `<td><span class="chip rating-${esc(row.compound)}">${esc(row.compound)}</span></td>` +
        cells +
        "</tr>"
      );
    })
    .join("");
  return `<table class="best-table"><thead>${head}</thead><tbody>${body}</tbody></table>`;
}
