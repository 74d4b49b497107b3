// Pure renderers: data in, HTML string out. The app shell assigns these
// into the document; tests assert on the strings directly.

import type { StatsReport, TravelRecord, VerificationReport } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const RECORD_COLUMNS: Array<[string, (r: TravelRecord) => string]> = [
  ["Passport", (r) => r.passport_number],
  ["Name", (r) => r.name_surname],
  ["Nationality", (r) => r.nationality],
  ["Birthdate", (r) => r.birthdate],
  ["Entry", (r) => (r.entry_date ? `${r.entry_date} @ ${r.entry_gate}` : "")],
  ["Exit", (r) => (r.exit_date ? `${r.exit_date} @ ${r.exit_gate}` : "—")],
  ["Plate", (r) => r.plate || ""],
  ["Blocks", (r) =>
    r.exit_block_index === null
      ? `#${r.entry_block_index}`
      : `#${r.entry_block_index} → #${r.exit_block_index}`],
  ["Status", (r) => r.status],
];

/** One row per logical trip; open trips get a distinguishing class. */
export function renderRecordsTable(records: TravelRecord[]): string {
  if (records.length === 0) {
    return '<p class="empty-state">No travel records on the chain.</p>';
  }
  const head = RECORD_COLUMNS.map(([title]) => `<th>${title}</th>`).join("");
  const body = records
    .map((record) => {
      const cells = RECORD_COLUMNS.map(
        ([, cell]) => `<td>${escapeHtml(cell(record))}</td>`,
      ).join("");
      return `<tr class="trip-${record.status}">${cells}</tr>`;
    })
    .join("");
  return `<table class="records"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderVerifyBanner(report: VerificationReport | null): string {
  if (report === null) {
    return '<div class="banner banner-unchecked">Chain not verified yet.</div>';
  }
  if (report.valid) {
    return '<div class="banner banner-valid">Chain verified: all blocks intact.</div>';
  }
  const items = report.violations
    .map(
      (v) =>
        `<li>block ${v.block_index}: ${escapeHtml(v.kind)} — ${escapeHtml(v.detail)}</li>`,
    )
    .join("");
  return (
    `<div class="banner banner-invalid">Chain INVALID: ` +
    `${report.violations.length} violation(s)<ul>${items}</ul></div>`
  );
}

export function renderStats(report: StatsReport): string {
  const gateRows = Object.entries(report.per_gate)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(
      ([gate, tally]) =>
        `<tr><td>${escapeHtml(gate)}</td><td>${tally.entries}</td><td>${tally.exits}</td></tr>`,
    )
    .join("");
  const dayRows = Object.entries(report.per_day)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(
      ([day, tally]) =>
        `<tr><td>${day}</td><td>${tally.entries}</td><td>${tally.exits}</td></tr>`,
    )
    .join("");
  const nationalityRows = Object.entries(report.per_nationality)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([nat, count]) => `<tr><td>${escapeHtml(nat)}</td><td>${count}</td></tr>`)
    .join("");
  return `
<div class="stats">
  <div class="stat-totals">
    <span class="stat">Entries: <strong>${report.total_entries}</strong></span>
    <span class="stat">Exits: <strong>${report.total_exits}</strong></span>
    <span class="stat">Currently inside: <strong>${report.currently_inside}</strong></span>
  </div>
  <table class="stat-table"><caption>Per gate</caption>
    <thead><tr><th>Gate</th><th>Entries</th><th>Exits</th></tr></thead>
    <tbody>${gateRows}</tbody></table>
  <table class="stat-table"><caption>Per day</caption>
    <thead><tr><th>Day</th><th>Entries</th><th>Exits</th></tr></thead>
    <tbody>${dayRows}</tbody></table>
  <table class="stat-table"><caption>Per nationality</caption>
    <thead><tr><th>Nationality</th><th>Entries</th></tr></thead>
    <tbody>${nationalityRows}</tbody></table>
</div>`;
}

export function renderConfirmation(kind: "entry" | "exit", blockIndex: number): string {
  const what = kind === "entry" ? "Entry" : "Exit";
  return `<div class="flash flash-ok">${what} recorded in block #${blockIndex}.</div>`;
}

export function renderError(message: string): string {
  return `<div class="flash flash-error">${escapeHtml(message)}</div>`;
}
