// Browser shell: binds the pure modules to the document. All state-changing
// work goes through GateChainClient; key material stays in this tab.

import { friendlyErrorMessage, GateChainClient } from "./api.js";
import { visibleSections } from "./roles.js";
import type { LoginResponse, RecordFilters } from "./types.js";
import {
  canSubmit,
  validateEntryForm,
  validateExitForm,
  type EntryFormFields,
  type ExitFormFields,
} from "./validation.js";
import {
  renderConfirmation,
  renderError,
  renderRecordsTable,
  renderStats,
  renderVerifyBanner,
} from "./views.js";

let client: GateChainClient | null = null;
let session: LoginResponse | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function inputValue(id: string): string {
  return (el<HTMLInputElement>(id)).value;
}

function setFlash(id: string, html: string): void {
  el(id).innerHTML = html;
}

// -- login -------------------------------------------------------------------

function entryFields(): EntryFormFields {
  return {
    passport_number: inputValue("entry-passport"),
    name_surname: inputValue("entry-name"),
    nationality: inputValue("entry-nationality"),
    birthdate: inputValue("entry-birthdate"),
    passport_validity_date: inputValue("entry-validity"),
    entry_gate: inputValue("entry-gate"),
    entry_datetime: inputValue("entry-datetime"),
    plate: inputValue("entry-plate"),
  };
}

function exitFields(): ExitFormFields {
  return {
    passport_number: inputValue("exit-passport"),
    exit_gate: inputValue("exit-gate"),
    exit_datetime: inputValue("exit-datetime"),
    plate: inputValue("exit-plate"),
  };
}

function refreshEntryValidation(): void {
  const errors = validateEntryForm(entryFields());
  el<HTMLButtonElement>("entry-submit").disabled = !canSubmit(errors);
  el("entry-errors").textContent = Object.entries(errors)
    .map(([field, problem]) => `${field}: ${problem}`)
    .join("; ");
}

function refreshExitValidation(): void {
  const errors = validateExitForm(exitFields());
  el<HTMLButtonElement>("exit-submit").disabled = !canSubmit(errors);
  el("exit-errors").textContent = Object.entries(errors)
    .map(([field, problem]) => `${field}: ${problem}`)
    .join("; ");
}

function applyRoleVisibility(): void {
  if (!session) return;
  const sections = visibleSections(session.role);
  el("section-entry").hidden = !sections.registerEntry;
  el("section-exit").hidden = !sections.registerExit;
  el("section-records").hidden = !sections.records;
  el("verify-controls").hidden = !sections.verify;
  el("section-stats").hidden = !sections.stats;
}

async function onLogin(event: Event): Promise<void> {
  event.preventDefault();
  const baseUrl = inputValue("login-api-url").replace(/\/$/, "");
  client = new GateChainClient(baseUrl);
  try {
    session = await client.login(inputValue("login-public"), inputValue("login-private"));
  } catch (error) {
    setFlash("login-flash", renderError(friendlyErrorMessage(error)));
    return;
  }
  setFlash("login-flash", "");
  el("login-panel").hidden = true;
  el("workspace").hidden = false;
  el("whoami").textContent = `${session.display_name} (${session.role})`;
  applyRoleVisibility();
  refreshEntryValidation();
  refreshExitValidation();
  void refreshRecords();
}

// -- registration ------------------------------------------------------------

async function onSubmitEntry(event: Event): Promise<void> {
  event.preventDefault();
  if (!client) return;
  try {
    const result = await client.registerEntry(entryFields());
    setFlash("entry-flash", renderConfirmation("entry", result.block_index));
    (el<HTMLFormElement>("entry-form")).reset();
    refreshEntryValidation();
    void refreshRecords();
  } catch (error) {
    // surface the problem but keep the operator's half-typed form
    setFlash("entry-flash", renderError(friendlyErrorMessage(error)));
  }
}

async function onSubmitExit(event: Event): Promise<void> {
  event.preventDefault();
  if (!client) return;
  try {
    const result = await client.registerExit(exitFields());
    setFlash("exit-flash", renderConfirmation("exit", result.block_index));
    (el<HTMLFormElement>("exit-form")).reset();
    refreshExitValidation();
    void refreshRecords();
  } catch (error) {
    setFlash("exit-flash", renderError(friendlyErrorMessage(error)));
  }
}

// -- records, verification, statistics ----------------------------------------

function currentFilters(): RecordFilters {
  const filters: RecordFilters = {};
  const passport = inputValue("filter-passport").trim();
  const nationality = inputValue("filter-nationality").trim();
  const gate = inputValue("filter-gate").trim();
  const from = inputValue("filter-from").trim();
  const to = inputValue("filter-to").trim();
  const status = (el<HTMLSelectElement>("filter-status")).value;
  if (passport) filters.passport = passport;
  if (nationality) filters.nationality = nationality;
  if (gate) filters.gate = gate;
  if (from) filters.from = from;
  if (to) filters.to = to;
  if (status === "open" || status === "closed") filters.status = status;
  return filters;
}

async function refreshRecords(): Promise<void> {
  if (!client || !session) return;
  if (!visibleSections(session.role).records) return;
  try {
    const page = await client.listRecords(currentFilters());
    el("records-table").innerHTML = renderRecordsTable(page.records);
    el("records-count").textContent = `${page.total} record(s)`;
  } catch (error) {
    el("records-table").innerHTML = renderError(friendlyErrorMessage(error));
  }
}

async function onVerify(): Promise<void> {
  if (!client) return;
  try {
    const report = await client.verifyChain();
    el("verify-banner").innerHTML = renderVerifyBanner(report);
  } catch (error) {
    el("verify-banner").innerHTML = renderError(friendlyErrorMessage(error));
  }
}

async function onStats(): Promise<void> {
  if (!client) return;
  try {
    const report = await client.stats({
      from: inputValue("stats-from").trim() || undefined,
      to: inputValue("stats-to").trim() || undefined,
    });
    el("stats-panel").innerHTML = renderStats(report);
  } catch (error) {
    el("stats-panel").innerHTML = renderError(friendlyErrorMessage(error));
  }
}

export function boot(): void {
  el("login-form").addEventListener("submit", onLogin);
  el("entry-form").addEventListener("submit", onSubmitEntry);
  el("entry-form").addEventListener("input", refreshEntryValidation);
  el("exit-form").addEventListener("submit", onSubmitExit);
  el("exit-form").addEventListener("input", refreshExitValidation);
  el("records-refresh").addEventListener("click", () => void refreshRecords());
  el("verify-button").addEventListener("click", () => void onVerify());
  el("stats-button").addEventListener("click", () => void onStats());
  el("verify-banner").innerHTML = renderVerifyBanner(null);
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
