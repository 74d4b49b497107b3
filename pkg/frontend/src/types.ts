// Wire types for the GateChain HTTP API.

export type Role = "admin" | "officer" | "auditor";

export interface LoginResponse {
  token: string;
  public_key: string;
  display_name: string;
  role: Role;
  expires_at: number;
}

export interface TravelRecord {
  passport_number: string;
  name_surname: string;
  nationality: string;
  birthdate: string;
  entry_date: string;
  entry_gate: string;
  exit_date: string;
  exit_gate: string;
  plate: string;
  entry_block_index: number;
  exit_block_index: number | null;
  status: "open" | "closed";
}

export interface RecordsPage {
  records: TravelRecord[];
  total: number;
  limit: number;
  offset: number;
}

export interface Violation {
  block_index: number;
  kind: string;
  detail: string;
}

export interface VerificationReport {
  valid: boolean;
  violations: Violation[];
}

export interface EventTally {
  entries: number;
  exits: number;
}

export interface StatsReport {
  total_entries: number;
  total_exits: number;
  currently_inside: number;
  per_gate: Record<string, EventTally>;
  per_nationality: Record<string, number>;
  per_day: Record<string, EventTally>;
}

export interface EntrySubmission {
  passport_number: string;
  name_surname: string;
  nationality: string;
  birthdate: string;
  passport_validity_date: string;
  entry_gate: string;
  entry_datetime: string;
  plate: string;
}

export interface ExitSubmission {
  passport_number: string;
  exit_gate: string;
  exit_datetime: string;
  plate: string;
}

export interface RecordFilters {
  passport?: string;
  nationality?: string;
  from?: string;
  to?: string;
  gate?: string;
  status?: "open" | "closed";
  limit?: number;
  offset?: number;
}
