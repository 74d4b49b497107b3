// Typed client for the GateChain REST API. One method per documented
// endpoint; nothing else is ever called.

import { signChallenge } from "./signing.js";
import type {
  EntrySubmission,
  ExitSubmission,
  LoginResponse,
  RecordFilters,
  RecordsPage,
  StatsReport,
  TravelRecord,
  VerificationReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

type FetchFn = typeof fetch;

export class GateChainClient {
  private token: string | null = null;
  private readonly fetchFn: FetchFn;

  constructor(
    public readonly baseUrl: string,
    fetchFn?: FetchFn,
  ) {
    this.fetchFn = fetchFn ?? fetch.bind(globalThis);
  }

  get authenticated(): boolean {
    return this.token !== null;
  }

  logout(): void {
    this.token = null;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    query?: Record<string, string>,
  ): Promise<T> {
    let url = this.baseUrl + path;
    if (query && Object.keys(query).length > 0) {
      url += "?" + new URLSearchParams(query).toString();
    }
    const headers: Record<string, string> = { Accept: "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchFn(url, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof payload?.detail === "string"
          ? payload.detail
          : JSON.stringify(payload?.detail ?? payload);
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  /** Challenge-response login; the private key is used locally only. */
  async login(publicKeyHex: string, privateKeyHex: string): Promise<LoginResponse> {
    const challenge = await this.request<{ challenge_id: string; nonce: string }>(
      "POST",
      "/api/login/challenge",
      { public_key: publicKeyHex },
    );
    const signature = await signChallenge(privateKeyHex, publicKeyHex, challenge.nonce);
    const session = await this.request<LoginResponse>("POST", "/api/login", {
      public_key: publicKeyHex,
      challenge_id: challenge.challenge_id,
      signature,
    });
    this.token = session.token;
    return session;
  }

  async registerEntry(
    form: EntrySubmission,
  ): Promise<{ block_index: number; record: TravelRecord }> {
    return this.request("POST", "/api/entries", form);
  }

  async registerExit(
    form: ExitSubmission,
  ): Promise<{ block_index: number; record: TravelRecord }> {
    return this.request("POST", "/api/exits", form);
  }

  async listRecords(filters: RecordFilters = {}): Promise<RecordsPage> {
    const query: Record<string, string> = {};
    for (const [key, value] of Object.entries(filters)) {
      if (value !== undefined && value !== "") query[key] = String(value);
    }
    return this.request("GET", "/api/records", undefined, query);
  }

  async verifyChain(): Promise<VerificationReport> {
    return this.request("GET", "/api/chain/verify");
  }

  async stats(range: { from?: string; to?: string } = {}): Promise<StatsReport> {
    const query: Record<string, string> = {};
    if (range.from) query["from"] = range.from;
    if (range.to) query["to"] = range.to;
    return this.request("GET", "/api/stats", undefined, query);
  }
}

/** Human-readable messages for the API's documented error statuses. */
export function friendlyErrorMessage(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.status === 409) return "Person is already inside the country (open entry exists).";
    if (error.status === 404) return "No open entry found for this passport.";
    if (error.status === 403) return "Your role does not allow this action.";
    if (error.status === 401) return "Session rejected; log in again.";
    if (error.status === 422) return `Invalid input: ${error.detail}`;
    return error.detail;
  }
  return error instanceof Error ? error.message : String(error);
}
