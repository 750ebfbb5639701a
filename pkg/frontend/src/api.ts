import type {
  ChainsResponse,
  EvidenceMap,
  FaultResponse,
  LogResponse,
  ModelsResponse,
  PartiesResponse,
  QueryResponse,
  RequestDoc,
  RequestsResponse,
  RunEntry,
  ScenariosResponse,
} from "./types.js";

export interface Identity {
  party: string;
  token: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin /v1 client. The gateway is the single source of truth; this class
 * only moves documents and attaches the party identity headers.
 */
export class ConsoleApi {
  identity: Identity | null = null;

  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async go<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["content-type"] = "application/json";
    if (this.identity !== null) {
      headers["x-party"] = this.identity.party;
      headers["x-party-token"] = this.identity.token;
    }
    const resp = await this.fetchImpl(`${this.base}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const doc: unknown = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail =
        typeof (doc as { detail?: unknown }).detail === "string"
          ? (doc as { detail: string }).detail
          : `${resp.status}`;
      throw new ApiError(resp.status, detail);
    }
    return doc as T;
  }

  models(): Promise<ModelsResponse> {
    return this.go("GET", "/v1/models");
  }

  scenarios(): Promise<ScenariosResponse> {
    return this.go("GET", "/v1/scenarios");
  }

  parties(): Promise<PartiesResponse> {
    return this.go("GET", "/v1/parties");
  }

  query(evidence: EvidenceMap, targets?: string[]): Promise<QueryResponse> {
    const body = targets === undefined ? { evidence } : { evidence, targets };
    return this.go("POST", "/v1/query", body);
  }

  chains(): Promise<ChainsResponse> {
    return this.go("GET", "/v1/chains");
  }

  chainLog(chainId: string): Promise<LogResponse> {
    return this.go("GET", `/v1/chains/${encodeURIComponent(chainId)}/log`);
  }

  requests(): Promise<RequestsResponse> {
    return this.go("GET", "/v1/requests");
  }

  /** Optimistic-concurrency submit: a stale expected version raises 409. */
  submitDecision(
    decision: "Fund" | "DoNotFund",
    expectedVersion: number,
    request?: RequestDoc,
  ): Promise<RunEntry> {
    const body: Record<string, unknown> = {
      decision,
      expected_version: expectedVersion,
    };
    if (request !== undefined) body["request"] = request;
    return this.go("POST", "/v1/requests", body);
  }

  faults(): Promise<FaultResponse> {
    return this.go("GET", "/v1/faults");
  }

  armFault(point: string | null): Promise<FaultResponse> {
    return this.go("POST", "/v1/faults", { point });
  }
}
