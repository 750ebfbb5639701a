// Document shapes of the /v1 API. The console renders these verbatim; it
// never derives probabilities on its own.

export type Distribution = Record<string, number>;
export type EvidenceMap = Record<string, string>;

export interface NodeDoc {
  id: string;
  states: string[];
  parents: string[];
}

export interface ModelDoc {
  name: string;
  inputs: string[];
  outputs: string[];
  nodes: NodeDoc[];
}

export interface ModelsResponse {
  models: ModelDoc[];
  world_version: number;
}

export interface QueryResponse {
  evidence: EvidenceMap;
  posteriors: Record<string, Distribution>;
  world_version: number;
}

export interface ScenarioTarget {
  node: string;
  state: string;
  expected: number;
  tolerance: number;
}

export interface ScenarioDoc {
  name: string;
  title: string;
  evidence: EvidenceMap;
  targets: ScenarioTarget[];
}

export interface ScenariosResponse {
  scenarios: ScenarioDoc[];
  world_version: number;
}

export interface PartyDoc {
  party: string;
  token: string;
  tier: number | null;
}

export interface PartiesResponse {
  parties: PartyDoc[];
  world_version: number;
}

export interface ChainDoc {
  id: string;
  members: string[];
  records: number;
  balances?: Record<string, number>;
}

export interface ChainsResponse {
  chains: ChainDoc[];
  world_version: number;
}

// Full record when the viewer is inside the privacy group, envelope otherwise.
export interface LogRecord {
  index: number;
  prev: string;
  author: string;
  signature: string;
  digest: string;
  body?: Record<string, unknown>;
  privacy_group?: string;
  redacted?: boolean;
}

export interface LogResponse {
  chain: string;
  viewer: string;
  log: LogRecord[];
  world_version: number;
}

export interface RequestDoc {
  supplier: string;
  amount: number;
  payment_terms_days: number;
  total_unpaid: number;
  rewards: string;
  agreement_chain: string;
  agreement_address: string | null;
}

export type StepStatus = "done" | "failed" | "pending";

export interface OutcomeDoc {
  steps: StepStatus[];
  decision: string | null;
  p_fund: number | null;
  posteriors: Record<string, Distribution> | null;
  evidence: EvidenceMap | null;
  settlement: number | null;
  tx_status: string | null;
  txid: string | null;
  detail: Record<string, unknown>;
}

export interface RunEntry {
  world_version: number;
  outcome: OutcomeDoc;
}

export interface RequestsResponse {
  pending: RequestDoc;
  step_titles: string[];
  history: RunEntry[];
  world_version: number;
}

export interface FaultResponse {
  armed: string | null;
  world_version: number;
}
