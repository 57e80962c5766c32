// Payload shapes of the /v1 API. The client renders these verbatim and
// never derives or mutates domain state locally; every change is a request.

export interface PredictionParams {
  top_k?: number;
  next_n?: number;
  temperature?: number;
  top_p?: number;
  no_repeat_ngram?: number | null;
  seed?: number;
}

export interface KeywordRecord {
  surface: string;
  score: number;
  embedding: number[];
  coords: [number, number];
  color: [number, number, number];
}

export interface SentimentRecord {
  label: "negative" | "neutral" | "positive";
  score: number;
  warning: boolean;
}

export interface NodeAnnotations {
  keywords: KeywordRecord[];
  sentiment: SentimentRecord;
}

export interface TreeNode {
  node_id: number;
  parent: number | null;
  token_ids: number[];
  token_texts: string[];
  text: string;
  cond_prob: number;
  stale: boolean;
  children: number[];
  annotations: NodeAnnotations | null;
}

export interface TreeDocument {
  format: string;
  version: number;
  tree_id: string;
  prompt: string;
  replacement: string | null;
  replacement_span: [number, number] | null;
  backend_id: string;
  params_used: Required<PredictionParams> | null;
  root: number;
  head: number;
  start_override: number | null;
  end_override: number | null;
  next_node_id: number;
  loop_links: [number, number][];
  nodes: TreeNode[];
}

export interface TreeSummary {
  tree_id: string;
  prompt: string;
  backend_id: string;
  node_count: number;
  head: number;
  replacement: string | null;
}

// badges[treeId][nodeId][listName] = matched words
export type BadgeMap = Record<string, Record<string, Record<string, string[]>>>;

export interface UpSetEntry {
  word: string;
  count: number;
}

export interface UpSetColumn {
  member_trees: string[];
  lists: Record<string, UpSetEntry[]>;
}

export interface UpSetPayload {
  columns: UpSetColumn[];
}

export type LayerKind = "domain" | "subdomain" | "synset" | "keyword";

export interface LayerCell {
  cell_id: string;
  label: string;
  parent: string | null;
  weight: number;
}

export interface OntologyPayload {
  domain: LayerCell[];
  subdomain: LayerCell[];
  synset: LayerCell[];
  keyword: LayerCell[];
  instances: Record<string, { tree_node_id: number; surface: string }>;
  unattached: { tree_node_id: number; surface: string; reason: string }[];
}

// domain -> candidate replacements, best match first
export interface SuggestionsPayload {
  keyword: string;
  node_id: number;
  domains: Record<string, { word: string; match_score: number }[]>;
}

export interface JobEvent {
  seq: number;
  kind: "step" | "done" | "stopped" | "error";
  step?: number;
  created?: number[];
  head?: number;
  node_count?: number;
  steps?: number;
  code?: string;
  message?: string;
}

export interface JobStatus {
  job_id: string;
  tree_id: string;
  steps: number;
  events: number;
  finished: boolean;
  stop_requested: boolean;
}

export interface SnapshotInfo {
  snapshot_id: string;
  backend_id: string;
  created_at: string;
  label: string;
}

export interface WordlistInfo {
  name: string;
  size: number;
}

export interface WordlistDetail {
  name: string;
  words: string[];
}

export interface ApiError {
  code: string;
  message: string;
  detail: unknown;
}
