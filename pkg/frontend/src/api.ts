// Typed client for the /v1 API plus request logging and replay.
//
// Every state change in the UI goes through this client, so a recorded
// log is a complete transcript of a session: replaying it against a
// fresh service reproduces the same trees byte for byte.

import type {
  BadgeMap,
  JobEvent,
  JobStatus,
  OntologyPayload,
  PredictionParams,
  SnapshotInfo,
  SuggestionsPayload,
  TreeDocument,
  TreeSummary,
  UpSetPayload,
  WordlistDetail,
  WordlistInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface LoggedRequest {
  method: "GET" | "POST" | "PUT" | "DELETE";
  path: string;
  body?: unknown;
}

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown,
  ) {
    super(message);
  }
}

export class ApiClient {
  readonly log: LoggedRequest[] = [];

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(
    method: LoggedRequest["method"],
    path: string,
    body?: unknown,
  ): Promise<T> {
    this.log.push(body === undefined ? { method, path } : { method, path, body });
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      const envelope = await response.json().catch(() => null);
      if (envelope && typeof envelope.code === "string") {
        throw new ApiRequestError(
          response.status,
          envelope.code,
          envelope.message,
          envelope.detail,
        );
      }
      throw new ApiRequestError(response.status, "internal-error", response.statusText, null);
    }
    return (await response.json()) as T;
  }

  // --- trees ---

  listTrees(): Promise<{ trees: TreeSummary[] }> {
    return this.request("GET", "/v1/trees");
  }

  createTree(prompt: string, backendId?: string): Promise<TreeDocument> {
    const body: Record<string, unknown> = { prompt };
    if (backendId !== undefined) body.backend_id = backendId;
    return this.request("POST", "/v1/trees", body);
  }

  getTree(treeId: string): Promise<TreeDocument> {
    return this.request("GET", `/v1/trees/${treeId}`);
  }

  deleteTree(treeId: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/v1/trees/${treeId}`);
  }

  /** Canonical on-disk bytes, exactly as the service persists them. */
  async exportTree(treeId: string): Promise<string> {
    const path = `/v1/trees/${treeId}/export`;
    this.log.push({ method: "GET", path });
    const response = await this.fetchImpl(this.baseUrl + path, { method: "GET" });
    if (!response.ok) {
      throw new ApiRequestError(response.status, "internal-error", response.statusText, null);
    }
    return response.text();
  }

  predict(
    treeId: string,
    params?: PredictionParams,
    nodeId?: number,
  ): Promise<{ created: number[]; head: number; tree: TreeDocument }> {
    const body: Record<string, unknown> = {};
    if (nodeId !== undefined) body.node_id = nodeId;
    if (params !== undefined) body.params = params;
    return this.request("POST", `/v1/trees/${treeId}/predict`, body);
  }

  editNode(treeId: string, nodeId: number, text: string): Promise<TreeDocument> {
    return this.request("POST", `/v1/trees/${treeId}/nodes/${nodeId}/edit`, { text });
  }

  removeNode(treeId: string, nodeId: number): Promise<TreeDocument> {
    return this.request("DELETE", `/v1/trees/${treeId}/nodes/${nodeId}`);
  }

  setStart(treeId: string, nodeId: number | null): Promise<TreeDocument> {
    return this.request("POST", `/v1/trees/${treeId}/start`, { node_id: nodeId });
  }

  setEnd(treeId: string, nodeId: number | null): Promise<TreeDocument> {
    return this.request("POST", `/v1/trees/${treeId}/end`, { node_id: nodeId });
  }

  treeText(treeId: string, nodeId?: number): Promise<{ text: string }> {
    const suffix = nodeId === undefined ? "" : `?node_id=${nodeId}`;
    return this.request("GET", `/v1/trees/${treeId}/text${suffix}`);
  }

  annotate(
    treeId: string,
  ): Promise<{ warnings: { node_id: number; code: string }[]; tree: TreeDocument }> {
    return this.request("POST", `/v1/trees/${treeId}/annotate`);
  }

  ontology(treeId: string): Promise<OntologyPayload> {
    return this.request("GET", `/v1/trees/${treeId}/ontology`);
  }

  suggestions(
    treeId: string,
    nodeId: number,
    surface?: string,
    domains?: string[],
  ): Promise<SuggestionsPayload> {
    const query: string[] = [];
    if (surface !== undefined) query.push(`surface=${encodeURIComponent(surface)}`);
    if (domains && domains.length > 0) {
      query.push(`domains=${encodeURIComponent(domains.join(","))}`);
    }
    const suffix = query.length > 0 ? `?${query.join("&")}` : "";
    return this.request("GET", `/v1/trees/${treeId}/nodes/${nodeId}/suggestions${suffix}`);
  }

  // --- comparative / analysis ---

  comparative(
    template: string,
    replacements: string[],
    params?: PredictionParams,
  ): Promise<{ tree_ids: string[]; trees: TreeDocument[] }> {
    const body: Record<string, unknown> = { template, replacements };
    if (params !== undefined) body.params = params;
    return this.request("POST", "/v1/comparative", body);
  }

  upset(treeIds: string[], lists: string[]): Promise<UpSetPayload> {
    return this.request("POST", "/v1/upset", { tree_ids: treeIds, lists });
  }

  badges(treeIds: string[], lists: string[]): Promise<{ badges: BadgeMap }> {
    return this.request("POST", "/v1/badges", { tree_ids: treeIds, lists });
  }

  // --- wordlists ---

  listWordlists(): Promise<{ wordlists: WordlistInfo[] }> {
    return this.request("GET", "/v1/wordlists");
  }

  getWordlist(name: string): Promise<WordlistDetail> {
    return this.request("GET", `/v1/wordlists/${name}`);
  }

  putWordlist(name: string, words: string[]): Promise<WordlistDetail> {
    return this.request("PUT", `/v1/wordlists/${name}`, { words });
  }

  deleteWordlist(name: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/v1/wordlists/${name}`);
  }

  // --- jobs ---

  autoPredict(
    treeId: string,
    params?: PredictionParams,
    maxSteps?: number,
  ): Promise<JobStatus> {
    const body: Record<string, unknown> = {};
    if (params !== undefined) body.params = params;
    if (maxSteps !== undefined) body.max_steps = maxSteps;
    return this.request("POST", `/v1/trees/${treeId}/auto-predict`, body);
  }

  jobEvents(
    jobId: string,
    after: number,
    wait?: number,
  ): Promise<{ events: JobEvent[]; cursor: number; finished: boolean }> {
    let path = `/v1/jobs/${jobId}/events?after=${after}`;
    if (wait !== undefined) path += `&wait=${wait}`;
    return this.request("GET", path);
  }

  stopJob(jobId: string): Promise<JobStatus> {
    return this.request("POST", `/v1/jobs/${jobId}/stop`);
  }

  /** SSE endpoint URL for EventSource consumption of a running job. */
  jobStreamUrl(jobId: string): string {
    return `${this.baseUrl}/v1/jobs/${jobId}/stream`;
  }

  // --- backends / snapshots ---

  listBackends(): Promise<{ backends: { backend_id: string }[] }> {
    return this.request("GET", "/v1/backends");
  }

  fineTuneToNode(
    backendId: string,
    treeId: string,
    nodeId: number,
    learningRate?: number,
    steps?: number,
  ): Promise<{ losses: number[] }> {
    const body: Record<string, unknown> = { tree_id: treeId, node_id: nodeId };
    if (learningRate !== undefined) body.learning_rate = learningRate;
    if (steps !== undefined) body.steps = steps;
    return this.request("POST", `/v1/backends/${backendId}/fine-tune-to-node`, body);
  }

  createSnapshot(backendId: string, label: string): Promise<SnapshotInfo> {
    return this.request("POST", "/v1/snapshots", { backend_id: backendId, label });
  }

  listSnapshots(): Promise<{ snapshots: SnapshotInfo[] }> {
    return this.request("GET", "/v1/snapshots");
  }

  restoreSnapshot(snapshotId: string): Promise<SnapshotInfo> {
    return this.request("POST", `/v1/snapshots/${snapshotId}/restore`);
  }
}

/** Re-issue a recorded request list, in order, against a fresh client. */
export async function replayLog(client: ApiClient, log: LoggedRequest[]): Promise<void> {
  for (const entry of log) {
    const init: RequestInit = { method: entry.method };
    if (entry.body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(entry.body);
    }
    const response = await fetch(client.baseUrl + entry.path, init);
    if (!response.ok) {
      const text = await response.text();
      throw new Error(`replay ${entry.method} ${entry.path} -> ${response.status}: ${text}`);
    }
  }
}
