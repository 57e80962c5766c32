// Browser shell: wires the pure renderers to the /v1 client.
//
// The shell owns no domain logic. Every mutation is an API request and
// every panel re-renders from the service's response, so what is on
// screen is always something the service said.

import { ApiClient, ApiRequestError } from "./api.js";
import { escapeXml, visibleText, wordlistColor } from "./colors.js";
import { renderEmbeddingMap } from "./embedding.js";
import { renderTree } from "./svg.js";
import { renderUpset } from "./upset.js";
import { defaultViewState, type LevelOfDetail, type ViewState } from "./viewstate.js";
import {
  LAYER_ORDER,
  ontologyTreemap,
  type TreemapLayer,
  type VoronoiCell,
} from "./voronoi.js";
import type {
  BadgeMap,
  LayerKind,
  OntologyPayload,
  PredictionParams,
  SnapshotInfo,
  TreeDocument,
  TreeSummary,
  UpSetPayload,
  WordlistInfo,
} from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function domainPalette(id: string): string {
  // stable pastel per top-level domain so layers stay visually related
  let h = 0;
  for (let i = 0; i < id.length; i++) h = (h * 31 + id.charCodeAt(i)) >>> 0;
  return `hsl(${h % 360}, 55%, 72%)`;
}

export class App {
  readonly client: ApiClient;
  view: ViewState = defaultViewState();

  private summaries: TreeSummary[] = [];
  private docs = new Map<string, TreeDocument>();
  private badges: BadgeMap = {};
  private wordlists: WordlistInfo[] = [];
  private snapshots: SnapshotInfo[] = [];
  private backends: string[] = [];
  private ontology: OntologyPayload | null = null;
  private upsetData: UpSetPayload | null = null;
  private compareDocs: TreeDocument[] = [];
  private treemap: TreemapLayer[] = [];
  private treemapKind: LayerKind = "keyword";
  private hoverCell: string | null = null;
  private menuTarget: { treeId: string; nodeId: number } | null = null;
  private stream: EventSource | null = null;

  constructor(baseUrl: string) {
    this.client = new ApiClient(baseUrl);
  }

  // ── bootstrap ────────────────────────────────────────────────────

  async init(): Promise<void> {
    this.wireStaticControls();
    await this.refreshWordlists();
    await this.refreshTrees();
    await this.refreshSnapshots();
    this.renderAll();
  }

  private setStatus(text: string): void {
    el("status-bar").textContent = text;
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      return await work();
    } catch (err) {
      if (err instanceof ApiRequestError) {
        this.setStatus(`${err.code}: ${err.message}`);
      } else {
        this.setStatus(String(err));
      }
      return undefined;
    }
  }

  // ── data refresh ─────────────────────────────────────────────────

  private async refreshTrees(): Promise<void> {
    const listing = await this.client.listTrees();
    this.summaries = listing.trees;
    const known = new Set(this.summaries.map((t) => t.tree_id));
    this.view.activeTreeIds = this.view.activeTreeIds.filter((id) => known.has(id));
    for (const id of [...this.docs.keys()]) if (!known.has(id)) this.docs.delete(id);
    for (const id of this.view.activeTreeIds) {
      this.docs.set(id, await this.client.getTree(id));
    }
    await this.refreshBadges();
  }

  private async refreshBadges(): Promise<void> {
    if (this.view.activeTreeIds.length === 0 || this.view.selectedWordlists.length === 0) {
      this.badges = {};
      return;
    }
    const result = await this.client.badges(this.view.activeTreeIds, this.view.selectedWordlists);
    this.badges = result.badges;
  }

  private async refreshWordlists(): Promise<void> {
    this.wordlists = (await this.client.listWordlists()).wordlists;
  }

  private async refreshSnapshots(): Promise<void> {
    this.snapshots = (await this.client.listSnapshots()).snapshots;
    this.backends = (await this.client.listBackends()).backends.map((b) => b.backend_id);
  }

  private async refreshOntology(): Promise<void> {
    const first = this.view.activeTreeIds[0];
    this.ontology = first === undefined ? null : await this.client.ontology(first);
    this.treemap = this.ontology
      ? ontologyTreemap(this.ontology, 360, 300, this.view.layoutSeed)
      : [];
  }

  private async refreshUpset(): Promise<void> {
    if (this.view.activeTreeIds.length === 0 || this.view.selectedWordlists.length === 0) {
      this.upsetData = null;
      return;
    }
    this.upsetData = await this.client.upset(this.view.activeTreeIds, this.view.selectedWordlists);
  }

  private async reloadActive(): Promise<void> {
    await this.refreshTrees();
    await this.refreshUpset();
    this.renderAll();
  }

  // ── params form ──────────────────────────────────────────────────

  readParams(): PredictionParams {
    const num = (id: string): number => Number((el<HTMLInputElement>(id)).value);
    const ngram = (el<HTMLInputElement>("param-no-repeat")).value.trim();
    return {
      top_k: num("param-top-k"),
      next_n: num("param-next-n"),
      temperature: num("param-temperature"),
      top_p: num("param-top-p"),
      no_repeat_ngram: ngram === "" ? null : Number(ngram),
      seed: num("param-seed"),
    };
  }

  // ── static control wiring ────────────────────────────────────────

  private wireStaticControls(): void {
    el<HTMLFormElement>("create-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      const prompt = el<HTMLInputElement>("create-prompt").value;
      if (!prompt) return;
      void this.guard(async () => {
        const doc = await this.client.createTree(prompt);
        this.docs.set(doc.tree_id, doc);
        this.view.activeTreeIds.push(doc.tree_id);
        await this.reloadActive();
      });
    });

    el<HTMLButtonElement>("predict-button").addEventListener("click", () => {
      void this.guard(async () => {
        for (const id of this.view.activeTreeIds) {
          await this.client.predict(id, this.readParams());
        }
        await this.reloadActive();
      });
    });

    el<HTMLButtonElement>("auto-predict-button").addEventListener("click", () => {
      const first = this.view.activeTreeIds[0];
      if (first !== undefined) void this.startAutoPredict(first);
    });

    el<HTMLButtonElement>("annotate-button").addEventListener("click", () => {
      void this.guard(async () => {
        for (const id of this.view.activeTreeIds) {
          const result = await this.client.annotate(id);
          this.docs.set(id, result.tree);
          if (result.warnings.length > 0) {
            this.setStatus(`annotation warnings on ${result.warnings.length} node(s)`);
          }
        }
        await this.refreshOntology();
        this.renderAll();
      });
    });

    el<HTMLSelectElement>("detail-select").addEventListener("change", (ev) => {
      this.view.detail = (ev.target as HTMLSelectElement).value as LevelOfDetail;
      this.renderAll();
    });

    const toggles: [string, keyof ViewState["toggles"]][] = [
      ["toggle-sentiment", "sentimentEdges"],
      ["toggle-semantic", "semanticNodeFill"],
      ["toggle-probability", "probabilityStroke"],
      ["toggle-wordlist", "wordlistColors"],
    ];
    for (const [id, key] of toggles) {
      el<HTMLInputElement>(id).addEventListener("change", (ev) => {
        this.view.toggles[key] = (ev.target as HTMLInputElement).checked;
        this.renderAll();
      });
    }

    el<HTMLFormElement>("compare-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      const template = el<HTMLInputElement>("compare-template").value;
      const values = el<HTMLInputElement>("compare-values").value
        .split(",")
        .map((v) => v.trim())
        .filter((v) => v.length > 0);
      if (!template || values.length === 0) return;
      void this.guard(async () => {
        const result = await this.client.comparative(template, values, this.readParams());
        this.compareDocs = result.trees;
        for (const doc of result.trees) this.docs.set(doc.tree_id, doc);
        this.renderComparePanel();
      });
    });

    el<HTMLFormElement>("wordlist-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      const name = el<HTMLInputElement>("wordlist-name").value.trim();
      const words = el<HTMLInputElement>("wordlist-words").value
        .split(",")
        .map((w) => w.trim())
        .filter((w) => w.length > 0);
      if (!name || words.length === 0) return;
      void this.guard(async () => {
        await this.client.putWordlist(name, words);
        await this.refreshWordlists();
        this.renderWordlistPanel();
      });
    });

    el<HTMLFormElement>("snapshot-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      const backend = this.backends[0];
      if (backend === undefined) return;
      const label = el<HTMLInputElement>("snapshot-label").value;
      void this.guard(async () => {
        await this.client.createSnapshot(backend, label);
        await this.refreshSnapshots();
        this.renderSnapshotPanel();
      });
    });

    el<HTMLButtonElement>("copy-text-button").addEventListener("click", () => {
      const text = el("text-view").textContent ?? "";
      void navigator.clipboard?.writeText(text);
      this.setStatus("text copied");
    });

    const clearOverride = (which: "start" | "end") => {
      const first = this.view.activeTreeIds[0];
      if (first === undefined) return;
      void this.guard(async () => {
        const doc =
          which === "start"
            ? await this.client.setStart(first, null)
            : await this.client.setEnd(first, null);
        this.docs.set(first, doc);
        this.renderTreePanel();
        this.renderTextPanel();
      });
    };
    el<HTMLButtonElement>("clear-start-button").addEventListener("click", () =>
      clearOverride("start"),
    );
    el<HTMLButtonElement>("clear-end-button").addEventListener("click", () =>
      clearOverride("end"),
    );

    document.addEventListener("click", (ev) => {
      const menu = el("context-menu");
      if (!menu.contains(ev.target as Node)) this.closeMenu();
    });
  }

  // ── auto-predict over SSE ────────────────────────────────────────

  private async startAutoPredict(treeId: string): Promise<void> {
    await this.guard(async () => {
      const job = await this.client.autoPredict(treeId, this.readParams());
      this.stream?.close();
      const source = new EventSource(this.client.jobStreamUrl(job.job_id));
      this.stream = source;
      source.addEventListener("step", () => {
        void this.guard(async () => {
          this.docs.set(treeId, await this.client.getTree(treeId));
          this.renderTreePanel();
        });
      });
      const finish = () => {
        source.close();
        this.stream = null;
        void this.reloadActive();
      };
      source.addEventListener("done", finish);
      source.addEventListener("stopped", finish);
      source.addEventListener("error", () => finish());
      this.setStatus(`auto-predict ${job.job_id} running`);
    });
  }

  // ── node context menu ────────────────────────────────────────────

  private openMenu(treeId: string, nodeId: number, x: number, y: number): void {
    this.menuTarget = { treeId, nodeId };
    const menu = el("context-menu");
    menu.style.display = "block";
    menu.style.left = `${x}px`;
    menu.style.top = `${y}px`;
    menu.innerHTML = [
      `<button data-action="edit">edit token</button>`,
      `<button data-action="remove">remove subtree</button>`,
      `<button data-action="predict">predict from here</button>`,
      `<button data-action="replace">replace (ontology)</button>`,
      `<button data-action="retrain">re-train to here</button>`,
      `<button data-action="start">set as start</button>`,
      `<button data-action="end">set as end</button>`,
      `<div id="suggestion-groups"></div>`,
    ].join("");
    menu.querySelectorAll("button[data-action]").forEach((button) => {
      button.addEventListener("click", () => {
        void this.runMenuAction((button as HTMLButtonElement).dataset.action ?? "");
      });
    });
  }

  private closeMenu(): void {
    el("context-menu").style.display = "none";
    this.menuTarget = null;
  }

  private async runMenuAction(action: string): Promise<void> {
    const target = this.menuTarget;
    if (!target) return;
    const { treeId, nodeId } = target;
    const doc = this.docs.get(treeId);
    const node = doc?.nodes.find((n) => n.node_id === nodeId);

    await this.guard(async () => {
      switch (action) {
        case "edit": {
          const text = window.prompt("new token text", node?.text ?? "");
          if (text === null) return;
          this.docs.set(treeId, await this.client.editNode(treeId, nodeId, text));
          break;
        }
        case "remove":
          this.docs.set(treeId, await this.client.removeNode(treeId, nodeId));
          break;
        case "predict":
          await this.client.predict(treeId, this.readParams(), nodeId);
          this.docs.set(treeId, await this.client.getTree(treeId));
          break;
        case "start":
          this.docs.set(treeId, await this.client.setStart(treeId, nodeId));
          break;
        case "end":
          this.docs.set(treeId, await this.client.setEnd(treeId, nodeId));
          break;
        case "retrain": {
          if (!doc) return;
          const result = await this.client.fineTuneToNode(doc.backend_id, treeId, nodeId);
          this.setStatus(`fine-tuned: loss ${result.losses.map((l) => l.toFixed(3)).join(" -> ")}`);
          return;
        }
        case "replace": {
          await this.showSuggestions(treeId, nodeId);
          return;
        }
        default:
          return;
      }
      this.closeMenu();
      await this.reloadActive();
    });
  }

  /** Domain-grouped replacement suggestions inside the open menu. */
  private async showSuggestions(treeId: string, nodeId: number): Promise<void> {
    const payload = await this.client.suggestions(treeId, nodeId);
    const host = el("suggestion-groups");
    const groups = Object.keys(payload.domains).sort();
    host.innerHTML = groups
      .map((domain) => {
        const options = (payload.domains[domain] ?? [])
          .map(
            (s) =>
              `<button data-word="${escapeXml(s.word)}" title="match ${s.match_score.toFixed(3)}">` +
              `${escapeXml(s.word)}</button>`,
          )
          .join("");
        return `<div class="suggestion-group"><span>${escapeXml(domain)}</span>${options}</div>`;
      })
      .join("");
    host.querySelectorAll("button[data-word]").forEach((button) => {
      button.addEventListener("click", () => {
        const word = (button as HTMLButtonElement).dataset.word ?? "";
        void this.guard(async () => {
          this.docs.set(treeId, await this.client.editNode(treeId, nodeId, ` ${word}`));
          this.closeMenu();
          await this.reloadActive();
        });
      });
    });
  }

  // ── rendering ────────────────────────────────────────────────────

  renderAll(): void {
    this.renderTreeListPanel();
    this.renderTreePanel();
    this.renderTextPanel();
    this.renderWordlistPanel();
    this.renderSnapshotPanel();
    this.renderMapPanel();
    this.renderUpsetPanel();
    this.renderTreemapPanel();
    this.renderComparePanel();
  }

  private renderTreeListPanel(): void {
    const host = el("tree-list");
    host.innerHTML = this.summaries
      .map((t) => {
        const active = this.view.activeTreeIds.includes(t.tree_id);
        return (
          `<div class="tree-row${active ? " active" : ""}" data-tree-row="${escapeXml(t.tree_id)}">` +
          `<strong>${escapeXml(t.tree_id.slice(0, 12))}</strong> ` +
          `<span>${escapeXml(t.prompt.slice(0, 48))}</span>` +
          `<em>${t.node_count} nodes</em>` +
          `<button data-delete-tree="${escapeXml(t.tree_id)}">x</button></div>`
        );
      })
      .join("");
    host.querySelectorAll("[data-tree-row]").forEach((row) => {
      row.addEventListener("click", () => {
        const id = (row as HTMLElement).dataset.treeRow!;
        const idx = this.view.activeTreeIds.indexOf(id);
        if (idx >= 0) this.view.activeTreeIds.splice(idx, 1);
        else this.view.activeTreeIds.push(id);
        void this.guard(async () => {
          await this.reloadActive();
          await this.refreshOntology();
          this.renderAll();
        });
      });
    });
    host.querySelectorAll("[data-delete-tree]").forEach((button) => {
      button.addEventListener("click", (ev) => {
        ev.stopPropagation();
        const id = (button as HTMLElement).dataset.deleteTree!;
        void this.guard(async () => {
          await this.client.deleteTree(id);
          await this.reloadActive();
        });
      });
    });
  }

  private renderTreePanel(): void {
    const host = el("tree-panel");
    const parts: string[] = [];
    for (const id of this.view.activeTreeIds) {
      const doc = this.docs.get(id);
      if (!doc) continue;
      parts.push(`<section data-tree-section="${escapeXml(id)}">`);
      parts.push(renderTree(doc, this.view, this.badges).svg);
      parts.push("</section>");
    }
    host.innerHTML = parts.join("") || "<p class='hint'>no active trees</p>";

    host.querySelectorAll("circle[data-node]").forEach((circle) => {
      const section = (circle as SVGElement).closest("[data-tree-section]") as HTMLElement | null;
      const treeId = section?.dataset.treeSection;
      const nodeId = Number((circle as SVGElement).getAttribute("data-node"));
      if (!treeId) return;
      circle.addEventListener("mouseenter", () => {
        this.view.hoveredNodeId = nodeId;
        this.renderTreePanel();
        this.renderMapPanel();
      });
      circle.addEventListener("mouseleave", () => {
        this.view.hoveredNodeId = null;
        this.renderTreePanel();
        this.renderMapPanel();
      });
      circle.addEventListener("click", (ev) => {
        ev.stopPropagation();
        this.openMenu(treeId, nodeId, (ev as MouseEvent).pageX, (ev as MouseEvent).pageY);
      });
    });
  }

  private renderTextPanel(): void {
    const host = el("text-view");
    const first = this.view.activeTreeIds[0];
    if (first === undefined) {
      host.textContent = "";
      return;
    }
    void this.guard(async () => {
      const result = await this.client.treeText(first);
      host.textContent = visibleText(result.text);
    });
  }

  private renderWordlistPanel(): void {
    const host = el("wordlist-items");
    host.innerHTML = this.wordlists
      .map((wl, i) => {
        const selected = this.view.selectedWordlists.includes(wl.name);
        return (
          `<label class="wordlist-item"><input type="checkbox" data-wordlist="${escapeXml(wl.name)}"` +
          `${selected ? " checked" : ""}/>` +
          `<span class="badge" style="background:${wordlistColor(i)}"></span>` +
          `${escapeXml(wl.name)} (${wl.size})</label>`
        );
      })
      .join("");
    host.querySelectorAll("input[data-wordlist]").forEach((input) => {
      input.addEventListener("change", () => {
        const name = (input as HTMLInputElement).dataset.wordlist!;
        const selected = new Set(this.view.selectedWordlists);
        if ((input as HTMLInputElement).checked) selected.add(name);
        else selected.delete(name);
        this.view.selectedWordlists = [...selected].sort();
        void this.guard(async () => {
          await this.refreshBadges();
          await this.refreshUpset();
          this.renderAll();
        });
      });
    });
  }

  private renderSnapshotPanel(): void {
    const host = el("snapshot-items");
    host.innerHTML = this.snapshots
      .map(
        (s) =>
          `<div class="snapshot-row">${escapeXml(s.snapshot_id)} ` +
          `<span>${escapeXml(s.label)}</span>` +
          `<button data-restore="${escapeXml(s.snapshot_id)}">restore</button></div>`,
      )
      .join("");
    host.querySelectorAll("[data-restore]").forEach((button) => {
      button.addEventListener("click", () => {
        const id = (button as HTMLElement).dataset.restore!;
        void this.guard(async () => {
          await this.client.restoreSnapshot(id);
          this.setStatus(`restored ${id}`);
          await this.reloadActive();
        });
      });
    });
  }

  private renderMapPanel(): void {
    const docs = this.view.activeTreeIds
      .map((id) => this.docs.get(id))
      .filter((d): d is TreeDocument => d !== undefined);
    el("map-panel").innerHTML = renderEmbeddingMap(docs, this.view).svg;
  }

  private renderUpsetPanel(): void {
    const host = el("upset-panel");
    host.innerHTML = this.upsetData
      ? renderUpset(this.upsetData).svg
      : "<p class='hint'>select trees and wordlists</p>";
  }

  private renderComparePanel(): void {
    const host = el("compare-stack");
    host.innerHTML = this.compareDocs
      .map((doc) => {
        const span = doc.replacement_span;
        let promptHtml = escapeXml(doc.prompt);
        if (span) {
          promptHtml =
            escapeXml(doc.prompt.slice(0, span[0])) +
            `<mark>${escapeXml(doc.prompt.slice(span[0], span[1]))}</mark>` +
            escapeXml(doc.prompt.slice(span[1]));
        }
        return (
          `<section class="compare-entry">` +
          `<header>${promptHtml}</header>` +
          renderTree(doc, this.view, this.badges).svg +
          `</section>`
        );
      })
      .join("");
  }

  private renderTreemapPanel(): void {
    const selector = el("layer-selector");
    selector.innerHTML = LAYER_ORDER.map(
      (kind) =>
        `<label><input type="radio" name="layer" value="${kind}"` +
        `${kind === this.treemapKind ? " checked" : ""}/>${kind}</label>`,
    ).join("");
    selector.querySelectorAll("input[name=layer]").forEach((input) => {
      input.addEventListener("change", () => {
        this.treemapKind = (input as HTMLInputElement).value as LayerKind;
        this.renderTreemapPanel();
      });
    });

    const host = el("treemap-panel");
    const layerIndex = LAYER_ORDER.indexOf(this.treemapKind);
    const layer = this.treemap[layerIndex];
    if (!layer || layer.cells.length === 0) {
      host.innerHTML = "<p class='hint'>annotate a tree to build the ontology</p>";
      return;
    }

    const cellSvg = (cell: VoronoiCell): string => {
      const points = cell.polygon.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
      const domainRoot = cell.id.split(":")[1]?.split("/")[0] ?? cell.id;
      const highlight = this.hoverCell === cell.id;
      return (
        `<polygon points="${points}" fill="${domainPalette(domainRoot)}" ` +
        `stroke="#fff" stroke-width="${highlight ? 3 : 1}" ` +
        `opacity="${highlight ? 1 : 0.85}" data-cell="${escapeXml(cell.id)}">` +
        `<title>${escapeXml(cell.label)} (${cell.weight})</title></polygon>`
      );
    };
    const labels = layer.cells
      .filter((c) => c.area > 900)
      .map(
        (c) =>
          `<text x="${c.site[0].toFixed(1)}" y="${c.site[1].toFixed(1)}" ` +
          `text-anchor="middle" font-size="10">${escapeXml(c.label)}</text>`,
      );
    host.innerHTML =
      `<svg xmlns="http://www.w3.org/2000/svg" width="360" height="300" viewBox="0 0 360 300">` +
      layer.cells.map(cellSvg).join("") +
      labels.join("") +
      `</svg>`;

    host.querySelectorAll("polygon[data-cell]").forEach((poly) => {
      poly.addEventListener("mouseenter", () => {
        this.hoverCell = (poly as SVGElement).getAttribute("data-cell");
        this.renderTreemapPanel();
      });
      poly.addEventListener("mouseleave", () => {
        this.hoverCell = null;
        this.renderTreemapPanel();
      });
    });
  }
}

export function mount(baseUrl?: string): App {
  const app = new App(baseUrl ?? window.location.origin);
  void app.init();
  return app;
}

declare global {
  interface Window {
    beamtreeApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("tree-panel")) {
  window.beamtreeApp = mount();
}
