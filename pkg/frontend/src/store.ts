/**
 * Builder state and transitions.
 *
 * State mutations happen only through the action methods, each of which
 * pushes an undo snapshot first; failed service calls never change the
 * draft. Snapshots capture the complete editable state (draft, selection,
 * panel, completed branches), so undo restores prior states exactly.
 */

import { ServiceClient, ServiceError } from "./api.js";
import { draftViolations } from "./validate.js";
import {
  EOP,
  START_MODULE,
  type Draft,
  type RecommendResponse,
} from "./types.js";

export interface BuilderState {
  alertKeys: string[] | null;
  draft: Draft;
  selectedNode: string | null;
  lastResponse: RecommendResponse | null;
  /** node ids whose branch was closed by accepting EOP */
  completedBranches: string[];
  error: string | null;
}

type Snapshot = string; // JSON of BuilderState minus error

function emptyDraft(): Draft {
  return { start: "n0", nodes: [{ id: "n0", module: START_MODULE }], edges: [] };
}

function initialState(): BuilderState {
  return {
    alertKeys: null,
    draft: emptyDraft(),
    selectedNode: null,
    lastResponse: null,
    completedBranches: [],
    error: null,
  };
}

export function parseAlertKeys(raw: string): string[] {
  const keys = raw
    .split(/[,\s]+/)
    .map((k) => k.trim())
    .filter((k) => k.length > 0);
  return [...new Set(keys)];
}

export class PlaybookBuilderStore {
  state: BuilderState = initialState();
  private undoStack: Snapshot[] = [];
  private redoStack: Snapshot[] = [];
  private requestToken = 0;
  private listeners: (() => void)[] = [];

  constructor(private readonly client: ServiceClient) {}

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  private snapshot(): Snapshot {
    const { error: _error, ...rest } = this.state;
    return JSON.stringify(rest);
  }

  private restore(snapshot: Snapshot): void {
    this.state = { ...(JSON.parse(snapshot) as Omit<BuilderState, "error">), error: null };
  }

  private pushUndo(): void {
    this.undoStack.push(this.snapshot());
    this.redoStack.length = 0;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  get canRecommend(): boolean {
    return this.state.alertKeys !== null && this.state.selectedNode !== null;
  }

  /** Load an alert from a raw key list; resets the draft to a lone START. */
  loadAlert(raw: string): void {
    const keys = parseAlertKeys(raw);
    if (keys.length === 0) {
      this.state = { ...this.state, error: "alert needs at least one key" };
      this.notify();
      return;
    }
    this.pushUndo();
    this.state = { ...initialState(), alertKeys: keys };
    this.notify();
  }

  selectNode(nodeId: string | null): void {
    if (nodeId !== null && !this.state.draft.nodes.some((n) => n.id === nodeId)) {
      this.state = { ...this.state, error: `no node ${nodeId} in the draft` };
      this.notify();
      return;
    }
    this.state = { ...this.state, selectedNode: nodeId, error: null };
    this.notify();
  }

  /** Ask the service for top-k next modules at the selected node. */
  async requestRecommendations(k: number): Promise<void> {
    if (!this.canRecommend) {
      this.state = { ...this.state, error: "load an alert and select a node first" };
      this.notify();
      return;
    }
    const token = ++this.requestToken;
    try {
      const response = await this.client.recommend(
        this.state.alertKeys!,
        this.state.draft,
        this.state.selectedNode!,
        k,
      );
      if (token !== this.requestToken) return; // superseded by a newer click
      this.state = { ...this.state, lastResponse: response, error: null };
    } catch (err) {
      if (token !== this.requestToken) return;
      const message =
        err instanceof ServiceError ? `${err.code}: ${err.message}` : String(err);
      // draft and panel stay untouched on failure
      this.state = { ...this.state, error: message };
    }
    this.notify();
  }

  private nextNodeId(): string {
    let highest = -1;
    for (const node of this.state.draft.nodes) {
      const m = /^n(\d+)$/.exec(node.id);
      if (m) highest = Math.max(highest, Number(m[1]));
    }
    return `n${highest + 1}`;
  }

  /**
   * Attach the accepted candidate after the selected node; accepting EOP
   * adds nothing and marks the branch complete instead.
   */
  acceptRecommendation(candidate: string): void {
    const current = this.state.selectedNode;
    if (current === null) {
      this.state = { ...this.state, error: "no current node selected" };
      this.notify();
      return;
    }
    this.pushUndo();
    if (candidate === EOP) {
      this.state = {
        ...this.state,
        completedBranches: [...this.state.completedBranches, current],
        selectedNode: null,
        lastResponse: null,
        error: null,
      };
      this.notify();
      return;
    }
    const nodeId = this.nextNodeId();
    const draft: Draft = {
      start: this.state.draft.start,
      nodes: [...this.state.draft.nodes, { id: nodeId, module: candidate }],
      edges: [...this.state.draft.edges, [current, nodeId]],
    };
    const problems = draftViolations(draft);
    if (problems.length > 0) {
      this.undoStack.pop(); // invalid transition: discard the snapshot
      this.state = { ...this.state, error: problems.join("; ") };
      this.notify();
      return;
    }
    this.state = {
      ...this.state,
      draft,
      lastResponse: null,
      error: null,
    };
    this.notify();
  }

  undo(): void {
    const snapshot = this.undoStack.pop();
    if (snapshot === undefined) return;
    this.redoStack.push(this.snapshot());
    this.restore(snapshot);
    this.notify();
  }

  redo(): void {
    const snapshot = this.redoStack.pop();
    if (snapshot === undefined) return;
    this.undoStack.push(this.snapshot());
    this.restore(snapshot);
    this.notify();
  }

  /** playbooks.json-compatible object for download / re-import. */
  exportPlaybook(id: string): {
    id: string;
    start: string;
    nodes: { id: string; module: string }[];
    edges: [string, string][];
  } {
    const problems = draftViolations(this.state.draft);
    if (problems.length > 0) {
      throw new Error(`draft is not exportable: ${problems.join("; ")}`);
    }
    const draft = this.state.draft;
    return {
      id,
      start: draft.start,
      nodes: draft.nodes.map((n) => ({ id: n.id, module: n.module })),
      edges: draft.edges.map((e) => [...e] as [string, string]),
    };
  }
}
