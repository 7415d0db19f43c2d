/**
 * Search view state machine.
 *
 * Invariants: the overlay can only be entered while a result is selected;
 * at most one search and one explain are in flight, and a newer search
 * cancels the older one.
 */

import type { FilterInputs, SearchResultRow } from "./types.js";

export type OverlayPhase = "off" | "loading" | "playing" | "paused";

export interface OverlayState {
  phase: OverlayPhase;
  frameCursor: number;
  frameCount: number;
  emptyResult: boolean; // every mask empty: "no object found"
}

export interface SearchViewState {
  query: string;
  k: number;
  filters: FilterInputs;
  results: SearchResultRow[];
  selected: SearchResultRow | null;
  banner: string | null; // non-blocking error banner
  overlay: OverlayState;
}

export function initialState(): SearchViewState {
  return {
    query: "",
    k: 10,
    filters: {},
    results: [],
    selected: null,
    banner: null,
    overlay: { phase: "off", frameCursor: 0, frameCount: 0, emptyResult: false },
  };
}

export class SearchStore {
  state: SearchViewState = initialState();
  private searchAbort: AbortController | null = null;
  private explainAbort: AbortController | null = null;
  private listeners: Array<(state: SearchViewState) => void> = [];

  subscribe(listener: (state: SearchViewState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Begin a search, cancelling any in-flight one; returns its signal. */
  beginSearch(query: string, filters: FilterInputs): AbortSignal {
    this.searchAbort?.abort();
    this.searchAbort = new AbortController();
    this.state.query = query;
    this.state.filters = filters;
    this.emit();
    return this.searchAbort.signal;
  }

  searchSucceeded(results: SearchResultRow[]): void {
    this.state.results = results;
    this.state.banner = null;
    // prior selection survives only if it is still in the result set
    if (
      this.state.selected &&
      !results.some((r) => r.video_id === this.state.selected?.video_id)
    ) {
      this.state.selected = null;
      this.closeOverlay();
    }
    this.emit();
  }

  /** Failed searches keep prior results and raise the banner. */
  searchFailed(message: string): void {
    this.state.banner = message;
    this.emit();
  }

  dismissBanner(): void {
    this.state.banner = null;
    this.emit();
  }

  select(row: SearchResultRow | null): void {
    this.state.selected = row;
    if (row === null) this.closeOverlay();
    this.emit();
  }

  /** Overlay entry requires a selected result. */
  beginExplain(): AbortSignal {
    if (!this.state.selected) {
      throw new Error("overlay requires a selected result");
    }
    this.explainAbort?.abort();
    this.explainAbort = new AbortController();
    this.state.overlay = { phase: "loading", frameCursor: 0, frameCount: 0, emptyResult: false };
    this.emit();
    return this.explainAbort.signal;
  }

  overlayFrameArrived(total: number): void {
    this.state.overlay.frameCount = total;
    this.emit();
  }

  overlayReady(frameCount: number, emptyResult: boolean): void {
    this.state.overlay = { phase: "playing", frameCursor: 0, frameCount, emptyResult };
    this.emit();
  }

  overlayFailed(): void {
    this.state.overlay = { phase: "off", frameCursor: 0, frameCount: 0, emptyResult: false };
    this.emit();
  }

  closeOverlay(): void {
    this.explainAbort?.abort();
    this.explainAbort = null;
    this.state.overlay = { phase: "off", frameCursor: 0, frameCount: 0, emptyResult: false };
    this.emit();
  }

  setOverlayPhase(phase: OverlayPhase): void {
    if (phase !== "off" && !this.state.selected) {
      throw new Error("overlay requires a selected result");
    }
    this.state.overlay.phase = phase;
    this.emit();
  }

  stepOverlay(delta: number): void {
    const { frameCount } = this.state.overlay;
    if (frameCount === 0) return;
    const next = (this.state.overlay.frameCursor + delta + frameCount) % frameCount;
    this.state.overlay.frameCursor = next;
    this.emit();
  }
}

const HISTORY_KEY = "mvrs.queryHistory";
const HISTORY_LIMIT = 20;

/** Query history lives in browser storage only. */
export function rememberQuery(storage: Pick<Storage, "getItem" | "setItem">, query: string): void {
  const history = loadHistory(storage).filter((q) => q !== query);
  history.unshift(query);
  storage.setItem(HISTORY_KEY, JSON.stringify(history.slice(0, HISTORY_LIMIT)));
}

export function loadHistory(storage: Pick<Storage, "getItem" | "setItem">): string[] {
  try {
    const raw = storage.getItem(HISTORY_KEY);
    return raw ? (JSON.parse(raw) as string[]) : [];
  } catch {
    return [];
  }
}
