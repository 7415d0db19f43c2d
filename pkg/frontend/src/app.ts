/**
 * Browser console wiring: search form + filter panel -> result grid ->
 * mask overlay player for the selected result.
 */

import { ApiClient, ApiError } from "./api.js";
import { clearedFilters, searchParams, validateFilters } from "./filters.js";
import { OverlayPlayer } from "./overlay.js";
import { decodeCounts, tintMask } from "./rle.js";
import { loadHistory, rememberQuery, SearchStore } from "./state.js";
import type { FilterInputs, SearchResultRow } from "./types.js";

export interface AppElements {
  query: HTMLInputElement;
  k: HTMLInputElement;
  form: HTMLFormElement;
  queryError: HTMLElement;
  filterError: HTMLElement;
  banner: HTMLElement;
  bannerText: HTMLElement;
  results: HTMLElement;
  emptyState: HTMLElement;
  overlay: HTMLElement;
  overlayTitle: HTMLElement;
  overlayFrame: HTMLImageElement;
  scrubber: HTMLInputElement;
  frameLabel: HTMLElement;
  noObject: HTMLElement;
  health: HTMLElement;
  history: HTMLElement;
}

export interface AppHandles {
  store: SearchStore;
  player: OverlayPlayer;
  submitSearch: () => Promise<void>;
  openOverlay: (row: SearchResultRow) => Promise<void>;
  elements: AppElements;
}

const FILTER_FIELDS: Array<[keyof FilterInputs, string, string]> = [
  ["location", "Location", "text"],
  ["from", "From (UTC)", "datetime-local"],
  ["to", "To (UTC)", "datetime-local"],
  ["depthMin", "Depth min (m)", "number"],
  ["depthMax", "Depth max (m)", "number"],
  ["species", "Species (comma-separated)", "text"],
  ["behavior", "Behavior (comma-separated)", "text"],
];

export function createApp(
  root: HTMLElement,
  client: ApiClient,
  storage: Pick<Storage, "getItem" | "setItem"> = window.localStorage,
): AppHandles {
  const store = new SearchStore();
  root.innerHTML = `
    <header>
      <h1>mvrs console</h1>
      <span id="health" class="health"></span>
    </header>
    <div id="banner" class="banner" hidden>
      <span id="banner-text"></span>
      <button id="banner-retry" type="button">Retry</button>
      <button id="banner-dismiss" type="button">&times;</button>
    </div>
    <form id="search-form">
      <input id="query" type="search" placeholder="Describe what you are looking for" list="history" />
      <datalist id="history"></datalist>
      <input id="k" type="number" min="1" max="100" value="10" title="results" />
      <button type="submit">Search</button>
      <span id="query-error" class="inline-error"></span>
    </form>
    <details id="filters">
      <summary>Filters</summary>
      <div id="filter-fields"></div>
      <button id="clear-filters" type="button">Clear all</button>
      <span id="filter-error" class="inline-error"></span>
    </details>
    <p id="empty-state" hidden>No results. Try a broader query or fewer filters.</p>
    <ul id="results" class="result-grid"></ul>
    <section id="overlay" hidden>
      <h2 id="overlay-title"></h2>
      <div class="player">
        <img id="overlay-frame" alt="" />
        <canvas id="overlay-canvas"></canvas>
      </div>
      <div class="controls">
        <button id="play" type="button">Play</button>
        <button id="pause" type="button">Pause</button>
        <button id="step-back" type="button">&#8249;</button>
        <button id="step-forward" type="button">&#8250;</button>
        <input id="scrubber" type="range" min="0" value="0" />
        <span id="frame-label"></span>
        <button id="overlay-close" type="button">Close</button>
      </div>
      <p id="no-object" hidden>No object found for this query.</p>
    </section>
  `;

  const el = (id: string): HTMLElement => {
    const node = root.querySelector(`#${id}`);
    if (!node) throw new Error(`missing element #${id}`);
    return node as HTMLElement;
  };

  const fieldBox = el("filter-fields");
  for (const [key, label, type] of FILTER_FIELDS) {
    const wrap = document.createElement("label");
    wrap.textContent = label;
    const input = document.createElement("input");
    input.type = type;
    input.id = `filter-${key}`;
    if (type === "number") input.step = "any";
    wrap.appendChild(input);
    fieldBox.appendChild(wrap);
  }

  const elements: AppElements = {
    query: el("query") as HTMLInputElement,
    k: el("k") as HTMLInputElement,
    form: el("search-form") as HTMLFormElement,
    queryError: el("query-error"),
    filterError: el("filter-error"),
    banner: el("banner"),
    bannerText: el("banner-text"),
    results: el("results"),
    emptyState: el("empty-state"),
    overlay: el("overlay"),
    overlayTitle: el("overlay-title"),
    overlayFrame: el("overlay-frame") as HTMLImageElement,
    scrubber: el("scrubber") as HTMLInputElement,
    frameLabel: el("frame-label"),
    noObject: el("no-object"),
    health: el("health"),
    history: el("history"),
  };

  const canvas = el("overlay-canvas") as HTMLCanvasElement;
  const scrubber = elements.scrubber;
  const frameImg = elements.overlayFrame;
  const fpsByVideo = new Map<string, number>();

  const player = new OverlayPlayer(canvas, (cursor, total) => {
    store.state.overlay.frameCursor = cursor;
    scrubber.value = String(cursor);
    elements.frameLabel.textContent = `${cursor + 1} / ${total}`;
    const selected = store.state.selected;
    if (selected) {
      frameImg.setAttribute(
        "src",
        `${client.baseUrl}/api/frames/${encodeURIComponent(selected.video_id)}/${cursor}`,
      );
    }
  });

  function currentFilters(): FilterInputs {
    const filters: FilterInputs = {};
    for (const [key] of FILTER_FIELDS) {
      const input = root.querySelector(`#filter-${key}`) as HTMLInputElement;
      if (input.value.trim() !== "") filters[key] = input.value.trim();
    }
    return filters;
  }

  function renderHistory(): void {
    elements.history.innerHTML = loadHistory(storage)
      .map((q) => `<option value="${escapeHtml(q)}"></option>`)
      .join("");
  }

  function renderResults(): void {
    const rows = store.state.results;
    elements.emptyState.hidden = rows.length > 0;
    elements.results.innerHTML = "";
    for (const row of rows) {
      const item = document.createElement("li");
      item.className = "result-card";
      item.dataset.videoId = row.video_id;
      const thumb = document.createElement("img");
      thumb.className = "thumb";
      thumb.alt = `frame of ${row.video_id}`;
      void thumbnailSource(row).then((src) => {
        if (src) thumb.setAttribute("src", src);
      });
      const caption = document.createElement("div");
      caption.innerHTML =
        `<strong>#${row.rank}</strong> ${escapeHtml(row.video_id)}` +
        `<br/>score ${row.score.toFixed(4)} at ${row.best_timestamp_s.toFixed(2)}s`;
      const explainBtn = document.createElement("button");
      explainBtn.type = "button";
      explainBtn.className = "explain";
      explainBtn.textContent = "Explain";
      explainBtn.addEventListener("click", () => void openOverlay(row));
      item.append(thumb, caption, explainBtn);
      elements.results.appendChild(item);
    }
  }

  async function thumbnailSource(row: SearchResultRow): Promise<string | null> {
    try {
      let fps = fpsByVideo.get(row.video_id);
      if (fps === undefined) {
        fps = (await client.video(row.video_id)).fps;
        fpsByVideo.set(row.video_id, fps);
      }
      const frame = Math.round(row.best_timestamp_s * fps);
      return `${client.baseUrl}/api/frames/${encodeURIComponent(row.video_id)}/${frame}`;
    } catch {
      return null;
    }
  }

  async function submitSearch(): Promise<void> {
    const query = elements.query.value;
    elements.queryError.textContent = "";
    elements.filterError.textContent = "";
    if (query.trim() === "") {
      elements.queryError.textContent = "Enter a query first.";
      return; // inline validation: no request
    }
    const filters = currentFilters();
    const validation = validateFilters(filters);
    if (!validation.ok) {
      elements.filterError.textContent = validation.errors.join("; ");
      return; // inline validation: no request
    }
    const k = Number(elements.k.value) || 10;
    const signal = store.beginSearch(query, filters);
    try {
      const response = await client.search(searchParams(query, k, filters), signal);
      rememberQuery(storage, query.trim());
      renderHistory();
      store.searchSucceeded(response.results);
    } catch (error) {
      if ((error as Error).name === "AbortError") return; // superseded
      const message =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      store.searchFailed(message); // prior results stay on screen
    }
  }

  async function openOverlay(row: SearchResultRow): Promise<void> {
    store.select(row);
    const signal = store.beginExplain();
    elements.overlayTitle.textContent = `${row.video_id} — "${store.state.query}"`;
    try {
      const artifact = await client.explain(row.video_id, store.state.query, {
        signal,
        onFrame: (frame, total, dims) => {
          store.overlayFrameArrived(total);
          if (dims) paintStreamedFrame(frame.counts, dims, row.video_id, total - 1);
        },
      });
      player.load(artifact);
      scrubber.max = String(Math.max(artifact.frames.length - 1, 0));
      store.overlayReady(artifact.frames.length, OverlayPlayer.isEmptyArtifact(artifact));
      player.play();
    } catch (error) {
      if ((error as Error).name === "AbortError") return;
      store.overlayFailed();
      markResultError(row.video_id, error);
    }
  }

  function paintStreamedFrame(
    counts: number[],
    dims: { height: number; width: number },
    videoId: string,
    frameIndex: number,
  ): void {
    // live preview while the artifact streams: show the newest mask over
    // its frame so early chunks are visible before the last one computes
    canvas.width = dims.width;
    canvas.height = dims.height;
    frameImg.setAttribute(
      "src",
      `${client.baseUrl}/api/frames/${encodeURIComponent(videoId)}/${frameIndex}`,
    );
    elements.frameLabel.textContent = `streaming ${frameIndex + 1}…`;
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = canvas.getContext("2d");
    } catch {
      ctx = null;
    }
    if (!ctx) return;
    const image = ctx.createImageData(dims.width, dims.height);
    tintMask(image.data, decodeCounts(counts, dims.height, dims.width));
    ctx.putImageData(image, 0, 0);
  }

  function markResultError(videoId: string, error: unknown): void {
    const card = elements.results.querySelector(`[data-video-id="${cssEscape(videoId)}"]`);
    if (card) {
      const chip = document.createElement("span");
      chip.className = "error-chip";
      chip.textContent =
        error instanceof ApiError ? `${error.status} ${error.code}` : "explain failed";
      card.appendChild(chip);
    }
  }

  store.subscribe((state) => {
    elements.banner.hidden = state.banner === null;
    elements.bannerText.textContent = state.banner ?? "";
    elements.overlay.hidden = state.overlay.phase === "off";
    elements.noObject.hidden = !state.overlay.emptyResult;
  });

  el("banner-dismiss").addEventListener("click", () => store.dismissBanner());
  el("banner-retry").addEventListener("click", () => void submitSearch());
  elements.form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitSearch();
  });
  el("clear-filters").addEventListener("click", () => {
    for (const [key] of FILTER_FIELDS) {
      (root.querySelector(`#filter-${key}`) as HTMLInputElement).value = "";
    }
    Object.assign(store.state.filters, clearedFilters());
    elements.filterError.textContent = "";
  });
  el("play").addEventListener("click", () => {
    player.play();
    store.setOverlayPhase("playing");
  });
  el("pause").addEventListener("click", () => {
    player.pause();
    store.setOverlayPhase("paused");
  });
  el("step-back").addEventListener("click", () => {
    player.pause();
    player.step(-1);
    store.setOverlayPhase("paused");
  });
  el("step-forward").addEventListener("click", () => {
    player.pause();
    player.step(1);
    store.setOverlayPhase("paused");
  });
  scrubber.addEventListener("input", () => {
    player.pause();
    player.seek(Number(scrubber.value));
  });
  el("overlay-close").addEventListener("click", () => {
    player.stop();
    store.closeOverlay();
  });

  renderHistory();
  let renderedResults = store.state.results;
  store.subscribe((state) => {
    // the grid re-renders only when the result set itself changes (state
    // also emits per streamed overlay frame, which must not rebuild it)
    if (state.results !== renderedResults) {
      renderedResults = state.results;
      renderResults();
    }
  });
  void client
    .health()
    .then((h) => {
      elements.health.textContent = `${h.index_entries} segments, dim ${h.dim}`;
    })
    .catch(() => {
      elements.health.textContent = "service unreachable";
    });

  return { store, player, submitSearch, openOverlay, elements };
}

function escapeHtml(text: string): string {
  return text.replace(
    /[&<>"']/g,
    (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;" })[c] as string,
  );
}

function cssEscape(text: string): string {
  return text.replace(/["\\]/g, "\\$&");
}
