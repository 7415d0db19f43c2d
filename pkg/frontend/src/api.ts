/** Typed client for the retrieval service; the UI's only backend. */

import { ArtifactStreamParser } from "./artifact.js";
import type {
  ApiErrorBody,
  ArtifactFrame,
  HealthResponse,
  MaskArtifact,
  SearchResponse,
  VideoInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as ApiErrorBody;
    code = body.error.code;
    message = body.error.message;
  } catch {
    // non-envelope body; keep defaults
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  async health(): Promise<HealthResponse> {
    const response = await fetch(`${this.baseUrl}/api/health`);
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as HealthResponse;
  }

  async search(params: URLSearchParams, signal?: AbortSignal): Promise<SearchResponse> {
    const response = await fetch(`${this.baseUrl}/api/search?${params}`, { signal });
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as SearchResponse;
  }

  async video(videoId: string): Promise<VideoInfo> {
    const response = await fetch(`${this.baseUrl}/api/videos/${encodeURIComponent(videoId)}`);
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as VideoInfo;
  }

  /**
   * Request masks for one video; frame entries are surfaced through
   * onFrame as the response streams, and the validated artifact is
   * returned once complete.
   */
  async explain(
    videoId: string,
    query: string,
    options: {
      chunkSize?: number;
      signal?: AbortSignal;
      onFrame?: (
        frame: ArtifactFrame,
        total: number,
        dims: { height: number; width: number } | null,
      ) => void;
    } = {},
  ): Promise<MaskArtifact> {
    const body: Record<string, unknown> = { video_id: videoId, query };
    if (options.chunkSize) body.chunk_size = options.chunkSize;
    const response = await fetch(`${this.baseUrl}/api/explain`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal: options.signal,
    });
    if (!response.ok) throw await toApiError(response);

    const parser = new ArtifactStreamParser((frame, total) =>
      options.onFrame?.(frame, total, parser.dims),
    );
    if (response.body) {
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      while (true) {
        const { done, value } = await reader.read();
        if (done) break;
        parser.push(decoder.decode(value, { stream: true }));
      }
      parser.push(decoder.decode());
    } else {
      parser.push(await response.text());
    }
    return parser.finish();
  }

  async ingest(assetJson: string, frames: File[]): Promise<{ job_id: string }> {
    const form = new FormData();
    form.append("asset", assetJson);
    for (const frame of frames) form.append("frames", frame, frame.name);
    const response = await fetch(`${this.baseUrl}/api/ingest`, { method: "POST", body: form });
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as { job_id: string };
  }
}
