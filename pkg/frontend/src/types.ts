/** Wire types of the retrieval service HTTP API. */

export interface SearchResultRow {
  video_id: string;
  score: number;
  rank: number;
  best_timestamp_s: number;
  segment_id: string;
}

export interface SearchResponse {
  results: SearchResultRow[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export interface ArtifactFrame {
  frame_index: number;
  counts: number[];
}

export interface MaskArtifact {
  video_id: string;
  text: string;
  H: number;
  W: number;
  frames: ArtifactFrame[];
  confidences: number[];
}

export interface HealthResponse {
  status: string;
  index_entries: number;
  dim: number;
}

export interface VideoInfo {
  video_id: string;
  source_uri: string;
  fps: number;
  frame_count: number;
  metadata: Record<string, unknown>;
  segments: Array<{
    segment_id: string;
    video_id: string;
    start_frame: number;
    end_frame: number;
    member_count: number;
  }>;
}

/** Filter panel values as entered by the user (strings until validated). */
export interface FilterInputs {
  location?: string;
  from?: string;
  to?: string;
  depthMin?: string;
  depthMax?: string;
  species?: string;
  behavior?: string;
}
