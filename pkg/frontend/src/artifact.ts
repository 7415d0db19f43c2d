/** Mask artifact validation and incremental (streaming) parsing. */

import { decodeCounts, RleFormatError } from "./rle.js";
import type { ArtifactFrame, MaskArtifact } from "./types.js";

/** Validate a complete artifact document; throws RleFormatError. */
export function validateArtifact(raw: unknown): MaskArtifact {
  const doc = raw as MaskArtifact;
  if (
    typeof doc !== "object" ||
    doc === null ||
    !Number.isInteger(doc.H) ||
    !Number.isInteger(doc.W) ||
    !Array.isArray(doc.frames)
  ) {
    throw new RleFormatError("malformed mask artifact");
  }
  doc.frames.forEach((frame, i) => {
    if (frame.frame_index !== i || !Array.isArray(frame.counts)) {
      throw new RleFormatError(`artifact frames must be dense; bad entry at ${i}`);
    }
    decodeCounts(frame.counts, doc.H, doc.W); // validates the sum
  });
  return doc;
}

/**
 * Incremental artifact reader: feed text chunks as they stream in; frame
 * entries are surfaced as soon as their JSON objects are complete, and the
 * validated document is returned at the end.
 *
 * The stream is the artifact JSON itself (header, frame objects, footer),
 * so the parser only needs to find balanced {...} groups inside "frames".
 */
export class ArtifactStreamParser {
  private buffer = "";
  private consumed = 0;
  readonly frames: ArtifactFrame[] = [];
  /** Mask dimensions, available as soon as the header has streamed in. */
  dims: { height: number; width: number } | null = null;

  constructor(private readonly onFrame?: (frame: ArtifactFrame, total: number) => void) {}

  push(chunk: string): void {
    this.buffer += chunk;
    if (!this.dims) {
      const h = /"H":\s*(\d+)/.exec(this.buffer);
      const w = /"W":\s*(\d+)/.exec(this.buffer);
      if (h && w) this.dims = { height: Number(h[1]), width: Number(w[1]) };
    }
    this.extractFrames();
  }

  private extractFrames(): void {
    // scan for complete {...} objects after the "frames": [ marker
    const start = this.buffer.indexOf('"frames"');
    if (start < 0) return;
    let pos = Math.max(this.consumed, this.buffer.indexOf("[", start) + 1);
    if (pos <= 0) return;
    while (true) {
      const open = this.buffer.indexOf("{", pos);
      if (open < 0) break;
      // confidences live after the frames array closes
      const closeBracket = this.buffer.indexOf("]", pos);
      if (closeBracket >= 0 && closeBracket < open) break;
      const close = this.buffer.indexOf("}", open);
      if (close < 0) break;
      const text = this.buffer.slice(open, close + 1);
      let frame: ArtifactFrame;
      try {
        frame = JSON.parse(text) as ArtifactFrame;
      } catch {
        break; // object still incomplete
      }
      this.frames.push(frame);
      this.onFrame?.(frame, this.frames.length);
      pos = close + 1;
      this.consumed = pos;
    }
  }

  /** Finish the stream and validate the whole document. */
  finish(): MaskArtifact {
    const doc = JSON.parse(this.buffer) as unknown;
    return validateArtifact(doc);
  }
}
