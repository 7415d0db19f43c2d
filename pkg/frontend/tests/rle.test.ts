import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { validateArtifact } from "../src/artifact.js";
import { decodeCounts, foregroundCount, RleFormatError, tintMask } from "../src/rle.js";
import type { MaskArtifact } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

interface GoldenCase {
  height: number;
  width: number;
  counts: number[];
  pixels_b64: string;
}

const goldenCases = JSON.parse(
  readFileSync(join(here, "golden", "rle_cases.json"), "utf-8"),
) as GoldenCase[];

describe("decodeCounts", () => {
  it("matches the server encoder byte-for-byte on every golden case", () => {
    for (const goldenCase of goldenCases) {
      const expected = Uint8Array.from(Buffer.from(goldenCase.pixels_b64, "base64"));
      const decoded = decodeCounts(goldenCase.counts, goldenCase.height, goldenCase.width);
      expect(Buffer.from(decoded).equals(Buffer.from(expected))).toBe(true);
    }
  });

  it("decodes the hand fixtures of the wire format", () => {
    expect(Array.from(decodeCounts([2, 3, 1], 1, 6))).toEqual([0, 0, 1, 1, 1, 0]);
    expect(Array.from(decodeCounts([4], 2, 2))).toEqual([0, 0, 0, 0]);
    expect(Array.from(decodeCounts([0, 1, 2, 1], 1, 4))).toEqual([1, 0, 0, 1]);
  });

  it("rejects counts with the wrong total", () => {
    expect(() => decodeCounts([3], 2, 2)).toThrow(RleFormatError);
  });

  it("rejects negative or fractional runs", () => {
    expect(() => decodeCounts([-1, 5], 2, 2)).toThrow(RleFormatError);
    expect(() => decodeCounts([1.5, 2.5], 2, 2)).toThrow(RleFormatError);
  });
});

describe("foregroundCount", () => {
  it("counts odd-position runs", () => {
    expect(foregroundCount([2, 3, 1])).toBe(3);
    expect(foregroundCount([4])).toBe(0);
    expect(foregroundCount([0, 4])).toBe(4);
  });
});

describe("tintMask", () => {
  it("paints only foreground pixels", () => {
    const mask = Uint8Array.from([0, 1, 1, 0]);
    const pixels = new Uint8ClampedArray(16);
    tintMask(pixels, mask, [255, 0, 0, 128]);
    expect(Array.from(pixels.slice(0, 4))).toEqual([0, 0, 0, 0]);
    expect(Array.from(pixels.slice(4, 8))).toEqual([255, 0, 0, 128]);
    expect(Array.from(pixels.slice(12, 16))).toEqual([0, 0, 0, 0]);
  });

  it("rejects mismatched buffers", () => {
    expect(() => tintMask(new Uint8ClampedArray(8), Uint8Array.from([1]))).toThrow(
      RleFormatError,
    );
  });
});

describe("validateArtifact", () => {
  const artifact = JSON.parse(
    readFileSync(join(here, "golden", "stub_artifact.json"), "utf-8"),
  ) as MaskArtifact;

  it("accepts the golden stub artifact", () => {
    const doc = validateArtifact(artifact);
    expect(doc.frames).toHaveLength(40);
    expect(doc.confidences.length).toBeGreaterThan(0);
  });

  it("rejects artifacts whose counts do not sum to H*W", () => {
    const broken = structuredClone(artifact);
    broken.frames[0]!.counts = [1];
    expect(() => validateArtifact(broken)).toThrow(RleFormatError);
  });

  it("rejects non-dense frame lists", () => {
    const broken = structuredClone(artifact);
    broken.frames[1]!.frame_index = 7;
    expect(() => validateArtifact(broken)).toThrow(RleFormatError);
  });
});
