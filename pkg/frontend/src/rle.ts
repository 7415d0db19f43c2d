/**
 * Run-length mask decoding, mirroring the server encoder: row-major scan,
 * alternating background/foreground run lengths, always beginning with the
 * background run (a leading 0 means the mask starts with foreground).
 */

export class RleFormatError extends Error {}

/** Decode one frame's counts into a flat Uint8Array of H*W zeros/ones. */
export function decodeCounts(counts: number[], height: number, width: number): Uint8Array {
  const expected = height * width;
  let total = 0;
  for (const c of counts) {
    if (!Number.isInteger(c) || c < 0) {
      throw new RleFormatError(`bad run length ${c}`);
    }
    total += c;
  }
  if (total !== expected) {
    throw new RleFormatError(
      `run lengths sum to ${total}, expected ${expected} for ${height}x${width}`,
    );
  }
  const out = new Uint8Array(expected);
  let pos = 0;
  let value = 0;
  for (const c of counts) {
    if (value === 1) {
      out.fill(1, pos, pos + c);
    }
    pos += c;
    value ^= 1;
  }
  return out;
}

/** Count foreground pixels without materializing the frame. */
export function foregroundCount(counts: number[]): number {
  let fg = 0;
  for (let i = 1; i < counts.length; i += 2) {
    fg += counts[i] ?? 0;
  }
  return fg;
}

/**
 * Paint a decoded mask as a translucent tint into an RGBA pixel buffer
 * (length 4*H*W, as in canvas ImageData).
 */
export function tintMask(
  pixels: Uint8ClampedArray,
  mask: Uint8Array,
  rgba: [number, number, number, number] = [255, 64, 64, 144],
): void {
  if (pixels.length !== mask.length * 4) {
    throw new RleFormatError(
      `pixel buffer length ${pixels.length} does not match mask of ${mask.length}`,
    );
  }
  const [r, g, b, a] = rgba;
  for (let i = 0; i < mask.length; i++) {
    if (mask[i]) {
      const o = i * 4;
      pixels[o] = r;
      pixels[o + 1] = g;
      pixels[o + 2] = b;
      pixels[o + 3] = a;
    }
  }
}
