/**
 * Mask overlay player: decodes per-frame runs and paints a translucent
 * tint onto a canvas, with play/pause/step and a frame scrubber.
 *
 * Painting degrades gracefully when no 2D context is available (e.g. in
 * DOM test environments): frame state still advances.
 */

import { decodeCounts, foregroundCount, tintMask } from "./rle.js";
import type { MaskArtifact } from "./types.js";

export class OverlayPlayer {
  private frames: Uint8Array[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;
  width = 0;
  height = 0;
  cursor = 0;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onFrameChange?: (cursor: number, total: number) => void,
    private readonly fps = 8,
  ) {}

  get frameCount(): number {
    return this.frames.length;
  }

  /** True when every frame of the artifact is empty ("no object found"). */
  static isEmptyArtifact(artifact: MaskArtifact): boolean {
    return artifact.frames.every((frame) => foregroundCount(frame.counts) === 0);
  }

  load(artifact: MaskArtifact): void {
    this.stop();
    this.width = artifact.W;
    this.height = artifact.H;
    this.frames = artifact.frames.map((frame) =>
      decodeCounts(frame.counts, artifact.H, artifact.W),
    );
    this.canvas.width = artifact.W;
    this.canvas.height = artifact.H;
    this.cursor = 0;
    this.paint();
  }

  private context(): CanvasRenderingContext2D | null {
    try {
      return this.canvas.getContext("2d");
    } catch {
      return null;
    }
  }

  paint(): void {
    const mask = this.frames[this.cursor];
    if (!mask) return;
    const ctx = this.context();
    if (ctx) {
      const image = ctx.createImageData(this.width, this.height);
      tintMask(image.data, mask);
      ctx.clearRect(0, 0, this.width, this.height);
      ctx.putImageData(image, 0, 0);
    }
    this.onFrameChange?.(this.cursor, this.frames.length);
  }

  seek(frame: number): void {
    if (this.frames.length === 0) return;
    this.cursor = Math.min(Math.max(frame, 0), this.frames.length - 1);
    this.paint();
  }

  step(delta: number): void {
    if (this.frames.length === 0) return;
    this.cursor = (this.cursor + delta + this.frames.length) % this.frames.length;
    this.paint();
  }

  play(): void {
    if (this.timer !== null || this.frames.length === 0) return;
    this.timer = setInterval(() => this.step(1), 1000 / this.fps);
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  stop(): void {
    this.pause();
    this.cursor = 0;
  }
}
