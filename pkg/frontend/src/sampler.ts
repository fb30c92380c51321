// Pointer-hover as a gaze proxy: a fixed-rate sampler (>= 30 Hz) that emits
// the latest pointer position in panel centimeters. A pointer outside the
// panel still emits valid coordinates (they just hit no icon); a pointer
// that left the window emits tracking-loss samples.

export type GazeEmitter = (xCm: number, yCm: number, valid: boolean) => void;

export class GazeSampler {
  private emitSample: GazeEmitter;
  private pointer: { x: number; y: number } | null = null;
  private running = false;

  constructor(emit: GazeEmitter, public readonly periodMs = 25) {
    this.emitSample = emit;
  }

  setPointerCm(xCm: number, yCm: number): void {
    this.pointer = { x: xCm, y: yCm };
  }

  pointerLeft(): void {
    this.pointer = null;
  }

  start(): void {
    this.running = true;
  }

  stop(): void {
    this.running = false;
  }

  /** Emit one sample; call this on a timer of `periodMs` (or manually in tests). */
  tick(): void {
    if (!this.running) return;
    if (this.pointer === null) {
      this.emitSample(0, 0, false);
    } else {
      this.emitSample(this.pointer.x, this.pointer.y, true);
    }
  }
}
