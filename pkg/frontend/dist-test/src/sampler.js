// Pointer-hover as a gaze proxy: a fixed-rate sampler (>= 30 Hz) that emits
// the latest pointer position in panel centimeters. A pointer outside the
// panel still emits valid coordinates (they just hit no icon); a pointer
// that left the window emits tracking-loss samples.
export class GazeSampler {
    constructor(emit, periodMs = 25) {
        this.periodMs = periodMs;
        this.pointer = null;
        this.running = false;
        this.emitSample = emit;
    }
    setPointerCm(xCm, yCm) {
        this.pointer = { x: xCm, y: yCm };
    }
    pointerLeft() {
        this.pointer = null;
    }
    start() {
        this.running = true;
    }
    stop() {
        this.running = false;
    }
    /** Emit one sample; call this on a timer of `periodMs` (or manually in tests). */
    tick() {
        if (!this.running)
            return;
        if (this.pointer === null) {
            this.emitSample(0, 0, false);
        }
        else {
            this.emitSample(this.pointer.x, this.pointer.y, true);
        }
    }
}
