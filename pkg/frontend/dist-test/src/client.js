// Transport-agnostic session client: owns the view state, the outbound
// queue, and session-relative timestamps. The browser plugs in a WebSocket
// transport; tests plug in fakes or a raw TCP line transport.
import { decode, encode, } from "./protocol.js";
import { applyMessage, initialState } from "./state.js";
export class SessionClient {
    constructor(transport, opts = {}) {
        this.state = initialState();
        this.t0 = null;
        this.queue = [];
        this.listeners = [];
        this.messageListeners = [];
        this.lastSentPhase = "Standby";
        this.transport = transport;
        this.now = opts.now ?? (() => performance.now());
        this.bufferMs = opts.bufferMs ?? 1000;
        this.state = { ...this.state, connection: transport.connected ? "open" : "connecting" };
        transport.onLine((line) => this.handleLine(line));
        transport.onClose(() => {
            this.state = { ...this.state, connection: "closed" };
            this.emit();
        });
    }
    onUpdate(cb) {
        this.listeners.push(cb);
    }
    /** Raw server messages, for consumers that need more than the view state
     * (e.g. reading the config echo out of the hello ack). */
    onMessage(cb) {
        this.messageListeners.push(cb);
    }
    emit() {
        for (const cb of this.listeners)
            cb(this.state);
    }
    handleLine(line) {
        const msg = decode(line);
        if (msg === null)
            return;
        this.state = applyMessage({ ...this.state, connection: "open" }, msg);
        for (const cb of this.messageListeners)
            cb(msg);
        this.emit();
    }
    /** Session-relative timestamp in whole milliseconds. */
    t() {
        if (this.t0 === null)
            this.t0 = this.now();
        return Math.max(0, Math.round(this.now() - this.t0));
    }
    push(msg) {
        const line = encode(msg);
        this.queue.push({ line, queuedAt: this.now() });
        this.flush();
    }
    /** Deliver queued messages in order; drop entries older than the buffer
     * window while disconnected and flag the UI. */
    flush() {
        const cutoff = this.now() - this.bufferMs;
        const stale = this.queue.filter((q) => q.queuedAt < cutoff);
        if (!this.transport.connected) {
            if (stale.length > 0) {
                this.queue = this.queue.filter((q) => q.queuedAt >= cutoff);
                if (!this.state.droppedWarning) {
                    this.state = { ...this.state, droppedWarning: true };
                    this.emit();
                }
            }
            return;
        }
        while (this.queue.length > 0) {
            const head = this.queue[0];
            try {
                this.transport.send(head.line);
            }
            catch {
                return; // try again on the next flush
            }
            this.queue.shift();
        }
    }
    hello(gsi, subject = "panel", setIndex = null) {
        this.t0 = this.now();
        const msg = { type: "hello", gsi, subject };
        if (setIndex !== null)
            msg.set_index = setIndex;
        this.push(msg);
    }
    sendGaze(xCm, yCm, valid, t) {
        this.push({ type: "gaze", t: t ?? this.t(), x: xCm, y: yCm, valid });
    }
    /** Alternates Standby/Operation. No debounce: a double toggle sends both,
     * in order, and they alternate correctly. */
    phaseToggle(t) {
        const next = this.lastSentPhase === "Standby" ? "Operation" : "Standby";
        this.lastSentPhase = next;
        this.push({ type: "phase", t: t ?? this.t(), phase: next });
    }
    sendCoContraction(t) {
        this.push({ type: "cocontraction", t: t ?? this.t() });
    }
    sendPattern(label, t) {
        this.push({ type: "emg_pattern", t: t ?? this.t(), label });
    }
    sendTap(grasp, t) {
        this.push({ type: "tap", t: t ?? this.t(), grasp });
    }
    sendObjectFixation(t) {
        this.push({ type: "object_fixation", t: t ?? this.t() });
    }
    close() {
        this.transport.close();
    }
}
