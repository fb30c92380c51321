// Transport-agnostic session client: owns the view state, the outbound
// queue, and session-relative timestamps. The browser plugs in a WebSocket
// transport; tests plug in fakes or a raw TCP line transport.

import {
  ClientMessage,
  GraspLabel,
  GsiKind,
  PatternLabel,
  PhaseName,
  ServerMessage,
  decode,
  encode,
} from "./protocol.js";
import { ViewState, applyMessage, initialState } from "./state.js";

export interface Transport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
  readonly connected: boolean;
}

export interface ClientOptions {
  /** Monotonic clock in ms; injectable for tests. */
  now?: () => number;
  /** How long outbound messages may wait for a reconnect before being
   * dropped (with a UI warning). */
  bufferMs?: number;
}

export class SessionClient {
  state: ViewState = initialState();
  private transport: Transport;
  private readonly now: () => number;
  private readonly bufferMs: number;
  private t0: number | null = null;
  private queue: { line: string; queuedAt: number }[] = [];
  private listeners: ((state: ViewState) => void)[] = [];
  private messageListeners: ((msg: ServerMessage) => void)[] = [];
  private lastSentPhase: PhaseName = "Standby";

  constructor(transport: Transport, opts: ClientOptions = {}) {
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

  onUpdate(cb: (state: ViewState) => void): void {
    this.listeners.push(cb);
  }

  /** Raw server messages, for consumers that need more than the view state
   * (e.g. reading the config echo out of the hello ack). */
  onMessage(cb: (msg: ServerMessage) => void): void {
    this.messageListeners.push(cb);
  }

  private emit(): void {
    for (const cb of this.listeners) cb(this.state);
  }

  private handleLine(line: string): void {
    const msg = decode(line);
    if (msg === null) return;
    this.state = applyMessage({ ...this.state, connection: "open" }, msg);
    for (const cb of this.messageListeners) cb(msg);
    this.emit();
  }

  /** Session-relative timestamp in whole milliseconds. */
  t(): number {
    if (this.t0 === null) this.t0 = this.now();
    return Math.max(0, Math.round(this.now() - this.t0));
  }

  private push(msg: ClientMessage): void {
    const line = encode(msg);
    this.queue.push({ line, queuedAt: this.now() });
    this.flush();
  }

  /** Deliver queued messages in order; drop entries older than the buffer
   * window while disconnected and flag the UI. */
  flush(): void {
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
      } catch {
        return; // try again on the next flush
      }
      this.queue.shift();
    }
  }

  hello(gsi: GsiKind, subject = "panel", setIndex: number | null = null): void {
    this.t0 = this.now();
    const msg: ClientMessage = { type: "hello", gsi, subject };
    if (setIndex !== null) msg.set_index = setIndex;
    this.push(msg);
  }

  sendGaze(xCm: number, yCm: number, valid: boolean, t?: number): void {
    this.push({ type: "gaze", t: t ?? this.t(), x: xCm, y: yCm, valid });
  }

  /** Alternates Standby/Operation. No debounce: a double toggle sends both,
   * in order, and they alternate correctly. */
  phaseToggle(t?: number): void {
    const next: PhaseName = this.lastSentPhase === "Standby" ? "Operation" : "Standby";
    this.lastSentPhase = next;
    this.push({ type: "phase", t: t ?? this.t(), phase: next });
  }

  sendCoContraction(t?: number): void {
    this.push({ type: "cocontraction", t: t ?? this.t() });
  }

  sendPattern(label: PatternLabel, t?: number): void {
    this.push({ type: "emg_pattern", t: t ?? this.t(), label });
  }

  sendTap(grasp: GraspLabel, t?: number): void {
    this.push({ type: "tap", t: t ?? this.t(), grasp });
  }

  sendObjectFixation(t?: number): void {
    this.push({ type: "object_fixation", t: t ?? this.t() });
  }

  close(): void {
    this.transport.close();
  }
}
