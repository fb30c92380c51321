// Test harness: a scriptable fake transport, a raw TCP line transport (the
// service's plain-socket interface), and a spawner for the real service.

import { ChildProcess, spawn } from "node:child_process";
import net from "node:net";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { Transport } from "../src/client.js";

export const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..", "..");

export class FakeTransport implements Transport {
  sent: string[] = [];
  connected = true;
  private lineCb: (line: string) => void = () => {};
  private closeCb: () => void = () => {};

  send(line: string): void {
    if (!this.connected) throw new Error("transport down");
    this.sent.push(line);
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  close(): void {
    this.connected = false;
    this.closeCb();
  }

  /** Deliver a message as if the service had sent it. */
  inject(msg: unknown): void {
    this.lineCb(JSON.stringify(msg));
  }

  sentTypes(): string[] {
    return this.sent.map((line) => JSON.parse(line).type as string);
  }
}

export class TcpLineTransport implements Transport {
  private socket: net.Socket;
  private buffer = "";
  private lineCb: (line: string) => void = () => {};
  private closeCb: () => void = () => {};
  connected = false;

  private constructor(socket: net.Socket) {
    this.socket = socket;
  }

  static connect(port: number, host = "127.0.0.1"): Promise<TcpLineTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ port, host });
      const transport = new TcpLineTransport(socket);
      socket.once("connect", () => {
        transport.connected = true;
        resolve(transport);
      });
      socket.once("error", reject);
      socket.on("data", (chunk) => {
        transport.buffer += chunk.toString("utf-8");
        let idx;
        while ((idx = transport.buffer.indexOf("\n")) >= 0) {
          const line = transport.buffer.slice(0, idx);
          transport.buffer = transport.buffer.slice(idx + 1);
          if (line.trim()) transport.lineCb(line);
        }
      });
      socket.on("close", () => {
        transport.connected = false;
        transport.closeCb();
      });
    });
  }

  send(line: string): void {
    this.socket.write(line);
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  close(): void {
    this.socket.end();
  }
}

export interface ServiceHandle {
  port: number;
  proc: ChildProcess;
  stop(): Promise<void>;
}

/** Start the real session service (port 0 = ephemeral) and wait for its
 * "listening on host:port" line. */
export function startService(args: string[] = []): Promise<ServiceHandle> {
  return new Promise((resolve, reject) => {
    const proc = spawn(
      "python3",
      ["-m", "graspbench.cli", "serve", "--host", "127.0.0.1", "--port", "0", ...args],
      { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
    );
    let out = "";
    let settled = false;
    const timer = setTimeout(() => {
      if (!settled) {
        settled = true;
        proc.kill();
        reject(new Error(`service did not start: ${out}`));
      }
    }, 15000);
    proc.stdout!.on("data", (chunk) => {
      out += chunk.toString();
      const match = out.match(/listening on [\d.]+:(\d+)/);
      if (match && !settled) {
        settled = true;
        clearTimeout(timer);
        resolve({
          port: Number(match[1]),
          proc,
          stop: () =>
            new Promise<void>((done) => {
              proc.once("exit", () => done());
              proc.kill("SIGTERM");
              setTimeout(() => proc.kill("SIGKILL"), 2000).unref();
            }),
        });
      }
    });
    proc.stderr!.on("data", (chunk) => {
      out += chunk.toString();
    });
    proc.once("exit", (code) => {
      if (!settled) {
        settled = true;
        clearTimeout(timer);
        reject(new Error(`service exited early (${code}): ${out}`));
      }
    });
  });
}

export function runCli(args: string[]): Promise<{ code: number; out: string; err: string }> {
  return new Promise((resolve) => {
    const proc = spawn("python3", ["-m", "graspbench.cli", ...args], {
      cwd: REPO_ROOT,
      stdio: ["ignore", "pipe", "pipe"],
    });
    let out = "";
    let err = "";
    proc.stdout!.on("data", (c) => (out += c.toString()));
    proc.stderr!.on("data", (c) => (err += c.toString()));
    proc.once("exit", (code) => resolve({ code: code ?? -1, out, err }));
  });
}

export function waitFor(predicate: () => boolean, timeoutMs = 10000, label = "condition"): Promise<void> {
  const start = Date.now();
  return new Promise((resolve, reject) => {
    const poll = () => {
      if (predicate()) return resolve();
      if (Date.now() - start > timeoutMs) return reject(new Error(`timeout waiting for ${label}`));
      setTimeout(poll, 10);
    };
    poll();
  });
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
