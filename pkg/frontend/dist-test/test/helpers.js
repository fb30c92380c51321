// Test harness: a scriptable fake transport, a raw TCP line transport (the
// service's plain-socket interface), and a spawner for the real service.
import { spawn } from "node:child_process";
import net from "node:net";
import path from "node:path";
import { fileURLToPath } from "node:url";
export const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..", "..");
export class FakeTransport {
    constructor() {
        this.sent = [];
        this.connected = true;
        this.lineCb = () => { };
        this.closeCb = () => { };
    }
    send(line) {
        if (!this.connected)
            throw new Error("transport down");
        this.sent.push(line);
    }
    onLine(cb) {
        this.lineCb = cb;
    }
    onClose(cb) {
        this.closeCb = cb;
    }
    close() {
        this.connected = false;
        this.closeCb();
    }
    /** Deliver a message as if the service had sent it. */
    inject(msg) {
        this.lineCb(JSON.stringify(msg));
    }
    sentTypes() {
        return this.sent.map((line) => JSON.parse(line).type);
    }
}
export class TcpLineTransport {
    constructor(socket) {
        this.buffer = "";
        this.lineCb = () => { };
        this.closeCb = () => { };
        this.connected = false;
        this.socket = socket;
    }
    static connect(port, host = "127.0.0.1") {
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
                    if (line.trim())
                        transport.lineCb(line);
                }
            });
            socket.on("close", () => {
                transport.connected = false;
                transport.closeCb();
            });
        });
    }
    send(line) {
        this.socket.write(line);
    }
    onLine(cb) {
        this.lineCb = cb;
    }
    onClose(cb) {
        this.closeCb = cb;
    }
    close() {
        this.socket.end();
    }
}
/** Start the real session service (port 0 = ephemeral) and wait for its
 * "listening on host:port" line. */
export function startService(args = []) {
    return new Promise((resolve, reject) => {
        const proc = spawn("python3", ["-m", "graspbench.cli", "serve", "--host", "127.0.0.1", "--port", "0", ...args], { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] });
        let out = "";
        let settled = false;
        const timer = setTimeout(() => {
            if (!settled) {
                settled = true;
                proc.kill();
                reject(new Error(`service did not start: ${out}`));
            }
        }, 15000);
        proc.stdout.on("data", (chunk) => {
            out += chunk.toString();
            const match = out.match(/listening on [\d.]+:(\d+)/);
            if (match && !settled) {
                settled = true;
                clearTimeout(timer);
                resolve({
                    port: Number(match[1]),
                    proc,
                    stop: () => new Promise((done) => {
                        proc.once("exit", () => done());
                        proc.kill("SIGTERM");
                        setTimeout(() => proc.kill("SIGKILL"), 2000).unref();
                    }),
                });
            }
        });
        proc.stderr.on("data", (chunk) => {
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
export function runCli(args) {
    return new Promise((resolve) => {
        const proc = spawn("python3", ["-m", "graspbench.cli", ...args], {
            cwd: REPO_ROOT,
            stdio: ["ignore", "pipe", "pipe"],
        });
        let out = "";
        let err = "";
        proc.stdout.on("data", (c) => (out += c.toString()));
        proc.stderr.on("data", (c) => (err += c.toString()));
        proc.once("exit", (code) => resolve({ code: code ?? -1, out, err }));
    });
}
export function waitFor(predicate, timeoutMs = 10000, label = "condition") {
    const start = Date.now();
    return new Promise((resolve, reject) => {
        const poll = () => {
            if (predicate())
                return resolve();
            if (Date.now() - start > timeoutMs)
                return reject(new Error(`timeout waiting for ${label}`));
            setTimeout(poll, 10);
        };
        poll();
    });
}
export function sleep(ms) {
    return new Promise((resolve) => setTimeout(resolve, ms));
}
