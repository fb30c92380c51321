// Browser wiring: WebSocket transport, canvas panel rendering, and the
// per-mode input affordances (hover-dwell, co-contraction key, pattern
// buttons, direct tap).
import { SessionClient } from "./client.js";
import { DEFAULT_PANEL, cmToPx, geometryFromConfig, hitTest, iconRect, panelSizeCm, pointerToCm, } from "./geometry.js";
import { PATTERNS, isHelloAck } from "./protocol.js";
import { GazeSampler } from "./sampler.js";
import { initialState, medianSt, successRate } from "./state.js";
class WebSocketTransport {
    constructor(url, onOpen) {
        this.lineCb = () => { };
        this.closeCb = () => { };
        this.open = false;
        this.ws = new WebSocket(url);
        this.ws.onopen = () => {
            this.open = true;
            onOpen();
        };
        this.ws.onmessage = (ev) => {
            for (const line of String(ev.data).split("\n")) {
                if (line.trim())
                    this.lineCb(line);
            }
        };
        this.ws.onclose = () => {
            this.open = false;
            this.closeCb();
        };
    }
    get connected() {
        return this.open;
    }
    send(line) {
        this.ws.send(line);
    }
    onLine(cb) {
        this.lineCb = cb;
    }
    onClose(cb) {
        this.closeCb = cb;
    }
    close() {
        this.ws.close();
    }
}
const $ = (id) => document.getElementById(id);
let client = null;
let sampler = null;
let samplerTimer = null;
let geometry = DEFAULT_PANEL;
let mode = "i-gsi";
let fixationSentForSlot = null;
const canvas = $("panel");
const ctx = canvas.getContext("2d");
function mapping() {
    const pxPerCm = Number($("scale").value) || 40;
    const [w] = panelSizeCm(geometry);
    const offX = (canvas.width - w * pxPerCm) / 2;
    return { pxPerCm, panelOffsetPx: [offX, 60] };
}
function connect() {
    client?.close();
    const url = $("url").value;
    mode = $("mode").value;
    const setIndexRaw = $("set-index").value.trim();
    const setIndex = setIndexRaw === "" ? null : Number(setIndexRaw);
    const transport = new WebSocketTransport(url, () => {
        client.hello(mode, "panel", setIndex);
        client.flush();
    });
    client = new SessionClient(transport);
    client.onMessage((msg) => {
        if (isHelloAck(msg))
            geometry = geometryFromConfig(msg.config);
    });
    client.onUpdate(render);
    fixationSentForSlot = null;
    startSampler();
    renderModeControls();
    render(client.state);
}
function startSampler() {
    if (samplerTimer !== null)
        window.clearInterval(samplerTimer);
    sampler = new GazeSampler((x, y, valid) => {
        if (client !== null && mode === "i-gsi")
            client.sendGaze(x, y, valid);
    }, 25);
    sampler.start();
    samplerTimer = window.setInterval(() => sampler.tick(), 25);
}
canvas.addEventListener("pointermove", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const [x, y] = pointerToCm(ev.clientX - rect.left, ev.clientY - rect.top, mapping());
    sampler?.setPointerCm(x, y);
});
canvas.addEventListener("pointerleave", () => sampler?.pointerLeft());
canvas.addEventListener("click", (ev) => {
    if (client === null || mode !== "app")
        return;
    const rect = canvas.getBoundingClientRect();
    const [x, y] = pointerToCm(ev.clientX - rect.left, ev.clientY - rect.top, mapping());
    const grasp = hitTest(geometry, x, y);
    if (grasp !== null)
        client.sendTap(grasp);
});
document.addEventListener("keydown", (ev) => {
    if (client === null)
        return;
    if (ev.key === "Enter") {
        client.phaseToggle();
        fixationSentForSlot = null;
    }
    if (ev.key === " " && mode === "fsm") {
        ev.preventDefault();
        client.sendCoContraction();
    }
    const patternIndex = Number(ev.key) - 1;
    if (mode === "pr" && patternIndex >= 0 && patternIndex < PATTERNS.length) {
        client.sendPattern(PATTERNS[patternIndex]);
    }
});
$("connect").addEventListener("click", connect);
$("phase").addEventListener("click", () => {
    client?.phaseToggle();
    fixationSentForSlot = null;
});
$("stimulus").addEventListener("pointerenter", () => {
    // eyes land on the object card: anchor the trial timer
    const target = client?.state.target;
    if (client && target && fixationSentForSlot !== target.slot) {
        fixationSentForSlot = target.slot;
        client.sendObjectFixation();
    }
});
function renderModeControls() {
    const box = $("pattern-buttons");
    box.innerHTML = "";
    if (mode === "pr") {
        PATTERNS.forEach((label, i) => {
            const btn = document.createElement("button");
            btn.textContent = `${i + 1}: ${label}`;
            btn.addEventListener("click", () => client?.sendPattern(label));
            box.appendChild(btn);
        });
    }
    if (mode === "fsm") {
        const btn = document.createElement("button");
        btn.textContent = "co-contraction (Space)";
        btn.addEventListener("click", () => client?.sendCoContraction());
        box.appendChild(btn);
    }
}
function render(state) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const m = mapping();
    ctx.font = "16px sans-serif";
    ctx.fillStyle = state.phase === "Operation" ? "#2a7" : "#777";
    ctx.fillText(`phase: ${state.phase}  (Enter toggles)`, 10, 20);
    ctx.fillStyle = "#333";
    ctx.fillText(`connection: ${state.connection}${state.droppedWarning ? "  [events dropped]" : ""}`, 10, 40);
    for (const grasp of geometry.order) {
        const r = iconRect(geometry, grasp);
        const [x0, y0] = cmToPx(r.x0, r.y0, m);
        const [x1, y1] = cmToPx(r.x1, r.y1, m);
        ctx.fillStyle = state.latched === grasp ? "#cfe8ff" : "#f2f2f2";
        ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
        ctx.strokeStyle = state.latched === grasp ? "#1565c0" : "#999";
        ctx.lineWidth = state.latched === grasp ? 3 : 1;
        ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
        ctx.fillStyle = "#222";
        ctx.font = "13px sans-serif";
        ctx.fillText(grasp, x0 + 6, (y0 + y1) / 2 + 4);
        // dwell progress ring, exactly as the service reports it
        if (state.dwellIcon === grasp && state.dwellProgress > 0) {
            const cx = (x0 + x1) / 2;
            const cy = (y0 + y1) / 2;
            ctx.beginPath();
            ctx.strokeStyle = "#e67e22";
            ctx.lineWidth = 4;
            ctx.arc(cx, cy, (x1 - x0) / 2 - 4, -Math.PI / 2, -Math.PI / 2 + 2 * Math.PI * state.dwellProgress);
            ctx.stroke();
        }
    }
    // target stimulus is visible only during Operation
    const stimulus = $("stimulus");
    if (state.phase === "Operation" && state.target !== null) {
        stimulus.textContent = `target: ${state.target.name} (slot ${state.target.slot}${state.target.scored ? "" : ", anchor"})`;
        stimulus.className = "stimulus visible";
    }
    else {
        stimulus.textContent = "target hidden in standby";
        stimulus.className = "stimulus hidden";
    }
    const ssr = successRate(state);
    const med = medianSt(state);
    $("readout").textContent =
        `trials ${state.trials.length}${state.nSlots ? "/" + (state.nSlots - 1) : ""}` +
            `  last ST ${state.lastSt === null ? "-" : state.lastSt.toFixed(2) + " s"}` +
            `  median ST ${med === null ? "-" : med.toFixed(2) + " s"}` +
            `  SSR ${ssr === null ? "-" : (100 * ssr).toFixed(1) + "%"}` +
            `  commands ${state.commands.length}` +
            (state.complete ? "  [set complete]" : "");
    $("errors").textContent = state.errors.slice(-3).join(" | ");
}
window.addEventListener("load", () => render(initialState()));
