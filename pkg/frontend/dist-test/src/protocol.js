// Wire protocol shared with the session service: one JSON object per line.
// The client only ever *renders* what the service reports; it never decides
// selections locally.
export const GRASPS = [
    "Cylindrical",
    "Spherical",
    "Tripod",
    "Pinch",
    "Lateral",
    "Hook",
];
export const PATTERNS = [
    "WaveIn",
    "WaveOut",
    "Fist",
    "FingersSpread",
    "DoubleTap",
];
export const GSI_KINDS = ["i-gsi", "pr", "fsm", "app"];
const SERVER_TYPES = new Set(["hello", "panel_state", "selection", "command", "trial", "error"]);
export function encode(msg) {
    return JSON.stringify(msg) + "\n";
}
/** Parse one line from the service; returns null for lines we don't know
 * (forward compatibility) rather than throwing mid-stream. */
export function decode(line) {
    let raw;
    try {
        raw = JSON.parse(line);
    }
    catch {
        return null;
    }
    if (typeof raw !== "object" || raw === null)
        return null;
    const msg = raw;
    if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type))
        return null;
    return raw;
}
export function isPanelState(msg) {
    return msg.type === "panel_state";
}
export function isSelection(msg) {
    return msg.type === "selection";
}
export function isCommand(msg) {
    return msg.type === "command";
}
export function isTrial(msg) {
    return msg.type === "trial";
}
export function isError(msg) {
    return msg.type === "error";
}
export function isHelloAck(msg) {
    return msg.type === "hello";
}
