// View state is a pure function of the server's messages (plus the local
// pointer position, which lives outside this reducer). Latching authority is
// the service's panel_state: nothing in here flips a highlight on its own.
import { isCommand, isError, isHelloAck, isPanelState, isSelection, isTrial, } from "./protocol.js";
export function initialState() {
    return {
        connection: "idle",
        sessionId: null,
        gsi: null,
        phase: "Standby",
        latched: null,
        dwellIcon: null,
        dwellProgress: 0,
        target: null,
        nSlots: null,
        trials: [],
        lastSt: null,
        commands: [],
        lastSelection: null,
        errors: [],
        droppedWarning: false,
        complete: false,
    };
}
/** Live success rate over scored trials seen so far; null before the first. */
export function successRate(state) {
    if (state.trials.length === 0)
        return null;
    const correct = state.trials.filter((t) => t.correct).length;
    return correct / state.trials.length;
}
export function medianSt(state) {
    const sts = state.trials
        .map((t) => t.stSeconds)
        .filter((v) => v !== null)
        .sort((a, b) => a - b);
    if (sts.length === 0)
        return null;
    const mid = Math.floor(sts.length / 2);
    return sts.length % 2 === 1 ? sts[mid] : (sts[mid - 1] + sts[mid]) / 2;
}
export function applyMessage(state, msg) {
    if (isHelloAck(msg)) {
        return {
            ...state,
            sessionId: msg.session,
            gsi: msg.gsi,
            nSlots: msg.n_slots,
        };
    }
    if (isPanelState(msg)) {
        return {
            ...state,
            latched: msg.latched,
            dwellIcon: msg.dwell ? msg.dwell.icon : null,
            dwellProgress: msg.dwell ? msg.dwell.progress : 0,
            phase: msg.phase,
            target: msg.target,
            complete: msg.complete,
        };
    }
    if (isSelection(msg)) {
        return { ...state, lastSelection: { grasp: msg.grasp, cause: msg.cause } };
    }
    if (isCommand(msg)) {
        return { ...state, commands: [...state.commands, msg] };
    }
    if (isTrial(msg)) {
        if (msg.event === "close" && msg.record) {
            const record = msg.record;
            const summary = {
                slot: record.slot_index,
                correct: record.correct,
                stSeconds: record.st_seconds,
            };
            return {
                ...state,
                trials: [...state.trials, summary],
                lastSt: record.st_seconds,
            };
        }
        return state;
    }
    if (isError(msg)) {
        return { ...state, errors: [...state.errors, `${msg.code}: ${msg.message}`] };
    }
    return state;
}
