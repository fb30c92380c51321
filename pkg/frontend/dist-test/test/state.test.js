import assert from "node:assert/strict";
import { test } from "node:test";
import { applyMessage, initialState, medianSt, successRate } from "../src/state.js";
const panelState = (over = {}) => ({
    type: "panel_state",
    latched: null,
    dwell: null,
    phase: "Standby",
    target: null,
    complete: false,
    ...over,
});
test("panel_state drives latch, dwell ring and phase", () => {
    let state = initialState();
    state = applyMessage(state, panelState({
        latched: "Tripod",
        dwell: { icon: "Pinch", progress: 0.45 },
        phase: "Operation",
    }));
    assert.equal(state.latched, "Tripod");
    assert.equal(state.dwellIcon, "Pinch");
    assert.equal(state.dwellProgress, 0.45);
    assert.equal(state.phase, "Operation");
});
test("target stimulus exists only while the service reports one", () => {
    let state = initialState();
    state = applyMessage(state, panelState({
        phase: "Operation",
        target: { object: 3, name: "pen", grasp: "Tripod", slot: 2, scored: true },
    }));
    assert.equal(state.target?.name, "pen");
    state = applyMessage(state, panelState({ phase: "Standby", target: null }));
    assert.equal(state.target, null);
});
test("trial closes feed the live ST and SSR readout", () => {
    let state = initialState();
    const close = (slot, st, correct) => ({
        type: "trial",
        event: "close",
        t: 0,
        slot,
        scored: true,
        record: { set_index: 1, slot_index: slot, target_grasp: "Hook", st_seconds: st, correct },
    });
    state = applyMessage(state, close(1, 0.84, true));
    state = applyMessage(state, close(2, 1.2, true));
    state = applyMessage(state, close(3, null, false));
    assert.equal(state.trials.length, 3);
    assert.equal(successRate(state), 2 / 3);
    assert.equal(medianSt(state), (0.84 + 1.2) / 2);
    assert.equal(state.lastSt, null); // last trial had no target selection
});
test("anchor trial close (no record) is not counted", () => {
    let state = initialState();
    state = applyMessage(state, {
        type: "trial", event: "close", t: 0, slot: 0, scored: false, record: null,
    });
    assert.equal(state.trials.length, 0);
    assert.equal(successRate(state), null);
});
test("errors accumulate for display", () => {
    let state = initialState();
    state = applyMessage(state, { type: "error", code: "parse", message: "bad line" });
    assert.deepEqual(state.errors, ["parse: bad line"]);
});
