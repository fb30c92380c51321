// View state is a pure function of the server's messages (plus the local
// pointer position, which lives outside this reducer). Latching authority is
// the service's panel_state: nothing in here flips a highlight on its own.

import {
  CommandMsg,
  GraspLabel,
  GsiKind,
  PhaseName,
  ServerMessage,
  TrialRecord,
  isCommand,
  isError,
  isHelloAck,
  isPanelState,
  isSelection,
  isTrial,
} from "./protocol.js";

export interface TrialSummary {
  slot: number;
  correct: boolean;
  stSeconds: number | null;
}

export interface ViewState {
  connection: "idle" | "connecting" | "open" | "closed";
  sessionId: string | null;
  gsi: GsiKind | null;
  phase: PhaseName;
  latched: GraspLabel | null;
  dwellIcon: GraspLabel | null;
  dwellProgress: number;
  target: { object: number; name: string; grasp: GraspLabel; slot: number; scored: boolean } | null;
  nSlots: number | null;
  trials: TrialSummary[];
  lastSt: number | null;
  commands: CommandMsg[];
  lastSelection: { grasp: GraspLabel; cause: string } | null;
  errors: string[];
  droppedWarning: boolean;
  complete: boolean;
}

export function initialState(): ViewState {
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
export function successRate(state: ViewState): number | null {
  if (state.trials.length === 0) return null;
  const correct = state.trials.filter((t) => t.correct).length;
  return correct / state.trials.length;
}

export function medianSt(state: ViewState): number | null {
  const sts = state.trials
    .map((t) => t.stSeconds)
    .filter((v): v is number => v !== null)
    .sort((a, b) => a - b);
  if (sts.length === 0) return null;
  const mid = Math.floor(sts.length / 2);
  return sts.length % 2 === 1 ? sts[mid] : (sts[mid - 1] + sts[mid]) / 2;
}

export function applyMessage(state: ViewState, msg: ServerMessage): ViewState {
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
      const record = msg.record as TrialRecord;
      const summary: TrialSummary = {
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
