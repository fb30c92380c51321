// Wire protocol shared with the session service: one JSON object per line.
// The client only ever *renders* what the service reports; it never decides
// selections locally.

export type GraspLabel =
  | "Cylindrical"
  | "Spherical"
  | "Tripod"
  | "Pinch"
  | "Lateral"
  | "Hook";

export const GRASPS: GraspLabel[] = [
  "Cylindrical",
  "Spherical",
  "Tripod",
  "Pinch",
  "Lateral",
  "Hook",
];

export type PatternLabel =
  | "WaveIn"
  | "WaveOut"
  | "Fist"
  | "FingersSpread"
  | "DoubleTap"
  | "SyntheticHook";

export const PATTERNS: PatternLabel[] = [
  "WaveIn",
  "WaveOut",
  "Fist",
  "FingersSpread",
  "DoubleTap",
];

export type GsiKind = "i-gsi" | "pr" | "fsm" | "app";
export const GSI_KINDS: GsiKind[] = ["i-gsi", "pr", "fsm", "app"];

export type PhaseName = "Standby" | "Operation";

// --- client -> service ----------------------------------------------------

export interface HelloMsg {
  type: "hello";
  gsi: GsiKind;
  subject?: string;
  set_index?: number | null;
}

export interface GazeMsg {
  type: "gaze";
  t: number;
  x: number;
  y: number;
  valid: boolean;
}

export interface TapMsg {
  type: "tap";
  t: number;
  grasp: GraspLabel;
}

export interface CoContractionMsg {
  type: "cocontraction";
  t: number;
}

export interface PatternMsg {
  type: "emg_pattern";
  t: number;
  label: PatternLabel;
}

export interface PhaseMsg {
  type: "phase";
  t: number;
  phase: PhaseName;
}

export interface FixationMsg {
  type: "object_fixation";
  t: number;
}

export type ClientMessage =
  | HelloMsg
  | GazeMsg
  | TapMsg
  | CoContractionMsg
  | PatternMsg
  | PhaseMsg
  | FixationMsg;

// --- service -> client ----------------------------------------------------

export interface HelloAck {
  type: "hello";
  session: string;
  schema_version: number;
  gsi: GsiKind;
  set_index: number | null;
  n_slots: number | null;
  config: Record<string, unknown>;
}

export interface DwellReadout {
  icon: GraspLabel;
  progress: number;
}

export interface TargetReadout {
  object: number;
  name: string;
  grasp: GraspLabel;
  slot: number;
  scored: boolean;
}

export interface PanelStateMsg {
  type: "panel_state";
  latched: GraspLabel | null;
  dwell: DwellReadout | null;
  phase: PhaseName;
  target: TargetReadout | null;
  complete: boolean;
}

export interface SelectionMsg {
  type: "selection";
  t: number;
  grasp: GraspLabel;
  source: string;
  cause: string;
}

export interface CommandMsg {
  type: "command";
  t: number;
  grasp: GraspLabel;
  seq: number;
  session: string;
}

export interface TrialMsg {
  type: "trial";
  event: "open" | "close";
  t: number;
  slot: number;
  scored: boolean;
  target?: { id: number; name: string; grasp: GraspLabel };
  record?: TrialRecord | null;
}

export interface TrialRecord {
  set_index: number;
  slot_index: number;
  target_grasp: GraspLabel;
  st_seconds: number | null;
  correct: boolean;
  [key: string]: unknown;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage =
  | HelloAck
  | PanelStateMsg
  | SelectionMsg
  | CommandMsg
  | TrialMsg
  | ErrorMsg;

const SERVER_TYPES = new Set(["hello", "panel_state", "selection", "command", "trial", "error"]);

export function encode(msg: ClientMessage): string {
  return JSON.stringify(msg) + "\n";
}

/** Parse one line from the service; returns null for lines we don't know
 * (forward compatibility) rather than throwing mid-stream. */
export function decode(line: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as { type?: unknown };
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) return null;
  return raw as ServerMessage;
}

export function isPanelState(msg: ServerMessage): msg is PanelStateMsg {
  return msg.type === "panel_state";
}

export function isSelection(msg: ServerMessage): msg is SelectionMsg {
  return msg.type === "selection";
}

export function isCommand(msg: ServerMessage): msg is CommandMsg {
  return msg.type === "command";
}

export function isTrial(msg: ServerMessage): msg is TrialMsg {
  return msg.type === "trial";
}

export function isError(msg: ServerMessage): msg is ErrorMsg {
  return msg.type === "error";
}

export function isHelloAck(msg: ServerMessage): msg is HelloAck {
  return msg.type === "hello";
}
