"""Session orchestration: phase machine, phase-gated input routing, trial
timing and scoring, append-only event logging, and deterministic replay.

A session runs one presentation set (24 slots). The operator alternates
between Standby and Operation; each Operation window presents one slot.
Slot 0 is an unscored anchor that puts the hand into a known grasp; the 23
following slots are scored as trials. Inputs arriving during Standby are
logged but never reach the selection engine, so no selection can ever be
timestamped inside a Standby interval.

Logs are newline-delimited JSON: a header line holding the full effective
config (including the presentation slots and catalog), then one line per
event in processing order. Trial records are a pure function of the header
and the input events, which is what makes byte-exact replay possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .backends import (
    Backend,
    CoContraction,
    FeedbackConfig,
    GsiInput,
    InputMismatchError,
    PatternInput,
    PrErrorModel,
    Tap,
    make_backend,
)
from .domain import (
    CYCLE_ORDER,
    Catalog,
    Cause,
    GazeSample,
    Grasp,
    ObjectItem,
    Phase,
    PhaseEvent,
    SelectionEvent,
    TrialRecord,
    cycle_distance,
    default_catalog,
    parse_grasp,
    validate_cycle_order,
)
from .dwell import DwellConfig, PanelLayout
from .sequencer import SequenceSet
from .wire import ObjectFixation, SessionInput, input_to_msg, msg_to_input, selection_to_msg

LOG_SCHEMA_VERSION = 1


class SessionError(ValueError):
    pass


class PhaseAlternationError(SessionError):
    pass


class OutOfOrderEventError(SessionError):
    pass


# --------------------------------------------------------------------------
# Phase classification from a head-yaw angle
# --------------------------------------------------------------------------

def classify_phase(
    angle_deg: float,
    prev: Phase,
    threshold_deg: float = 90.0,
    hysteresis_deg: float = 10.0,
) -> Phase:
    """Angle-driven phase with a hysteresis band that holds the previous phase.

    Angles well below the threshold (facing the table) mean Operation; well
    above (facing away) mean Standby; inside the band the phase is sticky, so
    a constant angle can never oscillate.
    """
    if not 0.0 <= angle_deg <= 180.0:
        raise SessionError(f"angle out of range [0, 180]: {angle_deg}")
    if not 0.0 <= hysteresis_deg < threshold_deg:
        raise SessionError("hysteresis must be non-negative and below the threshold")
    if angle_deg < threshold_deg - hysteresis_deg:
        return Phase.OPERATION
    if angle_deg > threshold_deg + hysteresis_deg:
        return Phase.STANDBY
    return prev


# --------------------------------------------------------------------------
# Config
# --------------------------------------------------------------------------

@dataclass
class SessionConfig:
    gsi_kind: str = "i-gsi"
    subject_id: str = "anon"
    set_index: Optional[int] = None
    suite_seed: Optional[int] = None
    dwell: DwellConfig = field(default_factory=DwellConfig)
    layout: PanelLayout = field(default_factory=PanelLayout)
    fsm_initial: Grasp = Grasp.CYLINDRICAL
    cycle_order: tuple[Grasp, ...] = CYCLE_ORDER
    pr_model: PrErrorModel = field(default_factory=PrErrorModel)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    phase_threshold_deg: float = 90.0
    phase_hysteresis_deg: float = 10.0
    st_anchor: str = "auto"  # "auto": first fixation if seen, else operation entry

    def __post_init__(self):
        self.cycle_order = validate_cycle_order(self.cycle_order)
        if not 0.0 <= self.phase_hysteresis_deg < self.phase_threshold_deg:
            raise SessionError("phase hysteresis must be non-negative and below the threshold")
        if self.st_anchor not in ("auto", "operation_enter"):
            raise SessionError(f"unknown st_anchor rule: {self.st_anchor!r}")

    def to_dict(self) -> dict:
        return {
            "gsi_kind": self.gsi_kind,
            "subject_id": self.subject_id,
            "set_index": self.set_index,
            "suite_seed": self.suite_seed,
            "dwell": self.dwell.to_dict(),
            "layout": self.layout.to_dict(),
            "fsm_initial": self.fsm_initial.value,
            "cycle_order": [g.value for g in self.cycle_order],
            "pr_model": self.pr_model.to_dict(),
            "feedback": self.feedback.to_dict(),
            "phase_threshold_deg": self.phase_threshold_deg,
            "phase_hysteresis_deg": self.phase_hysteresis_deg,
            "st_anchor": self.st_anchor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        return cls(
            gsi_kind=str(d.get("gsi_kind", "i-gsi")),
            subject_id=str(d.get("subject_id", "anon")),
            set_index=None if d.get("set_index") is None else int(d["set_index"]),
            suite_seed=None if d.get("suite_seed") is None else int(d["suite_seed"]),
            dwell=DwellConfig.from_dict(d.get("dwell", {})),
            layout=PanelLayout.from_dict(d.get("layout", {})),
            fsm_initial=parse_grasp(d.get("fsm_initial", "Cylindrical")),
            cycle_order=tuple(parse_grasp(g) for g in d.get("cycle_order", [g.value for g in CYCLE_ORDER])),
            pr_model=PrErrorModel.from_dict(d.get("pr_model", {})),
            feedback=FeedbackConfig(enabled=bool(d.get("feedback", {}).get("enabled", True))),
            phase_threshold_deg=float(d.get("phase_threshold_deg", 90.0)),
            phase_hysteresis_deg=float(d.get("phase_hysteresis_deg", 10.0)),
            st_anchor=str(d.get("st_anchor", "auto")),
        )


# --------------------------------------------------------------------------
# Trial scoring
# --------------------------------------------------------------------------

def score_trial(
    *,
    set_index: int,
    slot_index: int,
    target: ObjectItem,
    t_operation_enter: int,
    t_operation_exit: int,
    selections: Sequence[SelectionEvent],
    t_first_fixation: Optional[int] = None,
    st_anchor: str = "auto",
    steps_required: Optional[int] = None,
) -> TrialRecord:
    """Score one closed trial window.

    The switching time runs from the anchor (first fixation on the object if
    one was observed and the rule allows it, otherwise operation entry) to the
    last selection of the target grasp. Correctness is judged on the grasp
    latched when the window closed. A fixation reported only after that final
    target selection cannot anchor the trial (the anchor falls back to
    operation entry), which keeps ST non-negative for any event order.
    """
    selections = tuple(selections)
    final = selections[-1].grasp if selections else None
    correct = final is target.grasp
    target_hits = [s for s in selections if s.grasp is target.grasp]
    anchor_ok = t_first_fixation is not None and (
        not target_hits or t_first_fixation <= target_hits[-1].t
    )
    if st_anchor == "auto" and anchor_ok:
        t0, anchor_used = t_first_fixation, "fixation"
    else:
        t0, anchor_used = t_operation_enter, "operation_enter"
    st_ms = (target_hits[-1].t - t0) if target_hits else None
    errors = sum(1 for s in selections[:-1] if s.grasp is not target.grasp) if selections else 0
    return TrialRecord(
        set_index=set_index,
        slot_index=slot_index,
        target_object=target.id,
        target_grasp=target.grasp,
        t_operation_enter=t_operation_enter,
        t_operation_exit=t_operation_exit,
        selections=selections,
        t_first_fixation=t_first_fixation,
        final_grasp=final,
        st_ms=st_ms,
        st_anchor=anchor_used,
        correct=correct,
        error_count=errors,
        steps_required=steps_required,
    )


# --------------------------------------------------------------------------
# The session
# --------------------------------------------------------------------------

@dataclass
class _TrialWindow:
    slot_index: int
    target: ObjectItem
    t_enter: int
    steps_required: Optional[int]
    t_first_fixation: Optional[int] = None
    selections: list[SelectionEvent] = field(default_factory=list)


class Session:
    """One experiment (or free-play) session: a single logical event loop.

    All inputs are processed in arrival order; event timestamps must be
    non-decreasing. Every processed event is appended to the log through
    ``event_writer``; ``process`` returns the output messages (selections and
    trial boundaries) the event produced, plus command records for the sink.
    """

    def __init__(
        self,
        config: SessionConfig,
        sequence_set: Optional[SequenceSet] = None,
        catalog: Optional[Catalog] = None,
        session_id: str = "s0",
        event_writer: Optional[Callable[[dict], None]] = None,
        retain_events: bool = True,
    ):
        if sequence_set is not None and config.set_index is not None:
            if sequence_set.set_index != config.set_index:
                raise SessionError("sequence set does not match config.set_index")
        self.config = config
        self.session_id = session_id
        self.catalog = catalog or default_catalog()
        self.sequence_set = sequence_set
        self.backend: Backend = make_backend(
            config.gsi_kind,
            dwell_config=config.dwell,
            layout=config.layout,
            fsm_initial=config.fsm_initial,
            cycle_order=config.cycle_order,
            pr_model=config.pr_model,
        )
        self.phase = Phase.STANDBY
        self.records: list[TrialRecord] = []
        self.command_seq = 0
        self.events: list[dict] = []
        self._retain = retain_events
        self._writer = event_writer
        self._trial: Optional[_TrialWindow] = None
        self._slot_ptr = 0
        self._last_t: Optional[int] = None
        self._latched: Optional[Grasp] = None
        self._log(self.header())

    # -- log plumbing ------------------------------------------------------

    def header(self) -> dict:
        return {
            "type": "header",
            "schema_version": LOG_SCHEMA_VERSION,
            "session_id": self.session_id,
            "gsi_kind": self.config.gsi_kind,
            "subject_id": self.config.subject_id,
            "suite_seed": self.config.suite_seed,
            "config": self.config.to_dict(),
            "sequence_slots": None if self.sequence_set is None else list(self.sequence_set.slots),
            "catalog": self.catalog.to_json(),
        }

    def _log(self, msg: dict) -> None:
        if self._retain:
            self.events.append(msg)
        if self._writer is not None:
            self._writer(msg)

    # -- state exposed to the service layer --------------------------------

    @property
    def latched_grasp(self) -> Optional[Grasp]:
        if self.config.gsi_kind == "fsm":
            return self.backend.current  # the hand is always in some cycle state
        return self._latched

    @property
    def current_target(self) -> Optional[ObjectItem]:
        if self._trial is not None:
            return self._trial.target
        return None

    @property
    def complete(self) -> bool:
        return (
            self.sequence_set is not None
            and self._trial is None
            and self._slot_ptr >= len(self.sequence_set.slots)
        )

    def panel_state(self) -> dict:
        dwell = None
        icon = self.backend.dwell_icon
        if icon is not None:
            dwell = {"icon": icon.value, "progress": round(self.backend.dwell_progress, 4)}
        target = None
        if self.phase is Phase.OPERATION and self._trial is not None:
            target = {
                "object": self._trial.target.id,
                "name": self._trial.target.name,
                "grasp": self._trial.target.grasp.value,
                "slot": self._trial.slot_index,
                "scored": self._trial.slot_index > 0,
            }
        latched = self.latched_grasp
        return {
            "type": "panel_state",
            "latched": None if latched is None else latched.value,
            "dwell": dwell,
            "phase": self.phase.value,
            "target": target,
            "complete": self.complete,
        }

    # -- event processing ---------------------------------------------------

    def process(self, event: SessionInput) -> tuple[list[dict], list[dict]]:
        """Feed one input event. Returns (output log messages, command records)."""
        t = event.t
        if self._last_t is not None and t < self._last_t:
            raise OutOfOrderEventError(f"event at t={t} after t={self._last_t}")
        self._last_t = t

        if isinstance(event, PhaseEvent):
            return self._on_phase(event), []
        self._log(input_to_msg(event))
        if isinstance(event, ObjectFixation):
            if self._trial is not None and self._trial.t_first_fixation is None:
                self._trial.t_first_fixation = event.t
            return [], []
        return self._route_input(event)

    def _route_input(self, event: GsiInput) -> tuple[list[dict], list[dict]]:
        self.backend.check_accepts(event)
        if self.phase is not Phase.OPERATION:
            return [], []  # standby: logged above, deliberately inert
        selections = self.backend.handle(event)
        out: list[dict] = []
        commands: list[dict] = []
        for sel in selections:
            window = self._trial.selections if self._trial is not None else []
            if window and self.backend.reselect_is_correction:
                sel = sel.as_correction()
            if self._trial is not None:
                self._trial.selections.append(sel)
            self._latched = sel.grasp
            msg = selection_to_msg(sel)
            self._log(msg)
            out.append(msg)
            commands.append(self._command_record(sel))
        return out, commands

    def _command_record(self, sel: SelectionEvent) -> dict:
        self.command_seq += 1
        return {"t": sel.t, "grasp": sel.grasp.value, "seq": self.command_seq, "session": self.session_id}

    def _on_phase(self, event: PhaseEvent) -> list[dict]:
        if event.phase is self.phase:
            raise PhaseAlternationError(f"duplicate phase event: {event.phase.value}")
        self._log(input_to_msg(event))
        self.phase = event.phase
        if event.phase is Phase.OPERATION:
            return self._open_trial(event.t)
        return self._close_trial(event.t)

    def _open_trial(self, t: int) -> list[dict]:
        if self.sequence_set is None or self._slot_ptr >= len(self.sequence_set.slots):
            return []
        target = self.catalog.get(self.sequence_set.slots[self._slot_ptr])
        steps = None
        if self.config.gsi_kind == "fsm":
            steps = cycle_distance(self.backend.current, target.grasp, self.config.cycle_order)
        self._trial = _TrialWindow(
            slot_index=self._slot_ptr,
            target=target,
            t_enter=t,
            steps_required=steps,
        )
        msg = {
            "type": "trial",
            "event": "open",
            "t": t,
            "slot": self._slot_ptr,
            "target": target.to_dict(),
            "scored": self._slot_ptr > 0,
        }
        self._log(msg)
        return [msg]

    def _close_trial(self, t: int) -> list[dict]:
        if self._trial is None:
            return []
        window = self._trial
        self._trial = None
        self._slot_ptr += 1
        record = None
        if window.slot_index > 0:  # slot 0 is the unscored anchor presentation
            record = score_trial(
                set_index=self.config.set_index or 0,
                slot_index=window.slot_index,
                target=window.target,
                t_operation_enter=window.t_enter,
                t_operation_exit=t,
                selections=window.selections,
                t_first_fixation=window.t_first_fixation,
                st_anchor=self.config.st_anchor,
                steps_required=window.steps_required,
            )
            self.records.append(record)
        msg = {
            "type": "trial",
            "event": "close",
            "t": t,
            "slot": window.slot_index,
            "scored": window.slot_index > 0,
            "record": None if record is None else record.to_dict(),
        }
        self._log(msg)
        return [msg]


# --------------------------------------------------------------------------
# Log files and replay
# --------------------------------------------------------------------------

def write_log(path: str | Path, events: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for msg in events:
            fh.write(json.dumps(msg, sort_keys=True, separators=(",", ":")) + "\n")


def read_log(path: str | Path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    out = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise SessionError(f"{path}:{i + 1}: invalid json: {e}") from None
    if not out or out[0].get("type") != "header":
        raise SessionError(f"{path}: first line must be a header")
    return out


class LogWriter:
    """Streams session events to a JSONL file as they happen."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8")

    def __call__(self, msg: dict) -> None:
        self._fh.write(json.dumps(msg, sort_keys=True, separators=(",", ":")) + "\n")

    def close(self) -> None:
        self._fh.close()


INPUT_TYPES = ("gaze", "tap", "cocontraction", "emg_pattern", "phase", "object_fixation")
OUTPUT_TYPES = ("selection", "trial")


@dataclass
class ReplayResult:
    ok: bool
    n_events: int
    records: list[TrialRecord]
    divergence: Optional[dict] = None

    def describe(self) -> str:
        if self.ok:
            return f"replay ok: {self.n_events} events, {len(self.records)} trial records"
        d = self.divergence or {}
        return (
            f"replay diverged at line {d.get('line')}: "
            f"logged {json.dumps(d.get('logged'), sort_keys=True)} != "
            f"recomputed {json.dumps(d.get('recomputed'), sort_keys=True)}"
        )


def session_from_header(header: dict, event_writer=None, retain_events: bool = False) -> Session:
    config = SessionConfig.from_dict(header["config"])
    catalog = Catalog.from_json(header["catalog"])
    slots = header.get("sequence_slots")
    seq = None
    if slots is not None:
        seq = SequenceSet(config.set_index or 0, tuple(int(s) for s in slots))
    return Session(
        config,
        sequence_set=seq,
        catalog=catalog,
        session_id=str(header.get("session_id", "s0")),
        event_writer=event_writer,
        retain_events=retain_events,
    )


def _canon(msg: dict) -> str:
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


def replay_events(events: Sequence[dict]) -> ReplayResult:
    """Re-run a recorded session from its input events and compare every
    recomputed output (selections, trial boundaries, records) against the log.

    The first divergent line is reported; a log with any mutated event fails
    either on a direct mismatch or on leftover/missing outputs at the end.
    """
    if not events or events[0].get("type") != "header":
        raise SessionError("log must start with a header line")
    header = events[0]
    if header.get("schema_version") != LOG_SCHEMA_VERSION:
        raise SessionError(f"unsupported log schema_version: {header.get('schema_version')!r}")
    session = session_from_header(header)
    pending: list[dict] = []

    for line_no, msg in enumerate(events[1:], start=2):
        mtype = msg.get("type")
        if mtype in INPUT_TYPES:
            if pending:  # the log is missing an output the input stream implies
                return ReplayResult(
                    False,
                    len(events),
                    session.records,
                    {"line": line_no, "logged": msg, "recomputed": pending[0]},
                )
            out, _commands = session.process(msg_to_input(msg))
            pending.extend(out)
        elif mtype in OUTPUT_TYPES:
            if not pending:
                return ReplayResult(
                    False,
                    len(events),
                    session.records,
                    {"line": line_no, "logged": msg, "recomputed": None},
                )
            got = pending.pop(0)
            if _canon(got) != _canon(msg):
                return ReplayResult(
                    False,
                    len(events),
                    session.records,
                    {"line": line_no, "logged": msg, "recomputed": got},
                )
        else:
            return ReplayResult(
                False,
                len(events),
                session.records,
                {"line": line_no, "logged": msg, "recomputed": None, "reason": "unknown event type"},
            )
    if pending:
        return ReplayResult(
            False,
            len(events),
            session.records,
            {"line": len(events) + 1, "logged": None, "recomputed": pending[0]},
        )
    return ReplayResult(True, len(events), session.records)


def replay_log(path: str | Path) -> ReplayResult:
    return replay_events(read_log(path))


def load_session_data(path: str | Path):
    """Scored trial records plus grouping labels from a session log, without
    re-running it (use :func:`replay_log` for integrity checking)."""
    from .analytics import SessionData

    events = read_log(path)
    header = events[0]
    config = header["config"]
    records = [
        TrialRecord.from_dict(msg["record"])
        for msg in events[1:]
        if msg.get("type") == "trial" and msg.get("event") == "close" and msg.get("record")
    ]
    return SessionData(
        gsi_kind=str(config["gsi_kind"]),
        subject_id=str(config["subject_id"]),
        set_index=int(config["set_index"] or 0),
        records=records,
        suite_seed=config.get("suite_seed"),
    )
