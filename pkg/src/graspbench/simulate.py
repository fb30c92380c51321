"""Synthetic operators that drive the switching back-ends closed-loop.

A user model samples a visual-search time (lognormal) and fixed per-action
motor times, then produces the input events a person would: a gaze stream
dwelling on the target icon, a run of co-contractions, muscle patterns with
corrective re-attempts when feedback reveals a recognition error, or a tap.
Events pass through a real :class:`~graspbench.session.Session`, so simulated
logs are schema-identical to live ones and replay the same way.

Practice is modeled as a per-set multiplicative factor ``set_index ** log2(b)``
applied to every human action time, which makes per-set mean switching time
follow the power-law experience curve with learning efficiency ``100 * b``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .backends import (
    CoContraction,
    EmgPattern,
    FeedbackConfig,
    PatternInput,
    PrErrorModel,
    Tap,
    pattern_for_grasp,
)
from .domain import Catalog, GazeSample, Grasp, Phase, PhaseEvent, TrialRecord, cycle_distance, default_catalog
from .dwell import PanelLayout
from .analytics import SessionData
from .sequencer import SequenceSet, Suite, derive_seed
from .session import LogWriter, Session, SessionConfig
from .wire import ObjectFixation

FIXATION_DELAY_MS = 80  # operation entry -> eyes land on the object
EXIT_DELAY_MS = 150  # final action -> operator turns away
STANDBY_GAP_MS = 1200  # standby dwell between trials


class SimulationError(ValueError):
    pass


def _default_pattern_times() -> dict[EmgPattern, float]:
    return {
        EmgPattern.WAVE_IN: 0.44,
        EmgPattern.WAVE_OUT: 0.46,
        EmgPattern.FIST: 0.50,
        EmgPattern.FINGERS_SPREAD: 0.54,
        EmgPattern.DOUBLE_TAP: 0.62,
        EmgPattern.SYNTHETIC_HOOK: 0.54,
    }


@dataclass
class UserModel:
    """Reaction-time model of one synthetic operator.

    Defaults are calibrated so that simulated median switching times land near
    published reference interfaces of this kind (gaze-dwell fastest, cycling
    slowest); that is calibration, not validation. ``visual_search`` is the
    only stochastic component; motor times are fixed per action.
    """

    visual_search_median_s: float = 0.64
    visual_search_sigma: float = 0.25
    dwell_fixation_s: float = 0.35  # how long gaze is willing to hold an icon
    cocontraction_s: float = 0.9036
    pattern_formation_s: dict[EmgPattern, float] = field(default_factory=_default_pattern_times)
    tap_s: float = 0.36
    pattern_error_prob: float = 0.0
    correction_latency_s: float = 0.30
    learning_b: float = 1.0  # per-doubling practice ratio; 1.0 = no learning
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("visual_search_median_s", "dwell_fixation_s", "cocontraction_s", "tap_s", "correction_latency_s"):
            if getattr(self, name) <= 0:
                raise SimulationError(f"{name} must be > 0")
        if any(v <= 0 for v in self.pattern_formation_s.values()):
            raise SimulationError("pattern formation times must be > 0")
        if not 0.0 <= self.pattern_error_prob <= 1.0:
            raise SimulationError("pattern_error_prob must be in [0, 1]")
        if self.visual_search_sigma < 0 or self.learning_b <= 0:
            raise SimulationError("visual_search_sigma must be >= 0 and learning_b > 0")

    def practice_factor(self, set_index: int) -> float:
        return float(set_index) ** math.log2(self.learning_b)

    def draw_search_ms(self, rng: random.Random, factor: float) -> int:
        median = self.visual_search_median_s * factor
        if self.visual_search_sigma == 0.0:
            return max(1, round(median * 1000))
        return max(1, round(rng.lognormvariate(math.log(median), self.visual_search_sigma) * 1000))

    def to_dict(self) -> dict:
        return {
            "visual_search_median_s": self.visual_search_median_s,
            "visual_search_sigma": self.visual_search_sigma,
            "dwell_fixation_s": self.dwell_fixation_s,
            "cocontraction_s": self.cocontraction_s,
            "pattern_formation_s": {k.value: v for k, v in self.pattern_formation_s.items()},
            "tap_s": self.tap_s,
            "pattern_error_prob": self.pattern_error_prob,
            "correction_latency_s": self.correction_latency_s,
            "learning_b": self.learning_b,
            "rng_seed": self.rng_seed,
        }


@dataclass
class SimConfig:
    n_subjects: int = 8
    gsi_kinds: tuple[str, ...] = ("i-gsi", "pr", "fsm", "app")
    feedback_enabled: bool = True
    max_corrections: int = 3
    seed: int = 0
    gaze_rate_hz: float = 50.0
    set_indices: Optional[tuple[int, ...]] = None  # None = every set in the suite

    def __post_init__(self):
        if self.n_subjects < 1:
            raise SimulationError("n_subjects must be >= 1")
        if self.gaze_rate_hz <= 0:
            raise SimulationError("gaze_rate_hz must be > 0")


# --------------------------------------------------------------------------
# Single-trial drive
# --------------------------------------------------------------------------

def _drive_window(
    session: Session,
    model: UserModel,
    rng: random.Random,
    t_enter: int,
    *,
    gaze_rate_hz: float,
    max_corrections: int,
    set_index_for_practice: int,
) -> int:
    """Open an operation window, act, close it. Returns the standby timestamp."""
    out, _ = session.process(PhaseEvent(t_enter, Phase.OPERATION))
    target_obj = session.current_target
    t_fix = t_enter + FIXATION_DELAY_MS
    last_t = t_fix
    if target_obj is not None:
        session.process(ObjectFixation(t_fix))
        factor = model.practice_factor(set_index_for_practice)
        search_ms = model.draw_search_ms(rng, factor)
        t_ready = t_fix + search_ms
        last_t = _act(session, model, rng, target_obj.grasp, t_ready, factor,
                      gaze_rate_hz=gaze_rate_hz, max_corrections=max_corrections)
    t_exit = last_t + EXIT_DELAY_MS
    session.process(PhaseEvent(t_exit, Phase.STANDBY))
    return t_exit


def _selected_grasp(outputs: Sequence[dict]) -> Optional[str]:
    for msg in outputs:
        if msg.get("type") == "selection":
            return msg["grasp"]
    return None


def _act(
    session: Session,
    model: UserModel,
    rng: random.Random,
    target: Grasp,
    t_ready: int,
    factor: float,
    *,
    gaze_rate_hz: float,
    max_corrections: int,
) -> int:
    """Issue back-end inputs from ``t_ready`` until done; returns the last event time."""
    kind = session.config.gsi_kind
    if kind == "i-gsi":
        period = max(1, round(1000.0 / gaze_rate_hz))
        hold_ms = max(1, round(model.dwell_fixation_s * factor * 1000))
        x, y = session.config.layout.icon_center(target)
        t = t_ready
        while t <= t_ready + hold_ms:
            out, _ = session.process(GazeSample(t, x, y, True))
            if _selected_grasp(out) is not None:
                return t
            t += period
        return t - period  # gave up below threshold: no selection this window

    if kind == "fsm":
        steps = cycle_distance(session.latched_grasp, target, session.config.cycle_order)
        step_ms = max(1, round(model.cocontraction_s * factor * 1000))
        t = t_ready
        for _ in range(steps):
            t += step_ms
            session.process(CoContraction(t))
        return t if steps else t_ready

    if kind == "pr":
        allow_hook = session.config.pr_model.allow_synthetic_hook
        pattern = pattern_for_grasp(target, allow_hook)
        form_ms = max(1, round(model.pattern_formation_s[pattern] * factor * 1000))
        retry_ms = max(1, round((model.correction_latency_s + model.pattern_formation_s[pattern]) * factor * 1000))
        t = t_ready + form_ms
        out, _ = session.process(PatternInput(t, pattern))
        attempts_left = max_corrections if session.config.feedback.enabled else 0
        while _selected_grasp(out) != target.value and attempts_left > 0:
            attempts_left -= 1
            t += retry_ms
            out, _ = session.process(PatternInput(t, pattern))
        return t

    if kind == "app":
        t = t_ready + max(1, round(model.tap_s * factor * 1000))
        session.process(Tap(t, target))
        return t

    raise SimulationError(f"unknown GSI kind: {kind!r}")


def simulate_trial(
    model: UserModel,
    gsi_kind: str,
    target: Grasp,
    prior_latched: Optional[Grasp] = None,
    *,
    feedback_enabled: bool = True,
    max_corrections: int = 3,
    allow_synthetic_hook: bool = True,
    gaze_rate_hz: float = 50.0,
    seed: int = 0,
    catalog: Optional[Catalog] = None,
) -> tuple[list[dict], Optional[TrialRecord]]:
    """One standalone switch attempt against a fresh single-trial session.

    Returns the generated event transcript and the scored record. The cycling
    back-end starts from ``prior_latched`` (its configured initial otherwise).
    """
    catalog = catalog or default_catalog()
    target_obj = next(o for o in catalog if o.grasp is target)
    config = SessionConfig(
        gsi_kind=gsi_kind,
        subject_id="sim",
        set_index=1,
        fsm_initial=prior_latched or Grasp.CYLINDRICAL,
        pr_model=PrErrorModel(
            error_prob=model.pattern_error_prob,
            rng_seed=derive_seed(seed, "pr"),
            allow_synthetic_hook=allow_synthetic_hook,
        ),
        feedback=FeedbackConfig(enabled=feedback_enabled),
    )
    # two slots: an anchor (never opened) then the scored target slot
    anchor_obj = next(o for o in catalog if o.grasp is not target)
    seq = SequenceSet(1, (anchor_obj.id, target_obj.id))
    session = Session(config, sequence_set=seq, catalog=catalog, session_id="sim-trial")
    rng = random.Random(derive_seed(seed, "trial"))
    session._slot_ptr = 1  # skip the anchor: drive the scored slot directly
    _drive_window(
        session, model, rng, 1000,
        gaze_rate_hz=gaze_rate_hz, max_corrections=max_corrections, set_index_for_practice=1,
    )
    return session.events, (session.records[0] if session.records else None)


# --------------------------------------------------------------------------
# Whole experiments
# --------------------------------------------------------------------------

@dataclass
class SimSession:
    session_id: str
    gsi_kind: str
    subject_id: str
    set_index: int
    records: list[TrialRecord]
    log_path: Optional[Path] = None
    events: Optional[list[dict]] = None

    def data(self, suite_seed: Optional[int] = None) -> SessionData:
        return SessionData(self.gsi_kind, self.subject_id, self.set_index, self.records, suite_seed)


def simulate_session(
    suite: Suite,
    set_index: int,
    gsi_kind: str,
    subject_id: str,
    model: UserModel,
    sim: SimConfig,
    *,
    write_dir: Optional[Path] = None,
    retain_events: bool = False,
) -> SimSession:
    """Run one (subject, GSI, set) session; deterministic in the seeds."""
    session_id = f"{subject_id}-{gsi_kind}-set{set_index:02d}"
    session_seed = derive_seed(sim.seed, model.rng_seed, subject_id, gsi_kind, set_index)
    config = SessionConfig(
        gsi_kind=gsi_kind,
        subject_id=subject_id,
        set_index=set_index,
        suite_seed=suite.config.seed,
        fsm_initial=suite.config.initial_grasp,
        cycle_order=suite.config.cycle_order,
        pr_model=PrErrorModel(
            error_prob=model.pattern_error_prob,
            rng_seed=derive_seed(session_seed, "pr"),
            allow_synthetic_hook=True,
        ),
        feedback=FeedbackConfig(enabled=sim.feedback_enabled),
    )
    writer = None
    log_path = None
    if write_dir is not None:
        write_dir = Path(write_dir)
        write_dir.mkdir(parents=True, exist_ok=True)
        log_path = write_dir / f"{session_id}.jsonl"
        writer = LogWriter(log_path)
    session = Session(
        config,
        sequence_set=suite.get_set(set_index),
        catalog=suite.catalog,
        session_id=session_id,
        event_writer=writer,
        retain_events=retain_events,
    )
    rng = random.Random(derive_seed(session_seed, "drive"))
    t = 1000
    n_slots = len(suite.get_set(set_index).slots)
    for _ in range(n_slots):
        t_exit = _drive_window(
            session, model, rng, t,
            gaze_rate_hz=sim.gaze_rate_hz,
            max_corrections=sim.max_corrections,
            set_index_for_practice=set_index,
        )
        t = t_exit + STANDBY_GAP_MS
    if writer is not None:
        writer.close()
    return SimSession(
        session_id=session_id,
        gsi_kind=gsi_kind,
        subject_id=subject_id,
        set_index=set_index,
        records=session.records,
        log_path=log_path,
        events=session.events if retain_events else None,
    )


def run_experiment(
    sim: SimConfig,
    suite: Suite,
    models: Optional[dict[str, UserModel]] = None,
    *,
    write_dir: Optional[Path] = None,
    retain_events: bool = False,
) -> list[SimSession]:
    """The full factorial: every virtual subject runs every configured GSI over
    every set. 8 subjects x 4 GSIs x 30 sets of 23 scored slots = 22080 trials.
    Fully deterministic under ``sim.seed``; sessions are independent and merge
    in (subject, gsi, set) order.
    """
    subjects = [f"vs{i + 1:02d}" for i in range(sim.n_subjects)]
    if models is None:
        models = {s: UserModel(rng_seed=i + 1) for i, s in enumerate(subjects)}
    set_indices = sim.set_indices or tuple(s.set_index for s in suite.sets)
    sessions: list[SimSession] = []
    for subject in subjects:
        model = models[subject]
        for gsi_kind in sim.gsi_kinds:
            for set_index in set_indices:
                sessions.append(
                    simulate_session(
                        suite, set_index, gsi_kind, subject, model, sim,
                        write_dir=write_dir, retain_events=retain_events,
                    )
                )
    return sessions


def sessions_to_data(sessions: Sequence[SimSession], suite_seed: Optional[int] = None) -> list[SessionData]:
    return [s.data(suite_seed) for s in sessions]
