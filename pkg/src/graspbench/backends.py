"""The four grasp-switching back-ends behind one small interface.

* gaze-dwell ("i-gsi"): wraps the dwell engine;
* sequential cycling ("fsm"): one forward cycle step per co-contraction;
* pattern mapping ("pr"): five muscle patterns map one-to-one onto the first
  five grasps; recognition is stubbed behind an injectable error model;
* direct tap ("app"): immediate selection of the tapped grasp.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

from .domain import (
    CYCLE_ORDER,
    Cause,
    GazeSample,
    Grasp,
    SelectionEvent,
    Source,
    validate_cycle_order,
)
from .dwell import DwellConfig, DwellEngine, PanelLayout

GSI_KINDS = ("i-gsi", "pr", "fsm", "app")


class BackendError(ValueError):
    pass


class UnreachableGraspError(BackendError):
    """The requested grasp has no trigger under the active back-end config."""


class InputMismatchError(BackendError):
    """An input variant was routed to a back-end that does not accept it."""


# --------------------------------------------------------------------------
# Inputs
# --------------------------------------------------------------------------

class EmgPattern(str, Enum):
    WAVE_IN = "WaveIn"
    WAVE_OUT = "WaveOut"
    FIST = "Fist"
    FINGERS_SPREAD = "FingersSpread"
    DOUBLE_TAP = "DoubleTap"
    # Optional synthetic sixth pattern; only usable when a pattern config
    # explicitly assigns it to Hook (the matchup table has no Hook row).
    SYNTHETIC_HOOK = "SyntheticHook"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CoContraction:
    t: int


@dataclass(frozen=True)
class PatternInput:
    t: int
    label: EmgPattern


@dataclass(frozen=True)
class Tap:
    t: int
    grasp: Grasp


GsiInput = Union[GazeSample, CoContraction, PatternInput, Tap]


# --------------------------------------------------------------------------
# Sequential cycling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FsmState:
    current: Grasp = Grasp.CYLINDRICAL
    initial: Grasp = Grasp.CYLINDRICAL
    order: tuple[Grasp, ...] = CYCLE_ORDER


def fsm_trigger(state: FsmState, t: int) -> tuple[FsmState, SelectionEvent]:
    """Advance one cycle step (wrapping) and commit the new state."""
    i = state.order.index(state.current)
    new_grasp = state.order[(i + 1) % len(state.order)]
    new_state = FsmState(new_grasp, state.initial, state.order)
    return new_state, SelectionEvent(t, new_grasp, Source.FSM, Cause.COMMIT)


# --------------------------------------------------------------------------
# Pattern mapping
# --------------------------------------------------------------------------

#: Fixed pattern -> grasp matchup for the five recognizable patterns.
PATTERN_TO_GRASP: dict[EmgPattern, Grasp] = {
    EmgPattern.WAVE_IN: Grasp.CYLINDRICAL,
    EmgPattern.WAVE_OUT: Grasp.SPHERICAL,
    EmgPattern.FIST: Grasp.TRIPOD,
    EmgPattern.FINGERS_SPREAD: Grasp.PINCH,
    EmgPattern.DOUBLE_TAP: Grasp.LATERAL,
}


def pr_map(label: EmgPattern, allow_synthetic_hook: bool = False) -> Grasp:
    """Map a pattern to its grasp. The synthetic Hook pattern maps only when
    the config enables it; otherwise it is rejected like any unknown label."""
    if label in PATTERN_TO_GRASP:
        return PATTERN_TO_GRASP[label]
    if label is EmgPattern.SYNTHETIC_HOOK and allow_synthetic_hook:
        return Grasp.HOOK
    raise UnreachableGraspError(f"no grasp assigned to pattern {label}")


def pattern_for_grasp(grasp: Grasp, allow_synthetic_hook: bool = False) -> EmgPattern:
    """Inverse lookup. Hook has no real pattern; it is reachable only through
    the synthetic sixth pattern when enabled."""
    for label, g in PATTERN_TO_GRASP.items():
        if g is grasp:
            return label
    if grasp is Grasp.HOOK and allow_synthetic_hook:
        return EmgPattern.SYNTHETIC_HOOK
    raise UnreachableGraspError(f"grasp {grasp} is not reachable via pattern mapping")


@dataclass(frozen=True)
class PrErrorModel:
    """Recognition-error stub: with probability ``error_prob`` the recognizer
    returns a substitute drawn uniformly from the other reachable grasps."""

    error_prob: float = 0.0
    confusion: str = "uniform"
    rng_seed: int = 0
    allow_synthetic_hook: bool = False

    def __post_init__(self):
        if not 0.0 <= self.error_prob <= 1.0:
            raise ValueError("error_prob must be in [0, 1]")
        if self.confusion != "uniform":
            raise ValueError(f"unknown confusion rule: {self.confusion!r}")

    def reachable(self) -> tuple[Grasp, ...]:
        grasps = tuple(PATTERN_TO_GRASP.values())
        if self.allow_synthetic_hook:
            grasps = grasps + (Grasp.HOOK,)
        return grasps

    def to_dict(self) -> dict:
        return {
            "error_prob": self.error_prob,
            "confusion": self.confusion,
            "rng_seed": self.rng_seed,
            "allow_synthetic_hook": self.allow_synthetic_hook,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrErrorModel":
        return cls(
            error_prob=float(d.get("error_prob", 0.0)),
            confusion=str(d.get("confusion", "uniform")),
            rng_seed=int(d.get("rng_seed", 0)),
            allow_synthetic_hook=bool(d.get("allow_synthetic_hook", False)),
        )


def pr_recognize(intended: Grasp, model: PrErrorModel, rng: random.Random) -> Grasp:
    """Recognition outcome for an intended grasp; deterministic under a fixed
    rng stream."""
    reachable = model.reachable()
    if intended not in reachable:
        raise UnreachableGraspError(f"grasp {intended} is not reachable via pattern mapping")
    if model.error_prob > 0.0 and rng.random() < model.error_prob:
        others = [g for g in reachable if g is not intended]
        return others[rng.randrange(len(others))]
    return intended


# --------------------------------------------------------------------------
# Direct tap
# --------------------------------------------------------------------------

def app_tap(grasp: Grasp, t: int) -> SelectionEvent:
    return SelectionEvent(t, grasp, Source.TAP, Cause.COMMIT)


@dataclass(frozen=True)
class FeedbackConfig:
    """When enabled, the operator observes each committed grasp and may issue
    corrections; when disabled, errors go unnoticed."""

    enabled: bool = True

    def to_dict(self) -> dict:
        return {"enabled": self.enabled}


# --------------------------------------------------------------------------
# Common back-end interface
# --------------------------------------------------------------------------

class Backend:
    """One session-scoped engine; single-writer, processes inputs in order."""

    kind: str = ""
    accepts: tuple[type, ...] = ()
    #: whether a re-selection within one trial is a correction of an earlier
    #: commit (pattern/tap/dwell) rather than a step of one action (cycling)
    reselect_is_correction: bool = True

    def handle(self, event: GsiInput) -> list[SelectionEvent]:
        raise NotImplementedError

    def check_accepts(self, event: GsiInput) -> None:
        if not isinstance(event, self.accepts):
            raise InputMismatchError(
                f"{self.kind} does not accept {type(event).__name__} inputs"
            )

    @property
    def dwell_progress(self) -> float:
        return 0.0

    @property
    def dwell_icon(self) -> Optional[Grasp]:
        return None


class DwellBackend(Backend):
    kind = "i-gsi"
    accepts = (GazeSample,)

    def __init__(self, config: DwellConfig = DwellConfig(), layout: PanelLayout = PanelLayout()):
        self.engine = DwellEngine(config, layout)

    def handle(self, event: GsiInput) -> list[SelectionEvent]:
        self.check_accepts(event)
        selection = self.engine.ingest(event)
        return [] if selection is None else [selection]

    @property
    def dwell_progress(self) -> float:
        return self.engine.progress

    @property
    def dwell_icon(self) -> Optional[Grasp]:
        return self.engine.current_icon


class FsmBackend(Backend):
    kind = "fsm"
    accepts = (CoContraction,)
    reselect_is_correction = False

    def __init__(self, initial: Grasp = Grasp.CYLINDRICAL, order: Sequence[Grasp] = CYCLE_ORDER):
        self.state = FsmState(initial, initial, validate_cycle_order(order))

    def handle(self, event: GsiInput) -> list[SelectionEvent]:
        self.check_accepts(event)
        self.state, selection = fsm_trigger(self.state, event.t)
        return [selection]

    @property
    def current(self) -> Grasp:
        return self.state.current


class PrBackend(Backend):
    kind = "pr"
    accepts = (PatternInput,)

    def __init__(self, model: PrErrorModel = PrErrorModel()):
        self.model = model
        self.rng = random.Random(model.rng_seed)

    def handle(self, event: GsiInput) -> list[SelectionEvent]:
        self.check_accepts(event)
        intended = pr_map(event.label, self.model.allow_synthetic_hook)
        recognized = pr_recognize(intended, self.model, self.rng)
        return [SelectionEvent(event.t, recognized, Source.PR, Cause.COMMIT)]


class AppBackend(Backend):
    kind = "app"
    accepts = (Tap,)

    def handle(self, event: GsiInput) -> list[SelectionEvent]:
        self.check_accepts(event)
        return [app_tap(event.grasp, event.t)]


def make_backend(
    kind: str,
    *,
    dwell_config: DwellConfig = DwellConfig(),
    layout: PanelLayout = PanelLayout(),
    fsm_initial: Grasp = Grasp.CYLINDRICAL,
    cycle_order: Sequence[Grasp] = CYCLE_ORDER,
    pr_model: PrErrorModel = PrErrorModel(),
) -> Backend:
    if kind == "i-gsi":
        return DwellBackend(dwell_config, layout)
    if kind == "fsm":
        return FsmBackend(fsm_initial, cycle_order)
    if kind == "pr":
        return PrBackend(pr_model)
    if kind == "app":
        return AppBackend()
    raise BackendError(f"unknown GSI kind: {kind!r} (expected one of {GSI_KINDS})")
