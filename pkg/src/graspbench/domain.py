"""Shared vocabulary: grasp types, the switching cycle, target objects, events
and trial records used by every other module.

All types here are immutable values; they can be shared freely between
threads and serialized without loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

SCHEMA_VERSION = 1


class Grasp(str, Enum):
    """The six selectable grasp types."""

    CYLINDRICAL = "Cylindrical"
    SPHERICAL = "Spherical"
    TRIPOD = "Tripod"
    PINCH = "Pinch"
    LATERAL = "Lateral"
    HOOK = "Hook"

    def __str__(self) -> str:  # json-friendly
        return self.value


#: Default cycle order used by the sequential (co-contraction) back-end and by
#: the panel grid. Configurable: pass a different order wherever one is taken.
CYCLE_ORDER: tuple[Grasp, ...] = (
    Grasp.CYLINDRICAL,
    Grasp.SPHERICAL,
    Grasp.TRIPOD,
    Grasp.PINCH,
    Grasp.LATERAL,
    Grasp.HOOK,
)


class DomainError(ValueError):
    """Raised for violated domain invariants (bad catalog, unknown object...)."""


def parse_grasp(label: str) -> Grasp:
    try:
        return Grasp(label)
    except ValueError:
        raise DomainError(f"unknown grasp label: {label!r}") from None


def validate_cycle_order(order: Sequence[Grasp]) -> tuple[Grasp, ...]:
    order = tuple(order)
    if sorted(order, key=lambda g: g.value) != sorted(Grasp, key=lambda g: g.value):
        raise DomainError("cycle order must contain each of the six grasps exactly once")
    return order


def cycle_index(grasp: Grasp, order: Sequence[Grasp] = CYCLE_ORDER) -> int:
    """Position of a grasp in the switching cycle (0..5)."""
    return tuple(order).index(grasp)


def cycle_distance(src: Grasp, dst: Grasp, order: Sequence[Grasp] = CYCLE_ORDER) -> int:
    """Number of forward cycle steps needed to move from ``src`` to ``dst``.

    Returns ``(index(dst) - index(src)) mod 6``; 0 iff src == dst.
    """
    order = tuple(order)
    return (order.index(dst) - order.index(src)) % len(order)


# --------------------------------------------------------------------------
# Target objects
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectItem:
    """One graspable everyday object in the experiment catalog."""

    id: int
    name: str
    grasp: Grasp

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "grasp": self.grasp.value}


class Catalog:
    """The 21-object catalog: one Hook object, four objects per other grasp."""

    def __init__(self, items: Iterable[ObjectItem]):
        self.items: tuple[ObjectItem, ...] = tuple(items)
        self._by_id = {o.id: o for o in self.items}
        self._validate()

    def _validate(self) -> None:
        if len(self._by_id) != len(self.items):
            raise DomainError("catalog object ids must be unique")
        counts: dict[Grasp, int] = {g: 0 for g in Grasp}
        for obj in self.items:
            counts[obj.grasp] += 1
        expected = {g: (1 if g is Grasp.HOOK else 4) for g in Grasp}
        if counts != expected:
            raise DomainError(
                f"catalog must hold 1 Hook object and 4 per other grasp, got {counts}"
            )

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def get(self, object_id: int) -> ObjectItem:
        try:
            return self._by_id[object_id]
        except KeyError:
            raise DomainError(f"unknown object id: {object_id}") from None

    def grasp_of_object(self, object_id: int) -> Grasp:
        return self.get(object_id).grasp

    @property
    def hook_object(self) -> ObjectItem:
        return next(o for o in self.items if o.grasp is Grasp.HOOK)

    def objects_for(self, grasp: Grasp) -> list[ObjectItem]:
        return [o for o in self.items if o.grasp is grasp]

    def to_json(self) -> list[dict]:
        return [o.to_dict() for o in self.items]

    @classmethod
    def from_json(cls, data: object) -> "Catalog":
        if not isinstance(data, list):
            raise DomainError("catalog file must be a JSON array of objects")
        items = []
        for entry in data:
            if not isinstance(entry, dict) or not {"id", "name", "grasp"} <= set(entry):
                raise DomainError(f"bad catalog entry: {entry!r}")
            if not isinstance(entry["id"], int):
                raise DomainError(f"catalog id must be an integer: {entry!r}")
            items.append(ObjectItem(entry["id"], str(entry["name"]), parse_grasp(entry["grasp"])))
        return cls(items)

    @classmethod
    def load(cls, path: str | Path) -> "Catalog":
        return cls.from_json(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")


def default_catalog() -> Catalog:
    """Built-in catalog of 21 everyday objects (names are illustrative; the
    1-Hook / 4-per-other-grasp structure is what matters)."""
    names = {
        Grasp.CYLINDRICAL: ["water bottle", "mug", "spray can", "flashlight"],
        Grasp.SPHERICAL: ["tennis ball", "apple", "orange", "light bulb"],
        Grasp.TRIPOD: ["pen", "pencil", "marker", "chalk"],
        Grasp.PINCH: ["eraser", "coin", "usb stick", "paper clip"],
        Grasp.LATERAL: ["key", "credit card", "spoon", "business card"],
        Grasp.HOOK: ["shopping bag"],
    }
    items = []
    next_id = 0
    for grasp in CYCLE_ORDER:
        for name in names[grasp]:
            items.append(ObjectItem(next_id, name, grasp))
            next_id += 1
    return Catalog(items)


def grasp_of_object(object_id: int, catalog: Optional[Catalog] = None) -> Grasp:
    """Catalog lookup; raises :class:`DomainError` for ids outside the catalog."""
    return (catalog or default_catalog()).grasp_of_object(object_id)


# --------------------------------------------------------------------------
# Events
# --------------------------------------------------------------------------

class Phase(str, Enum):
    STANDBY = "Standby"
    OPERATION = "Operation"

    def __str__(self) -> str:
        return self.value


class Source(str, Enum):
    """Which engine committed a selection."""

    DWELL = "dwell"
    FSM = "fsm"
    PR = "pr"
    TAP = "tap"
    SIMULATED = "simulated"

    def __str__(self) -> str:
        return self.value


class Cause(str, Enum):
    COMMIT = "commit"
    CORRECTION = "correction"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GazeSample:
    """One gaze (or pointer-proxy) sample in panel centimeters.

    ``t`` is integer milliseconds since session start and must be strictly
    increasing within a stream; ``valid=False`` marks tracking loss.
    """

    t: int
    x: float
    y: float
    valid: bool = True


@dataclass(frozen=True)
class PhaseEvent:
    t: int
    phase: Phase


@dataclass(frozen=True)
class SelectionEvent:
    """A committed grasp-type choice."""

    t: int
    grasp: Grasp
    source: Source
    cause: Cause = Cause.COMMIT

    def as_correction(self) -> "SelectionEvent":
        return replace(self, cause=Cause.CORRECTION)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "grasp": self.grasp.value,
            "source": self.source.value,
            "cause": self.cause.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionEvent":
        return cls(int(d["t"]), parse_grasp(d["grasp"]), Source(d["source"]), Cause(d["cause"]))


# --------------------------------------------------------------------------
# Trial records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    """One scored grasp-switch attempt.

    ``st_ms`` (and the derived ``st_seconds``) is the switching time: last
    selection of the target grasp minus the trial anchor ``t0``. The anchor is
    the first fixation on the object when one was observed, otherwise the
    operation-phase entry; which one applied is recorded in ``st_anchor``.
    ``error_count`` counts committed selections that differ from the target
    before the final selection -- for the cycling back-end this includes the
    intermediate pass-through states, not only user mistakes.
    """

    set_index: int
    slot_index: int
    target_object: int
    target_grasp: Grasp
    t_operation_enter: int
    t_operation_exit: int
    selections: tuple[SelectionEvent, ...]
    t_first_fixation: Optional[int] = None
    final_grasp: Optional[Grasp] = None
    st_ms: Optional[int] = None
    st_anchor: str = "operation_enter"
    correct: bool = False
    error_count: int = 0
    steps_required: Optional[int] = None  # cycle steps to target, cycling GSI only

    @property
    def st_seconds(self) -> Optional[float]:
        return None if self.st_ms is None else self.st_ms / 1000.0

    def to_dict(self) -> dict:
        return {
            "set_index": self.set_index,
            "slot_index": self.slot_index,
            "target_object": self.target_object,
            "target_grasp": self.target_grasp.value,
            "t_operation_enter": self.t_operation_enter,
            "t_operation_exit": self.t_operation_exit,
            "t_first_fixation": self.t_first_fixation,
            "selections": [s.to_dict() for s in self.selections],
            "final_grasp": None if self.final_grasp is None else self.final_grasp.value,
            "st_ms": self.st_ms,
            "st_seconds": self.st_seconds,
            "st_anchor": self.st_anchor,
            "correct": self.correct,
            "error_count": self.error_count,
            "steps_required": self.steps_required,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        return cls(
            set_index=int(d["set_index"]),
            slot_index=int(d["slot_index"]),
            target_object=int(d["target_object"]),
            target_grasp=parse_grasp(d["target_grasp"]),
            t_operation_enter=int(d["t_operation_enter"]),
            t_operation_exit=int(d["t_operation_exit"]),
            selections=tuple(SelectionEvent.from_dict(s) for s in d["selections"]),
            t_first_fixation=None if d.get("t_first_fixation") is None else int(d["t_first_fixation"]),
            final_grasp=None if d.get("final_grasp") is None else parse_grasp(d["final_grasp"]),
            st_ms=None if d.get("st_ms") is None else int(d["st_ms"]),
            st_anchor=str(d.get("st_anchor", "operation_enter")),
            correct=bool(d["correct"]),
            error_count=int(d.get("error_count", 0)),
            steps_required=None if d.get("steps_required") is None else int(d["steps_required"]),
        )
