"""Gaze-dwell selection engine.

A gaze stream is hit-tested against the 2x3 grasp panel; staying on one icon
for the dwell threshold (200 ms by default) commits that grasp. The engine is
a pure function of the sample stream: threshold crossings are evaluated at
sample arrival, so the worst-case commit latency is one sample period.

Dwell rules:

* dwell accumulates as wall-clock span within a same-icon run
  (``t_now - t_enter``), robust to variable sample rates;
* an icon change, an invalid sample (tracking loss) or an inter-sample gap
  above ``gap_tolerance_ms`` breaks the run and resets the dwell;
* one selection per run: after the threshold fires, the engine re-arms only
  when the run ends (exit and re-entry, or a broken run).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .domain import CYCLE_ORDER, Cause, GazeSample, Grasp, SelectionEvent, Source, validate_cycle_order


class LayoutError(ValueError):
    """Raised for malformed panel geometry."""


@dataclass(frozen=True)
class PanelLayout:
    """Axis-aligned grid of grasp icons, in panel centimeters.

    Icons are laid out row-major in ``order`` over a ``rows`` x ``cols`` grid;
    the default is the 2x3 panel of 2.5 cm icons. Icon rectangles are
    inclusive on their min edges and exclusive on their max edges, so every
    point hits at most one icon even with zero gap.
    """

    icon_size_cm: float = 2.5
    gap_cm: float = 0.5
    origin_cm: tuple[float, float] = (0.0, 0.0)
    rows: int = 2
    cols: int = 3
    order: tuple[Grasp, ...] = CYCLE_ORDER

    def __post_init__(self):
        validate_cycle_order(self.order)
        if self.rows * self.cols != len(self.order):
            raise LayoutError("grid must have one cell per grasp")
        if self.icon_size_cm <= 0:
            raise LayoutError("icon size must be positive")
        if self.gap_cm < 0:
            raise LayoutError("icons must not overlap (gap >= 0)")

    def icon_rect(self, grasp: Grasp) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of the icon, min-inclusive/max-exclusive."""
        i = self.order.index(grasp)
        row, col = divmod(i, self.cols)
        x0 = self.origin_cm[0] + col * (self.icon_size_cm + self.gap_cm)
        y0 = self.origin_cm[1] + row * (self.icon_size_cm + self.gap_cm)
        return (x0, y0, x0 + self.icon_size_cm, y0 + self.icon_size_cm)

    def icon_center(self, grasp: Grasp) -> tuple[float, float]:
        x0, y0, x1, y1 = self.icon_rect(grasp)
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)

    def size_cm(self) -> tuple[float, float]:
        w = self.cols * self.icon_size_cm + (self.cols - 1) * self.gap_cm
        h = self.rows * self.icon_size_cm + (self.rows - 1) * self.gap_cm
        return (w, h)

    def to_dict(self) -> dict:
        return {
            "icon_size_cm": self.icon_size_cm,
            "gap_cm": self.gap_cm,
            "origin_cm": list(self.origin_cm),
            "rows": self.rows,
            "cols": self.cols,
            "order": [g.value for g in self.order],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PanelLayout":
        from .domain import parse_grasp

        kwargs = {}
        if "icon_size_cm" in d:
            kwargs["icon_size_cm"] = float(d["icon_size_cm"])
        if "gap_cm" in d:
            kwargs["gap_cm"] = float(d["gap_cm"])
        if "origin_cm" in d:
            kwargs["origin_cm"] = tuple(float(v) for v in d["origin_cm"])
        if "rows" in d:
            kwargs["rows"] = int(d["rows"])
        if "cols" in d:
            kwargs["cols"] = int(d["cols"])
        if "order" in d:
            kwargs["order"] = tuple(parse_grasp(g) for g in d["order"])
        return cls(**kwargs)


def hit_test(layout: PanelLayout, point: tuple[float, float]) -> Optional[Grasp]:
    """The unique icon whose rectangle contains ``point``, else ``None``."""
    x, y = point
    for grasp in layout.order:
        x0, y0, x1, y1 = layout.icon_rect(grasp)
        if x0 <= x < x1 and y0 <= y < y1:
            return grasp
    return None


@dataclass(frozen=True)
class DwellConfig:
    threshold_ms: int = 200
    gap_tolerance_ms: int = 100
    rearm: str = "exit-and-reenter"  # the only policy; kept as data for config echo

    def __post_init__(self):
        if self.threshold_ms <= 0:
            raise ValueError("threshold_ms must be > 0")
        if self.gap_tolerance_ms < 0:
            raise ValueError("gap_tolerance_ms must be >= 0")
        if self.rearm != "exit-and-reenter":
            raise ValueError(f"unknown rearm policy: {self.rearm!r}")

    def to_dict(self) -> dict:
        return {
            "threshold_ms": self.threshold_ms,
            "gap_tolerance_ms": self.gap_tolerance_ms,
            "rearm": self.rearm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DwellConfig":
        return cls(
            threshold_ms=int(d.get("threshold_ms", 200)),
            gap_tolerance_ms=int(d.get("gap_tolerance_ms", 100)),
            rearm=str(d.get("rearm", "exit-and-reenter")),
        )


@dataclass(frozen=True)
class DwellState:
    """Engine state between samples.

    ``armed`` is False between a fired selection and the end of its run;
    ``latched`` is the last committed grasp (changes only via a selection).
    """

    current_icon: Optional[Grasp] = None
    dwell_enter_t: Optional[int] = None
    last_t: Optional[int] = None
    latched: Optional[Grasp] = None
    armed: bool = True


def ingest_gaze(
    state: DwellState,
    sample: GazeSample,
    config: DwellConfig = DwellConfig(),
    layout: PanelLayout = PanelLayout(),
) -> tuple[DwellState, Optional[SelectionEvent], float]:
    """Feed one sample; returns (new state, selection or None, dwell progress 0..1)."""
    if state.last_t is not None and sample.t <= state.last_t:
        raise ValueError(f"non-monotonic gaze timestamp: {sample.t} after {state.last_t}")

    icon = hit_test(layout, (sample.x, sample.y)) if sample.valid else None
    gap_broken = state.last_t is not None and (sample.t - state.last_t) > config.gap_tolerance_ms

    if icon is None:
        new = replace(state, current_icon=None, dwell_enter_t=None, last_t=sample.t, armed=True)
        return new, None, 0.0

    if icon is not state.current_icon or gap_broken:
        # a new run starts at this sample (same icon after a broken run included)
        new = replace(state, current_icon=icon, dwell_enter_t=sample.t, last_t=sample.t, armed=True)
        return new, None, 0.0

    accumulated = sample.t - state.dwell_enter_t
    progress = min(1.0, accumulated / config.threshold_ms)
    event = None
    armed = state.armed
    latched = state.latched
    if state.armed and accumulated >= config.threshold_ms:
        event = SelectionEvent(sample.t, icon, Source.DWELL, Cause.COMMIT)
        armed = False
        latched = icon
    new = replace(state, last_t=sample.t, armed=armed, latched=latched)
    return new, event, progress


class DwellEngine:
    """Stateful wrapper around :func:`ingest_gaze` for session use."""

    def __init__(self, config: DwellConfig = DwellConfig(), layout: PanelLayout = PanelLayout()):
        self.config = config
        self.layout = layout
        self.state = DwellState()
        self.progress = 0.0

    def ingest(self, sample: GazeSample) -> Optional[SelectionEvent]:
        self.state, event, self.progress = ingest_gaze(self.state, sample, self.config, self.layout)
        return event

    @property
    def current_icon(self) -> Optional[Grasp]:
        return self.state.current_icon

    @property
    def latched(self) -> Optional[Grasp]:
        return self.state.latched

    def run_stream(self, samples: Sequence[GazeSample]) -> list[SelectionEvent]:
        events = []
        for s in samples:
            e = self.ingest(s)
            if e is not None:
                events.append(e)
        return events
