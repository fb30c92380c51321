"""Object-presentation sequence generation.

Each set presents 24 objects drawn from the 21-object catalog (the single
Hook object four times, every other object once) with no two neighbouring
slots requiring the same grasp. A suite is a collection of such sets that is
additionally balanced: aggregated over the suite, each switch distance 1..5
occurs with a frequency close to 1/5, so no cycling distance is over- or
under-represented.

Generation is a randomized slot-by-slot construction with backtracking on the
adjacency constraint, then accept/reject at suite level on the balance
statistic (max relative deviation of each distance frequency from 1/5).
Everything is deterministic in the seed.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .domain import (
    CYCLE_ORDER,
    Catalog,
    DomainError,
    Grasp,
    cycle_distance,
    default_catalog,
    parse_grasp,
    validate_cycle_order,
)

SUITE_SCHEMA_VERSION = 1
GENERATOR_VERSION = 1

SET_LENGTH = 24
HOOK_REPEATS = 4


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceSet:
    set_index: int
    slots: tuple[int, ...]

    def grasps(self, catalog: Catalog) -> tuple[Grasp, ...]:
        return tuple(catalog.grasp_of_object(i) for i in self.slots)


@dataclass(frozen=True)
class StepProfile:
    """Histogram of switch distances over the 24 per-set transitions (the
    entry transition from the initial grasp plus the 23 slot-to-slot ones)."""

    counts: dict[int, int]
    total: int

    def frequency(self, distance: int) -> float:
        n = sum(self.counts.values())
        return self.counts.get(distance, 0) / n if n else 0.0

    def to_dict(self) -> dict:
        return {"counts": {str(k): v for k, v in sorted(self.counts.items())}, "total": self.total}


@dataclass
class SuiteConfig:
    n_sets: int = 30
    seed: int = 0
    balance_tolerance: float = 0.10
    max_attempts: int = 1000
    initial_grasp: Grasp = Grasp.CYLINDRICAL
    cycle_order: tuple[Grasp, ...] = CYCLE_ORDER

    def __post_init__(self):
        if self.n_sets < 1:
            raise SequenceError("n_sets must be >= 1")
        if not 0.0 < self.balance_tolerance < 1.0:
            raise SequenceError("balance_tolerance must be in (0, 1)")
        self.cycle_order = validate_cycle_order(self.cycle_order)

    def to_dict(self) -> dict:
        return {
            "n_sets": self.n_sets,
            "seed": self.seed,
            "balance_tolerance": self.balance_tolerance,
            "max_attempts": self.max_attempts,
            "initial_grasp": self.initial_grasp.value,
            "cycle_order": [g.value for g in self.cycle_order],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        return cls(
            n_sets=int(d.get("n_sets", 30)),
            seed=int(d["seed"]),
            balance_tolerance=float(d.get("balance_tolerance", 0.10)),
            max_attempts=int(d.get("max_attempts", 1000)),
            initial_grasp=parse_grasp(d.get("initial_grasp", "Cylindrical")),
            cycle_order=tuple(parse_grasp(g) for g in d.get("cycle_order", [g.value for g in CYCLE_ORDER])),
        )


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed derived from a path of labels; platform independent."""
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def generate_set(
    seed: int,
    catalog: Optional[Catalog] = None,
    *,
    set_index: int = 1,
    initial_grasp: Grasp = Grasp.CYLINDRICAL,
) -> SequenceSet:
    """One valid 24-slot set, deterministic in ``seed``.

    Besides the core constraints (multiplicities, neighbours differ) the first
    slot never requires ``initial_grasp``: the entry transition is then a real
    switch too, keeping every per-set distance inside 1..5.
    """
    catalog = catalog or default_catalog()
    rng = random.Random(seed)
    pool: list[int] = []
    for obj in catalog:
        pool.extend([obj.id] * (HOOK_REPEATS if obj.grasp is Grasp.HOOK else 1))
    if len(pool) != SET_LENGTH:
        raise SequenceError(f"catalog yields {len(pool)} presentations, expected {SET_LENGTH}")

    grasp_of = {obj.id: obj.grasp for obj in catalog}
    remaining: dict[int, int] = {}
    for oid in pool:
        remaining[oid] = remaining.get(oid, 0) + 1

    # complete randomized DFS: finds a valid ordering iff one exists
    def build(slots: list[int], prev_grasp: Grasp) -> bool:
        if len(slots) == SET_LENGTH:
            return True
        candidates = [oid for oid, n in remaining.items() if n > 0 and grasp_of[oid] is not prev_grasp]
        rng.shuffle(candidates)
        for oid in candidates:
            remaining[oid] -= 1
            slots.append(oid)
            if build(slots, grasp_of[oid]):
                return True
            slots.pop()
            remaining[oid] += 1
        return False

    slots: list[int] = []
    if not build(slots, initial_grasp):
        raise SequenceError("sequence constraints are unsatisfiable for this catalog")
    return SequenceSet(set_index, tuple(slots))


def validate_set(s: SequenceSet, catalog: Optional[Catalog] = None) -> list[str]:
    """Every violated constraint, as human-readable strings; empty means ok."""
    catalog = catalog or default_catalog()
    violations: list[str] = []
    if len(s.slots) != SET_LENGTH:
        violations.append(f"length is {len(s.slots)}, expected {SET_LENGTH}")
    known = {obj.id for obj in catalog}
    unknown = [oid for oid in s.slots if oid not in known]
    if unknown:
        violations.append(f"unknown object ids: {sorted(set(unknown))}")
        return violations
    counts: dict[int, int] = {}
    for oid in s.slots:
        counts[oid] = counts.get(oid, 0) + 1
    for obj in catalog:
        want = HOOK_REPEATS if obj.grasp is Grasp.HOOK else 1
        got = counts.get(obj.id, 0)
        if got != want:
            violations.append(f"object {obj.id} ({obj.name}) appears {got} times, expected {want}")
    grasps = [catalog.grasp_of_object(oid) for oid in s.slots]
    for i in range(1, len(grasps)):
        if grasps[i] is grasps[i - 1]:
            violations.append(f"adjacent slots {i - 1},{i} both require {grasps[i].value}")
    return violations


def step_profile(
    s: SequenceSet,
    catalog: Optional[Catalog] = None,
    *,
    initial_grasp: Grasp = Grasp.CYLINDRICAL,
    cycle_order: Sequence[Grasp] = CYCLE_ORDER,
) -> StepProfile:
    """Switch-distance histogram of a set under persistent cycling state: each
    transition's distance is measured from the previous slot's grasp (the
    initial grasp for slot 0) to the slot's target grasp."""
    catalog = catalog or default_catalog()
    prev = initial_grasp
    counts: dict[int, int] = {}
    total = 0
    for oid in s.slots:
        grasp = catalog.grasp_of_object(oid)
        d = cycle_distance(prev, grasp, cycle_order)
        counts[d] = counts.get(d, 0) + 1
        total += d
        prev = grasp
    return StepProfile(counts, total)


@dataclass
class Suite:
    config: SuiteConfig
    sets: list[SequenceSet]
    catalog: Catalog
    attempt: int = 0

    def aggregate_profile(self) -> StepProfile:
        counts: dict[int, int] = {}
        total = 0
        for s in self.sets:
            p = step_profile(
                s, self.catalog, initial_grasp=self.config.initial_grasp, cycle_order=self.config.cycle_order
            )
            for k, v in p.counts.items():
                counts[k] = counts.get(k, 0) + v
            total += p.total
        return StepProfile(counts, total)

    def max_relative_deviation(self) -> float:
        """Balance statistic: max over distances 1..5 of |freq - 1/5| / (1/5)."""
        profile = self.aggregate_profile()
        n = sum(profile.counts.values())
        target = 1.0 / 5.0
        return max(abs(profile.counts.get(d, 0) / n - target) / target for d in range(1, 6))

    def pair_counts(self) -> dict[str, int]:
        """Ordered grasp-pair frequencies over all transitions. Reported in
        the manifest for inspection; not enforced (30x23 transitions cannot
        cover 30 ordered pairs uniformly at a fine tolerance)."""
        counts: dict[str, int] = {}
        for s in self.sets:
            prev = self.config.initial_grasp
            for oid in s.slots:
                grasp = self.catalog.grasp_of_object(oid)
                key = f"{prev.value}>{grasp.value}"
                counts[key] = counts.get(key, 0) + 1
                prev = grasp
        return dict(sorted(counts.items()))

    def to_dict(self) -> dict:
        return {
            "schema_version": SUITE_SCHEMA_VERSION,
            "generator_version": GENERATOR_VERSION,
            "config": self.config.to_dict(),
            "catalog": self.catalog.to_json(),
            "attempt": self.attempt,
            "sets": [
                {
                    "set_index": s.set_index,
                    "slots": list(s.slots),
                    "step_profile": step_profile(
                        s,
                        self.catalog,
                        initial_grasp=self.config.initial_grasp,
                        cycle_order=self.config.cycle_order,
                    ).to_dict(),
                }
                for s in self.sets
            ],
            "aggregate": {
                "step_profile": self.aggregate_profile().to_dict(),
                "max_relative_deviation": self.max_relative_deviation(),
                "pair_counts": self.pair_counts(),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_dict(cls, d: dict) -> "Suite":
        if d.get("schema_version") != SUITE_SCHEMA_VERSION:
            raise SequenceError(f"unsupported suite schema_version: {d.get('schema_version')!r}")
        config = SuiteConfig.from_dict(d["config"])
        catalog = Catalog.from_json(d["catalog"])
        sets = [SequenceSet(int(e["set_index"]), tuple(int(i) for i in e["slots"])) for e in d["sets"]]
        suite = cls(config, sets, catalog, attempt=int(d.get("attempt", 0)))
        problems = suite.validate()
        if problems:
            raise SequenceError("invalid suite: " + "; ".join(problems))
        return suite

    @classmethod
    def load(cls, path: str | Path) -> "Suite":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def validate(self) -> list[str]:
        problems: list[str] = []
        if len(self.sets) != self.config.n_sets:
            problems.append(f"suite holds {len(self.sets)} sets, config says {self.config.n_sets}")
        for s in self.sets:
            for v in validate_set(s, self.catalog):
                problems.append(f"set {s.set_index}: {v}")
        if not problems:
            deviation = self.max_relative_deviation()
            if deviation > self.config.balance_tolerance + 1e-12:
                problems.append(
                    f"step-frequency deviation {deviation:.4f} exceeds tolerance "
                    f"{self.config.balance_tolerance}"
                )
        return problems

    def get_set(self, set_index: int) -> SequenceSet:
        for s in self.sets:
            if s.set_index == set_index:
                return s
        raise SequenceError(f"suite has no set {set_index}")


def generate_suite(config: SuiteConfig, catalog: Optional[Catalog] = None) -> Suite:
    """A balanced suite of ``config.n_sets`` valid sets; deterministic in the
    seed. Raises after ``max_attempts`` whole-suite rejections."""
    catalog = catalog or default_catalog()
    for attempt in range(config.max_attempts):
        sets = [
            generate_set(
                derive_seed(config.seed, "attempt", attempt, "set", i),
                catalog,
                set_index=i,
                initial_grasp=config.initial_grasp,
            )
            for i in range(1, config.n_sets + 1)
        ]
        suite = Suite(config, sets, catalog, attempt=attempt)
        if suite.max_relative_deviation() <= config.balance_tolerance:
            return suite
    raise SequenceError(
        f"no suite met balance tolerance {config.balance_tolerance} in {config.max_attempts} attempts"
    )
