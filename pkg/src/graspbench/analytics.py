"""Quantitative analysis of switching performance.

Switching time (ST) is the elapsed time from first fixation on the target to
the final correct selection; switching success rate (SSR) is the fraction of
trials whose final committed grasp matched the target. Learning efficiency
(LE) comes from fitting per-set mean ST to the power-law experience curve
``y = k * x**n`` with ``n = log2(b)``; LE is ``100 * b``.

Significance testing is nonparametric throughout: Kruskal-Wallis with
mid-rank tie correction, pairwise two-group tests with Bonferroni adjustment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import chi2

from .domain import Grasp, TrialRecord


class AnalyticsError(ValueError):
    pass


# --------------------------------------------------------------------------
# Success rate
# --------------------------------------------------------------------------

def ssr(trials: Iterable[TrialRecord | bool]) -> float:
    """Fraction of correct trials; accepts records or plain booleans."""
    flags = [t.correct if isinstance(t, TrialRecord) else bool(t) for t in trials]
    if not flags:
        raise AnalyticsError("ssr needs at least one trial")
    return sum(flags) / len(flags)


# --------------------------------------------------------------------------
# Experience-curve fitting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperienceFit:
    """Least-squares power-law fit ``y = k * x**n`` on log-log axes.

    ``b = 2**n`` is the per-doubling time ratio; ``le_percent = 100 * b``.
    ``r_squared`` is the coefficient of determination of the log-log line.
    """

    k: float
    n: float
    b: float
    le_percent: float
    r_squared: float
    n_points: int

    def predict(self, x: float) -> float:
        return self.k * x ** self.n

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "b": self.b,
            "le_percent": self.le_percent,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


def fit_experience_curve(points: Sequence[tuple[float, float]]) -> ExperienceFit:
    """Fit ``ln y = ln k + n ln x`` by ordinary least squares.

    Requires at least 3 points with strictly positive coordinates. The
    exponent relates to the per-doubling ratio as ``n = log(b) / log(2)``,
    where any log base works (the base cancels); base 2 is used throughout.
    """
    if len(points) < 3:
        raise AnalyticsError("experience-curve fit needs at least 3 points")
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise AnalyticsError("experience-curve fit needs positive x and y")
    lx, ly = np.log(x), np.log(y)
    lx_c = lx - lx.mean()
    sxx = float(np.dot(lx_c, lx_c))
    if sxx == 0.0:
        raise AnalyticsError("experience-curve fit needs at least two distinct x values")
    n = float(np.dot(lx_c, ly - ly.mean()) / sxx)
    ln_k = float(ly.mean() - n * lx.mean())
    residuals = ly - (ln_k + n * lx)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if sst == 0.0 else 1.0 - float(np.sum(residuals**2)) / sst
    b = 2.0**n
    return ExperienceFit(
        k=math.exp(ln_k), n=n, b=b, le_percent=100.0 * b, r_squared=r_squared, n_points=len(points)
    )


# --------------------------------------------------------------------------
# Rank tests
# --------------------------------------------------------------------------

def midranks(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..N with ties sharing their average rank."""
    a = np.asarray(values, dtype=float)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(len(a), dtype=float)
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class KwResult:
    h_statistic: float
    degrees_freedom: int
    p_value: float
    tie_correction_applied: bool
    exact: bool = False

    def to_dict(self) -> dict:
        return {
            "h_statistic": self.h_statistic,
            "degrees_freedom": self.degrees_freedom,
            "p_value": self.p_value,
            "tie_correction_applied": self.tie_correction_applied,
            "exact": self.exact,
        }


def _h_statistic(groups: Sequence[Sequence[float]]) -> tuple[float, bool]:
    """Tie-corrected H. Returns (H, ties_present); all-tied data gives H = 0."""
    pooled = [v for g in groups for v in g]
    n_total = len(pooled)
    ranks = midranks(pooled)
    rank_sums = []
    i = 0
    for g in groups:
        rank_sums.append(float(np.sum(ranks[i : i + len(g)])))
        i += len(g)
    h = 12.0 / (n_total * (n_total + 1)) * sum(
        rs**2 / len(g) for rs, g in zip(rank_sums, groups)
    ) - 3.0 * (n_total + 1)
    # tie correction: 1 - sum(t^3 - t) / (N^3 - N) over tie groups of size t
    _, tie_counts = np.unique(np.asarray(pooled, dtype=float), return_counts=True)
    ties_present = bool(np.any(tie_counts > 1))
    correction = 1.0 - float(np.sum(tie_counts**3 - tie_counts)) / (n_total**3 - n_total)
    if correction == 0.0:
        return 0.0, ties_present  # every observation identical: no rank separation
    h = h / correction
    # guard tiny negative fp noise on tied data
    return (0.0 if abs(h) < 1e-12 else h), ties_present


def _h_from_ranks(ranks_by_group: Sequence[Sequence[float]]) -> float:
    """H for pre-computed pooled mid-ranks split into groups (used by the
    exact permutation test; the tie pattern is fixed by the pooled sample)."""
    n_total = sum(len(g) for g in ranks_by_group)
    all_ranks = np.asarray([r for g in ranks_by_group for r in g], dtype=float)
    grand = (n_total + 1) / 2.0
    ss_total = float(np.sum((all_ranks - grand) ** 2))
    if ss_total == 0.0:
        return 0.0
    ss_between = sum(
        len(g) * (float(np.mean(np.asarray(g, dtype=float))) - grand) ** 2 for g in ranks_by_group
    )
    return (n_total - 1) * ss_between / ss_total


def kruskal_wallis(groups: Sequence[Sequence[float]], exact: bool = False) -> KwResult:
    """Kruskal-Wallis rank test over two or more independent samples.

    H uses mid-ranks and the tie-correction divisor; with every observation
    identical H is 0 and p is 1. The p-value comes from the chi-square
    approximation with k-1 degrees of freedom, or from full enumeration of
    rank assignments when ``exact`` is set (total size <= 12).
    """
    if len(groups) < 2:
        raise AnalyticsError("kruskal_wallis needs at least two groups")
    if any(len(g) == 0 for g in groups):
        raise AnalyticsError("kruskal_wallis groups must be non-empty")
    n_total = sum(len(g) for g in groups)
    if n_total < 3:
        raise AnalyticsError("kruskal_wallis needs a total of at least 3 observations")
    h, ties = _h_statistic(groups)
    df = len(groups) - 1
    if not exact:
        p = 1.0 if h == 0.0 else float(chi2.sf(h, df))
        return KwResult(h, df, min(1.0, p), ties, exact=False)
    if n_total > 12:
        raise AnalyticsError("exact permutation p is limited to total size <= 12")
    pooled = [v for g in groups for v in g]
    ranks = list(midranks(pooled))
    sizes = [len(g) for g in groups]
    count_ge = 0
    count_all = 0
    for assignment in _rank_partitions(ranks, sizes):
        count_all += 1
        if _h_from_ranks(assignment) >= h - 1e-9:
            count_ge += 1
    return KwResult(h, df, count_ge / count_all, ties, exact=True)


def _rank_partitions(ranks: list[float], sizes: list[int]):
    """All ways to deal the pooled ranks into groups of the given sizes."""
    indices = list(range(len(ranks)))

    def rec(free: list[int], remaining_sizes: list[int]):
        if not remaining_sizes:
            yield []
            return
        size = remaining_sizes[0]
        for combo in itertools.combinations(free, size):
            taken = set(combo)
            rest = [i for i in free if i not in taken]
            for tail in rec(rest, remaining_sizes[1:]):
                yield [[ranks[i] for i in combo]] + tail

    yield from rec(indices, sizes)


def bonferroni_adjust(p_values: Sequence[float], m: int) -> list[float]:
    """Family-wise adjustment ``p' = min(1, m * p)``; ``m`` must cover the family."""
    if m < len(p_values):
        raise AnalyticsError("m must be at least the number of p-values")
    out = []
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise AnalyticsError(f"p-value out of range: {p}")
        out.append(min(1.0, m * p))
    return out


def pairwise_tests(groups: Mapping[str, Sequence[float]]) -> dict[tuple[str, str], float]:
    """Two-group rank tests for every pair of labeled groups, Bonferroni-
    adjusted over the number of pairs."""
    labels = list(groups)
    if len(labels) < 2:
        raise AnalyticsError("pairwise_tests needs at least two groups")
    pairs = list(itertools.combinations(labels, 2))
    raw = [kruskal_wallis([list(groups[a]), list(groups[b])]).p_value for a, b in pairs]
    adjusted = bonferroni_adjust(raw, len(pairs))
    return {pair: p for pair, p in zip(pairs, adjusted)}


# --------------------------------------------------------------------------
# Regression through the origin
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OriginFit:
    """Least-squares line through the origin: slope = sum(xy) / sum(x^2).

    ``r_squared`` is the uncentered coefficient 1 - SS_res / sum(y^2),
    the natural goodness measure for a no-intercept model.
    """

    slope: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "r_squared": self.r_squared, "n_points": self.n_points}


def fit_line_through_origin(points: Sequence[tuple[float, float]]) -> OriginFit:
    if not points:
        raise AnalyticsError("origin fit needs at least one point")
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise AnalyticsError("origin fit needs a nonzero x value")
    slope = float(np.dot(x, y) / sxx)
    ss_res = float(np.sum((y - slope * x) ** 2))
    ss_tot = float(np.dot(y, y))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return OriginFit(slope, r_squared, len(points))


# --------------------------------------------------------------------------
# Aggregation
# --------------------------------------------------------------------------

@dataclass
class SessionData:
    """Scored trials of one session plus the labels analysis groups by."""

    gsi_kind: str
    subject_id: str
    set_index: int
    records: list[TrialRecord]
    suite_seed: Optional[int] = None


def _quartiles(values: Sequence[float]) -> dict:
    """Median and quartiles with linear interpolation; the median is the
    midpoint of the two central order statistics for even n."""
    a = np.asarray(sorted(values), dtype=float)
    q1, med, q3 = (float(np.percentile(a, q)) for q in (25, 50, 75))
    return {"n": len(a), "q1": q1, "median": med, "q3": q3, "min": float(a[0]), "max": float(a[-1])}


def switch_times(records: Iterable[TrialRecord]) -> list[float]:
    """ST values (seconds) of trials that ended on the target grasp."""
    return [r.st_seconds for r in records if r.correct and r.st_ms is not None]


def summarize(
    sessions: Sequence[SessionData],
    *,
    le_anchor: str = "mean",
    le_sets: str = "all",
) -> dict:
    """Deterministic aggregation of session data into one report.

    Per GSI: trial counts, SSR, ST quartiles, per-grasp ST strata with a rank
    test across grasp groups, the experience-curve fit over per-set ST, a
    per-subject median table, and (for the cycling GSI) median ST by required
    steps with the origin-fit slope. GSI pairs get Bonferroni-adjusted
    pairwise rank tests on ST.
    """
    if not sessions:
        raise AnalyticsError("summarize needs at least one session")
    if le_anchor not in ("mean", "median"):
        raise AnalyticsError("le_anchor must be 'mean' or 'median'")
    if le_sets not in ("all", "tryout"):
        raise AnalyticsError("le_sets must be 'all' or 'tryout'")

    by_gsi: dict[str, list[SessionData]] = {}
    for s in sessions:
        by_gsi.setdefault(s.gsi_kind, []).append(s)

    report: dict = {
        "schema_version": 1,
        "n_sessions": len(sessions),
        "n_trials": sum(len(s.records) for s in sessions),
        "le_anchor": le_anchor,
        "le_sets": le_sets,
        "per_gsi": {},
        "pairwise_gsi_st": None,
        "notes": [
            "statistics are nonparametric (rank tests, medians/quartiles)",
            "pairwise tests are two-group rank tests with Bonferroni adjustment",
        ],
    }

    st_groups: dict[str, list[float]] = {}
    for kind, group in sorted(by_gsi.items()):
        records = [r for s in group for r in s.records]
        sts = switch_times(records)
        entry: dict = {
            "n_sessions": len(group),
            "n_trials": len(records),
            "ssr": ssr(records) if records else None,
            "st": _quartiles(sts) if sts else None,
        }

        # per-grasp strata; empty strata are omitted with a note
        per_grasp: dict = {}
        grasp_groups: dict[str, list[float]] = {}
        for grasp in Grasp:
            vals = switch_times(r for r in records if r.target_grasp is grasp)
            if vals:
                per_grasp[grasp.value] = _quartiles(vals)
                grasp_groups[grasp.value] = vals
            else:
                per_grasp[grasp.value] = {"n": 0, "note": "no scored trials in stratum"}
        entry["per_grasp_st"] = per_grasp
        if sum(1 for g in grasp_groups.values() if g) >= 2:
            entry["grasp_kw_p"] = kruskal_wallis(list(grasp_groups.values())).p_value
        else:
            entry["grasp_kw_p"] = None

        # per-subject medians
        per_subject: dict = {}
        by_subject: dict[str, list[TrialRecord]] = {}
        for s in group:
            by_subject.setdefault(s.subject_id, []).extend(s.records)
        for subject, recs in sorted(by_subject.items()):
            vals = switch_times(recs)
            per_subject[subject] = {
                "median_st": float(np.median(vals)) if vals else None,
                "ssr": ssr(recs) if recs else None,
                "n_trials": len(recs),
            }
        entry["per_subject"] = per_subject

        # experience curve over per-set ST
        entry["experience"] = _experience_from_sessions(group, le_anchor, le_sets)

        # steps-to-target regression (cycling GSI)
        step_points = [
            (r.steps_required, r.st_seconds)
            for s in group
            for r in s.records
            if r.steps_required and r.correct and r.st_ms is not None
        ]
        if step_points:
            by_steps: dict[int, list[float]] = {}
            for d, st in step_points:
                by_steps.setdefault(d, []).append(st)
            medians = {d: float(np.median(v)) for d, v in sorted(by_steps.items())}
            entry["st_by_steps"] = {
                "median_st": {str(d): m for d, m in medians.items()},
                "origin_fit": fit_line_through_origin(list(medians.items())).to_dict(),
            }
        else:
            entry["st_by_steps"] = None

        report["per_gsi"][kind] = entry
        if sts:
            st_groups[kind] = sts

    if len(st_groups) >= 2:
        matrix = pairwise_tests(st_groups)
        report["pairwise_gsi_st"] = {f"{a}|{b}": p for (a, b), p in sorted(matrix.items())}
    return report


def _experience_from_sessions(group: Sequence[SessionData], anchor: str, which_sets: str) -> Optional[dict]:
    per_set: dict[int, list[float]] = {}
    for s in group:
        per_set.setdefault(s.set_index, []).extend(switch_times(s.records))
    if which_sets == "tryout":
        last = sorted(per_set)[-10:]
        per_set = {k: per_set[k] for k in last}
    agg = np.mean if anchor == "mean" else np.median
    points = [(float(k), float(agg(v))) for k, v in sorted(per_set.items()) if v]
    if len(points) < 3:
        return None
    fit = fit_experience_curve(points)
    return {"points": points, "fit": fit.to_dict()}


def experience_points(sessions: Sequence[SessionData], anchor: str = "mean") -> list[tuple[float, float]]:
    """(set_index, aggregated ST) pairs for experience-curve fitting."""
    entry = _experience_from_sessions(list(sessions), anchor, "all")
    return [] if entry is None else [tuple(p) for p in entry["points"]]
