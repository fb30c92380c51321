import random

import pytest

from graspbench.domain import GazeSample, Grasp
from graspbench.dwell import DwellConfig, DwellEngine, DwellState, PanelLayout, hit_test, ingest_gaze
from oracles import dwell_span_events

LAYOUT = PanelLayout()
CONFIG = DwellConfig()


def stream(points, start=0, period=17, valid=True):
    """Samples at a fixed period over a list of (x, y) points."""
    return [GazeSample(start + i * period, x, y, valid) for i, (x, y) in enumerate(points)]


def on_icon(grasp, n, start=0, period=17):
    cx, cy = LAYOUT.icon_center(grasp)
    return stream([(cx, cy)] * n, start=start, period=period)


class TestHitTest:
    def test_icon_center(self):
        assert hit_test(LAYOUT, LAYOUT.icon_center(Grasp.PINCH)) is Grasp.PINCH

    def test_gap_between_icons(self):
        x0, y0, x1, y1 = LAYOUT.icon_rect(Grasp.CYLINDRICAL)
        assert hit_test(LAYOUT, (x1 + LAYOUT.gap_cm / 2, y0 + 1.0)) is None

    def test_off_panel(self):
        assert hit_test(LAYOUT, (-3.0, -3.0)) is None

    def test_min_edges_inclusive_max_exclusive(self):
        for grasp in LAYOUT.order:
            x0, y0, x1, y1 = LAYOUT.icon_rect(grasp)
            assert hit_test(LAYOUT, (x0, y0)) is grasp
            assert hit_test(LAYOUT, (x1, y0)) is not grasp
            assert hit_test(LAYOUT, (x0, y1)) is not grasp

    def test_shared_boundary_hits_exactly_one_icon(self):
        # with zero gap neighbouring icons share edges; min-inclusive rule
        # must give every boundary point exactly one owner
        tight = PanelLayout(gap_cm=0.0)
        eps = 1e-9
        for grasp in tight.order:
            x0, y0, x1, y1 = tight.icon_rect(grasp)
            for point in [(x0, y0), (x1 - eps, y0), (x0, y1 - eps), ((x0 + x1) / 2, y0)]:
                owners = [
                    g for g in tight.order
                    if (lambda r: r[0] <= point[0] < r[2] and r[1] <= point[1] < r[3])(tight.icon_rect(g))
                ]
                assert len(owners) == 1
                assert hit_test(tight, point) is owners[0]


class TestIngest:
    def test_event_at_first_sample_reaching_threshold(self):
        # 60 Hz integer-millisecond clock starting at 0
        cx, cy = LAYOUT.icon_center(Grasp.SPHERICAL)
        samples = [GazeSample(round(i * 1000 / 60), cx, cy, True) for i in range(30)]
        events = DwellEngine().run_stream(samples)
        assert len(events) == 1
        assert events[0].grasp is Grasp.SPHERICAL
        # first integer 60 Hz tick at or past 200 ms
        assert events[0].t == 200
        assert events[0].t - samples[0].t >= CONFIG.threshold_ms

    def test_short_dwell_below_threshold(self):
        samples = on_icon(Grasp.TRIPOD, 9)  # spans 8 * 17 = 136 ms < 200
        assert samples[-1].t - samples[0].t < 200
        assert DwellEngine().run_stream(samples) == []

    def test_glance_then_commit_elsewhere(self):
        # 120 ms on Tripod is a gaze, not a selection; the 200 ms on Lateral is
        a = on_icon(Grasp.TRIPOD, 8, start=0)  # spans 119 ms
        b = on_icon(Grasp.LATERAL, 14, start=a[-1].t + 17)  # spans 221 ms
        events = DwellEngine().run_stream(a + b)
        assert [e.grasp for e in events] == [Grasp.LATERAL]

    def test_long_dwell_fires_once(self):
        samples = on_icon(Grasp.HOOK, 60)  # spans ~1000 ms
        events = DwellEngine().run_stream(samples)
        assert len(events) == 1

    def test_exit_and_reenter_rearms(self):
        a = on_icon(Grasp.HOOK, 15, start=0)
        away = stream([(-1.0, -1.0)] * 2, start=a[-1].t + 17)
        b = on_icon(Grasp.HOOK, 15, start=away[-1].t + 17)
        events = DwellEngine().run_stream(a + away + b)
        assert len(events) == 2

    def test_over_tolerance_gap_resets_and_rearms(self):
        a = on_icon(Grasp.PINCH, 15, start=0)
        b = on_icon(Grasp.PINCH, 15, start=a[-1].t + 150)  # gap > 100 ms
        events = DwellEngine().run_stream(a + b)
        assert len(events) == 2

    def test_within_tolerance_gap_preserves_dwell(self):
        cx, cy = LAYOUT.icon_center(Grasp.PINCH)
        samples = [GazeSample(t, cx, cy, True) for t in (0, 90, 180, 260)]
        events = DwellEngine().run_stream(samples)
        assert [e.t for e in events] == [260]

    def test_invalid_sample_breaks_dwell(self):
        cx, cy = LAYOUT.icon_center(Grasp.PINCH)
        samples = [GazeSample(t, cx, cy, True) for t in (0, 60, 120)]
        samples.append(GazeSample(150, cx, cy, False))
        samples += [GazeSample(150 + 17 * (i + 1), cx, cy, True) for i in range(8)]
        assert DwellEngine().run_stream(samples) == []

    def test_non_monotonic_rejected(self):
        engine = DwellEngine()
        engine.ingest(GazeSample(100, 0.0, 0.0, True))
        with pytest.raises(ValueError):
            engine.ingest(GazeSample(100, 0.0, 0.0, True))

    def test_progress_reports_fraction_of_threshold(self):
        cx, cy = LAYOUT.icon_center(Grasp.LATERAL)
        state = DwellState()
        state, _, p0 = ingest_gaze(state, GazeSample(0, cx, cy, True))
        state, _, p1 = ingest_gaze(state, GazeSample(100, cx, cy, True))
        state, _, p2 = ingest_gaze(state, GazeSample(180, cx, cy, True))
        state, _, p3 = ingest_gaze(state, GazeSample(260, cx, cy, True))
        assert (p0, p1, p2, p3) == (0.0, 0.5, 0.9, 1.0)

    def test_latched_only_changes_on_selection(self):
        engine = DwellEngine()
        for s in on_icon(Grasp.TRIPOD, 5):
            engine.ingest(s)
        assert engine.latched is None
        for s in on_icon(Grasp.TRIPOD, 20, start=5 * 17 + 30):
            engine.ingest(s)
        assert engine.latched is Grasp.TRIPOD

    def test_last_writer_wins(self):
        a = on_icon(Grasp.TRIPOD, 15, start=0)
        b = on_icon(Grasp.PINCH, 15, start=a[-1].t + 17)
        engine = DwellEngine()
        events = engine.run_stream(a + b)
        assert [e.grasp for e in events] == [Grasp.TRIPOD, Grasp.PINCH]
        assert engine.latched is Grasp.PINCH


def random_stream(rng, layout=LAYOUT, n_max=150):
    """Gaze stream with varied rate, drops, icon churn and invalid samples."""
    t = rng.randrange(0, 50)
    samples = []
    targets = list(layout.order) + [None, None]
    point = (-2.0, -2.0)
    for _ in range(rng.randrange(10, n_max)):
        if rng.random() < 0.25:  # retarget
            pick = rng.choice(targets)
            if pick is None:
                point = (rng.uniform(-4, 12), rng.uniform(-4, 9))
            else:
                cx, cy = layout.icon_center(pick)
                point = (cx + rng.uniform(-1.0, 1.0), cy + rng.uniform(-1.0, 1.0))
        period = rng.choice([8, 9, 16, 17, 33, 34, 50])  # 20-120 Hz
        if rng.random() < 0.03:
            period += rng.randrange(80, 400)  # dropped stretch
        t += period
        samples.append(GazeSample(t, point[0], point[1], rng.random() > 0.02))
    return samples


class TestOracleEquivalence:
    def test_matches_span_scanner_on_random_streams(self):
        rng = random.Random(7)
        for _ in range(500):
            samples = random_stream(rng)
            expected = dwell_span_events(samples, LAYOUT, CONFIG.threshold_ms, CONFIG.gap_tolerance_ms)
            got = DwellEngine().run_stream(samples)
            assert [(e.grasp, e.t) for e in got] == expected

    def test_deterministic(self):
        rng = random.Random(11)
        samples = random_stream(rng)
        a = DwellEngine().run_stream(samples)
        b = DwellEngine().run_stream(samples)
        assert a == b
