import json
import random

import pytest

from graspbench.backends import CoContraction, PatternInput, EmgPattern, Tap
from graspbench.domain import GazeSample, Grasp, Phase, PhaseEvent
from graspbench.dwell import PanelLayout
from graspbench.session import (
    OutOfOrderEventError,
    PhaseAlternationError,
    ReplayResult,
    Session,
    SessionConfig,
    SessionError,
    classify_phase,
    read_log,
    replay_events,
    replay_log,
    score_trial,
    session_from_header,
    write_log,
)
from graspbench.wire import ObjectFixation

LAYOUT = PanelLayout()


class TestClassifyPhase:
    def test_facing_table(self):
        assert classify_phase(10.0, Phase.STANDBY) is Phase.OPERATION

    def test_facing_away(self):
        assert classify_phase(170.0, Phase.OPERATION) is Phase.STANDBY

    def test_band_holds_previous(self):
        assert classify_phase(95.0, Phase.OPERATION, 90.0, 10.0) is Phase.OPERATION
        assert classify_phase(95.0, Phase.STANDBY, 90.0, 10.0) is Phase.STANDBY

    def test_no_oscillation_for_constant_angle(self):
        phase = Phase.STANDBY
        seen = []
        for _ in range(50):
            phase = classify_phase(93.0, phase, 90.0, 10.0)
            seen.append(phase)
        assert len(set(seen)) == 1

    def test_out_of_range_rejected(self):
        with pytest.raises(SessionError):
            classify_phase(-1.0, Phase.STANDBY)
        with pytest.raises(SessionError):
            classify_phase(181.0, Phase.STANDBY)

    def test_hysteresis_must_fit_under_threshold(self):
        with pytest.raises(SessionError):
            classify_phase(50.0, Phase.STANDBY, 90.0, 95.0)


class TestScoreTrial:
    def _target(self, catalog, grasp):
        return next(o for o in catalog if o.grasp is grasp)

    def test_st_from_fixation_to_final_correct(self, catalog):
        from graspbench.domain import SelectionEvent, Source

        target = self._target(catalog, Grasp.PINCH)
        record = score_trial(
            set_index=1,
            slot_index=3,
            target=target,
            t_operation_enter=9000,
            t_operation_exit=11500,
            selections=[SelectionEvent(10840, Grasp.PINCH, Source.DWELL)],
            t_first_fixation=10000,
        )
        assert record.st_ms == 840
        assert record.st_seconds == pytest.approx(0.84)
        assert record.st_anchor == "fixation"
        assert record.correct

    def test_wrong_then_right_counts_one_error(self, catalog):
        from graspbench.domain import SelectionEvent, Source

        target = self._target(catalog, Grasp.PINCH)
        record = score_trial(
            set_index=1,
            slot_index=1,
            target=target,
            t_operation_enter=0,
            t_operation_exit=4000,
            selections=[
                SelectionEvent(1000, Grasp.TRIPOD, Source.PR),
                SelectionEvent(2000, Grasp.PINCH, Source.PR),
            ],
        )
        assert record.correct
        assert record.error_count == 1
        assert record.st_anchor == "operation_enter"
        assert record.st_ms == 2000

    def test_vacuous_trial(self, catalog):
        target = self._target(catalog, Grasp.HOOK)
        record = score_trial(
            set_index=1,
            slot_index=1,
            target=target,
            t_operation_enter=0,
            t_operation_exit=1000,
            selections=[],
        )
        assert not record.correct
        assert record.st_ms is None
        assert record.final_grasp is None

    def test_late_fixation_cannot_anchor(self, catalog):
        # a fixation reported after the final target selection falls back to
        # the operation-entry anchor, keeping ST non-negative
        from graspbench.domain import SelectionEvent, Source

        target = self._target(catalog, Grasp.HOOK)
        record = score_trial(
            set_index=1,
            slot_index=1,
            target=target,
            t_operation_enter=1000,
            t_operation_exit=3000,
            selections=[SelectionEvent(1400, Grasp.HOOK, Source.TAP)],
            t_first_fixation=2000,
        )
        assert record.st_anchor == "operation_enter"
        assert record.st_ms == 400

    def test_st_never_negative_over_random_event_orders(self, catalog):
        import random as _random

        from graspbench.domain import SelectionEvent, Source

        rng = _random.Random(4)
        grasps = list(Grasp)
        for _ in range(500):
            target = self._target(catalog, rng.choice(grasps))
            t_enter = rng.randrange(0, 1000)
            t_exit = t_enter + rng.randrange(100, 4000)
            selections = sorted(
                (
                    SelectionEvent(rng.randrange(t_enter, t_exit + 1), rng.choice(grasps), Source.TAP)
                    for _ in range(rng.randrange(0, 5))
                ),
                key=lambda s: s.t,
            )
            fixation = rng.choice([None, rng.randrange(t_enter, t_exit + 1)])
            record = score_trial(
                set_index=1,
                slot_index=1,
                target=target,
                t_operation_enter=t_enter,
                t_operation_exit=t_exit,
                selections=selections,
                t_first_fixation=fixation,
            )
            if record.st_ms is not None:
                assert record.st_ms >= 0
                assert any(s.grasp is target.grasp for s in selections)

    def test_forced_operation_enter_anchor(self, catalog):
        from graspbench.domain import SelectionEvent, Source

        target = self._target(catalog, Grasp.HOOK)
        record = score_trial(
            set_index=1,
            slot_index=1,
            target=target,
            t_operation_enter=1000,
            t_operation_exit=3000,
            selections=[SelectionEvent(2500, Grasp.HOOK, Source.TAP)],
            t_first_fixation=1200,
            st_anchor="operation_enter",
        )
        assert record.st_anchor == "operation_enter"
        assert record.st_ms == 1500


def drive_app_session(suite, set_index=1, st_anchor="auto"):
    """Tap through a whole set correctly with fixed timing."""
    config = SessionConfig(
        gsi_kind="app", subject_id="s1", set_index=set_index, suite_seed=suite.config.seed, st_anchor=st_anchor
    )
    session = Session(config, suite.get_set(set_index), suite.catalog, session_id="test-app")
    t = 1000
    for slot, oid in enumerate(suite.get_set(set_index).slots):
        session.process(PhaseEvent(t, Phase.OPERATION))
        session.process(ObjectFixation(t + 80))
        session.process(Tap(t + 500, suite.catalog.grasp_of_object(oid)))
        session.process(PhaseEvent(t + 700, Phase.STANDBY))
        t += 2000
    return session


class TestSession:
    def test_full_set_scores_23_trials(self, small_suite):
        session = drive_app_session(small_suite)
        assert len(session.records) == 23
        assert session.complete
        assert all(r.correct for r in session.records)
        assert {r.slot_index for r in session.records} == set(range(1, 24))

    def test_standby_inputs_are_logged_but_inert(self, small_suite):
        config = SessionConfig(gsi_kind="app", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        out, commands = session.process(Tap(100, Grasp.HOOK))
        assert out == [] and commands == []
        assert session.latched_grasp is None
        assert session.events[-1]["type"] == "tap"

    def test_no_selection_timestamped_in_standby(self, small_suite):
        session = drive_app_session(small_suite)
        phase = Phase.STANDBY
        windows = []
        start = None
        for msg in session.events:
            if msg.get("type") == "phase":
                if msg["phase"] == "Operation":
                    start = msg["t"]
                    phase = Phase.OPERATION
                else:
                    windows.append((start, msg["t"]))
                    phase = Phase.STANDBY
        selections = [m for m in session.events if m.get("type") == "selection"]
        assert selections
        for sel in selections:
            assert any(a <= sel["t"] <= b for a, b in windows)

    def test_duplicate_phase_rejected(self, small_suite):
        config = SessionConfig(gsi_kind="app", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        session.process(PhaseEvent(10, Phase.OPERATION))
        with pytest.raises(PhaseAlternationError):
            session.process(PhaseEvent(20, Phase.OPERATION))

    def test_out_of_order_rejected(self, small_suite):
        config = SessionConfig(gsi_kind="app", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        session.process(PhaseEvent(100, Phase.OPERATION))
        with pytest.raises(OutOfOrderEventError):
            session.process(Tap(50, Grasp.HOOK))

    def test_input_mismatch_reported(self, small_suite):
        from graspbench.backends import InputMismatchError

        config = SessionConfig(gsi_kind="i-gsi", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        session.process(PhaseEvent(10, Phase.OPERATION))
        with pytest.raises(InputMismatchError):
            session.process(CoContraction(20))

    def test_gaze_dwell_commits_and_emits_command(self, small_suite):
        config = SessionConfig(gsi_kind="i-gsi", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog, session_id="sx")
        session.process(PhaseEvent(0, Phase.OPERATION))
        target = session.current_target.grasp
        cx, cy = LAYOUT.icon_center(target)
        commands = []
        for i in range(15):  # 250 ms at 17 ms period
            out, cmds = session.process(GazeSample(100 + i * 17, cx, cy, True))
            commands += cmds
        assert session.latched_grasp is target
        assert len(commands) == 1
        assert commands[0]["grasp"] == target.value
        assert commands[0]["seq"] == 1
        assert commands[0]["session"] == "sx"

    def test_fsm_steps_recorded(self, small_suite):
        config = SessionConfig(gsi_kind="fsm", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        t = 100
        for slot, oid in enumerate(small_suite.get_set(1).slots):
            session.process(PhaseEvent(t, Phase.OPERATION))
            target = small_suite.catalog.grasp_of_object(oid)
            from graspbench.domain import cycle_distance

            steps = cycle_distance(session.latched_grasp, target)
            for k in range(steps):
                t += 100
                session.process(CoContraction(t))
            t += 100
            session.process(PhaseEvent(t, Phase.STANDBY))
            t += 100
        assert len(session.records) == 23
        for record in session.records:
            assert 1 <= record.steps_required <= 5
            assert record.correct
            # cycling pass-through states count as non-target selections
            assert record.error_count == record.steps_required - 1

    def test_corrections_marked_for_reselecting_backends(self, small_suite):
        config = SessionConfig(gsi_kind="app", set_index=1)
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        session.process(PhaseEvent(10, Phase.OPERATION))
        out1, _ = session.process(Tap(20, Grasp.HOOK))
        out2, _ = session.process(Tap(30, Grasp.PINCH))
        assert out1[0]["cause"] == "commit"
        assert out2[0]["cause"] == "correction"
        assert session.latched_grasp is Grasp.PINCH  # last writer wins


class TestReplay:
    def test_replay_reproduces_records(self, small_suite):
        session = drive_app_session(small_suite)
        result = replay_events(session.events)
        assert result.ok, result.describe()
        assert [r.to_dict() for r in result.records] == [r.to_dict() for r in session.records]

    def test_replay_from_file(self, small_suite, tmp_path):
        session = drive_app_session(small_suite)
        path = tmp_path / "session.jsonl"
        write_log(path, session.events)
        result = replay_log(path)
        assert result.ok

    def test_mutated_event_detected(self, small_suite):
        session = drive_app_session(small_suite)
        events = [json.loads(json.dumps(m)) for m in session.events]
        taps = [i for i, m in enumerate(events) if m.get("type") == "tap"]
        events[taps[3]]["grasp"] = "Hook" if events[taps[3]]["grasp"] != "Hook" else "Pinch"
        result = replay_events(events)
        assert not result.ok
        assert result.divergence is not None

    def test_mutated_output_detected(self, small_suite):
        session = drive_app_session(small_suite)
        events = [json.loads(json.dumps(m)) for m in session.events]
        sels = [i for i, m in enumerate(events) if m.get("type") == "selection"]
        events[sels[0]]["t"] += 1
        result = replay_events(events)
        assert not result.ok
        assert result.divergence["line"] == sels[0] + 1

    def test_dropped_output_detected(self, small_suite):
        session = drive_app_session(small_suite)
        events = [json.loads(json.dumps(m)) for m in session.events]
        sels = [i for i, m in enumerate(events) if m.get("type") == "selection"]
        del events[sels[0]]
        assert not replay_events(events).ok

    def test_pr_replay_with_recognition_errors(self, small_suite):
        from graspbench.backends import PrErrorModel, pattern_for_grasp

        config = SessionConfig(
            gsi_kind="pr",
            set_index=1,
            pr_model=PrErrorModel(error_prob=0.3, rng_seed=77, allow_synthetic_hook=True),
        )
        session = Session(config, small_suite.get_set(1), small_suite.catalog)
        t = 50
        rng = random.Random(0)
        for oid in small_suite.get_set(1).slots:
            session.process(PhaseEvent(t, Phase.OPERATION))
            target = small_suite.catalog.grasp_of_object(oid)
            pattern = pattern_for_grasp(target, allow_synthetic_hook=True)
            for attempt in range(3):  # fixed number of tries, errors or not
                t += 300
                session.process(PatternInput(t, pattern))
            t += 200
            session.process(PhaseEvent(t, Phase.STANDBY))
            t += 300
        result = replay_events(session.events)
        assert result.ok, result.describe()
        assert [r.to_dict() for r in result.records] == [r.to_dict() for r in session.records]
