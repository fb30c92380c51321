"""The three baseline back-ends next to gaze dwell: sequential cycling,
pattern mapping with an error-injected recognizer, and direct taps."""

import random

from graspbench import (
    EmgPattern,
    FsmState,
    Grasp,
    PrErrorModel,
    app_tap,
    cycle_distance,
    fsm_trigger,
    pattern_for_grasp,
    pr_map,
    pr_recognize,
)

print("cycling: from Cylindrical to Pinch needs", cycle_distance(Grasp.CYLINDRICAL, Grasp.PINCH), "triggers")
state = FsmState(Grasp.CYLINDRICAL)
for k in range(3):
    state, event = fsm_trigger(state, t=k * 900)
    print(f"  trigger {k + 1}: hand now {state.current.value}")

print("\npattern matchup (five patterns, Hook has none):")
for pattern in (EmgPattern.WAVE_IN, EmgPattern.WAVE_OUT, EmgPattern.FIST, EmgPattern.FINGERS_SPREAD, EmgPattern.DOUBLE_TAP):
    print(f"  {pattern.value:<14} -> {pr_map(pattern).value}")
try:
    pattern_for_grasp(Grasp.HOOK)
except Exception as e:
    print("  Hook           ->", e)
print("  (a synthetic sixth pattern can be enabled in config for full-cycle runs)")

print("\nrecognition stub at 17.5% error:")
model = PrErrorModel(error_prob=0.175)
rng = random.Random(0)
draws = [pr_recognize(Grasp.TRIPOD, model, rng) for _ in range(100_000)]
hit_rate = sum(d is Grasp.TRIPOD for d in draws) / len(draws)
print(f"  intended Tripod recognized correctly {hit_rate:.3f} of the time (expect ~0.825)")

print("\ndirect tap:", app_tap(Grasp.HOOK, t=0).grasp.value, "selected immediately")
