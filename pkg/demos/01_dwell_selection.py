"""Gaze-dwell selection, step by step.

The panel is a 2x3 grid of 2.5 cm grasp icons. A selection commits when the
gaze stays on one icon for 200 ms; glances below the threshold do nothing.
"""

from graspbench import DwellConfig, DwellEngine, GazeSample, Grasp, PanelLayout, hit_test

layout = PanelLayout()
print("panel geometry (cm):")
for grasp in layout.order:
    print(f"  {grasp.value:<12} rect {layout.icon_rect(grasp)}")

print("\nhit tests:")
print("  center of Pinch ->", hit_test(layout, layout.icon_center(Grasp.PINCH)))
print("  in a gap        ->", hit_test(layout, (2.6, 1.0)))

# 60 Hz gaze: a 120 ms glance at Tripod, then a solid fixation on Lateral
samples = []
t = 0
for _ in range(8):  # ~120 ms on Tripod: a glance, not a selection
    cx, cy = layout.icon_center(Grasp.TRIPOD)
    samples.append(GazeSample(t, cx, cy, True))
    t += 17
for _ in range(20):  # ~330 ms on Lateral: crosses the 200 ms threshold
    cx, cy = layout.icon_center(Grasp.LATERAL)
    samples.append(GazeSample(t, cx, cy, True))
    t += 17

engine = DwellEngine(DwellConfig(threshold_ms=200, gap_tolerance_ms=100), layout)
print("\ningesting a 120 ms glance at Tripod then a fixation on Lateral:")
for sample in samples:
    event = engine.ingest(sample)
    if event is not None:
        print(f"  t={event.t:4d} ms  SELECT {event.grasp.value} (source={event.source.value})")
print("latched grasp:", engine.latched.value)
print("note: exactly one event; the glance and the re-fires are suppressed")
