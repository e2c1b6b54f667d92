"""Score fusion keeps identities straight where appearance alone flips them.

Two agents walk toward each other and cross. Their appearance affinities are
deliberately corrupted in a few frames (as if the segmentation confused the
two), which is enough to swap a pure appearance tracker. The fused score
alpha * s_mask + (1 - alpha) * s_kf lets the motion prediction veto the
spatially impossible candidate.
"""

import numpy as np

from motrack import (
    BoundingBox,
    DetectionCandidate,
    TrackerConfig,
    TrackerState,
    step_tracker,
)

CORRUPTED_FRAMES = {8, 14, 15}  # frames where affinities point the wrong way


def make_frame(t):
    # agent A moves right, agent B moves left along the same lane
    box_a = BoundingBox(20.0 + 10.0 * t, 100.0, 30, 30)
    box_b = BoundingBox(380.0 - 10.0 * t, 104.0, 30, 30)
    swap = t in CORRUPTED_FRAMES
    aff_a = {1: 0.5, 2: 0.95} if swap else {1: 0.95, 2: 0.5}
    aff_b = {1: 0.95, 2: 0.5} if swap else {1: 0.5, 2: 0.95}
    return [
        DetectionCandidate(box_a, s_obj=0.95, s_mask=aff_a),
        DetectionCandidate(box_b, s_obj=0.95, s_mask=aff_b),
    ]


def run(alpha):
    config = TrackerConfig(alpha=alpha, n_init=1)
    state = TrackerState(config=config)
    trace = []
    for t in range(1, 25):
        state, outputs = step_tracker(state, make_frame(t))
        # which track currently sits on agent A's lane (y = 100)?
        owner = next((o.track_id for o in outputs if abs(o.box.y - 100.0) < 2), None)
        trace.append(owner)
    return trace


print("track id occupying agent A's lane, per frame (corruption at", sorted(CORRUPTED_FRAMES), "):")
for alpha, label in [(1.0, "appearance only (alpha=1)"), (0.5, "fused (alpha=0.5)")]:
    trace = run(alpha)
    switches = sum(1 for a, b in zip(trace, trace[1:]) if a != b and None not in (a, b))
    print(f"  {label:28s} {trace}  -> {switches} owner changes")

print()
print("with alpha=0.5 the wrong-way affinity is outweighed by the motion term,")
print("so the same track id follows agent A through every corrupted frame.")
