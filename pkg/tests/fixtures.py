"""Hand-checkable trajectory fixtures shared by the metric and acceptance tests.

All fixtures run 10 frames with two well-separated ground-truth identities
(1 and 2) moving right at 10 px/frame. Hypothesis identities are 101/102 so
no accidental id collision can mask a bug.
"""

from __future__ import annotations

from motrack import BoundingBox, TrajectorySet

N_FRAMES = 10


def gt_box(identity: int, frame: int) -> BoundingBox:
    y = 0.0 if identity == 1 else 300.0
    return BoundingBox(10.0 * frame, y, 20.0, 20.0)


def perfect_gt() -> TrajectorySet:
    return TrajectorySet.from_records(
        (f, i, gt_box(i, f)) for f in range(1, N_FRAMES + 1) for i in (1, 2)
    )


def perfect_hyp() -> TrajectorySet:
    """Identical boxes under relabelled identities."""
    return TrajectorySet.from_records(
        (f, 100 + i, gt_box(i, f)) for f in range(1, N_FRAMES + 1) for i in (1, 2)
    )


def swap_hyp(swap_frame: int = 6) -> TrajectorySet:
    """Correct boxes, but the two hypothesis labels swap from swap_frame on."""
    records = []
    for f in range(1, N_FRAMES + 1):
        if f < swap_frame:
            records.append((f, 101, gt_box(1, f)))
            records.append((f, 102, gt_box(2, f)))
        else:
            records.append((f, 101, gt_box(2, f)))
            records.append((f, 102, gt_box(1, f)))
    return TrajectorySet.from_records(records)


def half_hyp() -> TrajectorySet:
    """Covers exactly the first half of each ground-truth track."""
    return TrajectorySet.from_records(
        (f, 100 + i, gt_box(i, f)) for f in range(1, N_FRAMES // 2 + 1) for i in (1, 2)
    )


def empty_hyp() -> TrajectorySet:
    return TrajectorySet()


def as_records(ts: TrajectorySet) -> list[tuple[int, int, tuple[float, float, float, float]]]:
    """Plain-tuple view consumed by the independent oracle implementations."""
    return [(f, i, (b.x, b.y, b.w, b.h)) for f, i, b in ts.records()]
