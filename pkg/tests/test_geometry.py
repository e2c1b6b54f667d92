import math

import numpy as np
import pytest

from motrack import BoundingBox, center, iou

from oracles import pixel_count_iou


def test_identical_boxes():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0


def test_disjoint_boxes():
    assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 5, 5)) == 0.0


def test_half_shift_overlap():
    a = BoundingBox(0, 0, 10, 10)
    b = BoundingBox(5, 0, 10, 10)
    expected = pixel_count_iou(a, b)
    assert expected == pytest.approx(1.0 / 3.0)
    assert iou(a, b) == pytest.approx(expected, abs=1e-12)


def test_touching_edges_are_disjoint():
    a = BoundingBox(0, 0, 10, 10)
    b = BoundingBox(10, 0, 10, 10)
    assert iou(a, b) == 0.0


def test_matches_pixel_count_oracle_on_integer_boxes():
    rng = np.random.default_rng(7)
    for _ in range(300):
        ax, ay, bx, by = rng.integers(-15, 15, size=4)
        aw, ah, bw, bh = rng.integers(1, 20, size=4)
        a = BoundingBox(float(ax), float(ay), float(aw), float(ah))
        b = BoundingBox(float(bx), float(by), float(bw), float(bh))
        assert iou(a, b) == pytest.approx(pixel_count_iou(a, b), abs=1e-9)


def test_symmetry_and_bounds():
    rng = np.random.default_rng(11)
    for _ in range(300):
        ax, ay, bx, by = rng.uniform(-50, 50, size=4)
        aw, ah, bw, bh = rng.uniform(0.1, 40, size=4)
        a = BoundingBox(ax, ay, aw, ah)
        b = BoundingBox(bx, by, bw, bh)
        ab = iou(a, b)
        assert ab == iou(b, a)
        assert 0.0 <= ab <= 1.0
        assert iou(a, a) == 1.0


@pytest.mark.parametrize(
    "box, expected",
    [
        (BoundingBox(0, 0, 10, 10), (5, 5)),
        (BoundingBox(3, 4, 0.5, 0.5), (3.25, 4.25)),
        (BoundingBox(-10, -10, 20, 20), (0, 0)),
    ],
)
def test_center(box, expected):
    assert center(box) == pytest.approx(expected)


@pytest.mark.parametrize("w, h", [(0, 10), (10, 0), (-1, 10), (10, -3)])
def test_rejects_degenerate_extents(w, h):
    with pytest.raises(ValueError):
        BoundingBox(0, 0, w, h)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_rejects_non_finite_coordinates(bad):
    with pytest.raises(ValueError):
        BoundingBox(bad, 0, 10, 10)
