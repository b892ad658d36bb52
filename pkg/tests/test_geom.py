import random

import numpy as np
from hypothesis import given, settings, strategies as st

from mwisr.geom import Rect, Region, Segment, bitmap_edge_count, faces_of_segments, rects_disjoint


def R(x1, y1, x2, y2, w=1, i=0):
    return Rect(i, x1, y1, x2, y2, w)


def test_disjoint_examples():
    assert rects_disjoint(R(0, 0, 2, 2), R(2, 0, 4, 2))
    assert not rects_disjoint(R(0, 0, 2, 2), R(1, 1, 3, 3))
    assert rects_disjoint(R(0, 0, 3, 1), R(1, 1, 2, 4))


def test_rect_never_disjoint_from_itself():
    r = R(1, 1, 3, 4)
    assert not rects_disjoint(r, r)


@given(st.tuples(*[st.integers(0, 8)] * 8))
def test_disjoint_symmetric(c):
    a = (min(c[0], c[1]), min(c[2], c[3]), max(c[0], c[1]) + 1, max(c[2], c[3]) + 1)
    b = (min(c[4], c[5]), min(c[6], c[7]), max(c[4], c[5]) + 1, max(c[6], c[7]) + 1)
    assert rects_disjoint(R(*a), R(*b)) == rects_disjoint(R(*b), R(*a))


def test_edge_count_examples():
    assert Region.full(4, 4).edge_count == 4
    holed = Region.full(3, 3).subtract(Region.from_rect(3, 3, 1, 1, 2, 2))
    assert holed.edge_count == 8
    ell = Region.full(2, 2).subtract(Region.from_rect(2, 2, 1, 1, 2, 2))
    assert ell.edge_count == 6


def test_subtract_examples():
    sq = Region.full(4, 4)
    assert sq.subtract(sq).is_empty()
    assert sq.subtract(Region.empty(4, 4)) == sq
    ring = sq.subtract(Region.from_rect(4, 4, 1, 1, 3, 3))
    assert ring.component_count == 1
    assert ring.edge_count == 8


def test_components_examples():
    assert Region.empty(3, 3).components() == []
    two = Region.from_rects(3, 3, [(0, 0, 1, 1), (2, 2, 3, 3)])
    assert len(two.components()) == 2


def test_contains_rect_examples():
    assert Region.full(4, 4).contains_rect(R(1, 0, 4, 3))
    assert not Region.empty(4, 4).contains_rect(R(1, 0, 4, 3))
    ring = Region.full(4, 4).subtract(Region.from_rect(4, 4, 1, 1, 3, 3))
    assert not ring.contains_rect(R(1, 1, 3, 3))


def _random_region(rng, size=8):
    cells = np.zeros((size, size), dtype=bool)
    for _ in range(rng.randint(1, 3)):
        x1, x2 = sorted(rng.sample(range(size + 1), 2))
        y1, y2 = sorted(rng.sample(range(size + 1), 2))
        cells[x1:x2, y1:y2] = True
    return Region(cells)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_subtract_intersect_reassemble(seed):
    rng = random.Random(seed)
    a, b = _random_region(rng), _random_region(rng)
    assert a.subtract(b).union(a.intersect(b)) == a


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_single_component_edge_count_even(seed):
    rng = random.Random(seed)
    for comp in _random_region(rng).components():
        assert comp.edge_count % 2 == 0 and comp.edge_count >= 4


def test_region_key_distinguishes_translation():
    a = Region.from_rect(6, 6, 0, 0, 2, 2)
    b = Region.from_rect(6, 6, 3, 3, 5, 5)
    assert a.key() != b.key()
    assert a == Region.from_rect(6, 6, 0, 0, 2, 2)


def test_bitmap_edge_count_matches_region():
    cells = np.zeros((5, 5), dtype=bool)
    cells[0:3, 0:1] = True
    cells[0:1, 0:3] = True
    assert bitmap_edge_count(cells) == Region(cells).edge_count == 6


def test_faces_of_segments_grid():
    segs = [Segment("h", 2, 0, 4), Segment("v", 2, 0, 4)]
    labels, count, _, _ = faces_of_segments(segs, 4, 4)
    assert count == 4
    assert len(np.unique(labels)) == 4


def test_segment_rect_predicates():
    r = R(1, 1, 5, 3)
    assert Segment("v", 2, 0, 4).cuts_rect(r)
    assert Segment("v", 2, 2, 4).intersects_rect(r) and not Segment("v", 2, 2, 4).cuts_rect(r)
    assert not Segment("h", 3, 0, 6).intersects_rect(r)      # along the top edge
    assert Segment("h", 2, 0, 3).overlap_length(r) == 2
