import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mwisr import preprocess, qptas
from mwisr.geom import Rect
from mwisr.instance import Instance
from mwisr.qptas import HeavyRectError

from helpers import disjoint_instance, tiling_instance


def _graph(inst, delta):
    lines = qptas.build_partition_lines(inst, delta)
    return lines, qptas.build_arrangement_graph(lines, inst)


def test_empty_instance_is_the_grid():
    # cells of side delta^2 * N: four per side for delta = 1/2
    lines, g = _graph(Instance((), 4), Fraction(1, 2))
    assert set(lines.provenance) <= {"grid"}
    assert (len(g.vertices), len(g.edges), g.face_count) == (25, 40, 16)
    assert all(c == 0 for c in g.edge_cost)
    assert qptas.validate_partition(lines, g, Instance((), 4)).ok


def test_large_vertical_rect_becomes_face():
    inst = Instance((Rect(0, 1, 1, 3, 7, 4),), 8)
    lines, g = _graph(inst, Fraction(1, 2))
    edges = set(lines.by_provenance("rect-edge"))
    assert len(edges) == 4
    assert lines.rect_face_ids == (0,) or list(lines.rect_face_ids) == [0]
    assert sum(1 for r in g.rect_face if r is not None) == 1


def test_partition_needs_integral_grid():
    with pytest.raises(preprocess.PreconditionError):
        qptas.build_partition_lines(Instance((), 6), Fraction(1, 4))


def _stretched(seed, delta):
    inst = disjoint_instance(seed, n_max=8)
    work = qptas.prepare_instance(inst)
    f = qptas.grid_scale_factor(work.N, delta)
    return preprocess.scale_coords(work, f) if f != 1 else work


@settings(max_examples=45, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]))
def test_structural_bounds_on_stretched_instances(seed, delta):
    inst = _stretched(seed, delta)
    lines, g = _graph(inst, delta)
    rep = qptas.validate_partition(lines, g, inst)
    assert rep.ok, rep.violations
    assert sum(g.face_weight, Fraction(0)) == inst.total_weight


def test_grid_scale_factor_is_minimal():
    assert qptas.grid_scale_factor(4, Fraction(1, 2)) == 1
    assert qptas.grid_scale_factor(6, Fraction(1, 2)) == 2
    assert qptas.grid_scale_factor(12, Fraction(1, 3)) == 3
    assert qptas.grid_scale_factor(36, Fraction(1, 6)) == 1


def test_clustered_instance_breaks_face_weight_bound():
    # four unit rects inside one grid cell: not well-distributed, one face holds all
    rects = tuple(Rect(i, x, y, x + 1, y + 1, 1) for i, (x, y) in enumerate([(0, 0), (1, 0), (0, 1), (1, 1)]))
    inst = Instance(rects, 32)
    assert not preprocess.is_well_distributed(inst).ok
    lines, g = _graph(inst, Fraction(1, 4))
    rep = qptas.validate_partition(lines, g, inst)
    assert not rep.ok
    assert any(v[0] == "face_touched_weight" for v in rep.violations)


def test_separator_two_equal_faces():
    inst = Instance((Rect(0, 0, 0, 2, 4, 3), Rect(1, 2, 0, 4, 4, 3)), 4)
    _, g = _graph(inst, Fraction(1, 2))
    cyc = qptas.find_separator(g, 2)
    assert cyc.mode == "exhaustive"
    assert cyc.balance == Fraction(1, 2) and cyc.cost == 0 and not cyc.crossed


def test_separator_heavy_face():
    inst = Instance((Rect(0, 0, 0, 3, 4, 4), Rect(1, 3, 0, 4, 2, 1), Rect(2, 3, 2, 4, 4, 1)), 4)
    _, g = _graph(inst, Fraction(1, 2))
    cyc = qptas.find_separator(g, 2)
    assert cyc.balanced
    assert max(cyc.inside_weight, cyc.outside_weight) == 4


def test_heuristic_balanced_when_exhaustive_is():
    checked = 0
    for seed in range(120):
        inst = tiling_instance(seed)
        if inst is None:
            continue
        _, g = _graph(inst, Fraction(1, 6))
        ex = qptas.find_separator(g, 6, mode="exhaustive")
        he = qptas.find_separator(g, 6, mode="heuristic")
        if ex.balanced:
            assert he.balanced
        checked += 1
    assert checked >= 20


@pytest.mark.parametrize("boxes", [
    [(0, 0, 12, 36), (12, 0, 24, 36), (24, 0, 36, 36)],
    [(0, 0, 12, 12), (12, 12, 24, 24), (24, 24, 36, 36)],
])
def test_three_equal_rects_cut(boxes):
    inst = Instance(tuple(Rect(i, *b, 5) for i, b in enumerate(boxes)), 36)
    cut = qptas.balanced_cheap_cut(inst, Fraction(1, 6))
    assert sorted([cut.inside_weight, cut.outside_weight]) == [5, 10]
    assert cut.crossed_weight == 0
    assert cut.inside_weight + cut.outside_weight + cut.crossed_weight == 15


def test_heavy_rect_rejected():
    inst = Instance((Rect(0, 0, 0, 12, 36, 20), Rect(1, 12, 0, 24, 36, 5), Rect(2, 24, 0, 36, 36, 5)), 36)
    with pytest.raises(HeavyRectError) as exc:
        qptas.balanced_cheap_cut(inst, Fraction(1, 6))
    assert exc.value.offenders == [0]


def test_cut_preconditions():
    inst = Instance((Rect(0, 0, 0, 12, 36, 5), Rect(1, 12, 0, 24, 36, 5), Rect(2, 24, 0, 36, 36, 5)), 36)
    with pytest.raises(preprocess.PreconditionError):
        qptas.balanced_cheap_cut(inst, Fraction(1, 4))       # delta not below 1/5
    overlapping = Instance((Rect(0, 0, 0, 20, 36, 5), Rect(1, 12, 0, 24, 36, 5), Rect(2, 24, 0, 36, 36, 5)), 36)
    with pytest.raises(preprocess.PreconditionError):
        qptas.balanced_cheap_cut(overlapping, Fraction(1, 6))


def test_cut_edge_count_recorded_on_tilings():
    ratios = []
    for seed in range(60):
        inst = tiling_instance(seed)
        if inst is None:
            continue
        cut = qptas.balanced_cheap_cut(inst, Fraction(1, 6))
        W = cut.total_weight
        assert 3 * cut.inside_weight <= 2 * W and 3 * cut.outside_weight <= 2 * W
        ratios.append(Fraction(cut.edge_count, 6 ** 4))
    assert ratios and max(ratios) < 1


def test_proper_crossings_detects():
    from mwisr.geom import Segment
    segs = [Segment("h", 2, 0, 4), Segment("v", 2, 0, 4), Segment("v", 4, 0, 2)]
    assert len(qptas.proper_crossings(segs)) == 1


def test_cell_line_on_grid_boundary_may_cross_small_rect():
    # a crossing rect flush with the cell top puts its edge on the grid line,
    # where a rect poking in from the side is legitimately crossed
    rects = (Rect(0, 4, 0, 14, 6, 10), Rect(1, 0, 4, 3, 9, 5), Rect(2, 7, 9, 16, 12, 9),
             Rect(3, 16, 12, 19, 18, 8), Rect(4, 20, 6, 22, 9, 6), Rect(5, 10, 15, 15, 19, 10))
    inst = Instance(rects, 24)
    lines, g = _graph(inst, Fraction(1, 2))
    on_grid = [s for s in lines.by_provenance("cell-interior") if s.fixed % lines.cell_side == 0]
    assert any(s.intersects_rect(rects[1]) for s in on_grid)
    rep = qptas.validate_partition(lines, g, inst)
    assert rep.ok, rep.violations
