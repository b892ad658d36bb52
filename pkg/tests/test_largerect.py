from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mwisr import corpus, largerect as lr
from mwisr.geom import Rect, Segment
from mwisr.instance import Instance
from mwisr.preprocess import PreconditionError

from helpers import delta_large_corpus, largerect_cfg


def _boundary(N):
    return [Segment("h", 0, 0, N), Segment("h", N, 0, N), Segment("v", 0, 0, N), Segment("v", N, 0, N)]


def _inst(boxes, N, delta, eps=Fraction(1, 2)):
    return Instance(tuple(Rect(i, *b, 1) for i, b in enumerate(boxes)), N, eps, Fraction(delta))


def test_slice_blocks_tall_rect():
    blocks = lr.slice_blocks(_inst([(0, 0, 3, 8)], 8, Fraction(1, 2)))
    assert [(b.x1, b.y1, b.x2, b.y2) for b in blocks] == [(0, 0, 1, 8), (1, 0, 2, 8), (2, 0, 3, 8)]
    assert all(b.vertical for b in blocks)


def test_slice_blocks_unit_width_and_square():
    assert [(b.x1, b.y1, b.x2, b.y2) for b in lr.slice_blocks(_inst([(2, 0, 3, 5)], 8, Fraction(1, 2)))] \
        == [(2, 0, 3, 5)]
    sq = lr.slice_blocks(_inst([(0, 0, 2, 2)], 8, Fraction(1, 8)))
    assert [(b.x1, b.y1, b.x2, b.y2) for b in sq] == [(0, 0, 2, 1), (0, 1, 2, 2)]
    assert not any(b.vertical for b in sq)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_blocks_tile_each_rect(seed):
    inst = corpus.delta_large(6, 16, Fraction(1, 4), seed=seed)
    blocks = lr.slice_blocks(inst)
    for r in inst.rects:
        mine = [b for b in blocks if b.rect_id == r.id]
        assert sum((b.x2 - b.x1) * (b.y2 - b.y1) for b in mine) == r.width * r.height
        cells = {(x, y) for b in mine for x in range(b.x1, b.x2) for y in range(b.y1, b.y2)}
        assert len(cells) == r.width * r.height
        assert all(r.x1 <= b.x1 and b.x2 <= r.x2 and r.y1 <= b.y1 and b.y2 <= r.y2 for b in mine)


def test_no_blocks_gives_cell_side_extensions():
    # without obstacles every vertical cell side extends to a full-length line;
    # horizontal candidates are then split by them into pieces of length delta*N
    inst = Instance((), 16, Fraction(1, 2), Fraction(1, 4))
    cfg = largerect_cfg(inst)
    L0 = lr.build_L0(inst, [], cfg)
    expected = {Segment("v", c, 0, 16) for c in range(0, 17, 4)} | {Segment("h", 0, 0, 16), Segment("h", 16, 0, 16)}
    assert set(L0) == expected and len(L0) == len(expected)
    assert len(L0) <= 16 * 4 ** 2 + 4
    assert lr.extend_loose_ends(L0, [], inst, cfg).lines == []


def test_loose_end_walks_along_block_edge():
    inst = _inst([(1, 1, 14, 3), (2, 7, 15, 11)], 16, Fraction(1, 4))
    part = lr.build_partition(inst, largerect_cfg(inst))
    assert part.ext.lines == [Segment("h", 3, 2, 14)]
    assert part.ext.paths == [((2, 3), 1, "hit_line")]
    assert not part.ext.shortcuts
    assert lr.nicely_connected(part.L0_ext) == []


def test_circumvent_line_along_rect_edge_interior():
    # a vertical line through the interior of a wide rect cuts along its short edge: kept
    inst = _inst([(2, 2, 12, 4)], 16, Fraction(1, 4))
    cfg = largerect_cfg(inst)
    rep = lr.circumvent_rects([Segment("v", 6, 0, 16)], inst, cfg)
    assert rep.circumvented == [] and rep.lines == [Segment("v", 6, 0, 16)]


def test_circumvent_long_overlap_replaced_by_edges():
    # horizontal line running through a wide rect: overlap 10 > delta*N = 4
    inst = _inst([(2, 2, 12, 4)], 16, Fraction(1, 4))
    cfg = largerect_cfg(inst)
    rep = lr.circumvent_rects([Segment("h", 3, 0, 16)], inst, cfg, ["L0"])
    assert rep.circumvented == [0]
    assert rep.new_lines_per_line == {0: 4}
    assert set(rep.lines) == {Segment("h", 3, 0, 2), Segment("h", 3, 12, 16),
                              Segment("h", 2, 2, 12), Segment("h", 4, 2, 12),
                              Segment("v", 2, 2, 4), Segment("v", 12, 2, 4)}
    assert rep.provenance.count("circumvent") == 4


def test_circumvent_partial_entry():
    # line stops inside the rect: intersects without cutting
    inst = _inst([(2, 2, 4, 12)], 16, Fraction(1, 4))
    cfg = largerect_cfg(inst)
    rep = lr.circumvent_rects([Segment("h", 6, 0, 3)], inst, cfg)
    assert rep.circumvented == [0]
    assert Segment("h", 6, 0, 2) in rep.lines
    assert sum(1 for t in rep.provenance if t == "circumvent") == 4


def test_ring_face_is_a_cycle():
    N = 12
    inst = _inst([(1, 1, 11, 3), (9, 3, 11, 11), (1, 9, 9, 11), (1, 3, 3, 9)], N, Fraction(1, 3))
    cfg = largerect_cfg(inst)
    island = [Segment("h", 4, 4, 8), Segment("h", 8, 4, 8), Segment("v", 4, 4, 8), Segment("v", 8, 4, 8)]
    cls = lr.classify_faces(_boundary(N) + island, lr.slice_blocks(inst), inst, cfg)
    assert cls.ok, cls.failures
    assert cls.counts() == {"path": 0, "cycle": 1, "other": 0}
    ring = next(f for f, k in cls.faces.items() if k == "cycle")
    assert cls.euler[ring] == 0
    ring_comps = [c for c in cls.components if c.face == ring]
    assert len(ring_comps) == 8
    assert all(c.shape in ("rectangle", "L-shape") and not c.slit for c in ring_comps)


def test_corridor_face_is_a_path():
    N = 12
    inst = _inst([(1, 5, 11, 7)], N, Fraction(1, 3))
    cfg = largerect_cfg(inst)
    lines = _boundary(N) + [Segment("h", 4, 0, 12), Segment("h", 8, 0, 12)]
    cls = lr.classify_faces(lines, lr.slice_blocks(inst), inst, cfg)
    assert cls.ok, cls.failures
    assert cls.counts() == {"path": 1, "cycle": 0, "other": 0}
    f = next(iter(cls.faces))
    assert cls.euler[f] == 1
    comps = [c for c in cls.components if c.face == f]
    assert len(comps) == 3 and all(c.shape == "rectangle" for c in comps)


def test_slit_detected():
    N = 12
    inst = _inst([(1, 5, 11, 7)], N, Fraction(1, 3))
    cfg = largerect_cfg(inst)
    lines = _boundary(N) + [Segment("h", 4, 0, 12), Segment("h", 8, 0, 12), Segment("v", 2, 4, 5)]
    cls = lr.classify_faces(lines, lr.slice_blocks(inst), inst, cfg)
    assert any(f[0] == "cell_shape" for f in cls.failures)


def test_preconditions():
    cfg = lr.LargeRectConfig(Fraction(1, 2), Fraction(1, 4))
    with pytest.raises(PreconditionError):
        lr.check_instance(_inst([(0, 0, 2, 2)], 16, Fraction(1, 4)), cfg)        # not delta-large
    with pytest.raises(PreconditionError):
        lr.check_instance(_inst([(0, 0, 10, 2), (5, 1, 6, 12)], 16, Fraction(1, 4)), cfg)
    with pytest.raises(PreconditionError):
        lr.check_instance(_inst([(0, 0, 10, 2)], 10, Fraction(1, 4)), cfg)       # delta*N = 5/2
    with pytest.raises(PreconditionError):
        lr.LargeRectConfig(Fraction(1, 2), Fraction(2, 5))


def test_default_path_budget():
    assert lr.LargeRectConfig(Fraction(1, 2), Fraction(1, 4)).M == 64 * 2 * 16


def test_validator_catches_crossing_lines():
    inst = _inst([(1, 1, 14, 3)], 16, Fraction(1, 4))
    cfg = largerect_cfg(inst)
    bad = _boundary(16) + [Segment("h", 8, 0, 16), Segment("v", 8, 0, 16), Segment("v", 4, 2, 12)]
    assert any(v[0] == "proper_crossing" for v in lr.nicely_connected(bad))
    assert any(v[0] == "loose_end" for v in lr.nicely_connected(bad))


@pytest.mark.parametrize("idx", range(16))
def test_corpus_partition_valid(idx):
    items = list(delta_large_corpus(count=16, seed=77))
    _, sub, _ = items[idx]
    part = lr.build_partition(sub, largerect_cfg(sub))
    rep = lr.validate_large_partition(part, sub)
    assert rep.ok, rep.violations[:5]
    assert rep.measures["L0"] <= rep.measures["L0_bound"]
