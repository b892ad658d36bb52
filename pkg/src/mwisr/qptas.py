"""Grid-based plane partition, its planar arrangement graph, separator search
and balanced cheap cuts for well-distributed instances of disjoint rectangles.
"""
from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from .geom import Rect, Region, Segment, faces_of_segments, id_key, rects_disjoint
from .instance import Instance
from .preprocess import (PreconditionError, compress_coords, is_well_distributed,
                         scale_coords, stretch_well_distributed)

EXHAUSTIVE_FACE_LIMIT = 14


class HeavyRectError(PreconditionError):
    """A single rect holds more than a third of the weight; carve it instead."""


class SeparatorError(ValueError):
    pass


def _inverse_delta(delta) -> int:
    delta = Fraction(delta)
    if not 0 < delta < 1 or delta.numerator != 1:
        raise PreconditionError(f"1/delta must be a positive integer, got delta={delta}")
    return delta.denominator


def grid_scale_factor(N: int, delta) -> int:
    """Smallest integer factor making delta^2 * N integral."""
    inv2 = _inverse_delta(delta) ** 2
    return inv2 // math.gcd(N, inv2)


def overlapping_pairs(rects) -> list:
    return [(a.id, b.id) for a, b in combinations(rects, 2) if not rects_disjoint(a, b)]


# -- lines -------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionLines:
    lines: tuple                 # Segments, duplicates removed
    provenance: tuple            # 'grid' | 'rect-edge' | 'cell-interior' per line
    delta: Fraction
    N: int
    cell_side: int
    rect_face_ids: tuple
    cell_cases: dict = field(default_factory=dict, compare=False)
    # cell -> (axis, ids) for cells whose crossing rects mix orientations
    mixed_cells: dict = field(default_factory=dict, compare=False)

    def by_provenance(self, tag: str) -> list:
        return [s for s, p in zip(self.lines, self.provenance) if p == tag]

    def to_dict(self) -> dict:
        return {"delta": str(self.delta), "N": self.N, "cell_side": self.cell_side,
                "rect_faces": sorted(self.rect_face_ids, key=id_key),
                "lines": [s.to_list() + [p] for s, p in zip(self.lines, self.provenance)]}


def _is_large(r: Rect, side: int) -> bool:
    return r.width > side or r.height > side


def _cut_by_grid(lo: int, hi: int, side: int) -> bool:
    return (lo // side + 1) * side < hi


def _crosses(r: Rect, q) -> bool:
    qx1, qy1, qx2, qy2 = q
    if not (r.x1 < qx2 and r.x2 > qx1 and r.y1 < qy2 and r.y2 > qy1):
        return False
    return (r.x1 <= qx1 and r.x2 >= qx2) or (r.y1 <= qy1 and r.y2 >= qy2)


def _clip(seg: Segment, faces) -> list:
    """Remove the parts of `seg` inside the open interior of any face rect."""
    pieces = [(seg.lo, seg.hi)]
    for r in faces:
        if seg.axis == "h":
            inside = r.y1 < seg.fixed < r.y2
            a, b = r.x1, r.x2
        else:
            inside = r.x1 < seg.fixed < r.x2
            a, b = r.y1, r.y2
        if not inside:
            continue
        nxt = []
        for lo, hi in pieces:
            if hi <= a or lo >= b:
                nxt.append((lo, hi))
                continue
            if lo < a:
                nxt.append((lo, a))
            if hi > b:
                nxt.append((b, hi))
        pieces = nxt
    return [Segment(seg.axis, seg.fixed, lo, hi) for lo, hi in pieces if hi > lo]


def build_partition_lines(inst: Instance, delta) -> PartitionLines:
    """Grid of cells with side delta^2*N, rectangle faces for large rects cut
    by a grid line parallel to their longer side, then per-cell lines."""
    delta = Fraction(delta)
    inv = _inverse_delta(delta)
    N = inst.N
    if (N * delta * delta).denominator != 1:
        raise PreconditionError(f"delta^2*N = {N * delta * delta} is not integral; scale first")
    bad = overlapping_pairs(inst.rects)
    if bad:
        raise PreconditionError("input rects overlap", bad)
    side = int(N * delta * delta)
    cells = inv * inv

    faces = []
    for r in inst.rects:
        if not _is_large(r, side):
            continue
        if r.is_vertical and _cut_by_grid(r.x1, r.x2, side):
            faces.append(r)
        elif not r.is_vertical and _cut_by_grid(r.y1, r.y2, side):
            faces.append(r)
    face_ids = {r.id for r in faces}
    others = [r for r in inst.rects if r.id not in face_ids]

    out: dict = {}

    def add(seg: Segment, tag: str, clip: bool = True):
        for piece in (_clip(seg, faces) if clip else [seg]):
            out.setdefault(piece, tag)

    for s in (Segment("h", 0, 0, N), Segment("h", N, 0, N),
              Segment("v", 0, 0, N), Segment("v", N, 0, N)):
        add(s, "grid", clip=False)
    for r in faces:
        for s in (Segment("h", r.y1, r.x1, r.x2), Segment("h", r.y2, r.x1, r.x2),
                  Segment("v", r.x1, r.y1, r.y2), Segment("v", r.x2, r.y1, r.y2)):
            add(s, "rect-edge", clip=False)

    cases = {}
    mixed = {}
    for j in range(cells):
        for i in range(cells):
            q = (i * side, j * side, (i + 1) * side, (j + 1) * side)
            qx1, qy1, qx2, qy2 = q
            rq = [r for r in others if _crosses(r, q)]
            vert = [r for r in rq if r.is_vertical]
            hor = [r for r in rq if not r.is_vertical]
            if vert and hor:
                # opposite-orientation crossers only coexist when touching
                # cell sides; follow the orientation crossing the full cell
                full_v = [r for r in vert if r.y1 <= qy1 and r.y2 >= qy2]
                axis = "v" if full_v or not [r for r in hor if r.x1 <= qx1 and r.x2 >= qx2] else "h"
                mixed[(i, j)] = (axis, sorted((r.id for r in rq), key=id_key))
                vert, hor = (vert, []) if axis == "v" else ([], hor)
            if not rq:
                cases[(i, j)] = "empty"
                for s in (Segment("h", qy1, qx1, qx2), Segment("h", qy2, qx1, qx2),
                          Segment("v", qx1, qy1, qy2), Segment("v", qx2, qy1, qy2)):
                    add(s, "grid")
            elif vert:
                cases[(i, j)] = "vertical"
                xl = min(r.x1 for r in vert)
                xr = max(r.x2 for r in vert)
                add(Segment("v", xl, qy1, qy2), "cell-interior")
                add(Segment("v", xr, qy1, qy2), "cell-interior")
                add(Segment("v", qx1, qy1, qy2), "grid")
                add(Segment("v", qx2, qy1, qy2), "grid")
                for y in (qy1, qy2):
                    if xl > qx1:
                        add(Segment("h", y, qx1, xl), "grid")
                    if qx2 > xr:
                        add(Segment("h", y, xr, qx2), "grid")
            else:
                cases[(i, j)] = "horizontal"
                yb = min(r.y1 for r in hor)
                yt = max(r.y2 for r in hor)
                add(Segment("h", yb, qx1, qx2), "cell-interior")
                add(Segment("h", yt, qx1, qx2), "cell-interior")
                add(Segment("h", qy1, qx1, qx2), "grid")
                add(Segment("h", qy2, qx1, qx2), "grid")
                for x in (qx1, qx2):
                    if yb > qy1:
                        add(Segment("v", x, qy1, yb), "grid")
                    if qy2 > yt:
                        add(Segment("v", x, yt, qy2), "grid")

    segs = list(out)
    return PartitionLines(tuple(segs), tuple(out[s] for s in segs), delta, N, side,
                          tuple(sorted(face_ids, key=id_key)), cases, mixed)


def proper_crossings(segments) -> list:
    """Pairs of segments meeting in a single point interior to both."""
    hs = [s for s in segments if s.axis == "h"]
    vs = [s for s in segments if s.axis == "v"]
    if not hs or not vs:
        return []
    H = np.array([(s.fixed, s.lo, s.hi) for s in hs])
    V = np.array([(s.fixed, s.lo, s.hi) for s in vs])
    hit = ((V[None, :, 1] < H[:, None, 0]) & (H[:, None, 0] < V[None, :, 2])
           & (H[:, None, 1] < V[None, :, 0]) & (V[None, :, 0] < H[:, None, 2]))
    return [(hs[i], vs[j]) for i, j in np.argwhere(hit)]


# -- graph -------------------------------------------------------------------

@dataclass
class ArrangementGraph:
    N: int
    vertices: list               # sorted (x, y)
    edges: list                  # Segments between consecutive vertices
    edge_cost: list              # weight of rects intersecting each edge
    edge_faces: list             # (face, face|None) on the two sides; None = outside
    labels: np.ndarray           # face label per unit cell
    face_weight: list            # Fractions
    face_area: list
    rect_face: list              # rect id when the face is a rectangle face, else None
    rect_touch: dict             # rect id -> tuple of faces it meets
    total_weight: object
    _dual: Optional[tuple] = None

    @property
    def face_count(self) -> int:
        return len(self.face_weight)

    def face_region(self, f: int) -> Region:
        return Region(self.labels == f)

    def faces_region(self, faces) -> Region:
        return Region(np.isin(self.labels, list(faces)))

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        idx = {v: i for i, v in enumerate(self.vertices)}
        parent = list(range(len(idx)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            a, b = (idx[p] for p in e.endpoints)
            parent[find(a)] = find(b)
        return len({find(i) for i in range(len(parent))}) == 1

    def dual(self):
        """(neighbour sets, cost per face pair, border faces)."""
        if self._dual is None:
            nb = [set() for _ in range(self.face_count)]
            cost: dict = {}
            border = set()
            for e, c, (f, g) in zip(self.edges, self.edge_cost, self.edge_faces):
                if g is None:
                    border.add(f)
                    continue
                if f == g:
                    continue
                nb[f].add(g)
                nb[g].add(f)
                key = (min(f, g), max(f, g))
                cost[key] = cost.get(key, 0) + c
            self._dual = ([sorted(s) for s in nb], cost, frozenset(border))
        return self._dual

    def stats(self) -> dict:
        return {"vertices": len(self.vertices), "edges": len(self.edges),
                "faces": self.face_count,
                "rect_faces": sum(1 for r in self.rect_face if r is not None),
                "total_cost": str(sum(self.edge_cost, 0))}


def _split_edges(segments) -> tuple:
    pts = set()
    for s in segments:
        pts.update(s.endpoints)
    rows: dict = {}
    cols: dict = {}
    for x, y in pts:
        rows.setdefault(y, []).append(x)
        cols.setdefault(x, []).append(y)
    for d in (rows, cols):
        for v in d.values():
            v.sort()
    edges = set()
    for s in segments:
        along = rows[s.fixed] if s.axis == "h" else cols[s.fixed]
        i = bisect.bisect_left(along, s.lo)
        j = bisect.bisect_right(along, s.hi)
        stops = along[i:j]
        for a, b in zip(stops, stops[1:]):
            edges.add(Segment(s.axis, s.fixed, a, b))
    return sorted(pts), sorted(edges)


def _edge_rect_hits(edges, rects) -> np.ndarray:
    """Boolean matrix [edge, rect]: edge passes through the open rect."""
    if not edges or not rects:
        return np.zeros((len(edges), len(rects)), dtype=bool)
    E = np.array([(0 if e.axis == "h" else 1, e.fixed, e.lo, e.hi) for e in edges])
    R = np.array([(r.x1, r.y1, r.x2, r.y2) for r in rects])
    horiz = E[:, 0:1] == 0
    f, lo, hi = E[:, 1:2], E[:, 2:3], E[:, 3:4]
    x1, y1, x2, y2 = (R[:, k][None, :] for k in range(4))
    h_hit = (y1 < f) & (f < y2) & (lo < x2) & (hi > x1)
    v_hit = (x1 < f) & (f < x2) & (lo < y2) & (hi > y1)
    return np.where(horiz, h_hit, v_hit)


def build_arrangement_graph(lines: PartitionLines, inst: Instance) -> ArrangementGraph:
    N = lines.N
    vertices, edges = _split_edges(lines.lines)
    labels, count, _, _ = faces_of_segments(lines.lines, N, N)
    rects = list(inst.rects)
    hits = _edge_rect_hits(edges, rects)
    weights = [r.weight for r in rects]
    edge_cost = [sum((weights[j] for j in np.flatnonzero(row)), 0) for row in hits]
    edge_faces = []
    for e in edges:
        if e.axis == "h":
            a = labels[e.lo, e.fixed] if e.fixed < N else None
            b = labels[e.lo, e.fixed - 1] if e.fixed > 0 else None
        else:
            a = labels[e.fixed, e.lo] if e.fixed < N else None
            b = labels[e.fixed - 1, e.lo] if e.fixed > 0 else None
        pair = [int(v) for v in (a, b) if v is not None]
        edge_faces.append((pair[0], pair[1] if len(pair) > 1 else None))
    face_weight = [Fraction(0)] * count
    touch = {}
    for r in rects:
        fs = tuple(int(v) for v in np.unique(labels[r.x1:r.x2, r.y1:r.y2]))
        touch[r.id] = fs
        share = Fraction(r.weight) / len(fs)
        for f in fs:
            face_weight[f] += share
    area = np.bincount(labels.ravel(), minlength=count).tolist()
    face_ids = set(lines.rect_face_ids)
    rect_face = [None] * count
    for r in rects:
        if r.id in face_ids and len(touch[r.id]) == 1:
            f = touch[r.id][0]
            if area[f] == r.width * r.height:
                rect_face[f] = r.id
    return ArrangementGraph(N, vertices, edges, edge_cost, edge_faces, labels, face_weight,
                            area, rect_face, touch, inst.total_weight)


@dataclass
class PartitionReport:
    ok: bool
    violations: list
    measures: dict


def validate_partition(lines: PartitionLines, graph: ArrangementGraph, inst: Instance) -> PartitionReport:
    """Check the structural bounds of the partition against exact counts."""
    inv = lines.delta.denominator
    W = Fraction(inst.total_weight)
    viol = []
    n_rect_faces = sum(1 for r in graph.rect_face if r is not None)
    if n_rect_faces > 2 * inv ** 4:
        viol.append(("rect_faces", n_rect_faces, 2 * inv ** 4))
    if len(lines.rect_face_ids) != n_rect_faces:
        viol.append(("rect_face_shape", len(lines.rect_face_ids), n_rect_faces))
    if len(graph.vertices) > 20 * inv ** 4:
        viol.append(("vertices", len(graph.vertices), 20 * inv ** 4))
    if len(graph.edges) > 40 * inv ** 4:
        viol.append(("edges", len(graph.edges), 40 * inv ** 4))
    rects = list(inst.rects)
    hits = _edge_rect_hits(graph.edges, rects)
    per_rect = hits.sum(axis=0).tolist() if rects else []
    for r, c in zip(rects, per_rect):
        if c > 4:
            viol.append(("edges_per_rect", r.id, c))
    limit = 8 * lines.delta ** 2 * W
    touched = [Fraction(0)] * graph.face_count
    boundary = [Fraction(0)] * graph.face_count
    for r in rects:
        fs = graph.rect_touch[r.id]
        for f in fs:
            touched[f] += r.weight
            if len(fs) > 1:
                boundary[f] += r.weight
    worst = Fraction(0)
    for f in range(graph.face_count):
        if graph.rect_face[f] is not None:
            continue
        worst = max(worst, touched[f])
        if touched[f] > limit:
            viol.append(("face_touched_weight", f, touched[f], limit))
        if boundary[f] > limit:
            viol.append(("face_boundary_weight", f, boundary[f], limit))
    total_faces = sum(graph.face_weight, Fraction(0))
    if total_faces != W:
        viol.append(("face_weight_sum", total_faces, W))
    crossings = proper_crossings(lines.lines)
    if crossings:
        viol.append(("proper_crossings", len(crossings)))
    interior = lines.by_provenance("cell-interior")
    face_ids = set(lines.rect_face_ids)
    for s in interior:
        if s.fixed % lines.cell_side == 0:
            continue        # on a grid line: crossings there are bounded per rect above
        for r in rects:
            if r.id not in face_ids and s.intersects_rect(r):
                viol.append(("interior_line_hits_rect", s.to_list(), r.id))
    if lines.mixed_cells:
        viol.append(("mixed_orientation_cells", sorted(lines.mixed_cells)))
    measures = {
        "rect_faces": n_rect_faces, "vertices": len(graph.vertices), "edges": len(graph.edges),
        "faces": graph.face_count, "max_edges_per_rect": max(per_rect, default=0),
        "max_nonrect_touched_over_W": str(worst / W) if W else "0",
        "total_cost_over_W": str(Fraction(sum(graph.edge_cost, 0)) / W) if W else "0",
    }
    return PartitionReport(not viol, viol, measures)


# -- separator ---------------------------------------------------------------

@dataclass
class VCycle:
    inside: frozenset            # faces enclosed
    crossed: tuple               # faces traversed by face edges
    cost: object                 # ordinary-edge cost
    inside_weight: Fraction
    outside_weight: Fraction
    crossed_weight: Fraction
    total: Fraction
    mode: str
    candidates: int = 0

    @property
    def face_edges(self) -> int:
        return len(self.crossed)

    @property
    def balance(self) -> Fraction:
        if not self.total:
            return Fraction(0)
        return max(self.inside_weight, self.outside_weight) / self.total

    @property
    def balanced(self) -> bool:
        return 3 * self.inside_weight <= 2 * self.total and 3 * self.outside_weight <= 2 * self.total

    def to_dict(self) -> dict:
        return {"inside": sorted(self.inside), "crossed": list(self.crossed), "cost": str(self.cost),
                "inside_weight": str(self.inside_weight), "outside_weight": str(self.outside_weight),
                "crossed_weight": str(self.crossed_weight), "balance": str(self.balance),
                "mode": self.mode, "candidates": self.candidates}


def _components(faces, nb, allowed) -> list:
    seen = set()
    comps = []
    for f in faces:
        if f in seen:
            continue
        comp = [f]
        seen.add(f)
        dq = deque([f])
        while dq:
            u = dq.popleft()
            for v in nb[u]:
                if v in allowed and v not in seen:
                    seen.add(v)
                    comp.append(v)
                    dq.append(v)
        comps.append(comp)
    return comps


def _fill_holes(inside: set, nb, border, count) -> set:
    rest = set(range(count)) - inside
    filled = set(inside)
    for comp in _components(sorted(rest), nb, rest):
        if not any(f in border for f in comp):
            filled.update(comp)
    return filled


def _score(inside_w, outside_w, cost, total, n_crossed, key):
    ok = 3 * inside_w <= 2 * total and 3 * outside_w <= 2 * total
    return (not ok, cost, max(inside_w, outside_w), n_crossed, key)


def find_separator(graph: ArrangementGraph, kbar: int, mode: str = "auto",
                   max_starts: int = 16, max_evals: int = 64) -> VCycle:
    """Balanced V-cycle: enclosed faces form a connected hole-free set; up to
    `kbar` faces (at most one in exhaustive mode) may be crossed instead.

    Candidates rank by balance within 2/3 first, then ordinary-edge cost,
    then the heavier side, then fewer face edges.
    """
    if not graph.is_connected():
        raise SeparatorError("arrangement graph is disconnected")
    F = graph.face_count
    if F < 2:
        raise SeparatorError("need at least two faces to separate")
    if mode == "auto":
        mode = "exhaustive" if F <= EXHAUSTIVE_FACE_LIMIT else "heuristic"
    if mode == "exhaustive":
        if F > EXHAUSTIVE_FACE_LIMIT:
            raise SeparatorError(f"exhaustive mode limited to {EXHAUSTIVE_FACE_LIMIT} faces")
        return _exhaustive(graph, kbar)
    if mode == "heuristic":
        return _heuristic(graph, kbar, max_starts, max_evals)
    raise ValueError(f"unknown separator mode {mode!r}")


def _exhaustive(graph: ArrangementGraph, kbar: int) -> VCycle:
    nb, cost, border = graph.dual()
    F = graph.face_count
    full = (1 << F) - 1
    nbm = [sum(1 << v for v in nb[f]) for f in range(F)]
    border_m = sum(1 << f for f in border)
    wts = graph.face_weight
    W = Fraction(graph.total_weight)
    pair_cost = [[0] * F for _ in range(F)]
    for (a, b), c in cost.items():
        pair_cost[a][b] = pair_cost[b][a] = c

    def reach(start_bit, allowed):
        seen = start_bit
        frontier = start_bit
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= nbm[low.bit_length() - 1]
                m ^= low
            nxt &= allowed & ~seen
            seen |= nxt
            frontier = nxt
        return seen

    def simple(mask):
        if reach(mask & -mask, mask) != mask:
            return False
        rest = full & ~mask
        while rest:
            comp = reach(rest & -rest, full & ~mask)
            if not comp & border_m:
                return False
            rest &= ~comp
        return True

    ok_masks = [m for m in range(1, full) if simple(m)]
    ok_set = set(ok_masks)
    best = None
    count = 0
    for m in ok_masks:
        members = [f for f in range(F) if m >> f & 1]
        win = sum((wts[f] for f in members), Fraction(0))
        options = [()]
        if kbar >= 1:
            adj = 0
            for f in members:
                adj |= nbm[f]
            adj &= ~m
            options += [(g,) for g in range(F) if adj >> g & 1 and (m | 1 << g) in ok_set]
        for x in options:
            count += 1
            xm = sum(1 << g for g in x)
            wx = sum((wts[g] for g in x), Fraction(0))
            wout = W - win - wx
            c = sum(pair_cost[f][g] for f in members for g in range(F)
                    if not (m | xm) >> g & 1 and pair_cost[f][g])
            key = _score(win, wout, c, W, len(x), (tuple(members), x))
            if best is None or key < best[0]:
                best = (key, frozenset(members), x, c, win, wout, wx)
    _, inside, crossed, c, win, wout, wx = best
    return VCycle(inside, crossed, c, win, wout, wx, W, "exhaustive", count)


def _heuristic(graph: ArrangementGraph, kbar: int, max_starts: int, max_evals: int) -> VCycle:
    nb, cost, border = graph.dual()
    F = graph.face_count
    wts = graph.face_weight
    W = Fraction(graph.total_weight)
    starts = sorted(range(F), key=lambda f: (-wts[f], f))[:max_starts]
    best = None
    count = 0

    def evaluate(inside: set, crossed: tuple):
        nonlocal best, count
        count += 1
        win = sum((wts[f] for f in inside), Fraction(0))
        wx = sum((wts[g] for g in crossed), Fraction(0))
        wout = W - win - wx
        skip = inside | set(crossed)
        c = sum(cost.get((min(f, g), max(f, g)), 0) for f in inside for g in nb[f] if g not in skip)
        key = _score(win, wout, c, W, len(crossed), (tuple(sorted(inside)), crossed))
        if best is None or key < best[0]:
            best = (key, frozenset(inside), crossed, c, win, wout, wx)

    for s in starts:
        order = [s]
        seen = {s}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for v in nb[u]:
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    dq.append(v)
        acc = Fraction(0)
        evals = 0
        for i, f in enumerate(order[:-1]):
            acc += wts[f]
            if 3 * acc < W and i + 1 < len(order) - 1 and 3 * (acc + wts[order[i + 1]]) < W:
                continue
            inside = _fill_holes(set(order[:i + 1]), nb, border, F)
            if len(inside) == F:
                break
            evaluate(inside, ())
            nxt = order[i + 1]
            if kbar >= 1 and nxt not in inside:
                widened = _fill_holes(inside | {nxt}, nb, border, F)
                if widened == inside | {nxt} and len(widened) < F:
                    evaluate(inside, (nxt,))
            evals += 1
            if evals >= max_evals or 3 * acc > 2 * W:
                break
    if best is None:
        raise SeparatorError("no separating cycle found")
    _, inside, crossed, c, win, wout, wx = best
    return VCycle(inside, crossed, c, win, wout, wx, W, "heuristic", count)


# -- balanced cut ------------------------------------------------------------

@dataclass
class CutResult:
    cut_region: Region
    inside_weight: object
    outside_weight: object
    crossed_weight: object
    edge_count: int
    inside_ids: list
    outside_ids: list
    crossed_ids: list
    total_weight: object
    separator: VCycle
    graph_stats: dict
    scale: int = 1

    def to_dict(self) -> dict:
        return {"inside_weight": str(self.inside_weight), "outside_weight": str(self.outside_weight),
                "crossed_weight": str(self.crossed_weight), "edge_count": self.edge_count,
                "inside": sorted(self.inside_ids, key=id_key),
                "outside": sorted(self.outside_ids, key=id_key),
                "crossed": sorted(self.crossed_ids, key=id_key),
                "total_weight": str(self.total_weight), "scale": self.scale,
                "separator": self.separator.to_dict(), "graph": self.graph_stats}


def check_cut_preconditions(inst: Instance, delta) -> None:
    delta = Fraction(delta)
    _inverse_delta(delta)
    if not delta < Fraction(1, 5):
        raise PreconditionError(f"delta must be < 1/5, got {delta}")
    W = inst.total_weight
    # rects of exactly a third still leave every face at most a third
    heavy = [r.id for r in inst.rects if 3 * r.weight > W]
    if heavy:
        raise HeavyRectError("rect with more than a third of the total weight; carve it", heavy)
    bad = overlapping_pairs(inst.rects)
    if bad:
        raise PreconditionError("input rects overlap", bad)
    rep = is_well_distributed(inst)
    if not rep.ok:
        raise PreconditionError(f"instance is not well-distributed: {rep.violation}")


def balanced_cheap_cut(inst: Instance, delta, mode: str = "auto", kbar: Optional[int] = None,
                       max_starts: int = 16, max_evals: int = 64) -> CutResult:
    """Partition lines, arrangement graph and separator; crossed faces join
    the lighter side (the inside on ties)."""
    delta = Fraction(delta)
    check_cut_preconditions(inst, delta)
    scale = grid_scale_factor(inst.N, delta)
    work = scale_coords(inst, scale) if scale != 1 else inst
    lines = build_partition_lines(work, delta)
    graph = build_arrangement_graph(lines, work)
    cyc = find_separator(graph, delta.denominator if kbar is None else kbar, mode,
                         max_starts, max_evals)
    inside = set(cyc.inside)
    win, wout = cyc.inside_weight, cyc.outside_weight
    for f in cyc.crossed:
        if win <= wout:
            inside.add(f)
            win += graph.face_weight[f]
        else:
            wout += graph.face_weight[f]
    region = graph.faces_region(inside)
    cells = region.cells
    ins, outs, crs = [], [], []
    for r in work.rects:
        block = cells[r.x1:r.x2, r.y1:r.y2]
        (ins if block.all() else outs if not block.any() else crs).append(r)

    def total(rs):
        return sum((r.weight for r in rs), 0)

    return CutResult(region, total(ins), total(outs), total(crs), region.edge_count,
                     [r.id for r in ins], [r.id for r in outs], [r.id for r in crs],
                     work.total_weight, cyc, graph.stats(), scale)


def prepare_instance(inst: Instance) -> Instance:
    """Compress then stretch, giving an equivalent well-distributed instance."""
    return stretch_well_distributed(compress_coords(inst))


# -- cuts proposed to the dynamic program -------------------------------------

def _independent_guides(rects) -> list:
    chosen = []
    for r in sorted(rects, key=lambda r: (-r.weight, id_key(r.id))):
        if all(rects_disjoint(r, c) for c in chosen):
            chosen.append(r)
    return chosen


def separator_guided_masks(region: Region, rects, inst: Instance, delta):
    """Masks over the region's grid proposed by a balanced cut of a disjoint
    guide subset of `rects`; a heavy guide rect is carved directly."""
    guides = _independent_guides(rects)
    if len(guides) < 2:
        return
    W = sum((r.weight for r in guides), 0)
    heavy = [r for r in guides if 3 * r.weight >= W]
    w, h = region.grid_w, region.grid_h
    if heavy:
        r = heavy[0]
        m = np.zeros((w, h), dtype=bool)
        m[r.x1:r.x2, r.y1:r.y2] = True
        yield ("sep-carve", r.id), m
        return
    sub = Instance(tuple(guides), max(w, h), inst.eps)
    prepared = prepare_instance(sub)
    try:
        cut = balanced_cheap_cut(prepared, delta, max_starts=4, max_evals=16)
    except (PreconditionError, SeparatorError):
        return
    # monotone map from region columns/rows to columns/rows of the cut grid
    scale = cut.scale
    xs = sorted({v for r in guides for v in (r.x1, r.x2)})
    ys = sorted({v for r in guides for v in (r.y1, r.y2)})
    by_id = {r.id: r for r in prepared.rects}
    sx = {}
    sy = {}
    for r in guides:
        p = by_id[r.id]
        sx[r.x1], sx[r.x2] = p.x1 * scale, p.x2 * scale
        sy[r.y1], sy[r.y2] = p.y1 * scale, p.y2 * scale
    top = cut.cut_region.grid_w - 1

    def col_map(values, table, n):
        out = np.empty(n, dtype=np.int64)
        for c in range(n):
            i = bisect.bisect_right(values, c) - 1
            out[c] = 0 if i < 0 else min(table[values[i]], top)
        return out

    cx = col_map(xs, sx, w)
    cy = col_map(ys, sy, h)
    m = cut.cut_region.cells[np.ix_(cx, cy)]
    yield ("sep", tuple(sorted(cut.inside_ids, key=id_key))), m
