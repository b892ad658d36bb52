"""Line partition of the plane for instances whose rectangles are all
delta-large, with validators for its size, connectivity, cut weight and face
shapes.

Coordinates stay on the original integer grid ``[0, N]``; the coarse grid has
``1/delta`` cells per side of length ``delta*N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .geom import Rect, Region, Segment, bitmap_edge_count, blocked_edges, faces_of_segments, id_key
from .geom import _label_cells
from .instance import Instance
from .preprocess import PreconditionError
from .qptas import overlapping_pairs, proper_crossings


class ConstructionError(AssertionError):
    """An internal invariant of the construction failed."""


@dataclass(frozen=True)
class Block:
    rect_id: object
    x1: int
    y1: int
    x2: int
    y2: int

    @property
    def vertical(self) -> bool:
        return self.x2 - self.x1 == 1 and self.y2 - self.y1 > 1


@dataclass(frozen=True)
class LargeRectConfig:
    eps: Fraction
    delta: Fraction
    M: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.delta.numerator != 1 or not 0 < self.delta < 1:
            raise PreconditionError("1/delta must be a positive integer")
        if not 0 < self.eps < 1:
            raise PreconditionError("eps must lie in (0,1)")
        if self.M is None:
            object.__setattr__(self, "M", int(64 / self.eps * self.delta.denominator ** 2))

    @property
    def inv_delta(self) -> int:
        return self.delta.denominator


def is_delta_large(r: Rect, N: int, delta) -> bool:
    side = Fraction(delta) * N
    return r.width > side or r.height > side


def check_instance(inst: Instance, cfg: LargeRectConfig) -> int:
    side = cfg.delta * inst.N
    if side.denominator != 1:
        raise PreconditionError(f"delta*N = {side} is not integral")
    small = [r.id for r in inst.rects if not is_delta_large(r, inst.N, cfg.delta)]
    if small:
        raise PreconditionError("rects that are not delta-large", small)
    bad = overlapping_pairs(inst.rects)
    if bad:
        raise PreconditionError("input rects overlap", bad)
    return int(side)


def slice_blocks(inst: Instance) -> list:
    """Unit slices parallel to each rect's longer side; squares slice horizontally."""
    out = []
    for r in inst.rects:
        if r.height > r.width:
            out.extend(Block(r.id, j, r.y1, j + 1, r.y2) for j in range(r.x1, r.x2))
        else:
            out.extend(Block(r.id, r.x1, j, r.x2, j + 1) for j in range(r.y1, r.y2))
    return out


# -- obstacle model ----------------------------------------------------------

class _Field:
    """Blocked unit steps for lines on the integer grid.

    A vertical line at x is blocked on [j, j+1] by a horizontal block crossing
    x; horizontal lines likewise by vertical blocks.
    """

    def __init__(self, inst: Instance):
        self.N = inst.N
        N = inst.N
        self.vblock = np.zeros((N + 1, N), dtype=bool)   # [x, j]
        self.hblock = np.zeros((N + 1, N), dtype=bool)   # [y, i]
        for r in inst.rects:
            if r.height > r.width:
                self.hblock[r.y1 + 1:r.y2, r.x1:r.x2] = True
            else:
                self.vblock[r.x1 + 1:r.x2, r.y1:r.y2] = True

    def blocked(self, axis: str, fixed: int) -> np.ndarray:
        return self.vblock[fixed] if axis == "v" else self.hblock[fixed]


def _cut_points(axis: str, fixed: int, lines) -> set:
    """Positions along the axis where a perpendicular line would be crossed."""
    other = "h" if axis == "v" else "v"
    return {L.fixed for L in lines if L.axis == other and L.lo < fixed < L.hi}


def _pieces(field_: _Field, axis: str, fixed: int, cuts: set) -> list:
    """Maximal obstacle-free closed intervals along a grid line."""
    blocked = field_.blocked(axis, fixed)
    N = field_.N
    out = []
    lo = 0
    for u in range(N + 1):
        end_here = u == N or blocked[u]
        if u in cuts and u != lo and not end_here:
            out.append((lo, u))
            lo = u
        if end_here:
            if u > lo:
                out.append((lo, u))
            lo = u + 1
    return out


def _extend(field_: _Field, axis: str, fixed: int, start: int, direction: int, cuts: set) -> int:
    """Walk from `start` until a blocked unit, a cut point or the border."""
    blocked = field_.blocked(axis, fixed)
    cur = start
    while True:
        nxt = cur + direction
        if nxt < 0 or nxt > field_.N:
            return cur
        if blocked[min(cur, nxt)]:
            return cur
        cur = nxt
        if cur in cuts:
            return cur


# -- initial lines -----------------------------------------------------------

def _edge_candidates(field_, axis, side, cell, edge, cuts_by_fixed):
    """Long maximal lines touching one cell edge, one per coordinate."""
    i, j = cell
    qx1, qy1, qx2, qy2 = i * side, j * side, (i + 1) * side, (j + 1) * side
    if axis == "v":
        span, touch, qlo, qhi = range(qx1, qx2 + 1), (qy1 if edge == "bottom" else qy2), qy1, qy2
    else:
        span, touch, qlo, qhi = range(qy1, qy2 + 1), (qx1 if edge == "left" else qx2), qx1, qx2
    out = []
    for f in span:
        best = None
        for lo, hi in _pieces(field_, axis, f, cuts_by_fixed(f)):
            if not (lo <= touch <= hi) or hi - lo <= side:
                continue
            inside = max(0, min(hi, qhi) - max(lo, qlo))
            key = (-inside, lo)
            if best is None or key < best[0]:
                best = (key, Segment(axis, f, lo, hi), inside)
        if best is not None:
            out.append((f, best[1], best[2]))
    return out


def build_L0(inst: Instance, blocks, cfg: LargeRectConfig) -> list:
    """Initial lines: square boundary, then per cell edge the leftmost,
    rightmost and extremal sticking-in long lines; vertical lines first."""
    side = check_instance(inst, cfg)
    N = inst.N
    field_ = _Field(inst)
    lines = [Segment("h", 0, 0, N), Segment("h", N, 0, N), Segment("v", 0, 0, N), Segment("v", N, 0, N)]
    seen = set(lines)
    cells = cfg.inv_delta
    for axis, edges in (("v", ("bottom", "top")), ("h", ("left", "right"))):
        frozen = list(lines)
        cache: dict = {}

        def cuts_by_fixed(f, axis=axis, frozen=frozen, cache=cache):
            if f not in cache:
                cache[f] = _cut_points(axis, f, frozen)
            return cache[f]

        for j in range(cells):
            for i in range(cells):
                for edge in edges:
                    cands = _edge_candidates(field_, axis, side, (i, j), edge, cuts_by_fixed)
                    if not cands:
                        continue
                    top = max(c[2] for c in cands)
                    sticking = [c for c in cands if c[2] == top]
                    for _, seg, _ in (cands[0], cands[-1], sticking[0], sticking[-1]):
                        if seg not in seen:
                            seen.add(seg)
                            lines.append(seg)
    return lines


# -- loose ends --------------------------------------------------------------

def _on_perpendicular(p, axis, lines) -> bool:
    x, y = p
    for L in lines:
        if L.axis == axis:
            continue
        if L.axis == "h" and L.fixed == y and L.lo <= x <= L.hi:
            return True
        if L.axis == "v" and L.fixed == x and L.lo <= y <= L.hi:
            return True
    return False


def _collinear_overlap(seg: Segment, L: Segment) -> bool:
    return L.axis == seg.axis and L.fixed == seg.fixed and min(L.hi, seg.hi) - max(L.lo, seg.lo) > 0


def _seg(axis, fixed, a, b) -> Segment:
    return Segment(axis, fixed, min(a, b), max(a, b))


def _point(axis, fixed, pos):
    return (pos, fixed) if axis == "h" else (fixed, pos)


@dataclass
class Shortcut:
    segment: Segment
    index: int
    weight: object
    cut_ids: list


@dataclass
class ExtensionReport:
    lines: list                       # L_ext
    shortcuts: list = field(default_factory=list)
    paths: list = field(default_factory=list)       # (start point, number of lines, ending case)
    anomalies: list = field(default_factory=list)
    L0: list = field(default_factory=list)          # L0 after any merges


def _hit_block(inst: Instance, L: Segment, p):
    """The rect whose block the line hits at its endpoint p, or None."""
    x, y = p
    if L.axis == "v":
        j = y if y == L.hi else y - 1
        for r in inst.rects:
            if r.height <= r.width and r.x1 < x < r.x2 and r.y1 <= j < r.y2:
                return r, j
    else:
        i = x if x == L.hi else x - 1
        for r in inst.rects:
            if r.height > r.width and r.y1 < y < r.y2 and r.x1 <= i < r.x2:
                return r, i
    return None


def _rects_cut(seg: Segment, rects) -> list:
    return [r for r in rects if seg.cuts_rect(r)]


def extend_loose_ends(L0, blocks, inst: Instance, cfg: LargeRectConfig) -> ExtensionReport:
    """Connect every loose end of the initial lines through paths along block
    edges, ending on an existing line or through a cheap shortcut."""
    side = check_instance(inst, cfg)
    field_ = _Field(inst)
    N = inst.N
    L0 = list(L0)
    ext: list = []
    rep = ExtensionReport(ext, L0=L0)
    W = inst.total_weight
    budget = Fraction(2, cfg.M) * W

    def all_lines(extra=()):
        return L0 + ext + list(extra)

    idx = 0
    while idx < len(L0):
        L = L0[idx]
        idx += 1
        for p0 in L.endpoints:
            if _on_perpendicular(p0, L.axis, all_lines()):
                continue
            _build_path(L, p0, inst, field_, side, cfg, L0, ext, rep, budget, N)
    return rep


def _build_path(L, p0, inst, field_, side, cfg, L0, ext, rep, budget, N):
    path: list = []
    points = [p0]
    prev = L
    p = p0
    while True:
        hit = _hit_block(inst, prev, p)
        if hit is None:
            rep.anomalies.append(("no_block_at_loose_end", p))
            return
        r, _ = hit
        axis = "h" if prev.axis == "v" else "v"
        fixed = p[1] if axis == "h" else p[0]
        start = p[0] if axis == "h" else p[1]
        cell_lo = (start // side) * side if start % side else None
        # the block runs along `axis`; head for its end outside p's cell
        lo_end, hi_end = (r.x1, r.x2) if axis == "h" else (r.y1, r.y2)
        if cell_lo is None:
            cell_lo = start - side if start == hi_end else start
        cell_hi = cell_lo + side
        if hi_end > cell_hi:
            direction = 1
        elif lo_end < cell_lo:
            direction = -1
        else:
            direction = 1
            rep.anomalies.append(("block_inside_cell", p))
        cuts = _cut_points(axis, fixed, L0 + ext + path)
        end = _extend(field_, axis, fixed, start, direction, cuts)
        if end == start:
            rep.anomalies.append(("zero_length_path_line", p))
            return
        seg = _seg(axis, fixed, start, end)
        p1 = _point(axis, fixed, end)
        overlap = [X for X in L0 + ext + path if _collinear_overlap(seg, X)]
        if overlap:
            target = overlap[0]
            _merge_into(target, p, L0, ext, path, rep)
            ext.extend(path)
            rep.paths.append((p0, len(path) + 1, "overlap"))
            return
        path.append(seg)
        points.append(p1)
        if _on_perpendicular(p1, axis, L0 + ext + path[:-1]):
            ext.extend(path)
            rep.paths.append((p0, len(path), "hit_line"))
            return
        if len(path) >= cfg.M:
            _shortcut(path, points, inst, side, L0, ext, rep, budget)
            rep.paths.append((p0, len(path), "shortcut"))
            return
        prev, p = seg, p1


def _merge_into(target, p, L0, ext, path, rep):
    """Stretch a collinear line so that it ends at p."""
    pos = p[0] if target.axis == "h" else p[1]
    grown = Segment(target.axis, target.fixed, min(target.lo, pos), max(target.hi, pos))
    for pool in (ext, path, L0):
        for k, X in enumerate(pool):
            if X == target:
                pool[k] = grown
                if pool is L0:
                    rep.anomalies.append(("initial_line_extended", target.to_list()))
                return


def _shortcut(path, points, inst, side, L0, ext, rep, budget):
    others = L0 + ext
    best = None
    for i, Li in enumerate(path, start=1):
        pi = points[i]
        prev_pt = points[i - 1]
        qx, qy = pi[0] // side, pi[1] // side
        if Li.axis == "h":
            step = 1 if pi[0] > prev_pt[0] else -1
            ex = qx * side if step == 1 else (qx + 1) * side
            if not min(prev_pt[0], pi[0]) <= ex <= max(prev_pt[0], pi[0]):
                continue
            p_i0 = (ex, Li.fixed)
            e_axis, e_fixed, e_lo, e_hi, pos = "v", ex, qy * side, (qy + 1) * side, Li.fixed
        else:
            step = 1 if pi[1] > prev_pt[1] else -1
            ey = qy * side if step == 1 else (qy + 1) * side
            if not min(prev_pt[1], pi[1]) <= ey <= max(prev_pt[1], pi[1]):
                continue
            p_i0 = (Li.fixed, ey)
            e_axis, e_fixed, e_lo, e_hi, pos = "h", ey, qx * side, (qx + 1) * side, Li.fixed
        pool = others + [X for k, X in enumerate(path) if k != i - 1]
        for direction in (-1, 1):
            stop = None
            rng = range(pos - 1, e_lo - 1, -1) if direction == -1 else range(pos + 1, e_hi + 1)
            for c in rng:
                q = _point(e_axis, e_fixed, c)
                if any(_touches(X, q) for X in pool):
                    stop = c
                    break
            if stop is None:
                continue
            s = _seg(e_axis, e_fixed, pos, stop)
            cut = _rects_cut(s, inst.rects)
            w = sum((r.weight for r in cut), 0)
            if w > budget:
                continue
            key = (w, i, s.lo)
            if best is None or key < best[0]:
                best = (key, i, s, cut, p_i0, _point(e_axis, e_fixed, stop), pool)
    if best is None:
        raise ConstructionError("no shortcut segment within the weight budget")
    _, i, s, cut, p_i0, far, pool = best
    later = [k for k in range(i, len(path)) if _touches(path[k], far)]
    if later:
        k = later[0]                      # path line index i' - 1
        keep = path[:k]
        Lk = path[k]
        a = points[k]
        pos_a = a[0] if Lk.axis == "h" else a[1]
        pos_far = far[0] if Lk.axis == "h" else far[1]
        keep.append(_seg(Lk.axis, Lk.fixed, pos_a, pos_far))
    else:
        keep = path[:i - 1]
        Li = path[i - 1]
        a = points[i - 1]
        pos_a = a[0] if Li.axis == "h" else a[1]
        pos_b = p_i0[0] if Li.axis == "h" else p_i0[1]
        if pos_a != pos_b:
            keep.append(_seg(Li.axis, Li.fixed, pos_a, pos_b))
    keep.append(s)
    ext.extend(keep)
    rep.shortcuts.append(Shortcut(s, i, sum((r.weight for r in cut), 0), [r.id for r in cut]))


def _touches(L: Segment, q) -> bool:
    return L.contains_point(q)


# -- circumvention -----------------------------------------------------------

@dataclass
class CircumventReport:
    lines: list
    provenance: list
    circumvented: list                 # rect ids
    new_lines_per_line: dict


def _clip_open_rect(L: Segment, r: Rect) -> list:
    if L.axis == "h":
        if not r.y1 < L.fixed < r.y2:
            return [L]
        a, b = r.x1, r.x2
    else:
        if not r.x1 < L.fixed < r.x2:
            return [L]
        a, b = r.y1, r.y2
    out = []
    if L.lo < min(a, L.hi):
        out.append(Segment(L.axis, L.fixed, L.lo, min(a, L.hi)))
    if max(b, L.lo) < L.hi:
        out.append(Segment(L.axis, L.fixed, max(b, L.lo), L.hi))
    return out if (L.hi > a and L.lo < b) else [L]


def circumvent_rects(lines, inst: Instance, cfg: LargeRectConfig, provenance=None) -> CircumventReport:
    """Replace lines that meet a rect without cutting it, or cut it along more
    than delta*N, by the rect's four edges."""
    side = int(cfg.delta * inst.N)
    provenance = list(provenance or ["L0∪ext"] * len(lines))
    trig = []
    per_line: dict = {}
    for k, L in enumerate(lines):
        for r in inst.rects:
            if not L.intersects_rect(r):
                continue
            if not L.cuts_rect(r) or L.overlap_length(r) > side:
                if r.id not in trig:
                    trig.append(r.id)
                per_line[k] = per_line.get(k, 0) + 4
    by_id = inst.by_id()
    out: dict = {}
    for L, tag in zip(lines, provenance):
        pieces = [L]
        for rid in trig:
            pieces = [q for piece in pieces for q in _clip_open_rect(piece, by_id[rid])]
        for q in pieces:
            out.setdefault(q, tag)
    for rid in trig:
        r = by_id[rid]
        for s in (Segment("h", r.y1, r.x1, r.x2), Segment("h", r.y2, r.x1, r.x2),
                  Segment("v", r.x1, r.y1, r.y2), Segment("v", r.x2, r.y1, r.y2)):
            out.setdefault(s, "circumvent")
    segs = list(out)
    return CircumventReport(segs, [out[s] for s in segs], trig, per_line)


# -- faces -------------------------------------------------------------------

@dataclass
class CellComponent:
    face: int
    cell: tuple
    bbox: tuple
    edge_count: int
    shape: str                      # 'rectangle' | 'L-shape' | 'other'
    slit: bool


@dataclass
class FaceClassification:
    faces: dict                     # face -> 'path' | 'cycle' | 'other'
    components: list                # CellComponents of classified faces
    failures: list                  # (kind, face, detail)
    euler: dict                     # face -> Euler characteristic

    @property
    def ok(self) -> bool:
        return not self.failures

    def counts(self) -> dict:
        out = {"path": 0, "cycle": 0, "other": 0}
        for t in self.faces.values():
            out[t] += 1
        return out


def _blocked_any(hb, vb, a, b) -> bool:
    """Is the unit edge between adjacent cells a and b blocked by a line?"""
    (x, y), (x2, y2) = a, b
    if x2 == x + 1:
        return bool(vb[x + 1, y])
    if x2 == x - 1:
        return bool(vb[x, y])
    if y2 == y + 1:
        return bool(hb[x, y + 1])
    return bool(hb[x, y])


def classify_faces(lines, blocks, inst: Instance, cfg: LargeRectConfig) -> FaceClassification:
    """Shape checks for every face holding a whole block: per-cell pieces are
    rectangles or L-shapes without slits, neighbouring cells see one piece
    each, and the pieces chain into a path or a cycle."""
    N = inst.N
    side = int(cfg.delta * N)
    labels, count, hb, vb = faces_of_segments(lines, N, N)
    plus = set()
    for b in blocks:
        vals = np.unique(labels[b.x1:b.x2, b.y1:b.y2])
        if len(vals) == 1:
            plus.add(int(vals[0]))
    cells = cfg.inv_delta
    comps: list = []
    failures: list = []
    comp_of = -np.ones((N, N), dtype=np.int64)
    for f in sorted(plus):
        mask = labels == f
        for j in range(cells):
            for i in range(cells):
                sub = np.zeros_like(mask)
                sl = (slice(i * side, (i + 1) * side), slice(j * side, (j + 1) * side))
                sub[sl] = mask[sl]
                if not sub.any():
                    continue
                lab = _label_cells(sub, hb, vb)
                for c in range(int(lab.max()) + 1):
                    cm = lab == c
                    xs, ys = np.nonzero(cm)
                    bbox = (int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)
                    ec = bitmap_edge_count(cm)
                    slit = _has_slit(cm, hb, vb)
                    shape = "rectangle" if ec == 4 else "L-shape" if ec == 6 else "other"
                    comp = CellComponent(f, (i, j), bbox, ec, shape, slit)
                    comp_of[cm] = len(comps)
                    comps.append(comp)
                    if shape == "other" or slit:
                        failures.append(("cell_shape", f, (i, j, ec, slit)))
                    if bbox[2] - bbox[0] > side or bbox[3] - bbox[1] > side:
                        failures.append(("width", f, (i, j, bbox)))
    # contacts across cell edges
    contacts: dict = {}
    W, H = N, N
    for x in range(W):
        for y in range(H):
            a = comp_of[x, y]
            if a < 0:
                continue
            for dx, dy in ((1, 0), (0, 1)):
                x2, y2 = x + dx, y + dy
                if x2 >= W or y2 >= H:
                    continue
                b = comp_of[x2, y2]
                if b < 0 or b == a:
                    continue
                if _blocked_any(hb, vb, (x, y), (x2, y2)):
                    continue
                contacts.setdefault((a, b), []).append((dx, x2, y2))
    # uniqueness: per component, per neighbouring cell, one partner
    partners: dict = {}
    for (a, b) in contacts:
        ca, cb = comps[a], comps[b]
        partners.setdefault((a, cb.cell), set()).add(b)
        partners.setdefault((b, ca.cell), set()).add(a)
    for (a, cell), bs in partners.items():
        if len(bs) > 1:
            failures.append(("split_across_edge", comps[a].face, (comps[a].cell, cell, len(bs))))
    # multigraph edges: maximal runs of contact along the shared edge
    face_nodes: dict = {}
    for k, c in enumerate(comps):
        face_nodes.setdefault(c.face, []).append(k)
    face_edges: dict = {}
    for (a, b), units in contacts.items():
        runs = _count_runs(units)
        face_edges.setdefault(comps[a].face, []).extend([(a, b)] * runs)
    kinds = {}
    euler = {}
    for f in sorted(plus):
        nodes = face_nodes.get(f, [])
        edges = face_edges.get(f, [])
        deg = {n: 0 for n in nodes}
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        connected = _connected(nodes, edges)
        if connected and len(edges) == len(nodes) - 1 and all(d <= 2 for d in deg.values()):
            kind = "path"
        elif connected and len(edges) == len(nodes) and all(d == 2 for d in deg.values()):
            kind = "cycle"
        else:
            kind = "other"
        chi = _euler(labels == f, hb, vb)
        euler[f] = chi
        kinds[f] = kind
        if kind == "other":
            failures.append(("topology", f, (len(nodes), len(edges))))
        elif (kind == "path") != (chi == 1) or (kind == "cycle") != (chi == 0):
            failures.append(("euler_mismatch", f, (kind, chi)))
    return FaceClassification(kinds, comps, failures, euler)


def _count_runs(units) -> int:
    """Number of maximal contiguous runs among unit contacts on one edge."""
    keys = sorted(set(units))
    runs = 0
    prev = None
    for dx, x, y in keys:
        pos = (dx, x) if dx else (dx, y)
        along = y if dx else x
        if prev is None or prev[0] != pos or along != prev[1] + 1:
            runs += 1
        prev = (pos, along)
    return runs


def _connected(nodes, edges) -> bool:
    if not nodes:
        return False
    adj = {n: set() for n in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(nodes)


def _has_slit(cm, hb, vb) -> bool:
    inner_v = cm[:-1, :] & cm[1:, :] & vb[1:-1, :]
    inner_h = cm[:, :-1] & cm[:, 1:] & hb[:, 1:-1]
    return bool(inner_v.any() or inner_h.any())


def _euler(mask, hb, vb) -> int:
    """Euler characteristic of the open face: cells - open unit edges + interior vertices."""
    cells = int(mask.sum())
    ev = mask[:-1, :] & mask[1:, :] & ~vb[1:-1, :]
    eh = mask[:, :-1] & mask[:, 1:] & ~hb[:, 1:-1]
    # interior vertex: four surrounding cells in the face, four incident unit edges open
    quad = mask[:-1, :-1] & mask[1:, :-1] & mask[:-1, 1:] & mask[1:, 1:]
    open4 = (~vb[1:-1, :-1] & ~vb[1:-1, 1:] & ~hb[:-1, 1:-1] & ~hb[1:, 1:-1])
    verts = int((quad & open4).sum())
    return cells - int(ev.sum()) - int(eh.sum()) + verts


# -- pipeline and validators -------------------------------------------------

@dataclass
class LargeRectPartition:
    blocks: list
    L0: list
    ext: ExtensionReport
    final: CircumventReport
    cfg: LargeRectConfig

    @property
    def L0_ext(self) -> list:
        return list(self.ext.L0) + list(self.ext.lines)


def build_partition(inst: Instance, cfg: LargeRectConfig) -> LargeRectPartition:
    blocks = slice_blocks(inst)
    L0 = build_L0(inst, blocks, cfg)
    ext = extend_loose_ends(L0, blocks, inst, cfg)
    lines = ext.L0 + ext.lines
    prov = ["L0"] * len(ext.L0) + ["ext"] * len(ext.lines)
    final = circumvent_rects(lines, inst, cfg, prov)
    return LargeRectPartition(blocks, L0, ext, final, cfg)


def nicely_connected(lines) -> list:
    """Violations: overlapping collinear pairs, proper crossings, endpoints
    without a perpendicular line through them."""
    out = []
    bykey: dict = {}
    for L in lines:
        bykey.setdefault((L.axis, L.fixed), []).append(L)
    for group in bykey.values():
        group.sort(key=lambda s: (s.lo, s.hi))
        for a, b in zip(group, group[1:]):
            if b.lo < a.hi:
                out.append(("overlap", a.to_list(), b.to_list()))
    for a, b in proper_crossings(lines):
        out.append(("proper_crossing", a.to_list(), b.to_list()))
    for L in lines:
        for p in L.endpoints:
            if not _on_perpendicular(p, L.axis, lines):
                out.append(("loose_end", L.to_list(), p))
    return out


def cut_parallel_to_short_edge(L: Segment, r: Rect) -> bool:
    if not L.cuts_rect(r):
        return False
    return (L.axis == "h") == (r.height > r.width)


@dataclass
class LargeRectReport:
    ok: bool
    violations: list
    measures: dict
    classification: Optional[FaceClassification] = None
    final_classification: Optional[FaceClassification] = None


def validate_large_partition(part: LargeRectPartition, inst: Instance) -> LargeRectReport:
    cfg = part.cfg
    inv = cfg.inv_delta
    side = int(cfg.delta * inst.N)
    W = inst.total_weight
    viol = []
    # initial lines: size and pairwise contact
    L0 = part.L0
    if len(L0) > 16 * inv ** 2 + 4:
        viol.append(("L0_size", len(L0), 16 * inv ** 2 + 4))
    for k, a in enumerate(L0):
        for b in L0[k + 1:]:
            if a.axis == b.axis:
                if a.fixed == b.fixed and min(a.hi, b.hi) - max(a.lo, b.lo) > 0:
                    viol.append(("L0_overlap", a.to_list(), b.to_list()))
    for a, b in proper_crossings(L0):
        viol.append(("L0_crossing", a.to_list(), b.to_list()))
    # connectivity of L0 ∪ L_ext
    both = part.L0_ext
    for v in nicely_connected(both):
        viol.append(("not_nicely_connected",) + v)
    # short-edge cuts by L0 ∪ L_ext
    cut_ids = {r.id for r in inst.rects for L in both if cut_parallel_to_short_edge(L, r)}
    cut_w = sum((r.weight for r in inst.rects if r.id in cut_ids), 0)
    if cut_w > cfg.eps * W:
        viol.append(("short_edge_cut_weight", cut_w, cfg.eps * W))
    budget = Fraction(2, cfg.M) * W
    for s in part.ext.shortcuts:
        if s.weight > budget:
            viol.append(("shortcut_weight", s.segment.to_list(), s.weight, budget))
    for L in part.ext.lines:
        if any(cut_parallel_to_short_edge(L, r) for r in inst.rects) and L.fixed % side:
            viol.append(("ext_cut_off_grid", L.to_list()))
        lo_cell, hi_cell = L.lo // side, (L.hi - 1) // side
        if L.fixed % side and lo_cell == hi_cell and L.lo % side and L.hi % side:
            viol.append(("ext_inside_cell", L.to_list()))
    if part.ext.anomalies:
        viol.append(("construction_anomalies", part.ext.anomalies[:5]))
    # final lines
    final = part.final.lines
    inter_ids = set()
    for L in final:
        for r in inst.rects:
            if L.intersects_rect(r):
                inter_ids.add(r.id)
                if not cut_parallel_to_short_edge(L, r) or L.overlap_length(r) > side:
                    viol.append(("final_bad_intersection", L.to_list(), r.id))
    inter_w = sum((r.weight for r in inst.rects if r.id in inter_ids), 0)
    if inter_w > cfg.eps * W:
        viol.append(("intersected_weight", inter_w, cfg.eps * W))
    cls = classify_faces(both, part.blocks, inst, cfg)
    for f in cls.failures:
        viol.append(("face_classification",) + f)
    final_cls = classify_faces(final, part.blocks, inst, cfg)
    measures = {
        "L0": len(L0), "L0_bound": 16 * inv ** 2 + 4, "ext": len(part.ext.lines),
        "ext_over_budget_unit": str(Fraction(len(part.ext.lines)) / (Fraction(1) / cfg.eps * inv ** 4)),
        "final": len(final), "shortcuts": len(part.ext.shortcuts),
        "short_edge_cut_weight_over_W": str(Fraction(cut_w) / W) if W else "0",
        "intersected_weight_over_W": str(Fraction(inter_w) / W) if W else "0",
        "circumvented": len(part.final.circumvented),
        "max_new_lines_per_line": max(part.final.new_lines_per_line.values(), default=0),
        "faces": cls.counts(), "final_faces": final_cls.counts(),
        "final_face_failures": len(final_cls.failures),
        "M": cfg.M,
    }
    return LargeRectReport(not viol, viol, measures, cls, final_cls)
