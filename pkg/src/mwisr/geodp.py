"""Memoised geometric dynamic program over cell-bitmap regions.

A region's value is the best sum over candidate partitions produced by the
configured cut families, kept only when it strictly beats the heaviest
contained rectangle.
"""
from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .geom import Rect, Region, id_key, rects_disjoint
from .instance import Instance

STRAIGHT_CUT = "STRAIGHT_CUT"
RECT_CARVE = "RECT_CARVE"
SEPARATOR_GUIDED = "SEPARATOR_GUIDED"
_STAIR = re.compile(r"^STAIRCASE\((\d+)\)$")

# instances up to this size get exact independent-set pruning bounds
EXACT_BOUND_LIMIT = 28

_ALIASES = {
    "STRAIGHT": STRAIGHT_CUT, "STRAIGHT_CUT": STRAIGHT_CUT,
    "CARVE": RECT_CARVE, "RECT_CARVE": RECT_CARVE,
    "SEPARATOR": SEPARATOR_GUIDED, "SEPARATOR_GUIDED": SEPARATOR_GUIDED,
}


def staircase(bends: int) -> str:
    if bends < 0:
        raise ValueError("staircase bend budget must be >= 0")
    return f"STAIRCASE({bends})"


def parse_families(spec) -> tuple:
    """Accept 'CARVE,STRAIGHT,STAIRCASE(3)' or an iterable of names."""
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    out = []
    for raw in items:
        name = raw.strip().upper()
        if not name:
            continue
        if name in _ALIASES:
            name = _ALIASES[name]
        elif name.startswith("STAIRCASE"):
            m = _STAIR.match(name if "(" in name else name + "(1)")
            if not m:
                raise ValueError(f"bad staircase family {raw!r}")
            name = staircase(int(m.group(1)))
        else:
            raise ValueError(f"unknown cut family {raw!r}")
        if name not in out:
            out.append(name)
    return tuple(_family_order(out))


def _family_order(fams):
    def rank(f):
        if f == STRAIGHT_CUT:
            return (0, 0)
        m = _STAIR.match(f)
        if m:
            return (1, int(m.group(1)))
        return (2, 0) if f == RECT_CARVE else (3, 0)
    return sorted(fams, key=rank)


@dataclass(frozen=True)
class SolverConfig:
    k: Optional[int] = None                  # None: unlimited edge budget
    cut_families: tuple = (RECT_CARVE,)
    max_table_entries: int = 500_000
    deterministic: bool = True
    staircase_limit: int = 256               # distinct staircase splits per region
    separator_delta: Fraction = Fraction(1, 6)
    prune: bool = True                       # bound-based skipping; never changes the result

    def __post_init__(self):
        object.__setattr__(self, "cut_families", parse_families(self.cut_families))
        if self.k is not None and self.k < 4:
            raise ValueError("edge budget k must be >= 4")
        object.__setattr__(self, "separator_delta", Fraction(self.separator_delta))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "cut_families": list(self.cut_families),
            "max_table_entries": self.max_table_entries,
            "deterministic": self.deterministic,
            "staircase_limit": self.staircase_limit,
            "separator_delta": str(self.separator_delta),
            "prune": self.prune,
        }


@dataclass
class CutNode:
    region: Region
    family: Optional[str]          # None for leaves
    parts: list = field(default_factory=list)
    rect_ids: frozenset = frozenset()
    weight: object = 0

    @property
    def is_leaf(self) -> bool:
        return self.family is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(p.depth() for p in self.parts)

    def to_dict(self) -> dict:
        d = {"region": region_to_dict(self.region),
             "rects": sorted(self.rect_ids, key=id_key),
             "weight": str(self.weight)}
        if not self.is_leaf:
            d["family"] = self.family
            d["parts"] = [p.to_dict() for p in self.parts]
        return d


@dataclass
class Solution:
    rect_ids: frozenset
    total_weight: object
    cut_tree: Optional[CutNode]
    truncated: bool = False
    stats: dict = field(default_factory=dict)

    def to_dict(self, with_tree: bool = True) -> dict:
        d = {"rect_ids": sorted(self.rect_ids, key=id_key),
             "total_weight": str(self.total_weight),
             "truncated": self.truncated,
             "stats": dict(sorted(self.stats.items()))}
        if with_tree and self.cut_tree is not None:
            d["cut_tree"] = self.cut_tree.to_dict()
        return d


class DpTable:
    def __init__(self, limit: int):
        self.limit = limit
        self.entries: dict = {}
        self.hits = 0
        self.partitions_tried = 0
        self.partitions_pruned = 0
        self.truncated = False
        self._bit: dict = {}
        self._conflict: list = []
        self._weights: list = []
        self._ub: dict = {0: 0}
        self._exact = False

    def bind(self, rects, exact_bounds: bool = True):
        """Prepare optional pruning bounds for the rects of one instance."""
        rects = list(rects)
        self._bit = {r.id: i for i, r in enumerate(rects)}
        self._weights = [r.weight for r in rects]
        self._exact = exact_bounds
        self._ub = {0: 0}
        self._conflict = [0] * len(rects)
        for i, a in enumerate(rects):
            for j in range(i + 1, len(rects)):
                if not rects_disjoint(a, rects[j]):
                    self._conflict[i] |= 1 << j
                    self._conflict[j] |= 1 << i

    def upper_bound(self, rects):
        """Best independent weight among `rects`; bounds any region holding them."""
        mask = 0
        for r in rects:
            bit = self._bit.get(r.id)
            if bit is None:           # unbound table: the weight sum still bounds
                return sum((r.weight for r in rects), 0)
            mask |= 1 << bit
        if not self._exact:
            return sum((r.weight for r in rects), 0)
        return self._mwis(mask)

    def _mwis(self, mask):
        memo = self._ub
        if mask in memo:
            return memo[mask]
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        val = max(self._mwis(rest), self._weights[i] + self._mwis(rest & ~self._conflict[i]))
        memo[mask] = val
        return val

    def __len__(self):
        return len(self.entries)

    def get(self, key):
        node = self.entries.get(key)
        if node is not None:
            self.hits += 1
        return node

    def put(self, key, node: CutNode):
        if key in self.entries:
            raise RuntimeError("DP entry finalised twice")
        self.entries[key] = node

    def stats(self) -> dict:
        return {"entries": len(self.entries), "hits": self.hits,
                "partitions_tried": self.partitions_tried,
                "partitions_pruned": self.partitions_pruned}


def region_to_dict(r: Region) -> dict:
    bb = r.bbox
    if bb is None:
        return {"grid": [r.grid_w, r.grid_h], "bbox": None, "rows": []}
    x1, y1, x2, y2 = bb
    rows = []
    for y in range(y1, y2):
        rows.append("".join("1" if r.cells[x, y] else "0" for x in range(x1, x2)))
    return {"grid": [r.grid_w, r.grid_h], "bbox": list(bb), "rows": rows}


def region_from_dict(d: dict) -> Region:
    w, h = d["grid"]
    arr = np.zeros((w, h), dtype=bool)
    if d["bbox"] is not None:
        x1, y1, _, _ = d["bbox"]
        for j, row in enumerate(d["rows"]):
            for i, ch in enumerate(row):
                arr[x1 + i, y1 + j] = ch == "1"
    return Region(arr)


# -- partition candidates ----------------------------------------------------

def _contained(region: Region, rects) -> list:
    cells = region.cells
    return [r for r in rects if cells[r.x1:r.x2, r.y1:r.y2].all()]


def _split_parts(region: Region, side: np.ndarray) -> list:
    a = Region(region.cells & side)
    b = Region(region.cells & ~side)
    return a.components() + b.components()


def _straight_masks(region: Region, rects=()):
    x1, y1, x2, y2 = region.bbox
    w, h = region.grid_w, region.grid_h
    for x in range(x1 + 1, x2):
        m = np.zeros((w, h), dtype=bool)
        m[:x, :] = True
        sig = tuple(1 if r.x2 <= x else 0 if r.x1 >= x else 2 for r in rects)
        yield ("v", x), m, sig
    for y in range(y1 + 1, y2):
        m = np.zeros((w, h), dtype=bool)
        m[:, :y] = True
        sig = tuple(1 if r.y2 <= y else 0 if r.y1 >= y else 2 for r in rects)
        yield ("h", y), m, sig


def _staircase_masks(region: Region, rects, bends: int):
    """Monotone step curves across the bbox with at most `bends` bends.

    A curve is the graph of a monotone step function over the bbox width;
    pieces lying on the bbox border are not cut segments.  Breakpoints use
    coordinates of the contained rects (all interior coordinates when no
    rects are given) and curves never cross a contained rect.
    """
    bx1, by1, bx2, by2 = region.bbox
    if rects:
        xs = sorted({v for r in rects for v in (r.x1, r.x2) if bx1 < v < bx2})
        ys = sorted({v for r in rects for v in (r.y1, r.y2) if by1 < v < by2})
    else:
        xs = list(range(bx1 + 1, bx2))
        ys = list(range(by1 + 1, by2))
    levels = [by1] + ys + [by2]
    max_segs = bends + 1
    w, h = region.grid_w, region.grid_h

    def piece_free(c, xa, xb):
        return all(not (r.y1 < c < r.y2 and r.x1 < xb and r.x2 > xa) for r in rects)

    def jump_free(a, c, c2):
        lo, hi = min(c, c2), max(c, c2)
        return all(not (r.x1 < a < r.x2 and r.y1 < hi and r.y2 > lo) for r in rects)

    def interior(c):
        return by1 < c < by2

    def emit(steps):
        # steps: list of (x_start, level); the curve covers [bx1, bx2]
        m = np.zeros((w, h), dtype=bool)
        bounds = [s[0] for s in steps[1:]] + [bx2]
        for (xa, c), xb in zip(steps, bounds):
            m[xa:xb, :c] = True
        # curves avoid rect interiors, so one cell decides each rect's side
        return ("s", tuple(steps)), m, tuple(int(m[r.x1, r.y1]) for r in rects)

    for direction in (1, -1):
        order = levels if direction == 1 else levels[::-1]

        def dfs(steps, x_start, li, segs):
            c = order[li]
            seg_here = 1 if interior(c) else 0
            # finish: last piece runs to the right border
            if segs + seg_here <= max_segs and (segs + seg_here) > 0 and piece_free(c, x_start, bx2):
                if not (len(steps) == 1 and not interior(c)):
                    yield emit(steps)
            for a in xs:
                if a <= x_start:
                    continue
                if segs + seg_here + 1 > max_segs:
                    break
                if not piece_free(c, x_start, a):
                    break          # a longer piece stays blocked
                for lj in range(li + 1, len(order)):
                    c2 = order[lj]
                    if not jump_free(a, c, c2):
                        break      # taller jumps stay blocked
                    yield from dfs(steps + [(a, c2)], a, lj, segs + seg_here + 1)

        for li in range(len(order)):
            yield from dfs([(bx1, order[li])], bx1, li, 0)


def _partition_candidates(region: Region, cfg: SolverConfig, rects, inst=None):
    """Yield (family, descriptor, parts) in deterministic order.

    With `rects` given (the rects contained in `region`), cut families keep
    one representative per distinct split of those rects and skip cuts that
    leave all rects in a single part.
    """
    for fam in cfg.cut_families:
        if fam == STRAIGHT_CUT:
            yield from _dedup(region, rects, fam, _straight_masks(region, rects or ()), None)
        elif fam == RECT_CARVE:
            seen = set()
            for r in rects or ():
                ext = (r.x1, r.y1, r.x2, r.y2)
                if ext in seen:
                    continue
                seen.add(ext)
                block = Region.from_rect(region.grid_w, region.grid_h, *ext)
                rest = region.subtract(block)
                if rest.is_empty():
                    continue
                yield fam, ("carve", r.id), [block] + rest.components()
        elif fam == SEPARATOR_GUIDED:
            if rects and inst is not None:
                from .qptas import separator_guided_masks
                masks = separator_guided_masks(region, rects, inst, cfg.separator_delta)
                yield from _dedup(region, rects, fam, masks, None)
        else:
            m = _STAIR.match(fam)
            yield from _dedup(region, rects, fam,
                              _staircase_masks(region, rects or (), int(m.group(1))),
                              cfg.staircase_limit)


def _generic_sides(mask, rects) -> tuple:
    out = []
    for r in rects:
        block = mask[r.x1:r.x2, r.y1:r.y2]
        out.append(1 if block.all() else 0 if not block.any() else 2)
    return tuple(out)


def _dedup(region, rects, fam, masks, limit):
    """Keep the first cut per induced side assignment of the contained rects
    (1 one side, 0 the other, 2 crossed); skip cuts with every surviving rect
    on one side."""
    seen = set()
    emitted = 0
    for item in masks:
        desc, side = item[0], item[1]
        if rects is not None:
            sig = item[2] if len(item) > 2 else _generic_sides(side, rects)
            if 0 not in sig or 1 not in sig or sig in seen:
                continue
            seen.add(sig)
        parts = _split_parts(region, side)
        if len(parts) < 2:
            continue
        yield fam, desc, parts
        emitted += 1
        if limit is not None and emitted >= limit:
            return


def _within_budget(parts, k) -> bool:
    if k is None:
        return True
    return len(parts) <= k and all(p.edge_count <= k for p in parts)


def enumerate_partitions(region: Region, cfg: SolverConfig, rects=None, inst=None) -> Iterator[list]:
    """Partitions of a non-empty region produced by the configured families.

    Every yielded list covers the region with pairwise disjoint parts and
    respects the edge budget.  Without `rects`, straight and staircase cuts
    range over every interior grid line.
    """
    if region.is_empty():
        raise ValueError("cannot partition an empty region")
    for _, _, parts in _partition_candidates(region, cfg, rects, inst):
        if _within_budget(parts, cfg.k):
            yield parts


# -- the recurrence ----------------------------------------------------------

def _heaviest(rects) -> Rect:
    return min(rects, key=lambda r: (-r.weight, id_key(r.id)))


def solve_region(region: Region, inst: Instance, cfg: SolverConfig, table: DpTable,
                 candidates=None) -> CutNode:
    key = region.key()
    hit = table.get(key)
    if hit is not None:
        return hit
    rects = _contained(region, inst.rects if candidates is None else candidates)
    if not rects:
        node = CutNode(region, None)
    elif len(rects) == 1:
        node = CutNode(region, None, rect_ids=frozenset([rects[0].id]), weight=rects[0].weight)
    else:
        rmax = _heaviest(rects)
        if len(table) >= table.limit:
            table.truncated = True
            node = CutNode(region, None, rect_ids=frozenset([rmax.id]), weight=rmax.weight)
        else:
            node = _best_partition(region, rects, rmax, inst, cfg, table)
    table.put(key, node)
    return node


def _best_partition(region, rects, rmax, inst, cfg, table) -> CutNode:
    best_w, best = None, None
    bound_floor = rmax.weight
    ceiling = table.upper_bound(rects) if cfg.prune else None
    for fam, _, parts in _partition_candidates(region, cfg, rects, inst):
        if ceiling is not None and best_w is not None and best_w >= ceiling:
            break          # nothing can beat it strictly
        if not _within_budget(parts, cfg.k):
            continue
        contents = [_contained(p, rects) for p in parts]
        if cfg.prune and sum(table.upper_bound(c) for c in contents) <= (
                bound_floor if best_w is None else max(bound_floor, best_w)):
            table.partitions_pruned += 1
            continue
        table.partitions_tried += 1
        subs = [solve_region(p, inst, cfg, table, c) for p, c in zip(parts, contents)]
        total = sum((s.weight for s in subs), 0)
        if best_w is None or total > best_w:
            best_w, best = total, (fam, subs)
    if best is not None and best_w > rmax.weight:
        fam, subs = best
        ids = frozenset().union(*(s.rect_ids for s in subs))
        return CutNode(region, fam, subs, ids, best_w)
    return CutNode(region, None, rect_ids=frozenset([rmax.id]), weight=rmax.weight)


def solve(inst: Instance, cfg: SolverConfig = SolverConfig()) -> Solution:
    """Run the DP from the full input square ``[0,N]^2``."""
    for r in inst.rects:
        if r.weight <= 0:
            raise ValueError(f"rect {r.id!r} has non-positive weight; normalise first")
    table = DpTable(cfg.max_table_entries)
    table.bind(inst.rects, exact_bounds=inst.n <= EXACT_BOUND_LIMIT)
    root = Region.full(max(inst.N, 1), max(inst.N, 1))
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        node = solve_region(root, inst, cfg, table)
    finally:
        sys.setrecursionlimit(old)
    stats = table.stats()
    stats["depth"] = node.depth()
    return Solution(node.rect_ids, node.weight, node, table.truncated, stats)


# -- certificate replay ------------------------------------------------------

@dataclass
class ReplayReport:
    ok: bool
    violation: Optional[str] = None
    path: tuple = ()
    nodes: int = 0
    depth: int = 0


def replay_cut_tree(sol: Solution, inst: Instance, k=None) -> ReplayReport:
    """Re-check every recorded partition top-down against the bitmap algebra."""
    table = inst.by_id()
    if sol.cut_tree is None:
        return ReplayReport(False, "solution carries no cut tree")
    count = 0

    def visit(node: CutNode, path):
        nonlocal count
        count += 1
        if not isinstance(node, CutNode) or not isinstance(node.region, Region):
            raise ValueError(f"malformed cut tree at {path}")
        if node.is_leaf:
            rs = []
            for rid in node.rect_ids:
                if rid not in table:
                    return f"unknown rect {rid!r}", path
                rs.append(table[rid])
            if len(rs) > 1:
                return "leaf holds more than one rect", path
            for r in rs:
                if not node.region.contains_rect(r):
                    return f"rect {r.id!r} not inside its leaf region", path
            if node.weight != sum((r.weight for r in rs), 0):
                return "leaf weight mismatch", path
            return None
        if len(node.parts) < 2:
            return "split node with fewer than two parts", path
        acc = np.zeros_like(node.region.cells)
        for p in node.parts:
            if p.region.cells.shape != acc.shape:
                return "part on a different grid", path
            if (acc & p.region.cells).any():
                return "parts overlap", path
            acc |= p.region.cells
        if not np.array_equal(acc, node.region.cells):
            return "parts do not cover the region", path
        if k is not None and (len(node.parts) > k or any(p.region.edge_count > k for p in node.parts)):
            return "edge budget exceeded", path
        for i, p in enumerate(node.parts):
            bad = visit(p, path + (i,))
            if bad:
                return bad
        ids = frozenset().union(*(p.rect_ids for p in node.parts))
        if ids != node.rect_ids or node.weight != sum((p.weight for p in node.parts), 0):
            return "node totals differ from children", path
        return None

    bad = visit(sol.cut_tree, ())
    if bad:
        return ReplayReport(False, bad[0], bad[1], count)
    if sol.cut_tree.rect_ids != sol.rect_ids or sol.cut_tree.weight != sol.total_weight:
        return ReplayReport(False, "root differs from solution", (), count)
    members = [table[i] for i in sol.rect_ids]
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if not rects_disjoint(a, b):
                return ReplayReport(False, f"rects {a.id!r} and {b.id!r} overlap", (), count)
    return ReplayReport(True, None, (), count, sol.cut_tree.depth())


def depth_reference(n: int, eps) -> int:
    """ceil(log_{3/2}(n^2/eps)), the balanced-cut recursion depth bound."""
    val = Fraction(n * n) / Fraction(eps)
    return math.ceil(math.log(float(val)) / math.log(1.5)) if val > 1 else 0
