"""Integer rectilinear geometry: rectangles, cell-bitmap regions and segments.

Rectangles are open sets with integer corners.  A Region is a set of unit
cells ``[x, x+1] x [y, y+1]`` on a fixed ambient grid, stored as a boolean
array indexed ``cells[x, y]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Weight = Union[int, Fraction]

_FOUR = ndimage.generate_binary_structure(2, 1)


class GridMismatchError(ValueError):
    pass


def id_key(rid) -> tuple:
    """Total order on mixed int/str identifiers."""
    if isinstance(rid, int):
        return (0, rid, "")
    return (1, 0, str(rid))


@dataclass(frozen=True)
class Rect:
    id: object
    x1: int
    y1: int
    x2: int
    y2: int
    weight: Weight = 1

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ValueError(f"rect {self.id!r}: non-integer coordinate {v!r}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"rect {self.id!r}: degenerate extent")
        if self.weight < 0:
            raise ValueError(f"rect {self.id!r}: negative weight")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def is_vertical(self) -> bool:
        return self.height > self.width

    def with_coords(self, x1, y1, x2, y2) -> "Rect":
        return Rect(self.id, int(x1), int(y1), int(x2), int(y2), self.weight)

    def with_weight(self, weight) -> "Rect":
        return Rect(self.id, self.x1, self.y1, self.x2, self.y2, weight)


def rects_disjoint(a: Rect, b: Rect) -> bool:
    return a.x2 <= b.x1 or b.x2 <= a.x1 or a.y2 <= b.y1 or b.y2 <= a.y1


class Region:
    """Immutable set of unit cells on a ``grid_w x grid_h`` grid."""

    __slots__ = ("cells", "_key", "_edges", "_ncomp", "_bbox", "__weakref__")

    def __init__(self, cells: np.ndarray):
        arr = np.array(cells, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError("region bitmap must be 2-d")
        arr.flags.writeable = False
        self.cells = arr
        self._key = None
        self._edges = None
        self._ncomp = None
        self._bbox = False

    # construction -------------------------------------------------------
    @classmethod
    def empty(cls, grid_w: int, grid_h: int) -> "Region":
        return cls(np.zeros((grid_w, grid_h), dtype=bool))

    @classmethod
    def full(cls, grid_w: int, grid_h: int) -> "Region":
        return cls(np.ones((grid_w, grid_h), dtype=bool))

    @classmethod
    def from_rect(cls, grid_w: int, grid_h: int, x1, y1, x2, y2) -> "Region":
        arr = np.zeros((grid_w, grid_h), dtype=bool)
        arr[x1:x2, y1:y2] = True
        return cls(arr)

    @classmethod
    def from_rects(cls, grid_w: int, grid_h: int, boxes: Iterable) -> "Region":
        arr = np.zeros((grid_w, grid_h), dtype=bool)
        for b in boxes:
            if isinstance(b, Rect):
                arr[b.x1:b.x2, b.y1:b.y2] = True
            else:
                x1, y1, x2, y2 = b
                arr[x1:x2, y1:y2] = True
        return cls(arr)

    # basic views --------------------------------------------------------
    @property
    def grid_w(self) -> int:
        return self.cells.shape[0]

    @property
    def grid_h(self) -> int:
        return self.cells.shape[1]

    @property
    def area(self) -> int:
        return int(self.cells.sum())

    def is_empty(self) -> bool:
        return not self.cells.any()

    @property
    def bbox(self):
        """(x1, y1, x2, y2) of occupied cells, or None when empty."""
        if self._bbox is False:
            xs = np.flatnonzero(self.cells.any(axis=1))
            if xs.size == 0:
                self._bbox = None
            else:
                ys = np.flatnonzero(self.cells.any(axis=0))
                self._bbox = (int(xs[0]), int(ys[0]), int(xs[-1]) + 1, int(ys[-1]) + 1)
        return self._bbox

    def key(self) -> tuple:
        """Canonical hashable key: bbox-cropped bitmap plus its offset."""
        if self._key is None:
            bb = self.bbox
            if bb is None:
                self._key = (self.grid_w, self.grid_h, None)
            else:
                x1, y1, x2, y2 = bb
                crop = np.ascontiguousarray(self.cells[x1:x2, y1:y2])
                self._key = (self.grid_w, self.grid_h, bb, np.packbits(crop).tobytes())
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Region({self.grid_w}x{self.grid_h}, area={self.area}, bbox={self.bbox})"

    def _check(self, other: "Region"):
        if self.cells.shape != other.cells.shape:
            raise GridMismatchError(f"grid {self.cells.shape} vs {other.cells.shape}")

    # algebra ------------------------------------------------------------
    def subtract(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.cells & ~other.cells)

    def intersect(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.cells & other.cells)

    def union(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.cells | other.cells)

    def contains_region(self, other: "Region") -> bool:
        self._check(other)
        return not (other.cells & ~self.cells).any()

    def contains_rect(self, rect: Rect) -> bool:
        if rect.x1 < 0 or rect.y1 < 0 or rect.x2 > self.grid_w or rect.y2 > self.grid_h:
            return False
        return bool(self.cells[rect.x1:rect.x2, rect.y1:rect.y2].all())

    # topology -----------------------------------------------------------
    def components(self) -> list["Region"]:
        labels, n = ndimage.label(self.cells, structure=_FOUR)
        self._ncomp = n
        if n == 0:
            return []
        # ndimage numbers labels in x-major scan order of first cell
        return [Region(labels == lab) for lab in range(1, n + 1)]

    @property
    def component_count(self) -> int:
        if self._ncomp is None:
            self._ncomp = int(ndimage.label(self.cells, structure=_FOUR)[1])
        return self._ncomp

    @property
    def edge_count(self) -> int:
        if self._edges is None:
            self._edges = bitmap_edge_count(self.cells)
        return self._edges


def bitmap_edge_count(cells: np.ndarray) -> int:
    """Number of maximal axis-parallel boundary segments of a cell set.

    Collinear unit edges merge only when the region lies on the same side of
    both, so pinch points split segments.
    """
    if not cells.any():
        return 0
    p = np.pad(cells, 1).astype(np.int8)
    # horizontal unit edges on line y between cell rows y-1 and y: sign gives side
    h = p[:, 1:] - p[:, :-1]          # shape (W+2, H+1): index [x, y]
    v = p[1:, :] - p[:-1, :]          # shape (W+1, H+2): index [x, y]
    return _runs(h, axis=0) + _runs(v, axis=1)


def _runs(d: np.ndarray, axis: int) -> int:
    # count maximal runs of equal nonzero sign along `axis`
    count = 0
    for sign in (1, -1):
        m = (d == sign).astype(np.int8)
        starts = np.diff(m, axis=axis, prepend=0) == 1
        count += int(starts.sum())
    return count


@dataclass(frozen=True, order=True)
class Segment:
    """Axis-parallel segment. ``axis`` is 'h' (y fixed) or 'v' (x fixed)."""

    axis: str
    fixed: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.axis not in ("h", "v"):
            raise ValueError(f"bad axis {self.axis!r}")
        if not self.lo < self.hi:
            raise ValueError(f"degenerate segment {self}")

    @property
    def length(self) -> int:
        return self.hi - self.lo

    @property
    def endpoints(self) -> tuple:
        if self.axis == "h":
            return (self.lo, self.fixed), (self.hi, self.fixed)
        return (self.fixed, self.lo), (self.fixed, self.hi)

    def contains_point(self, p) -> bool:
        x, y = p
        if self.axis == "h":
            return y == self.fixed and self.lo <= x <= self.hi
        return x == self.fixed and self.lo <= y <= self.hi

    def interior_contains_point(self, p) -> bool:
        x, y = p
        if self.axis == "h":
            return y == self.fixed and self.lo < x < self.hi
        return x == self.fixed and self.lo < y < self.hi

    def intersects_rect(self, r: Rect) -> bool:
        """Positive-length overlap with the open rectangle."""
        if self.axis == "h":
            return r.y1 < self.fixed < r.y2 and self.lo < r.x2 and self.hi > r.x1
        return r.x1 < self.fixed < r.x2 and self.lo < r.y2 and self.hi > r.y1

    def cuts_rect(self, r: Rect) -> bool:
        """Splits the open rectangle into two components."""
        if self.axis == "h":
            return r.y1 < self.fixed < r.y2 and self.lo <= r.x1 and self.hi >= r.x2
        return r.x1 < self.fixed < r.x2 and self.lo <= r.y1 and self.hi >= r.y2

    def overlap_length(self, r: Rect) -> int:
        if not self.intersects_rect(r):
            return 0
        if self.axis == "h":
            return min(self.hi, r.x2) - max(self.lo, r.x1)
        return min(self.hi, r.y2) - max(self.lo, r.y1)

    def to_list(self) -> list:
        return [self.axis, self.fixed, self.lo, self.hi]


def segments_overlap(a: Segment, b: Segment) -> bool:
    """Collinear and sharing more than one point."""
    return a.axis == b.axis and a.fixed == b.fixed and min(a.hi, b.hi) > max(a.lo, b.lo)


def segments_cross_properly(a: Segment, b: Segment) -> bool:
    """Perpendicular segments meeting at a point interior to both."""
    if a.axis == b.axis:
        return False
    h, v = (a, b) if a.axis == "h" else (b, a)
    return h.lo < v.fixed < h.hi and v.lo < h.fixed < v.hi


def segments_meet(a: Segment, b: Segment) -> bool:
    if a.axis == b.axis:
        return a.fixed == b.fixed and min(a.hi, b.hi) >= max(a.lo, b.lo)
    h, v = (a, b) if a.axis == "h" else (b, a)
    return h.lo <= v.fixed <= h.hi and v.lo <= h.fixed <= v.hi


def blocked_edges(segments: Iterable[Segment], grid_w: int, grid_h: int):
    """Unit-edge masks covered by segments.

    Returns ``(hb, vb)`` where ``hb[x, y]`` marks the horizontal unit edge
    from (x, y) to (x+1, y) and ``vb[x, y]`` the vertical unit edge from
    (x, y) to (x, y+1).
    """
    hb = np.zeros((grid_w, grid_h + 1), dtype=bool)
    vb = np.zeros((grid_w + 1, grid_h), dtype=bool)
    for s in segments:
        if s.axis == "h":
            if 0 <= s.fixed <= grid_h:
                hb[max(s.lo, 0):min(s.hi, grid_w), s.fixed] = True
        else:
            if 0 <= s.fixed <= grid_w:
                vb[s.fixed, max(s.lo, 0):min(s.hi, grid_h)] = True
    return hb, vb


def faces_of_segments(segments: Iterable[Segment], grid_w: int, grid_h: int):
    """Label the faces of ``[0,W]x[0,H]`` minus the segments.

    Returns ``(labels, count, hb, vb)``; ``labels[x, y]`` is the 0-based face
    index of the unit cell, faces numbered in x-major order of first cell.
    """
    hb, vb = blocked_edges(segments, grid_w, grid_h)
    labels = _label_cells(np.ones((grid_w, grid_h), dtype=bool), hb, vb)
    return labels, int(labels.max()) + 1 if labels.size else 0, hb, vb


def _label_cells(mask: np.ndarray, hb: np.ndarray, vb: np.ndarray) -> np.ndarray:
    """Connected components of `mask` cells where blocked unit edges separate.

    Unmasked cells get label -1; labels follow x-major order of first cell.
    """
    w, h = mask.shape
    idx = np.arange(w * h).reshape(w, h)
    jr = mask[:-1, :] & mask[1:, :] & ~vb[1:w, :]
    ju = mask[:, :-1] & mask[:, 1:] & ~hb[:, 1:h]
    a = np.concatenate([idx[:-1, :][jr], idx[:, :-1][ju]])
    b = np.concatenate([idx[1:, :][jr], idx[:, 1:][ju]])
    g = coo_matrix((np.ones(a.size, dtype=np.int8), (a, b)), shape=(w * h, w * h))
    _, lab = connected_components(g, directed=False)
    flat_mask = mask.ravel()
    out = np.full(w * h, -1, dtype=np.int64)
    sel = np.flatnonzero(flat_mask)
    if sel.size:
        uniq, first = np.unique(lab[sel], return_index=True)
        order = np.argsort(first)
        rank = np.empty(uniq.size, dtype=np.int64)
        rank[order] = np.arange(uniq.size)
        out[sel] = rank[np.searchsorted(uniq, lab[sel])]
    return out.reshape(w, h)
