"""Instance normalisation: weight scaling, coordinate compression, stretching,
and the associated checkers; plus the shifted-grid decomposition."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .geom import id_key
from .instance import Instance


class PreconditionError(ValueError):
    """Input does not satisfy an operation's precondition."""

    def __init__(self, msg: str, offenders=()):
        self.offenders = list(offenders)
        super().__init__(msg)


class IdSetMismatchError(ValueError):
    pass


# -- weights -----------------------------------------------------------------

@dataclass
class NormalizationReport:
    factor: Fraction
    unit_denominator: int
    dropped: list
    max_scaled: Fraction


def normalize_weights(inst: Instance):
    """Scale so the heaviest rect weighs n/eps, drop rects below 1, and
    express survivors in integer units of ``1/unit_denominator``.

    Returns ``(instance, report)``.
    """
    if not inst.rects or max(r.weight for r in inst.rects) <= 0:
        raise PreconditionError("normalize_weights needs a rect with positive weight")
    target = Fraction(inst.n) / inst.eps
    factor = target / Fraction(max(r.weight for r in inst.rects))
    scaled = [(r, Fraction(r.weight) * factor) for r in inst.rects]
    keep = [(r, s) for r, s in scaled if s >= 1]
    dropped = [r.id for r, s in scaled if s < 1]
    denom = 1
    for _, s in keep:
        denom = math.lcm(denom, s.denominator)
    rects = [r.with_weight(int(s * denom)) for r, s in keep]
    out = inst.with_rects(rects, weight_unit=Fraction(1, denom))
    return out, NormalizationReport(factor, denom, dropped, max(s for _, s in keep))


# -- coordinates -------------------------------------------------------------

def compress_coords(inst: Instance) -> Instance:
    """Map distinct x (and y) values order-preservingly onto 0, 1, 2, ..."""
    if not inst.rects:
        return inst
    xs = sorted({v for r in inst.rects for v in (r.x1, r.x2)})
    ys = sorted({v for r in inst.rects for v in (r.y1, r.y2)})
    xr = {v: i for i, v in enumerate(xs)}
    yr = {v: i for i, v in enumerate(ys)}
    rects = [r.with_coords(xr[r.x1], yr[r.y1], xr[r.x2], yr[r.y2]) for r in inst.rects]
    return inst.with_rects(rects, N=max(len(xs), len(ys)) - 1)


def stretch_well_distributed(inst: Instance) -> Instance:
    """Spread coordinates in proportion to the weight starting at each value.

    Input must use coordinates in {0,...,2n-1}; output lies in {0,...,4n}.
    """
    n = inst.n
    if n == 0:
        return inst
    for r in inst.rects:
        if max(r.x2, r.y2) > 2 * n - 1:
            raise PreconditionError("stretch needs coordinates in {0,...,2n-1}; compress first", [r.id])
    total = Fraction(inst.total_weight)

    def shift(j: int, axis: str) -> int:
        if total == 0:
            return 0
        start = (lambda r: r.x1) if axis == "x" else (lambda r: r.y1)
        w = sum((Fraction(r.weight) for r in inst.rects if start(r) < j), Fraction(0))
        return math.ceil(w * 2 * n / total)

    xcache, ycache = {}, {}

    def sx(v):
        if v not in xcache:
            xcache[v] = v + shift(v, "x")
        return xcache[v]

    def sy(v):
        if v not in ycache:
            ycache[v] = v + shift(v, "y")
        return ycache[v]

    rects = [r.with_coords(sx(r.x1), sy(r.y1), sx(r.x2), sy(r.y2)) for r in inst.rects]
    return inst.with_rects(rects, N=4 * n)


def scale_coords(inst: Instance, factor: int) -> Instance:
    rects = [r.with_coords(r.x1 * factor, r.y1 * factor, r.x2 * factor, r.y2 * factor)
             for r in inst.rects]
    return inst.with_rects(rects, N=inst.N * factor)


# -- checkers ----------------------------------------------------------------

@dataclass
class WellDistributedReport:
    ok: bool
    # (axis, t, t_end, contained_weight, allowed_weight) of the first violation
    violation: Optional[tuple] = None
    stripes_checked: int = 0


def _integer_weights(inst: Instance):
    den = 1
    for r in inst.rects:
        den = math.lcm(den, Fraction(r.weight).denominator)
    return [int(Fraction(r.weight) * den) for r in inst.rects], den


def is_well_distributed(inst: Instance) -> WellDistributedReport:
    """Check every integer stripe [t, t'] in both axes exhaustively:
    contained weight <= 2 * (t'-t)/N * w(R)."""
    N = inst.N
    if not inst.rects:
        return WellDistributedReport(True, None, 0)
    ws, den = _integer_weights(inst)
    W = sum(ws)
    checked = 0
    for axis in ("x", "y"):
        A = np.zeros((N + 1, N + 1), dtype=object if W * N > 2**62 else np.int64)
        for r, w in zip(inst.rects, ws):
            lo, hi = (r.x1, r.x2) if axis == "x" else (r.y1, r.y2)
            A[lo, hi] += w
        # C[t, t'] = sum of A[a, b] for a >= t, b <= t'
        C = np.flip(np.cumsum(np.flip(A, 0), 0), 0).cumsum(1)
        t = np.arange(N + 1)
        width = t[None, :] - t[:, None]
        allowed = 2 * width * W              # compare C * N <= allowed
        bad = (width > 0) & (C * N > allowed)
        checked += int((width > 0).sum())
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            return WellDistributedReport(
                False,
                (axis, i, j, Fraction(int(C[i, j]), den), Fraction(2 * (j - i) * W, N * den)),
                checked)
    return WellDistributedReport(True, None, checked)


@dataclass
class EquivalenceWitness:
    ok: bool
    # (axis, (id, t), (id', t'), relation) for each disagreement
    mismatches: list = field(default_factory=list)
    pairs_checked: int = 0


def is_combinatorially_equivalent(a: Instance, b: Instance) -> EquivalenceWitness:
    ta, tb = a.by_id(), b.by_id()
    if set(ta) != set(tb):
        raise IdSetMismatchError("instances have different rect id sets")
    for rid in ta:
        if ta[rid].weight != tb[rid].weight:
            raise IdSetMismatchError(f"rect {rid!r} has different weights")
    ids = sorted(ta, key=id_key)
    mism = []
    checked = 0
    for axis in ("x", "y"):
        def coords(table):
            out = []
            for rid in ids:
                r = table[rid]
                pair = (r.x1, r.x2) if axis == "x" else (r.y1, r.y2)
                out.append(((rid, 1), pair[0]))
                out.append(((rid, 2), pair[1]))
            return out
        ca, cb = coords(ta), coords(tb)
        for i in range(len(ca)):
            for j in range(len(ca)):
                if i == j:
                    continue
                checked += 1
                va, va2 = ca[i][1], ca[j][1]
                vb, vb2 = cb[i][1], cb[j][1]
                if (va <= va2) != (vb <= vb2):
                    mism.append((axis, ca[i][0], ca[j][0], "<="))
                if (va < va2) != (vb < vb2):
                    mism.append((axis, ca[i][0], ca[j][0], "<"))
    return EquivalenceWitness(not mism, mism, checked)


# -- shifted grid ------------------------------------------------------------

@dataclass
class Decomposition:
    offset: int
    cell_side: Fraction
    subinstances: list
    dropped_weight: object
    dropped_ids: list


@dataclass
class OffsetSweep:
    cell_side: Fraction
    dropped_by_offset: dict
    mean_dropped: Fraction


def _cell_side(K: int, delta: Fraction, eps: Fraction) -> Fraction:
    return Fraction(1) / Fraction(delta) * K / Fraction(eps)


def _check_same_scale(inst: Instance, K: int, delta: Fraction):
    hi = Fraction(K) / Fraction(delta)
    bad = [r.id for r in inst.rects if not (K <= max(r.width, r.height) <= hi)]
    if bad:
        raise PreconditionError(f"max(g,h) outside [{K}, {hi}] for {len(bad)} rect(s)", bad)


def _decompose_at(inst: Instance, side: Fraction, offset: int) -> Decomposition:
    def cell(lo, hi):
        # index of the cell containing [lo, hi], or None when a boundary cuts it
        i = math.floor((lo - offset) / side)
        return i if offset + (i + 1) * side >= hi else None

    groups: dict = {}
    dropped = []
    for r in inst.rects:
        cx, cy = cell(r.x1, r.x2), cell(r.y1, r.y2)
        if cx is None or cy is None:
            dropped.append(r)
        else:
            groups.setdefault((cx, cy), []).append(r)
    subs = []
    for key in sorted(groups):
        sub = inst.with_rects(groups[key])
        sub.meta.update({"cell": key, "cell_origin": (offset + key[0] * side, offset + key[1] * side)})
        subs.append(sub)
    return Decomposition(offset, side, subs, sum((r.weight for r in dropped), 0),
                         [r.id for r in dropped])


def shifted_grid_decompose(inst: Instance, K: int, delta, seed=None, offset: Optional[int] = None):
    """Split into per-cell subinstances of a grid with cells of side (1/delta)*K/eps.

    The offset is drawn uniformly from {0,...,ceil(side)} using ``seed`` unless
    given explicitly.
    """
    delta = Fraction(delta)
    _check_same_scale(inst, K, delta)
    side = _cell_side(K, delta, inst.eps)
    if offset is None:
        offset = random.Random(seed).randint(0, math.ceil(side))
    return _decompose_at(inst, side, offset)


def sweep_offsets(inst: Instance, K: int, delta) -> OffsetSweep:
    """Exhaustive-offset mode: dropped weight for every admissible offset."""
    delta = Fraction(delta)
    _check_same_scale(inst, K, delta)
    side = _cell_side(K, delta, inst.eps)
    out = {a: _decompose_at(inst, side, a).dropped_weight for a in range(math.ceil(side) + 1)}
    return OffsetSweep(side, out, Fraction(sum(out.values()), len(out)))
