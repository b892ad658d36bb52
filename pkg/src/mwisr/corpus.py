"""Seeded instance generators for the regimes exercised by the harness."""
from __future__ import annotations

import random
from fractions import Fraction

from .geom import Rect
from .instance import Instance
from .preprocess import is_well_distributed

KINDS = ("uniform", "delta-large", "same-scale", "adversarial-stripes")


class GeneratorError(ValueError):
    pass


def _weight(rng: random.Random, wmax: int) -> int:
    return rng.randint(1, wmax)


def uniform(n: int, N: int, seed: int, wmax: int = 10, eps=Fraction(1, 2)) -> Instance:
    if N < 1 or n < 0:
        raise GeneratorError("need N >= 1 and n >= 0")
    rng = random.Random(seed)
    rects = []
    for i in range(n):
        x1, x2 = sorted(rng.sample(range(N + 1), 2))
        y1, y2 = sorted(rng.sample(range(N + 1), 2))
        rects.append(Rect(i, x1, y1, x2, y2, _weight(rng, wmax)))
    return Instance(tuple(rects), N, eps)


def delta_large(n: int, N: int, delta, seed: int, wmax: int = 10, eps=Fraction(1, 2),
                disjoint: bool = False, max_tries: int = 10_000) -> Instance:
    """Every rect has a side longer than delta*N; optionally pairwise disjoint."""
    delta = Fraction(delta)
    side = delta * N
    if side >= N:
        raise GeneratorError("delta*N must be below N")
    rng = random.Random(seed)
    lo = int(side) + 1
    rects: list = []
    tries = 0
    while len(rects) < n:
        tries += 1
        if tries > max_tries:
            raise GeneratorError(f"could only place {len(rects)} of {n} rects")
        long_ = rng.randint(lo, N)
        short = rng.randint(1, max(1, int(side)))
        w, h = (short, long_) if rng.random() < 0.5 else (long_, short)
        x = rng.randint(0, N - w)
        y = rng.randint(0, N - h)
        r = Rect(len(rects), x, y, x + w, y + h, _weight(rng, wmax))
        if disjoint and any(r.x1 < o.x2 and o.x1 < r.x2 and r.y1 < o.y2 and o.y1 < r.y2 for o in rects):
            continue
        rects.append(r)
    inst = Instance(tuple(rects), N, eps, delta)
    assert all(max(r.width, r.height) > side for r in inst.rects)
    return inst


def same_scale(n: int, N: int, K: int, delta, seed: int, wmax: int = 10, eps=Fraction(1, 2)) -> Instance:
    """Every rect has K <= max(width, height) <= K/delta."""
    delta = Fraction(delta)
    hi = int(Fraction(K) / delta)
    if K < 1 or hi > N:
        raise GeneratorError("need 1 <= K and K/delta <= N")
    rng = random.Random(seed)
    rects = []
    for i in range(n):
        m = rng.randint(K, hi)
        other = rng.randint(1, m)
        w, h = (m, other) if rng.random() < 0.5 else (other, m)
        x = rng.randint(0, N - w)
        y = rng.randint(0, N - h)
        rects.append(Rect(i, x, y, x + w, y + h, _weight(rng, wmax)))
    inst = Instance(tuple(rects), N, eps, delta)
    assert all(K <= max(r.width, r.height) <= hi for r in inst.rects)
    return inst


def adversarial_stripes(n: int, N: int, seed: int, wmax: int = 10, eps=Fraction(1, 2)) -> Instance:
    """All weight inside one vertical stripe of width at most N/4."""
    if N < 4:
        raise GeneratorError("need N >= 4")
    rng = random.Random(seed)
    width = max(1, N // 4)
    x0 = rng.randint(0, N - width)
    rects = []
    for i in range(n):
        x1, x2 = sorted(rng.sample(range(x0, x0 + width + 1), 2))
        y1, y2 = sorted(rng.sample(range(N + 1), 2))
        rects.append(Rect(i, x1, y1, x2, y2, _weight(rng, wmax)))
    inst = Instance(tuple(rects), N, eps)
    assert n == 0 or not is_well_distributed(inst).ok
    return inst


def generate(kind: str, *, n: int, N: int, seed: int, delta=None, K=None, wmax: int = 10,
             eps=Fraction(1, 2)) -> Instance:
    if kind == "uniform":
        return uniform(n, N, seed, wmax, eps)
    if kind == "delta-large":
        if delta is None:
            raise GeneratorError("delta-large needs --delta")
        return delta_large(n, N, delta, seed, wmax, eps)
    if kind == "same-scale":
        if delta is None or K is None:
            raise GeneratorError("same-scale needs --delta and --K")
        return same_scale(n, N, K, delta, seed, wmax, eps)
    if kind == "adversarial-stripes":
        return adversarial_stripes(n, N, seed, wmax, eps)
    raise GeneratorError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
