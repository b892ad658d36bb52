"""Seeded corpora shared by the module tests and the acceptance suite."""
from __future__ import annotations

import random
from fractions import Fraction

from mwisr import corpus, largerect, oracle, preprocess
from mwisr.geom import Rect
from mwisr.instance import Instance


def small_instance(seed: int, n_max: int = 8, N: int = 16, wmax: int = 10) -> Instance:
    """Random rects whose compressed grid stays within 16x16."""
    rng = random.Random(seed)
    n = rng.randint(0, n_max)
    inst = corpus.uniform(n, N, seed=rng.randrange(1 << 30), wmax=wmax)
    return preprocess.compress_coords(inst)


def disjoint_instance(seed: int, n_max: int = 10, N: int = 24) -> Instance:
    """Random pairwise disjoint rects, rejection sampled."""
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    rects: list = []
    tries = 0
    while len(rects) < n and tries < 500:
        tries += 1
        w, h = rng.randint(1, N // 3), rng.randint(1, N // 3)
        x, y = rng.randint(0, N - w), rng.randint(0, N - h)
        r = Rect(len(rects), x, y, x + w, y + h, rng.randint(1, 10))
        if all(r.x2 <= o.x1 or o.x2 <= r.x1 or r.y2 <= o.y1 or o.y2 <= r.y1 for o in rects):
            rects.append(r)
    return Instance(tuple(rects), N)


def delta_large_corpus(count: int = 40, seed: int = 2024):
    """Instances for the large-rectangle checks: delta in {1/4, 1/8}, eps in
    {1/4, 1/2}, n <= 12; yields (instance, optimal disjoint subset, opt weight)."""
    rng = random.Random(seed)
    for t in range(count):
        delta = Fraction(1, 4) if t % 2 == 0 else Fraction(1, 8)
        eps = Fraction(1, 2) if (t // 2) % 2 == 0 else Fraction(1, 4)
        N = 16 if delta == Fraction(1, 4) else 32
        n = rng.randint(1, 12)
        inst = corpus.delta_large(n, N, delta, seed=rng.randrange(1 << 30), eps=eps)
        opt = oracle.brute_force_opt(inst)
        yield inst, inst.subset(opt.opt_set), opt.opt_weight


def largerect_cfg(inst: Instance) -> largerect.LargeRectConfig:
    return largerect.LargeRectConfig(inst.eps, inst.delta)


def tiling_instance(seed: int, max_rects: int = 10, N: int = 36, min_side: int = 8):
    """Guillotine tiling of [0,N]^2 with even coordinates and every side at
    least `min_side`; weights are area plus jitter, each below a third of the
    total.  Returns None when the draw misses a precondition."""
    rng = random.Random(seed)
    boxes = [(0, 0, N, N)]
    target = rng.randint(3, max_rects)
    for _ in range(200):
        if len(boxes) >= target:
            break
        k = rng.randrange(len(boxes))
        x1, y1, x2, y2 = boxes[k]
        vertical = rng.random() < 0.5
        lo, hi = (x1, x2) if vertical else (y1, y2)
        cuts = [c for c in range(lo + min_side, hi - min_side + 1) if c % 2 == 0]
        if not cuts:
            continue
        c = rng.choice(cuts)
        boxes[k:k + 1] = [(x1, y1, c, y2), (c, y1, x2, y2)] if vertical else [(x1, y1, x2, c), (x1, c, x2, y2)]
    rects = tuple(Rect(i, *b, (b[2] - b[0]) * (b[3] - b[1]) + rng.randint(0, 20))
                  for i, b in enumerate(boxes))
    inst = Instance(rects, N, Fraction(1, 2))
    W = inst.total_weight
    if any(3 * r.weight >= W for r in rects) or not preprocess.is_well_distributed(inst).ok:
        return None
    return inst
