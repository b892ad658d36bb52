"""Exact and baseline solvers used as ground truth, plus solution checking."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .geom import Rect, id_key, rects_disjoint
from .instance import Instance


class OracleCapError(ValueError):
    pass


class UnknownIdError(KeyError):
    pass


@dataclass
class OracleResult:
    opt_weight: object
    opt_set: frozenset
    nodes_explored: int
    method: str


@dataclass
class VerifyReport:
    ok: bool
    overlapping_pairs: list = field(default_factory=list)
    outside: list = field(default_factory=list)
    weight_ok: bool = True
    computed_weight: object = 0


def _order(rects) -> list[Rect]:
    return sorted(rects, key=lambda r: (-r.weight, id_key(r.id)))


def brute_force_opt(inst: Instance, cap: int = 20) -> OracleResult:
    """Branch and bound over rectangles sorted by weight, pruning by remaining sum."""
    if inst.n > cap:
        raise OracleCapError(f"n={inst.n} exceeds oracle cap {cap}")
    rects = _order(inst.rects)
    n = len(rects)
    conflict = [0] * n
    for i, j in combinations(range(n), 2):
        if not rects_disjoint(rects[i], rects[j]):
            conflict[i] |= 1 << j
            conflict[j] |= 1 << i
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + rects[i].weight

    best_w = 0
    best_mask = 0
    nodes = 0

    def search(i, banned, mask, w):
        nonlocal best_w, best_mask, nodes
        nodes += 1
        if w > best_w:
            best_w, best_mask = w, mask
        if i == n or w + suffix[i] <= best_w:
            return
        if not banned >> i & 1:
            search(i + 1, banned | conflict[i], mask | 1 << i, w + rects[i].weight)
        search(i + 1, banned, mask, w)

    search(0, 0, 0, 0)
    chosen = frozenset(rects[i].id for i in range(n) if best_mask >> i & 1)
    return OracleResult(best_w, chosen, nodes, "branch-and-bound")


def enumerate_opt(inst: Instance) -> OracleResult:
    """Plain 2^n subset enumeration; independent check of the pruned search."""
    rects = list(inst.rects)
    n = len(rects)
    ok = [[rects_disjoint(a, b) for b in rects] for a in rects]
    best_w, best = 0, ()
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if all(ok[a][b] for a, b in combinations(members, 2)):
            w = sum((rects[i].weight for i in members), 0)
            if w > best_w:
                best_w, best = w, members
    return OracleResult(best_w, frozenset(rects[i].id for i in best), 1 << n, "enumeration")


def greedy_weight(inst: Instance):
    """Heaviest-first greedy; returns a geodp Solution without a cut tree."""
    from .geodp import Solution

    chosen = []
    for r in _order(inst.rects):
        if all(rects_disjoint(r, c) for c in chosen):
            chosen.append(r)
    return Solution(frozenset(r.id for r in chosen), sum((r.weight for r in chosen), 0), None)


def verify_solution(inst: Instance, sol, claimed_weight=None) -> VerifyReport:
    """Check pairwise disjointness, containment in the input square, weight sum.

    ``sol`` may be a Solution, an OracleResult or an iterable of ids.
    """
    if hasattr(sol, "rect_ids"):
        ids, claimed = sol.rect_ids, sol.total_weight
    elif hasattr(sol, "opt_set"):
        ids, claimed = sol.opt_set, sol.opt_weight
    else:
        ids, claimed = frozenset(sol), claimed_weight
    table = inst.by_id()
    missing = [i for i in ids if i not in table]
    if missing:
        raise UnknownIdError(f"unknown ids {sorted(missing, key=id_key)}")
    members = sorted((table[i] for i in ids), key=lambda r: id_key(r.id))
    pairs = [(a.id, b.id) for a, b in combinations(members, 2) if not rects_disjoint(a, b)]
    outside = [r.id for r in members if r.x1 < 0 or r.y1 < 0 or r.x2 > inst.N or r.y2 > inst.N]
    total = sum((r.weight for r in members), 0)
    weight_ok = claimed is None or claimed == total
    return VerifyReport(not pairs and not outside and weight_ok, pairs, outside, weight_ok, total)
