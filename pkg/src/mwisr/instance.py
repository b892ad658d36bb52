"""Instance container and the versioned JSON instance format."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .geom import Rect, id_key

FORMAT_VERSION = 1


class InstanceError(ValueError):
    """Invalid instance content; ``line`` points into the source text when known."""

    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class Instance:
    rects: tuple
    N: int
    eps: Fraction = Fraction(1, 2)
    delta: Optional[Fraction] = None
    # denominator that turned rational weights into integer units, if any
    weight_unit: Fraction = Fraction(1)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rects", tuple(self.rects))
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.delta is not None:
            object.__setattr__(self, "delta", Fraction(self.delta))
        ids = [r.id for r in self.rects]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate rect ids")
        for r in self.rects:
            if r.x1 < 0 or r.y1 < 0 or r.x2 > self.N or r.y2 > self.N:
                raise InstanceError(f"rect {r.id!r} outside [0,{self.N}]^2")

    @property
    def n(self) -> int:
        return len(self.rects)

    @property
    def total_weight(self):
        return sum((r.weight for r in self.rects), 0)

    def by_id(self) -> dict:
        return {r.id: r for r in self.rects}

    def with_rects(self, rects, **kw) -> "Instance":
        return replace(self, rects=tuple(rects), **kw)

    def subset(self, ids) -> "Instance":
        keep = set(ids)
        return self.with_rects([r for r in self.rects if r.id in keep])

    def sorted_ids(self) -> list:
        return sorted((r.id for r in self.rects), key=id_key)


def _frac_str(f: Fraction) -> str:
    return str(Fraction(f))


def to_json(inst: Instance) -> str:
    """Serialise with one rectangle per line so errors can cite lines."""
    head = {
        "version": FORMAT_VERSION,
        "N": inst.N,
        "eps": _frac_str(inst.eps),
        "delta": None if inst.delta is None else _frac_str(inst.delta),
    }
    lines = ["{"]
    for k, v in head.items():
        lines.append(f'  "{k}": {json.dumps(v)},')
    lines.append('  "rects": [')
    body = []
    for r in inst.rects:
        w = Fraction(r.weight)
        body.append("    " + json.dumps({
            "id": r.id, "x1": r.x1, "y1": r.y1, "x2": r.x2, "y2": r.y2,
            "w_num": w.numerator, "w_den": w.denominator,
        }))
    lines.append(",\n".join(body) if body else "")
    lines.append("  ]")
    lines.append("}")
    return "\n".join(l for l in lines if l != "") + "\n"


def _line_of(text: str, needle: str, default: int, start: int = 1) -> int:
    for i, line in enumerate(text.splitlines(), 1):
        if i >= start and needle in line:
            return i
    return default


def _parse_fraction(v, what: str, line: int) -> Fraction:
    try:
        if isinstance(v, bool):
            raise TypeError
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return Fraction(int(v[0]), int(v[1]))
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InstanceError(f"bad {what}: {v!r}", line) from None


def from_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"malformed JSON: {e.msg}", e.lineno) from None
    if not isinstance(doc, dict):
        raise InstanceError("top level must be an object", 1)
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceError(f"unsupported version {doc.get('version')!r}",
                            _line_of(text, '"version"', 1))
    N = doc.get("N")
    if not isinstance(N, int) or isinstance(N, bool) or N <= 0:
        raise InstanceError(f"N must be a positive integer, got {N!r}", _line_of(text, '"N"', 1))
    eps = _parse_fraction(doc.get("eps", "1/2"), "eps", _line_of(text, '"eps"', 1))
    if not 0 < eps < 1:
        raise InstanceError("eps must lie in (0,1)", _line_of(text, '"eps"', 1))
    delta = doc.get("delta")
    if delta is not None:
        delta = _parse_fraction(delta, "delta", _line_of(text, '"delta"', 1))
        if not 0 < delta < 1:
            raise InstanceError("delta must lie in (0,1)", _line_of(text, '"delta"', 1))
    raw = doc.get("rects")
    if not isinstance(raw, list):
        raise InstanceError("rects must be a list", _line_of(text, '"rects"', 1))
    rects = []
    seen = set()
    rects_line = _line_of(text, '"rects"', 1)
    prev = rects_line
    for i, item in enumerate(raw):
        line = prev + 1
        if isinstance(item, dict) and "id" in item:
            line = _line_of(text, '"id": ' + json.dumps(item["id"]), line, start=prev + 1)
        prev = line
        if not isinstance(item, dict):
            raise InstanceError(f"rect #{i} is not an object", line)
        rid = item.get("id")
        if not isinstance(rid, (int, str)) or isinstance(rid, bool):
            raise InstanceError(f"rect #{i}: id must be int or string", line)
        if rid in seen:
            raise InstanceError(f"duplicate id {rid!r}", line)
        seen.add(rid)
        coords = []
        for k in ("x1", "y1", "x2", "y2"):
            v = item.get(k)
            if not isinstance(v, int) or isinstance(v, bool):
                raise InstanceError(f"rect {rid!r}: {k} must be an integer, got {v!r}", line)
            coords.append(v)
        num, den = item.get("w_num", 1), item.get("w_den", 1)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (num, den)) or den <= 0:
            raise InstanceError(f"rect {rid!r}: weight must be integer num/den with den > 0", line)
        w = Fraction(num, den)
        try:
            r = Rect(rid, *coords, weight=w if w.denominator != 1 else int(w))
        except ValueError as e:
            raise InstanceError(str(e), line) from None
        if r.x1 < 0 or r.y1 < 0 or r.x2 > N or r.y2 > N:
            raise InstanceError(f"rect {rid!r} outside [0,{N}]^2", line)
        rects.append(r)
    return Instance(tuple(rects), N, eps, delta)


def digest(inst: Instance) -> str:
    return hashlib.sha256(to_json(inst).encode()).hexdigest()
