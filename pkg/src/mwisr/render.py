"""Minimal SVG output for instances, solutions, cut trees and line sets."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .geom import id_key

_LINE_COLORS = {
    "boundary": "#000000", "grid": "#999999", "rect-edge": "#d62728", "cell-interior": "#2ca02c",
    "L0": "#1f77b4", "ext": "#ff7f0e", "circumvent": "#9467bd",
}


def _cut_leaves(node, out):
    if node is None:
        return
    if node.is_leaf:
        out.append(node.region)
    for p in node.parts:
        _cut_leaves(p, out)


def render_svg(inst, chosen=(), lines=(), provenance=None, cut_tree=None, scale: int = 24) -> str:
    """Rects (chosen ones filled), optional lines coloured by provenance and
    the leaf regions of a cut tree drawn as outlines."""
    N = inst.N
    size = N * scale
    chosen = set(chosen)

    def Y(y):
        return size - y * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2}" height="{size + 2}" '
           f'viewBox="-1 -1 {size + 2} {size + 2}">',
           f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>']
    leaves: list = []
    _cut_leaves(cut_tree, leaves)
    for k, region in enumerate(leaves):
        xs, ys = region.cells.nonzero()
        for x, y in zip(xs.tolist(), ys.tolist()):
            out.append(f'<rect x="{x * scale}" y="{Y(y + 1)}" width="{scale}" height="{scale}" '
                       f'fill="hsl({(k * 47) % 360},60%,90%)" stroke="none"/>')
    for r in sorted(inst.rects, key=lambda r: id_key(r.id)):
        fill = "#4c78a8" if r.id in chosen else "none"
        out.append(f'<rect x="{r.x1 * scale}" y="{Y(r.y2)}" width="{r.width * scale}" '
                   f'height="{r.height * scale}" fill="{fill}" fill-opacity="0.5" stroke="#333"/>')
        out.append(f'<text x="{r.x1 * scale + 3}" y="{Y(r.y2) + 12}" font-size="10">'
                   f'{escape(str(r.id))}:{escape(str(r.weight))}</text>')
    tags = list(provenance) if provenance is not None else ["L0"] * len(lines)
    for seg, tag in zip(lines, tags):
        (x1, y1), (x2, y2) = seg.endpoints
        color = _LINE_COLORS.get(tag, "#000000")
        out.append(f'<line x1="{x1 * scale}" y1="{Y(y1)}" x2="{x2 * scale}" y2="{Y(y2)}" '
                   f'stroke="{color}" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
