"""Maximum weight independent set of axis-parallel rectangles: a polygon-partition
dynamic program, preprocessing, plane-partition constructions and exact oracles."""

from .geom import Rect, Region, Segment, rects_disjoint
from .instance import Instance, InstanceError, from_json, to_json, digest

__version__ = "0.1.0"

__all__ = [
    "Rect", "Region", "Segment", "rects_disjoint",
    "Instance", "InstanceError", "from_json", "to_json", "digest",
]
