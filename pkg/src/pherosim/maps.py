"""Branching trail maps for the foraging arena.

A map is a tree of straight trail segments rooted at a nest, with numbered
endpoints at the leaves.  The text format is line oriented (cm coordinates,
``#`` comments):

    NEST x y
    SEG x1 y1 x2 y2 branch_id parent_id    # parent_id 0 = grows from the nest
    END id x y

From a map and a choice of food endpoints the mask builder rasterises the
three injection masks: the full tree (plain trail), the nest-to-food paths
(scented overlay), and short repellent stubs at the entrances of the wrong
branches of every fork along a food path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError
from .fields import InjectionMask

# Geometry tolerance when matching endpoints to segment tips (cm).
TIP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Segment:
    x1: float
    y1: float
    x2: float
    y2: float
    branch_id: int
    parent_id: int

    @property
    def length(self) -> float:
        return math.hypot(self.x2 - self.x1, self.y2 - self.y1)


@dataclass(frozen=True)
class TrailMap:
    nest: tuple[float, float]
    segments: tuple[Segment, ...]
    endpoints: dict[int, tuple[float, float]]


def parse_map_text(text: str) -> TrailMap:
    """Parse the layout format; malformed lines raise with their line number."""
    nest: tuple[float, float] | None = None
    segments: list[Segment] = []
    endpoints: dict[int, tuple[float, float]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        try:
            if kind == "NEST":
                if len(parts) != 3:
                    raise ValueError("NEST takes 2 numbers")
                nest = (float(parts[1]), float(parts[2]))
            elif kind == "SEG":
                if len(parts) != 7:
                    raise ValueError("SEG takes 6 numbers")
                segments.append(
                    Segment(
                        float(parts[1]),
                        float(parts[2]),
                        float(parts[3]),
                        float(parts[4]),
                        int(parts[5]),
                        int(parts[6]),
                    )
                )
            elif kind == "END":
                if len(parts) != 4:
                    raise ValueError("END takes id x y")
                eid = int(parts[1])
                if eid in endpoints:
                    raise ValueError("duplicate endpoint id %d" % eid)
                endpoints[eid] = (float(parts[2]), float(parts[3]))
            else:
                raise ValueError("unknown record %r" % kind)
        except ValueError as exc:
            raise ConfigurationError("map line %d: %s" % (lineno, exc)) from None
    if nest is None:
        raise ConfigurationError("map has no NEST line")
    trail_map = TrailMap(nest, tuple(segments), endpoints)
    validate_map(trail_map)
    return trail_map


def serialize_map(trail_map: TrailMap) -> str:
    lines = ["NEST %g %g" % trail_map.nest]
    for s in trail_map.segments:
        lines.append(
            "SEG %g %g %g %g %d %d" % (s.x1, s.y1, s.x2, s.y2, s.branch_id, s.parent_id)
        )
    for eid in sorted(trail_map.endpoints):
        x, y = trail_map.endpoints[eid]
        lines.append("END %d %g %g" % (eid, x, y))
    return "\n".join(lines) + "\n"


def load_map(path) -> TrailMap:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_map_text(fh.read())


def default_map() -> TrailMap:
    """The built-in ten-endpoint map (shipped as data/default_map.txt too)."""
    return parse_map_text(
        resources.files("pherosim").joinpath("data/default_map.txt").read_text("utf-8")
    )


def _by_id(trail_map: TrailMap) -> dict[int, Segment]:
    table: dict[int, Segment] = {}
    for s in trail_map.segments:
        if s.branch_id in table:
            raise ConfigurationError("duplicate branch_id %d" % s.branch_id)
        table[s.branch_id] = s
    return table


def _children(trail_map: TrailMap) -> dict[int, list[Segment]]:
    kids: dict[int, list[Segment]] = {}
    for s in trail_map.segments:
        kids.setdefault(s.parent_id, []).append(s)
    return kids


def validate_map(trail_map: TrailMap) -> None:
    """Structural checks: a connected tree whose leaf tips carry the endpoints."""
    table = _by_id(trail_map)
    for s in trail_map.segments:
        if s.length <= 0:
            raise ConfigurationError("zero-length segment %d" % s.branch_id)
        if s.parent_id != 0:
            parent = table.get(s.parent_id)
            if parent is None:
                raise ConfigurationError(
                    "segment %d references missing parent %d" % (s.branch_id, s.parent_id)
                )
            if math.hypot(s.x1 - parent.x2, s.y1 - parent.y2) > TIP_TOLERANCE:
                raise ConfigurationError(
                    "segment %d does not start at parent %d's tip" % (s.branch_id, s.parent_id)
                )
        else:
            if math.hypot(s.x1 - trail_map.nest[0], s.y1 - trail_map.nest[1]) > TIP_TOLERANCE:
                raise ConfigurationError("root segment %d does not start at the nest" % s.branch_id)
    kids = _children(trail_map)
    leaf_tips = {
        s.branch_id: (s.x2, s.y2) for s in trail_map.segments if s.branch_id not in kids
    }
    for eid, (x, y) in trail_map.endpoints.items():
        hit = any(
            math.hypot(x - tx, y - ty) <= TIP_TOLERANCE for tx, ty in leaf_tips.values()
        )
        if not hit:
            raise ConfigurationError("endpoint %d is not reachable (no leaf tip there)" % eid)


def endpoint_branch(trail_map: TrailMap, endpoint_id: int) -> Segment:
    """The leaf segment whose tip carries the given endpoint."""
    if endpoint_id not in trail_map.endpoints:
        raise ConfigurationError("unknown endpoint id %d" % endpoint_id)
    x, y = trail_map.endpoints[endpoint_id]
    kids = _children(trail_map)
    for s in trail_map.segments:
        if s.branch_id in kids:
            continue
        if math.hypot(s.x2 - x, s.y2 - y) <= TIP_TOLERANCE:
            return s
    raise ConfigurationError("endpoint %d is not reachable (no leaf tip there)" % endpoint_id)


def path_to_endpoint(trail_map: TrailMap, endpoint_id: int) -> list[Segment]:
    """Segments from the nest root down to the endpoint's leaf, in order."""
    table = _by_id(trail_map)
    seg = endpoint_branch(trail_map, endpoint_id)
    path = [seg]
    while seg.parent_id != 0:
        seg = table[seg.parent_id]
        path.append(seg)
    path.reverse()
    return path


def food_path_ids(trail_map: TrailMap, food_endpoints: tuple[int, ...]) -> set[int]:
    ids: set[int] = set()
    for eid in food_endpoints:
        ids.update(s.branch_id for s in path_to_endpoint(trail_map, eid))
    return ids


def repellent_stubs(
    trail_map: TrailMap, food_endpoints: tuple[int, ...], stub_length: float
) -> list[Segment]:
    """Entrance stubs of the non-food branches at forks along food paths.

    Walks every fork node on a nest-to-food path; each child branch that is
    not itself on a food path gets a stub of the given length along its first
    stretch (shorter branches are covered whole).
    """
    on_food = food_path_ids(trail_map, food_endpoints)
    kids = _children(trail_map)
    stubs: list[Segment] = []
    for parent_id, children in sorted(kids.items()):
        if len(children) < 2:
            continue
        # parent_id 0 is the nest, a fork only if several roots grow there.
        if parent_id != 0 and parent_id not in on_food:
            continue
        if not any(c.branch_id in on_food for c in children):
            continue
        for child in sorted(children, key=lambda s: s.branch_id):
            if child.branch_id in on_food:
                continue
            frac = min(1.0, stub_length / child.length)
            stubs.append(
                Segment(
                    child.x1,
                    child.y1,
                    child.x1 + (child.x2 - child.x1) * frac,
                    child.y1 + (child.y2 - child.y1) * frac,
                    child.branch_id,
                    child.parent_id,
                )
            )
    return stubs


def rasterize_segments(
    segments: list[Segment],
    width_cells: int,
    height_cells: int,
    cell_size: float,
    half_width: float,
    rate: float,
) -> InjectionMask:
    """Injection mask of all cells whose centre lies within ``half_width``
    of any segment (capsule shape), at a uniform rate."""
    cells: set[tuple[int, int]] = set()
    for seg in segments:
        pad = half_width + cell_size
        x_lo = max(0, int((min(seg.x1, seg.x2) - pad) / cell_size))
        x_hi = min(width_cells - 1, int((max(seg.x1, seg.x2) + pad) / cell_size) + 1)
        y_lo = max(0, int((min(seg.y1, seg.y2) - pad) / cell_size))
        y_hi = min(height_cells - 1, int((max(seg.y1, seg.y2) + pad) / cell_size) + 1)
        if x_lo > x_hi or y_lo > y_hi:
            continue
        xs = (np.arange(x_lo, x_hi + 1) + 0.5) * cell_size
        ys = (np.arange(y_lo, y_hi + 1) + 0.5) * cell_size
        px = xs[None, :] - seg.x1
        py = ys[:, None] - seg.y1
        ax = seg.x2 - seg.x1
        ay = seg.y2 - seg.y1
        t = np.clip((px * ax + py * ay) / (ax * ax + ay * ay), 0.0, 1.0)
        dist = np.hypot(px - t * ax, py - t * ay)
        for yy, xx in np.argwhere(dist <= half_width):
            cells.add((int(x_lo + xx), int(y_lo + yy)))
    return InjectionMask({cell: rate for cell in cells})


@dataclass(frozen=True)
class CaseOneMasks:
    """The three injection masks for one foraging run."""

    plain: InjectionMask  # whole tree, blue
    scented: InjectionMask  # nest-to-food paths, green
    repellent: InjectionMask  # wrong-branch entrance stubs, red


def build_case1_masks(
    trail_map: TrailMap,
    food_endpoints: tuple[int, ...],
    width_cells: int,
    height_cells: int,
    cell_size: float,
    trail_width: float = 2.0,
    stub_length: float = 4.0,
    rate: float = 0.04,
) -> CaseOneMasks:
    validate_map(trail_map)
    for eid in food_endpoints:
        if eid not in trail_map.endpoints:
            raise ConfigurationError("food endpoint %d not on the map" % eid)
    half = trail_width / 2.0
    on_food = food_path_ids(trail_map, food_endpoints)
    plain = rasterize_segments(
        list(trail_map.segments), width_cells, height_cells, cell_size, half, rate
    )
    scented = rasterize_segments(
        [s for s in trail_map.segments if s.branch_id in on_food],
        width_cells,
        height_cells,
        cell_size,
        half,
        rate,
    )
    repellent = rasterize_segments(
        repellent_stubs(trail_map, food_endpoints, stub_length),
        width_cells,
        height_cells,
        cell_size,
        half,
        rate,
    )
    return CaseOneMasks(plain, scented, repellent)


def detect_arrival(
    pose_xy: tuple[float, float],
    endpoints: dict[int, tuple[float, float]],
    radius: float = 3.0,
) -> int | None:
    """Endpoint id whose centre is nearest within ``radius``; ties take the
    lower id; None when no endpoint is close enough."""
    best: tuple[float, int] | None = None
    for eid in sorted(endpoints):
        ex, ey = endpoints[eid]
        dist = math.hypot(pose_xy[0] - ex, pose_xy[1] - ey)
        if dist <= radius and (best is None or dist < best[0]):
            best = (dist, eid)
    return best[1] if best else None
