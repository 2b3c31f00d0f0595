"""Road centerlines: skeletonize, split at junctions and bends, fit lines.

The skeleton graph uses 8-connectivity. Junction pixels (degree >= 3) within
a 3 px radius collapse into one node; removing them leaves branch chains.
Chains split where the walking direction changes by more than 30 degrees
over a 15 px window, then each piece gets a principal-axis line fit whose
extreme projections become the segment endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from skimage.morphology import skeletonize

from .errors import GeometryError, ValidationError
from .landcover import ROAD
from .raster import GeoObject

# Direction bins cover 45 degrees each, folded to [0, 180), lower-inclusive.
EW = "E--W"
NS = "N--S"
NESW = "NE--SW"
NWSE = "NW--SE"

DIRECTION_ORDER = (EW, NS, NESW, NWSE)

JUNCTION_MERGE_RADIUS_PX = 3.0
BEND_WINDOW_PX = 15
BEND_ANGLE_DEG = 30.0
# Chains shorter than this are junction debris, not road pieces; their
# principal-axis direction is noise.
MIN_SEGMENT_PX = 8

_NEIGHBORS_8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass(frozen=True)
class Segment:
    """A straight centerline piece: two (row, col) endpoints plus length."""

    p1: tuple[float, float]
    p2: tuple[float, float]
    length_m: float


def geographic_angle(dr: float, dc: float) -> float:
    """Angle in degrees, 0 = east, counterclockwise, folded to [0, 180).

    Rows grow southward, so the northward component is -dr.
    """
    if dr == 0 and dc == 0:
        raise GeometryError("zero-length direction")
    return math.degrees(math.atan2(-dr, dc)) % 180.0


def classify_angle(theta: float) -> str:
    """Map a folded angle to its 45-degree direction bin."""
    theta = theta % 180.0
    if theta < 22.5 or theta >= 157.5:
        return EW
    if theta < 67.5:
        return NESW
    if theta < 112.5:
        return NS
    return NWSE


def classify_direction(seg: Segment) -> str:
    """Direction bin of a segment; endpoint order does not matter."""
    dr = seg.p2[0] - seg.p1[0]
    dc = seg.p2[1] - seg.p1[1]
    if dr == 0 and dc == 0:
        raise GeometryError("segment has coincident endpoints")
    return classify_angle(geographic_angle(dr, dc))


def sort_directions(bins: set[str]) -> list[str]:
    """Canonical rendering order for a set of direction bins."""
    return [b for b in DIRECTION_ORDER if b in bins]


def _skeleton_pixels(road: GeoObject) -> tuple[set[tuple[int, int]], tuple[int, int]]:
    """Skeleton pixel set of a road component in local coords, plus offset."""
    if road.class_id != ROAD:
        raise ValidationError(f"expected a road object, got class {road.class_id}")
    rmin, cmin = road.pixels.min(axis=0)
    rmax, cmax = road.pixels.max(axis=0)
    local = np.zeros((int(rmax - rmin + 3), int(cmax - cmin + 3)), dtype=bool)
    local[road.pixels[:, 0] - rmin + 1, road.pixels[:, 1] - cmin + 1] = True
    skel = skeletonize(local)
    pixels = {(int(r), int(c)) for r, c in zip(*np.nonzero(skel))}
    return pixels, (int(rmin - 1), int(cmin - 1))


def centerline_segments(road: GeoObject, min_segment_px: int = MIN_SEGMENT_PX) -> list[Segment]:
    """Straight centerline segments of one road component."""
    pixels, offset = _skeleton_pixels(road)
    if not pixels:
        return []
    junction_pixels = _junction_pixels(pixels)
    chains = _branch_chains(pixels, junction_pixels)
    segments = []
    for chain in chains:
        for piece in _split_at_bends(chain):
            if len(piece) < max(2, min_segment_px):
                continue
            seg = _fit_segment(piece, road.resolution_m, offset=offset)
            if seg is not None:
                segments.append(seg)
    segments.sort(key=lambda s: (s.p1, s.p2))
    return segments


def junction_nodes(road: GeoObject) -> list[tuple[float, float]]:
    """Merged junction node centers of one road component, global coords."""
    pixels, offset = _skeleton_pixels(road)
    nodes = []
    for cluster in _junction_clusters(_junction_pixels(pixels)):
        arr = np.array(sorted(cluster), dtype=np.float64)
        center = arr.mean(axis=0)
        nodes.append((float(center[0] + offset[0]), float(center[1] + offset[1])))
    nodes.sort()
    return nodes


def _junction_pixels(pixels: set[tuple[int, int]]) -> set[tuple[int, int]]:
    return {p for p in pixels if _degree(p, pixels) >= 3}


def _degree(p: tuple[int, int], pixels: set[tuple[int, int]]) -> int:
    return sum((p[0] + dr, p[1] + dc) in pixels for dr, dc in _NEIGHBORS_8)


def _junction_clusters(junctions: set[tuple[int, int]]) -> list[set[tuple[int, int]]]:
    """Single-linkage clusters of junction pixels within the merge radius."""
    remaining = set(junctions)
    clusters = []
    while remaining:
        seed = min(remaining)
        cluster = {seed}
        remaining.discard(seed)
        frontier = [seed]
        while frontier:
            q = frontier.pop()
            near = [
                p
                for p in remaining
                if math.hypot(p[0] - q[0], p[1] - q[1]) <= JUNCTION_MERGE_RADIUS_PX
            ]
            for p in near:
                remaining.discard(p)
                cluster.add(p)
                frontier.append(p)
        clusters.append(cluster)
    return clusters


def _branch_chains(
    pixels: set[tuple[int, int]], junction_pixels: set[tuple[int, int]]
) -> list[list[tuple[int, int]]]:
    """Ordered pixel chains of the skeleton with junction pixels removed."""
    rest = pixels - junction_pixels
    chains = []
    unvisited = set(rest)
    while unvisited:
        # Pick a component, then walk it from an endpoint if one exists.
        seed = min(unvisited)
        comp = {seed}
        frontier = [seed]
        while frontier:
            q = frontier.pop()
            for dr, dc in _NEIGHBORS_8:
                p = (q[0] + dr, q[1] + dc)
                if p in unvisited and p not in comp:
                    comp.add(p)
                    frontier.append(p)
        unvisited -= comp
        endpoints = sorted(p for p in comp if _degree(p, comp) <= 1)
        start = endpoints[0] if endpoints else min(comp)
        chain = [start]
        seen = {start}
        current = start
        while True:
            nxt = [
                (current[0] + dr, current[1] + dc)
                for dr, dc in _NEIGHBORS_8
                if (current[0] + dr, current[1] + dc) in comp
                and (current[0] + dr, current[1] + dc) not in seen
            ]
            if not nxt:
                break
            # Prefer 4-adjacent steps so stair-step corners walk cleanly.
            nxt.sort(key=lambda p: (abs(p[0] - current[0]) + abs(p[1] - current[1]), p))
            current = nxt[0]
            chain.append(current)
            seen.add(current)
        chains.append(chain)
    return chains


def _split_at_bends(chain: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Split a chain where direction turns by more than the bend threshold."""
    half = BEND_WINDOW_PX // 2
    n = len(chain)
    if n < 2 * half + 1:
        return [chain]
    turn = np.zeros(n)
    for i in range(half, n - half):
        v1 = (chain[i][0] - chain[i - half][0], chain[i][1] - chain[i - half][1])
        v2 = (chain[i + half][0] - chain[i][0], chain[i + half][1] - chain[i][1])
        turn[i] = _angle_between(v1, v2)
    cut_indices = []
    i = half
    while i < n - half:
        if turn[i] > BEND_ANGLE_DEG:
            j = i
            while j + 1 < n - half and turn[j + 1] > BEND_ANGLE_DEG:
                j += 1
            window = turn[i : j + 1]
            cut_indices.append(i + int(np.argmax(window)))
            i = j + 1
        else:
            i += 1
    pieces = []
    start = 0
    for cut in cut_indices:
        pieces.append(chain[start : cut + 1])
        start = cut
    pieces.append(chain[start:])
    return pieces


def _angle_between(v1: tuple[int, int], v2: tuple[int, int]) -> float:
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    if n1 == 0 or n2 == 0:
        return 0.0
    cosv = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    return math.degrees(math.acos(max(-1.0, min(1.0, cosv))))


def _fit_segment(
    chain: list[tuple[int, int]], resolution_m: float, offset: tuple[int, int]
) -> Segment | None:
    """Principal-axis line fit; endpoints are the extreme projections."""
    pts = np.array(chain, dtype=np.float64)
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    direction = eigvecs[:, int(np.argmax(eigvals))]
    t = centered @ direction
    tmin, tmax = float(t.min()), float(t.max())
    if tmax - tmin <= 0:
        return None
    p1 = mean + tmin * direction
    p2 = mean + tmax * direction
    # Orient deterministically: smaller (row, col) endpoint first.
    e1 = (float(p1[0] + offset[0]), float(p1[1] + offset[1]))
    e2 = (float(p2[0] + offset[0]), float(p2[1] + offset[1]))
    if e2 < e1:
        e1, e2 = e2, e1
    length = math.hypot(e2[0] - e1[0], e2[1] - e1[1]) * resolution_m
    return Segment(p1=e1, p2=e2, length_m=length)
