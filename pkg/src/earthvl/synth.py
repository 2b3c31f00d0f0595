"""Seeded synthetic scenes with known object inventories.

Scenes are built from rectangular blobs placed by rejection sampling (with a
separation margin so components never merge), optional roads rasterized as
straight bars, and optional village grids of small buildings. The returned
inventory records exactly what was placed, which makes the masks usable as
counting ground truth without re-deriving it from pixels.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import SynthesisError
from .landcover import (
    AGRICULTURE,
    BACKGROUND,
    BARREN,
    BUILDING,
    CLASS_NAMES,
    FOREST,
    PLAYGROUND,
    ROAD,
    WATER,
)
from .raster import Mask

# Blob sides of at least 4 px keep every placed object above the default
# min_pixels = 10 component filter.
_MIN_BLOB_SIDE = 4


@dataclass(frozen=True)
class RoadSpec:
    """A straight road bar: axis angle (geographic degrees), width, center."""

    angle_deg: float
    width_px: int = 3
    center: tuple[float, float] | None = None
    extent: tuple[float, float] | None = None  # along-axis range; None = full span


@dataclass(frozen=True)
class VillageSpec:
    """A compact grid of identical small buildings."""

    n_buildings: int
    building_px: int = 4
    spacing_px: int = 10
    origin: tuple[int, int] = (4, 4)


@dataclass(frozen=True)
class SynthSpec:
    height: int = 64
    width: int = 64
    resolution_m: float = 0.3
    buildings: int = 0
    waters: int = 0
    playgrounds: int = 0
    forests: int = 0
    barrens: int = 0
    agricultures: int = 0
    roads: tuple[RoadSpec, ...] = ()
    village: VillageSpec | None = None
    blob_min_px: int = _MIN_BLOB_SIDE
    blob_max_px: int = 7
    separation_px: int = 2
    margin_px: int = 1


_BLOB_ORDER = (
    ("buildings", BUILDING),
    ("waters", WATER),
    ("playgrounds", PLAYGROUND),
    ("forests", FOREST),
    ("barrens", BARREN),
    ("agricultures", AGRICULTURE),
)


def generate_mask(spec: SynthSpec, seed: int) -> tuple[Mask, dict]:
    """Realize a spec into a mask plus the placed-object inventory."""
    if spec.blob_min_px < _MIN_BLOB_SIDE:
        raise SynthesisError(f"blob_min_px must be >= {_MIN_BLOB_SIDE} to stay countable")
    rng = np.random.default_rng(seed)
    grid = np.full((spec.height, spec.width), BACKGROUND, dtype=np.uint8)

    for road in spec.roads:
        _draw_road(grid, road)

    counts = {CLASS_NAMES[cid]: 0 for _, cid in _BLOB_ORDER}
    village_members = 0
    if spec.village is not None:
        village_members = _draw_village(grid, spec.village, spec.separation_px)
        counts[CLASS_NAMES[BUILDING]] += village_members

    for attr, cid in _BLOB_ORDER:
        wanted = getattr(spec, attr)
        for _ in range(wanted):
            _place_blob(grid, cid, spec, rng)
            counts[CLASS_NAMES[cid]] += 1

    inventory = {
        "counts": counts,
        "village_buildings": village_members,
        "n_roads": len(spec.roads),
        "road_angles": [r.angle_deg for r in spec.roads],
    }
    return Mask(grid=grid, resolution_m=spec.resolution_m), inventory


def _draw_road(grid: np.ndarray, road: RoadSpec) -> None:
    h, w = grid.shape
    cr, cc = road.center if road.center is not None else ((h - 1) / 2.0, (w - 1) / 2.0)
    theta = math.radians(road.angle_deg)
    # Geographic angle: 0 = east, counterclockwise; rows grow southward.
    vr, vc = -math.sin(theta), math.cos(theta)
    rows, cols = np.mgrid[0:h, 0:w]
    dr = rows - cr
    dc = cols - cc
    perp = np.abs(dr * vc - dc * vr)
    band = perp <= road.width_px / 2.0
    if road.extent is not None:
        along = dr * vr + dc * vc
        band &= (along >= road.extent[0]) & (along <= road.extent[1])
    grid[band] = ROAD


def _draw_village(grid: np.ndarray, village: VillageSpec, separation: int) -> int:
    h, w = grid.shape
    b = village.building_px
    step = b + village.spacing_px
    per_row = max(1, (w - village.origin[1] - b) // step + 1)
    placed = 0
    r = village.origin[0]
    while placed < village.n_buildings:
        if r + b > h:
            raise SynthesisError(
                f"village of {village.n_buildings} buildings does not fit a {h}x{w} grid"
            )
        c = village.origin[1]
        for _ in range(min(per_row, village.n_buildings - placed)):
            if c + b > w:
                break
            region = grid[
                max(0, r - separation) : r + b + separation,
                max(0, c - separation) : c + b + separation,
            ]
            if (region != BACKGROUND).any():
                raise SynthesisError("village grid collides with existing objects")
            grid[r : r + b, c : c + b] = BUILDING
            placed += 1
            c += step
        r += step
    return placed


def _place_blob(grid: np.ndarray, cid: int, spec: SynthSpec, rng: np.random.Generator) -> None:
    h, w = grid.shape
    for _ in range(500):
        bh = int(rng.integers(spec.blob_min_px, spec.blob_max_px + 1))
        bw = int(rng.integers(spec.blob_min_px, spec.blob_max_px + 1))
        max_r = h - spec.margin_px - bh
        max_c = w - spec.margin_px - bw
        if max_r < spec.margin_px or max_c < spec.margin_px:
            raise SynthesisError(f"blob {bh}x{bw} cannot fit the {h}x{w} grid")
        r = int(rng.integers(spec.margin_px, max_r + 1))
        c = int(rng.integers(spec.margin_px, max_c + 1))
        s = spec.separation_px
        region = grid[max(0, r - s) : r + bh + s, max(0, c - s) : c + bw + s]
        if (region != BACKGROUND).any():
            continue
        grid[r : r + bh, c : c + bw] = cid
        return
    raise SynthesisError(
        f"could not place a {CLASS_NAMES[cid]} blob after 500 tries (infeasible packing)"
    )


# Canonical road angles with jitter that stays far from the 22.5-degree
# direction-bin edges even after skeleton quantization.
_CANONICAL_ANGLES = (0.0, 45.0, 90.0, 135.0)
_ANGLE_JITTER = 8.0


def random_road_layout(rng: np.random.Generator, height: int, width: int) -> tuple[RoadSpec, ...]:
    """0 to 3 full-span roads at jittered canonical angles, spread apart."""
    n = int(rng.integers(0, 4))
    roads = []
    offsets = [0.5, 0.3, 0.7]
    angles = list(rng.permutation(len(_CANONICAL_ANGLES))[:n])
    for k in range(n):
        base = _CANONICAL_ANGLES[int(angles[k])]
        angle = base + float(rng.uniform(-_ANGLE_JITTER, _ANGLE_JITTER))
        center = (height * offsets[k], width * offsets[k % 2])
        roads.append(RoadSpec(angle_deg=angle % 180.0, width_px=3, center=center))
    return tuple(roads)


def random_spec(rng: np.random.Generator, height: int = 64, width: int = 64) -> SynthSpec:
    """A random small scene: blobs always, roads sometimes."""
    return SynthSpec(
        height=height,
        width=width,
        buildings=int(rng.integers(0, 6)),
        waters=int(rng.integers(0, 4)),
        playgrounds=int(rng.integers(0, 3)),
        forests=int(rng.integers(0, 3)),
        barrens=int(rng.integers(0, 2)),
        agricultures=int(rng.integers(0, 2)),
        roads=random_road_layout(rng, height, width) if rng.random() < 0.6 else (),
    )


def cross_road_spec(height: int = 64, width: int = 64) -> SynthSpec:
    """Two full-span roads crossing at the center: one E--W, one N--S."""
    return SynthSpec(height=height, width=width, roads=(RoadSpec(0.0), RoadSpec(90.0)))
