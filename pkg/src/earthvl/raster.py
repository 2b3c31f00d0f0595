"""Mask geometry: components, areas, boundaries, distances.

Everything operates on integer pixel grids; physical quantities come from the
mask's ground resolution (meters per pixel). Distances are Euclidean between
boundary pixel centers, so two 8-adjacent objects are "touching" and get
distance 0.0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import GeometryError, ValidationError
from .landcover import (
    ALL_CLASSES,
    DEFAULT_RESOLUTION_M,
    IGNORE,
    require_class,
)

# 4-connectivity: components and boundaries never join across diagonals.
_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# Two pixel centers farther apart than sqrt(2) cannot be 8-adjacent.
_TOUCH_DIST_PX = math.sqrt(2.0) + 1e-9

_VALID_VALUES = np.array(list(ALL_CLASSES) + [IGNORE], dtype=np.uint8)


@dataclass
class Mask:
    """A labeled land-cover grid plus its ground resolution."""

    grid: np.ndarray
    resolution_m: float = DEFAULT_RESOLUTION_M

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid)
        if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
            raise ValidationError(f"mask must be a non-empty 2D grid, got shape {grid.shape}")
        if grid.dtype != np.uint8:
            if not np.issubdtype(grid.dtype, np.integer):
                raise ValidationError(f"mask grid must hold integers, got dtype {grid.dtype}")
            grid = grid.astype(np.uint8)
        bad = ~np.isin(grid, _VALID_VALUES)
        if bad.any():
            values = sorted(np.unique(grid[bad]).tolist())
            raise ValidationError(f"mask contains values outside the class table: {values}")
        if not (self.resolution_m > 0):
            raise ValidationError(f"resolution_m must be positive, got {self.resolution_m}")
        self.grid = grid

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape  # type: ignore[return-value]

    def class_fractions(self) -> np.ndarray:
        """Per-class pixel fractions over non-ignore cells, shape (8,)."""
        valid = self.grid != IGNORE
        total = int(valid.sum())
        if total == 0:
            raise GeometryError("mask is entirely ignore-labeled")
        fracs = np.zeros(len(ALL_CLASSES), dtype=np.float64)
        for cid in ALL_CLASSES:
            fracs[cid] = int((self.grid == cid).sum()) / total
        return fracs


@dataclass
class GeoObject:
    """One connected component of a single class."""

    class_id: int
    pixels: np.ndarray        # (N, 2) int rows of (row, col), lexicographically sorted
    boundary_pixels: np.ndarray  # subset of pixels with a missing 4-neighbor
    centroid: tuple[float, float]
    area_m2: float
    resolution_m: float

    @cached_property
    def pixel_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self.pixels.tolist()))

    @property
    def n_pixels(self) -> int:
        return int(self.pixels.shape[0])

    def boundary_polygon(self) -> list[tuple[int, int]]:
        """Outer ring of the component as closed (row, col) corner coords.

        Corners live on the half-integer grid shifted to integers: pixel
        (r, c) spans corners (r, c)..(r+1, c+1). Holes are not returned.
        For hole-free components the shoelace area of the ring equals the
        pixel count.
        """
        return _trace_outer_ring(self.pixel_set)


def connected_components(mask: Mask, cls: int, min_pixels: int = 10) -> list[GeoObject]:
    """4-connected components of `cls`, smallest-first-pixel order.

    Components below `min_pixels` are dropped; they are treated as labeling
    noise rather than objects.
    """
    require_class(cls)
    if min_pixels < 1:
        raise ValidationError(f"min_pixels must be >= 1, got {min_pixels}")
    binary = mask.grid == cls
    labels, n_labels = ndimage.label(binary, structure=_STRUCTURE_4)
    objects = []
    for slc_index, slc in enumerate(ndimage.find_objects(labels), start=1):
        if slc is None:
            continue
        local = labels[slc] == slc_index
        count = int(local.sum())
        if count < min_pixels:
            continue
        rows, cols = np.nonzero(local)
        rows = rows + slc[0].start
        cols = cols + slc[1].start
        objects.append(_build_object(cls, rows, cols, mask.resolution_m))
    objects.sort(key=lambda o: (int(o.pixels[0, 0]), int(o.pixels[0, 1])))
    return objects


def _build_object(cls: int, rows: np.ndarray, cols: np.ndarray, resolution_m: float) -> GeoObject:
    order = np.lexsort((cols, rows))
    pixels = np.stack([rows[order], cols[order]], axis=1).astype(np.int64)
    boundary = _boundary_pixels(pixels)
    centroid = (float(pixels[:, 0].mean()), float(pixels[:, 1].mean()))
    area = pixels.shape[0] * resolution_m * resolution_m
    return GeoObject(
        class_id=cls,
        pixels=pixels,
        boundary_pixels=boundary,
        centroid=centroid,
        area_m2=area,
        resolution_m=resolution_m,
    )


def object_from_pixels(cls: int, pixels: np.ndarray, resolution_m: float) -> GeoObject:
    """Build a GeoObject from an explicit (N, 2) pixel array.

    The caller vouches for connectivity; this is used for derived regions
    (e.g. a village footprint) where distances and centroids still apply.
    """
    pixels = np.asarray(pixels, dtype=np.int64)
    if pixels.ndim != 2 or pixels.shape[1] != 2 or pixels.shape[0] == 0:
        raise ValidationError(f"pixels must be a non-empty (N, 2) array, got {pixels.shape}")
    return _build_object(cls, pixels[:, 0], pixels[:, 1], resolution_m)


def _boundary_pixels(pixels: np.ndarray) -> np.ndarray:
    """Pixels of the set with at least one missing 4-neighbor."""
    rmin, cmin = pixels.min(axis=0)
    rmax, cmax = pixels.max(axis=0)
    h = int(rmax - rmin + 3)
    w = int(cmax - cmin + 3)
    local = np.zeros((h, w), dtype=bool)
    local[pixels[:, 0] - rmin + 1, pixels[:, 1] - cmin + 1] = True
    interior = ndimage.binary_erosion(local, structure=_STRUCTURE_4, border_value=0)
    edge = local & ~interior
    rows, cols = np.nonzero(edge)
    order = np.lexsort((cols, rows))
    return np.stack([rows[order] + rmin - 1, cols[order] + cmin - 1], axis=1).astype(np.int64)


def area_fraction(mask: Mask, cls: int) -> float:
    """Fraction of non-ignore cells labeled `cls`."""
    require_class(cls)
    count, total = _area_counts(mask, cls)
    return count / total


def area_bin(mask: Mask, cls: int) -> str:
    """Decile label for the class area: '0%' or '(k0%, k0+10%]'.

    Bin edges are decided in exact integer arithmetic on pixel counts, so a
    fraction landing exactly on an edge goes to the lower bin (intervals are
    open below, closed above).
    """
    require_class(cls)
    count, total = _area_counts(mask, cls)
    if count == 0:
        return "0%"
    # smallest k with count*10 <= (k+1)*total
    k = -((-count * 10) // total) - 1
    return f"({k * 10}%, {(k + 1) * 10}%]"


def _area_counts(mask: Mask, cls: int) -> tuple[int, int]:
    valid = mask.grid != IGNORE
    total = int(valid.sum())
    if total == 0:
        raise GeometryError("mask is entirely ignore-labeled")
    count = int((mask.grid == cls).sum())
    return count, total


def min_distance(a: GeoObject, b: GeoObject) -> float:
    """Minimum boundary-to-boundary distance in meters.

    Overlapping or touching (8-adjacent) objects give 0.0 exactly.
    """
    if a.resolution_m != b.resolution_m:
        raise ValidationError(
            f"objects have different resolutions: {a.resolution_m} vs {b.resolution_m}"
        )
    if a.pixel_set & b.pixel_set:
        return 0.0
    pa, pb = a.boundary_pixels, b.boundary_pixels
    if pa.shape[0] > pb.shape[0]:
        pa, pb = pb, pa
    tree = cKDTree(pa.astype(np.float64))
    dists, _ = tree.query(pb.astype(np.float64))
    d = float(np.min(dists))
    if d <= _TOUCH_DIST_PX:
        return 0.0
    return d * a.resolution_m


def _trace_outer_ring(pixel_set: frozenset[tuple[int, int]]) -> list[tuple[int, int]]:
    """Chain exposed pixel sides into the outer corner ring (clockwise)."""
    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def add(start: tuple[int, int], end: tuple[int, int]) -> None:
        edges.setdefault(start, []).append(end)

    for (r, c) in pixel_set:
        if (r - 1, c) not in pixel_set:
            add((r, c), (r, c + 1))
        if (r + 1, c) not in pixel_set:
            add((r + 1, c + 1), (r + 1, c))
        if (r, c - 1) not in pixel_set:
            add((r + 1, c), (r, c))
        if (r, c + 1) not in pixel_set:
            add((r, c + 1), (r + 1, c + 1))

    start = min(k for k in edges)
    ring = [start]
    prev_dir: tuple[int, int] | None = None
    current = start
    while True:
        outs = edges[current]
        if len(outs) == 1 or prev_dir is None:
            nxt = outs[0]
        else:
            # Diagonal pinch: two outgoing edges. Turn right (clockwise) to
            # keep the ring from crossing itself.
            right = (prev_dir[1], -prev_dir[0])
            nxt = next(
                (p for p in outs if (p[0] - current[0], p[1] - current[1]) == right),
                outs[0],
            )
        outs.remove(nxt)
        prev_dir = (nxt[0] - current[0], nxt[1] - current[1])
        current = nxt
        ring.append(current)
        if current == start:
            return ring
