"""Hand-built scenes with exactly known geometry, shared across test modules."""

from __future__ import annotations

import numpy as np

from earthvl.landcover import BACKGROUND, BUILDING, FOREST, IGNORE, PLAYGROUND, ROAD
from earthvl.qa import detect_village
from earthvl.raster import Mask
from earthvl.synth import SynthSpec, VillageSpec, generate_mask, random_spec


def school_near_junction_scene(shift_px: int = 0) -> Mask:
    """A plus junction at exactly (48, 20) and a school site whose nearest
    boundary pixel sits 50 + shift_px pixels east of it. At 2 m/px the
    junction-to-school distance is exactly (50 + shift_px) * 2 meters."""
    g = np.zeros((96, 96), dtype=np.uint8)
    g[47:50, :] = ROAD
    g[:, 19:22] = ROAD
    g[44:53, 70 + shift_px : 79 + shift_px] = BUILDING
    g[44:53, 80 + shift_px : 89 + shift_px] = PLAYGROUND
    return Mask(grid=g, resolution_m=2.0)


def school_adjacency_scene(boundary_gap_px: int) -> Mask:
    """A building and playground whose boundary distance is the given pixel
    count; at 2 m/px the gap in meters is boundary_gap_px * 2."""
    g = np.zeros((64, 64), dtype=np.uint8)
    g[20:29, 10:19] = BUILDING
    g[20:29, 18 + boundary_gap_px : 27 + boundary_gap_px] = PLAYGROUND
    return Mask(grid=g, resolution_m=2.0)


def village_scene(n_buildings: int, seed: int = 0) -> Mask:
    mask, _ = generate_mask(
        SynthSpec(village=VillageSpec(n_buildings=n_buildings)), seed=seed
    )
    return mask


def village_with_exact_lai(lai_percent: int) -> Mask:
    """A 21-building village whose footprint LAI is exactly lai_percent / 100.

    The footprint total is trimmed to a multiple of 100 by relabeling a few
    background cells as ignore (they drop out of the LAI denominator without
    touching any building), then exactly the right number of background cells
    become forest.
    """
    mask = village_scene(21)
    village, _ = detect_village(mask)
    grid = mask.grid.copy()
    in_footprint = np.zeros(mask.shape, dtype=bool)
    in_footprint[village.pixels[:, 0], village.pixels[:, 1]] = True
    bg_cells = [tuple(p) for p in np.argwhere(in_footprint & (grid == BACKGROUND))]
    total = village.pixels.shape[0]
    k_ignore = total % 100
    for r, c in bg_cells[:k_ignore]:
        grid[r, c] = IGNORE
    n_forest = lai_percent * (total - k_ignore) // 100
    assert n_forest + k_ignore <= len(bg_cells)
    for r, c in bg_cells[k_ignore : k_ignore + n_forest]:
        grid[r, c] = FOREST
    return Mask(grid=grid, resolution_m=mask.resolution_m)


def random_scenes(n: int, seed: int, size: int = 64) -> list[tuple[Mask, dict]]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        spec = random_spec(rng, height=size, width=size)
        mask, inventory = generate_mask(spec, seed=seed * 1000 + i)
        out.append((mask, inventory))
    return out
