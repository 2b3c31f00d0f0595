"""Independent brute-force oracles the tests check the library against.

Everything here is deliberately written from scratch with plain loops and
exact arithmetic: BFS flood fill instead of scipy labeling, all-pairs
distance instead of KD-trees, Fraction comparisons instead of float bins.
Slow and boring is the point; these must fail independently of the library.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
import math

import numpy as np


def flood_components(
    grid: np.ndarray, class_id: int, min_pixels: int
) -> list[list[tuple[int, int]]]:
    """4-connected components of class_id via BFS, ordered by first pixel."""
    h, w = grid.shape
    seen = set()
    components = []
    for r in range(h):
        for c in range(w):
            if grid[r, c] != class_id or (r, c) in seen:
                continue
            queue = deque([(r, c)])
            seen.add((r, c))
            pixels = []
            while queue:
                pr, pc = queue.popleft()
                pixels.append((pr, pc))
                for nr, nc in ((pr - 1, pc), (pr + 1, pc), (pr, pc - 1), (pr, pc + 1)):
                    if (
                        0 <= nr < h
                        and 0 <= nc < w
                        and grid[nr, nc] == class_id
                        and (nr, nc) not in seen
                    ):
                        seen.add((nr, nc))
                        queue.append((nr, nc))
            if len(pixels) >= min_pixels:
                components.append(sorted(pixels))
    components.sort(key=lambda px: px[0])
    return components


def boundary_of(pixels: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Pixels of the set missing at least one 4-neighbor (grid edges count)."""
    pixel_set = set(pixels)
    out = []
    for r, c in sorted(pixel_set):
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if (nr, nc) not in pixel_set:
                out.append((r, c))
                break
    return out


TOUCH_PX = math.sqrt(2.0) + 1e-9


def min_distance_brute(
    a: list[tuple[int, int]], b: list[tuple[int, int]], resolution_m: float
) -> float:
    """All-pairs boundary distance with the overlap and touch conventions."""
    if set(a) & set(b):
        return 0.0
    best = math.inf
    for ar, ac in boundary_of(a):
        for br, bc in boundary_of(b):
            d = math.hypot(ar - br, ac - bc)
            if d < best:
                best = d
    if best <= TOUCH_PX:
        return 0.0
    return best * resolution_m


def area_bin_fraction(count: int, total: int) -> str:
    """Decile label decided entirely with Fraction comparisons."""
    if count == 0:
        return "0%"
    frac = Fraction(count, total)
    for k in range(10):
        if Fraction(k, 10) < frac <= Fraction(k + 1, 10):
            return f"({k * 10}%, {(k + 1) * 10}%]"
    raise AssertionError(f"fraction {frac} outside (0, 1]")


def count_answer(grid: np.ndarray, class_id: int, min_pixels: int) -> str:
    return str(len(flood_components(grid, class_id, min_pixels)))


def exists_answer(grid: np.ndarray, class_id: int, min_pixels: int) -> str:
    return "Yes" if flood_components(grid, class_id, min_pixels) else "No"


def area_answer(grid: np.ndarray, class_id: int, ignore: int = 255) -> str:
    total = int((grid != ignore).sum())
    count = int((grid == class_id).sum())
    return area_bin_fraction(count, total)
