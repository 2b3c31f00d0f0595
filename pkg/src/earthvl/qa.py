"""Deterministic QA generation from land-cover masks.

Each image yields a fixed battery of question/answer pairs: basic judging
and counting, area deciles, complex judging over derived detectors
(intersections, schools, villages), one complex count, distribution and
direction analysis, and three comprehensive summaries. Answers come only
from mask geometry plus optional per-image tags; the `numbers` field always
mirrors the integer literals embedded in the answer, in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any

import numpy as np
from scipy import ndimage

from . import templates as T
from .centerline import (
    centerline_segments,
    classify_angle,
    classify_direction,
    geographic_angle,
    junction_nodes,
    sort_directions,
)
from .errors import ValidationError
from .landcover import (
    BUILDING,
    CLASS_NAMES,
    COUNTABLE_CLASSES,
    FOREGROUND_CLASSES,
    FOREST,
    IGNORE,
    PLAYGROUND,
    ROAD,
    WATER,
)
from .raster import (
    GeoObject,
    Mask,
    area_bin,
    connected_components,
    min_distance,
    object_from_pixels,
)
from .text import extract_numbers

QTYPES = ("BJ", "CJ", "BC", "CC", "AE", "DisA", "DirA", "CA", "OE")


@dataclass(frozen=True)
class RuleThresholds:
    """Knobs of the annotation rules. Defaults match the generated corpora."""

    near_m: float = 100.0            # "near" is inclusive at exactly this distance
    village_min_buildings: int = 21  # more than 20 compact buildings form a village
    compact_dist_m: float = 20.0     # single-linkage radius for compactness
    lai_threshold: float = 0.30      # green fraction below this flags the area
    school_adjacency_m: float = 10.0
    min_pixels: int = 10
    elongation_ratio: float = 4.0    # principal/secondary spread for "along"


DEFAULT_THRESHOLDS = RuleThresholds()


@dataclass
class QAPair:
    qid: str
    image_id: str
    qtype: str
    question: str
    answer: str
    numbers: list[int] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class SceneMeta:
    """Optional per-image tags; road tags are keyed by component index."""

    road_tags: dict[str, str] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)

    def is_main(self, component_index: int) -> bool:
        # Untagged roads count as main: mask-only pipelines still work.
        return self.road_tags.get(str(component_index), "main") == "main"


# ---------------------------------------------------------------------------
# Detectors


def detect_intersections(
    mask: Mask, thresholds: RuleThresholds = DEFAULT_THRESHOLDS
) -> tuple[int, list[tuple[float, float]]]:
    """Count and locate road junctions across all road components."""
    locations: list[tuple[float, float]] = []
    for road in connected_components(mask, ROAD, thresholds.min_pixels):
        locations.extend(junction_nodes(road))
    locations.sort()
    return len(locations), locations


def detect_schools(
    mask: Mask, thresholds: RuleThresholds = DEFAULT_THRESHOLDS
) -> list[GeoObject]:
    """School sites: a building within adjacency range of a playground.

    Each site is returned as the union region of the paired building and
    playground, so distance questions can run against the whole site.
    """
    buildings = connected_components(mask, BUILDING, thresholds.min_pixels)
    playgrounds = connected_components(mask, PLAYGROUND, thresholds.min_pixels)
    sites = []
    for b in buildings:
        for p in playgrounds:
            if min_distance(b, p) <= thresholds.school_adjacency_m:
                pixels = np.concatenate([b.pixels, p.pixels], axis=0)
                sites.append(object_from_pixels(BUILDING, pixels, mask.resolution_m))
                break
    return sites


def detect_village(
    mask: Mask, thresholds: RuleThresholds = DEFAULT_THRESHOLDS
) -> tuple[GeoObject | None, int]:
    """Largest compact building cluster with enough members, plus its size.

    Compactness is single linkage: buildings whose boundary distance is at
    most compact_dist_m join a cluster. The footprint is the union of member
    pixels dilated by a disk of half the compactness radius.
    """
    buildings = connected_components(mask, BUILDING, thresholds.min_pixels)
    n = len(buildings)
    if n == 0:
        return None, 0
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if min_distance(buildings[i], buildings[j]) <= thresholds.compact_dist_m:
                parent[find(i)] = find(j)
    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    qualifying = [
        sorted(members)
        for members in clusters.values()
        if len(members) >= thresholds.village_min_buildings
    ]
    if not qualifying:
        return None, 0
    qualifying.sort(key=lambda m: (-len(m), m[0]))
    members = qualifying[0]
    union = np.concatenate([buildings[i].pixels for i in members], axis=0)
    footprint = _dilate_pixels(union, mask, radius_m=thresholds.compact_dist_m / 2.0)
    return object_from_pixels(BUILDING, footprint, mask.resolution_m), len(members)


def _dilate_pixels(pixels: np.ndarray, mask: Mask, radius_m: float) -> np.ndarray:
    h, w = mask.shape
    grid = np.zeros((h, w), dtype=bool)
    grid[pixels[:, 0], pixels[:, 1]] = True
    radius_px = max(1, int(round(radius_m / mask.resolution_m)))
    size = 2 * radius_px + 1
    yy, xx = np.ogrid[-radius_px : radius_px + 1, -radius_px : radius_px + 1]
    disk = yy * yy + xx * xx <= radius_px * radius_px
    dilated = ndimage.binary_dilation(grid, structure=disk)
    rows, cols = np.nonzero(dilated)
    return np.stack([rows, cols], axis=1)


def lai_fraction(mask: Mask, region: GeoObject) -> float:
    """Green (forest) fraction of the non-ignore cells inside a region."""
    rows, cols = region.pixels[:, 0], region.pixels[:, 1]
    values = mask.grid[rows, cols]
    valid = values != IGNORE
    total = int(valid.sum())
    if total == 0:
        raise ValidationError("region is entirely ignore-labeled")
    return int((values[valid] == FOREST).sum()) / total


def needs_planting(lai: float, thresholds: RuleThresholds = DEFAULT_THRESHOLDS) -> bool:
    """Strictly-below comparison: a region at exactly the threshold passes."""
    return lai < thresholds.lai_threshold


def point_to_object_distance(point: tuple[float, float], obj: GeoObject) -> float:
    """Distance in meters from a point to an object's boundary (0 inside)."""
    r, c = int(round(point[0])), int(round(point[1]))
    if (r, c) in obj.pixel_set:
        return 0.0
    d = np.hypot(
        obj.boundary_pixels[:, 0] - point[0], obj.boundary_pixels[:, 1] - point[1]
    )
    return float(d.min()) * obj.resolution_m


# ---------------------------------------------------------------------------
# Generators


def gen_basic_judging(
    mask: Mask,
    cls: int,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> QAPair:
    objects = connected_components(mask, cls, thresholds.min_pixels)
    name = CLASS_NAMES[cls]
    return QAPair(
        qid=f"{image_id}-bj-{name}",
        image_id=image_id,
        qtype="BJ",
        question=T.q_basic_judging(cls),
        answer=T.YES if objects else T.NO,
        numbers=[],
        meta={"class": name},
    )


def gen_basic_counting(
    mask: Mask,
    cls: int,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> QAPair:
    count = len(connected_components(mask, cls, thresholds.min_pixels))
    name = CLASS_NAMES[cls]
    return QAPair(
        qid=f"{image_id}-bc-{name}",
        image_id=image_id,
        qtype="BC",
        question=T.q_basic_counting(cls),
        answer=str(count),
        numbers=[count],
        meta={"class": name},
    )


def gen_area_estimation(
    mask: Mask,
    cls: int,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> QAPair:
    name = CLASS_NAMES[cls]
    return QAPair(
        qid=f"{image_id}-ae-{name}",
        image_id=image_id,
        qtype="AE",
        question=T.q_area_estimation(cls),
        answer=area_bin(mask, cls),
        numbers=[],
        meta={"class": name},
    )


def gen_complex_judging(
    mask: Mask,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> list[QAPair]:
    n_junctions, junctions = detect_intersections(mask, thresholds)
    schools = detect_schools(mask, thresholds)
    village, n_members = detect_village(mask, thresholds)

    def yes_no(flag: bool) -> str:
        return T.YES if flag else T.NO

    school_near = False
    school_near_dist: float | None = None
    if schools and junctions:
        dists = [
            point_to_object_distance(j, s) for s in schools for j in junctions
        ]
        school_near_dist = min(dists)
        school_near = school_near_dist <= thresholds.near_m

    water_near = False
    water_near_dist: float | None = None
    if village is not None:
        waters = connected_components(mask, WATER, thresholds.min_pixels)
        if waters:
            dists = [min_distance(w, village) for w in waters]
            water_near_dist = min(dists)
            water_near = water_near_dist <= thresholds.near_m

    pairs = [
        QAPair(
            qid=f"{image_id}-cj-intersections",
            image_id=image_id,
            qtype="CJ",
            question=T.Q_INTERSECTIONS,
            answer=yes_no(n_junctions > 0),
            meta={"n_intersections": n_junctions},
        ),
        QAPair(
            qid=f"{image_id}-cj-schools",
            image_id=image_id,
            qtype="CJ",
            question=T.Q_SCHOOLS,
            answer=yes_no(bool(schools)),
            meta={"n_schools": len(schools)},
        ),
        QAPair(
            qid=f"{image_id}-cj-villages",
            image_id=image_id,
            qtype="CJ",
            question=T.Q_VILLAGES,
            answer=yes_no(village is not None),
            meta={"n_village_buildings": n_members},
        ),
        QAPair(
            qid=f"{image_id}-cj-intersection-near-school",
            image_id=image_id,
            qtype="CJ",
            question=T.Q_INTERSECTION_NEAR_SCHOOL,
            answer=yes_no(school_near),
            meta={"distance_m": school_near_dist},
        ),
        QAPair(
            qid=f"{image_id}-cj-water-near-village",
            image_id=image_id,
            qtype="CJ",
            question=T.Q_WATER_NEAR_VILLAGE,
            answer=yes_no(water_near),
            meta={"distance_m": water_near_dist},
        ),
    ]
    for p in pairs:
        p.numbers = []
    return pairs


def gen_complex_counting(
    mask: Mask,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> QAPair:
    n_junctions, _ = detect_intersections(mask, thresholds)
    return QAPair(
        qid=f"{image_id}-cc-intersections",
        image_id=image_id,
        qtype="CC",
        question=T.Q_COUNT_INTERSECTIONS,
        answer=str(n_junctions),
        numbers=[n_junctions],
        meta={},
    )


def gen_distribution_analysis(
    mask: Mask,
    cls: int,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> QAPair:
    objects = connected_components(mask, cls, thresholds.min_pixels)
    name = CLASS_NAMES[cls]
    qid = f"{image_id}-disa-{name}"
    question = T.q_distribution(cls)
    if not objects:
        answer = T.a_none(cls)
        meta: dict[str, Any] = {"n_objects": 0}
    else:
        direction = _layout_direction(objects, thresholds.elongation_ratio)
        meta = {"n_objects": len(objects)}
        answer = T.a_along(cls, direction) if direction else T.a_dispersed(cls)
    return QAPair(
        qid=qid,
        image_id=image_id,
        qtype="DisA",
        question=question,
        answer=answer,
        numbers=[],
        meta=meta,
    )


def _layout_direction(objects: list[GeoObject], elongation_ratio: float) -> str | None:
    """Direction bin of the centroid layout if clearly elongated, else None."""
    if len(objects) < 2:
        return None
    pts = np.array([o.centroid for o in objects], dtype=np.float64)
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    lam2, lam1 = float(eigvals[0]), float(eigvals[1])
    if lam1 <= 0:
        return None
    if lam2 > 1e-9 * lam1 and lam1 / lam2 < elongation_ratio:
        return None
    v = eigvecs[:, 1]
    return classify_angle(geographic_angle(float(v[0]), float(v[1])))


def gen_direction_analysis(
    mask: Mask,
    meta: SceneMeta | None = None,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> QAPair:
    roads = connected_components(mask, ROAD, thresholds.min_pixels)
    bins: set[str] = set()
    n_main = 0
    for index, road in enumerate(roads):
        if meta is not None and not meta.is_main(index):
            continue
        n_main += 1
        for seg in centerline_segments(road):
            bins.add(classify_direction(seg))
    return QAPair(
        qid=f"{image_id}-dira-roads",
        image_id=image_id,
        qtype="DirA",
        question=T.Q_DIRECTIONS,
        answer=T.a_direction_list(sort_directions(bins)),
        numbers=[],
        meta={"n_main_roads": n_main},
    )


def gen_comprehensive_analysis(
    mask: Mask,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
    image_id: str = "img",
) -> list[QAPair]:
    roads = connected_components(mask, ROAD, thresholds.min_pixels)
    n_junctions, _ = detect_intersections(mask, thresholds)
    if not roads:
        traffic = T.A_NO_ROADS
    else:
        traffic = T.a_intersection_count(n_junctions)

    village, _ = detect_village(mask, thresholds)
    if village is None:
        greening = T.A_NO_RESIDENTIAL
        lai: float | None = None
    else:
        lai = lai_fraction(mask, village)
        greening = T.A_UNDER_GREENED if needs_planting(lai, thresholds) else T.A_WELL_GREENED

    counts = {
        cls: len(connected_components(mask, cls, thresholds.min_pixels))
        for cls in COUNTABLE_CLASSES
    }
    objects_answer = T.a_object_counts(
        counts[BUILDING], counts[WATER], counts[PLAYGROUND]
    )

    pairs = [
        QAPair(
            qid=f"{image_id}-ca-traffic",
            image_id=image_id,
            qtype="CA",
            question=T.Q_TRAFFIC,
            answer=traffic,
            meta={"n_intersections": n_junctions, "n_roads": len(roads)},
        ),
        QAPair(
            qid=f"{image_id}-ca-greening",
            image_id=image_id,
            qtype="CA",
            question=T.Q_GREENING,
            answer=greening,
            meta={"lai": lai},
        ),
        QAPair(
            qid=f"{image_id}-ca-objects",
            image_id=image_id,
            qtype="CA",
            question=T.Q_OBJECTS,
            answer=objects_answer,
            meta={},
        ),
    ]
    for p in pairs:
        p.numbers = extract_numbers(p.answer)
    return pairs


def generate_qa(
    mask: Mask,
    image_id: str,
    meta: SceneMeta | None = None,
    thresholds: RuleThresholds = DEFAULT_THRESHOLDS,
) -> list[QAPair]:
    """The full fixed-order QA battery for one image."""
    pairs: list[QAPair] = []
    for cls in FOREGROUND_CLASSES:
        pairs.append(gen_basic_judging(mask, cls, thresholds, image_id))
    for cls in COUNTABLE_CLASSES:
        pairs.append(gen_basic_counting(mask, cls, thresholds, image_id))
    for cls in FOREGROUND_CLASSES:
        pairs.append(gen_area_estimation(mask, cls, thresholds, image_id))
    pairs.extend(gen_complex_judging(mask, thresholds, image_id))
    pairs.append(gen_complex_counting(mask, thresholds, image_id))
    for cls in COUNTABLE_CLASSES:
        pairs.append(gen_distribution_analysis(mask, cls, thresholds, image_id))
    pairs.append(gen_direction_analysis(mask, meta, thresholds, image_id))
    pairs.extend(gen_comprehensive_analysis(mask, thresholds, image_id))
    return pairs
