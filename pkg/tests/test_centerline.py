import numpy as np
import pytest
from hypothesis import given, strategies as st

from earthvl.centerline import (
    EW,
    NESW,
    NS,
    NWSE,
    Segment,
    centerline_segments,
    classify_angle,
    classify_direction,
    geographic_angle,
    junction_nodes,
    sort_directions,
)
from earthvl.errors import GeometryError, ValidationError
from earthvl.landcover import BUILDING, ROAD
from earthvl.raster import Mask, connected_components, object_from_pixels
from earthvl.synth import RoadSpec, SynthSpec, cross_road_spec, generate_mask


def test_geographic_angle_cardinals():
    assert geographic_angle(0, 1) == 0.0     # east
    assert geographic_angle(-1, 0) == 90.0   # north
    assert geographic_angle(0, -1) == 0.0    # west folds onto east
    assert geographic_angle(1, 0) == 90.0    # south folds onto north
    assert geographic_angle(-1, 1) == 45.0   # northeast
    assert geographic_angle(1, 1) == 135.0   # southeast folds to NW--SE axis


def test_geographic_angle_zero_raises():
    with pytest.raises(GeometryError):
        geographic_angle(0, 0)


def test_classify_angle_bin_edges():
    assert classify_angle(0.0) == EW
    assert classify_angle(22.4) == EW
    assert classify_angle(22.5) == NESW     # lower-inclusive edge
    assert classify_angle(67.4) == NESW
    assert classify_angle(67.5) == NS
    assert classify_angle(112.4) == NS
    assert classify_angle(112.5) == NWSE
    assert classify_angle(157.4) == NWSE
    assert classify_angle(157.5) == EW
    assert classify_angle(179.9) == EW
    assert classify_angle(360.0 + 45.0) == NESW  # folding


@given(
    st.integers(min_value=-40, max_value=40),
    st.integers(min_value=-40, max_value=40),
)
def test_classify_ignores_segment_orientation(dr, dc):
    if dr == 0 and dc == 0:
        return
    forward = classify_angle(geographic_angle(dr, dc))
    backward = classify_angle(geographic_angle(-dr, -dc))
    assert forward == backward


def test_classify_direction_matches_angle():
    seg = Segment(p1=(10.0, 10.0), p2=(10.0, 30.0), length_m=6.0)
    assert classify_direction(seg) == EW
    seg = Segment(p1=(10.0, 10.0), p2=(30.0, 10.0), length_m=6.0)
    assert classify_direction(seg) == NS
    with pytest.raises(GeometryError):
        classify_direction(Segment(p1=(1.0, 1.0), p2=(1.0, 1.0), length_m=0.0))


def test_sort_directions_canonical_order():
    assert sort_directions({NWSE, EW, NS, NESW}) == [EW, NS, NESW, NWSE]
    assert sort_directions({NS, EW}) == [EW, NS]
    assert sort_directions(set()) == []


def _single_road(angle_deg: float) -> Mask:
    mask, _ = generate_mask(SynthSpec(roads=(RoadSpec(angle_deg),)), seed=0)
    return mask


@pytest.mark.parametrize(
    "angle,expected",
    [(0.0, EW), (90.0, NS), (45.0, NESW), (135.0, NWSE), (10.0, EW), (100.0, NS)],
)
def test_straight_road_single_direction(angle, expected):
    mask = _single_road(angle)
    (road,) = connected_components(mask, ROAD)
    segments = centerline_segments(road)
    assert segments, "straight road must yield at least one segment"
    assert {classify_direction(s) for s in segments} == {expected}
    assert junction_nodes(road) == []


def test_cross_roads_two_directions_one_junction():
    mask, _ = generate_mask(cross_road_spec(), seed=0)
    (road,) = connected_components(mask, ROAD)
    directions = {classify_direction(s) for s in centerline_segments(road)}
    assert directions == {EW, NS}
    nodes = junction_nodes(road)
    assert len(nodes) == 1
    r, c = nodes[0]
    assert abs(r - 31.5) <= 2.0 and abs(c - 31.5) <= 2.0


def test_segments_are_deterministic_and_sorted():
    mask, _ = generate_mask(cross_road_spec(), seed=0)
    (road,) = connected_components(mask, ROAD)
    a = centerline_segments(road)
    b = centerline_segments(road)
    assert a == b
    assert a == sorted(a, key=lambda s: (s.p1, s.p2))


def test_short_debris_is_dropped():
    mask = _single_road(0.0)
    (road,) = connected_components(mask, ROAD)
    assert centerline_segments(road, min_segment_px=8)
    assert centerline_segments(road, min_segment_px=10_000) == []


def test_non_road_object_rejected():
    obj = object_from_pixels(BUILDING, [(0, 0), (0, 1)], 0.3)
    with pytest.raises(ValidationError):
        centerline_segments(obj)


def test_bend_splits_into_two_directions():
    # An L of two width-3 arms: one E--W, one N--S, joined at a 90-degree bend.
    grid = np.zeros((64, 64), dtype=np.uint8)
    grid[30:33, 2:50] = ROAD
    grid[30:62, 30:33] = ROAD
    (road,) = connected_components(Mask(grid=grid), ROAD)
    directions = {classify_direction(s) for s in centerline_segments(road)}
    assert directions == {EW, NS}
