"""Land-cover class table shared by every other module.

Masks are single-channel uint8 grids whose cells hold one of the eight class
ids below, or IGNORE (255) for cells that carry no label. Ground resolution
defaults to 0.3 m per pixel.
"""

from __future__ import annotations

BACKGROUND = 0
BUILDING = 1
ROAD = 2
WATER = 3
BARREN = 4
FOREST = 5
AGRICULTURE = 6
PLAYGROUND = 7

IGNORE = 255

ALL_CLASSES = (
    BACKGROUND,
    BUILDING,
    ROAD,
    WATER,
    BARREN,
    FOREST,
    AGRICULTURE,
    PLAYGROUND,
)

# Classes that QA generation asks about (background excluded).
FOREGROUND_CLASSES = ALL_CLASSES[1:]

# Classes whose instances are counted as discrete objects.
COUNTABLE_CLASSES = (BUILDING, WATER, PLAYGROUND)

CLASS_NAMES = {
    BACKGROUND: "background",
    BUILDING: "building",
    ROAD: "road",
    WATER: "water",
    BARREN: "barren",
    FOREST: "forest",
    AGRICULTURE: "agriculture",
    PLAYGROUND: "playground",
}

NAME_TO_CLASS = {name: cid for cid, name in CLASS_NAMES.items()}

# Singular / plural surface forms used by the question and answer templates.
DISPLAY_FORMS = {
    BUILDING: ("building", "buildings"),
    ROAD: ("road", "roads"),
    WATER: ("water area", "water areas"),
    BARREN: ("barren area", "barren areas"),
    FOREST: ("forest", "forests"),
    AGRICULTURE: ("agricultural area", "agricultural areas"),
    PLAYGROUND: ("playground", "playgrounds"),
}

# Fixed rendering palette used when turning a mask into an RGB image.
CLASS_COLORS = {
    BACKGROUND: (0, 0, 0),
    BUILDING: (200, 0, 0),
    ROAD: (128, 128, 128),
    WATER: (0, 0, 200),
    BARREN: (139, 90, 43),
    FOREST: (0, 128, 0),
    AGRICULTURE: (210, 180, 60),
    PLAYGROUND: (255, 140, 0),
    IGNORE: (255, 255, 255),
}

DEFAULT_RESOLUTION_M = 0.3


def is_valid_class(cid: int) -> bool:
    return cid in CLASS_NAMES


def require_class(cid: int) -> int:
    if not is_valid_class(cid):
        raise ValueError(f"unknown land-cover class id: {cid!r}")
    return cid
