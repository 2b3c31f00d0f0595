"""Fixed surface templates for questions and answers.

Every question and answer string in the generated corpora comes from this
table, so answer vocabulary stays closed and deterministic. Embedded counts
always appear as bare base-10 literals; the QA layer mirrors them into the
`numbers` field by extraction.
"""

from __future__ import annotations

from .landcover import BUILDING, DISPLAY_FORMS, PLAYGROUND, WATER
from .text import count_phrase

YES = "Yes"
NO = "No"


def q_basic_judging(cls: int) -> str:
    return f"Are there any {DISPLAY_FORMS[cls][1]} in this scene?"


def q_basic_counting(cls: int) -> str:
    return f"How many {DISPLAY_FORMS[cls][1]} are there in this scene?"


def q_area_estimation(cls: int) -> str:
    return f"What is the area proportion of the {DISPLAY_FORMS[cls][1]} in this scene?"


Q_INTERSECTIONS = "Are there any intersections in this scene?"
Q_SCHOOLS = "Are there any schools in this scene?"
Q_VILLAGES = "Are there any villages in this scene?"
Q_INTERSECTION_NEAR_SCHOOL = "Are there any intersections near the school?"
Q_WATER_NEAR_VILLAGE = "Are there any water areas near the village?"
Q_COUNT_INTERSECTIONS = "How many intersections are there in this scene?"
Q_DIRECTIONS = "What are the directions of the main roads in this scene?"
Q_TRAFFIC = "What are the comprehensive traffic situations in this scene?"
Q_GREENING = "What are the greening situations of the residential area?"
Q_OBJECTS = "What are the quantities of the key objects in this scene?"


def q_distribution(cls: int) -> str:
    return f"What are the distributions of the {DISPLAY_FORMS[cls][1]} in this scene?"


def a_none(cls: int) -> str:
    return f"There are no {DISPLAY_FORMS[cls][1]}."


def a_dispersed(cls: int) -> str:
    return f"The {DISPLAY_FORMS[cls][1]} are dispersedly distributed."


def a_along(cls: int, direction: str) -> str:
    return f"The {DISPLAY_FORMS[cls][1]} are distributed along the {direction} direction."


A_NO_MAIN_ROADS = "There are no main roads."
A_NO_ROADS = "There are no roads."
A_NO_INTERSECTIONS = "There are no intersections."
A_NO_RESIDENTIAL = "There are no residential areas."
A_UNDER_GREENED = "The residential area is under-greened and needs supplemental planting."
A_WELL_GREENED = "The residential area has sufficient greening."


def a_direction_list(directions: list[str]) -> str:
    """Join direction bins: 'E--W', 'E--W and N--S', 'E--W, N--S and NE--SW'."""
    if not directions:
        return A_NO_MAIN_ROADS
    if len(directions) == 1:
        return directions[0]
    return ", ".join(directions[:-1]) + " and " + directions[-1]


def a_intersection_count(n: int) -> str:
    if n == 0:
        return A_NO_INTERSECTIONS
    if n == 1:
        return "There is 1 intersection."
    return f"There are {n} intersections."


def a_object_counts(buildings: int, waters: int, playgrounds: int) -> str:
    parts = [
        count_phrase(buildings, *DISPLAY_FORMS[BUILDING]),
        count_phrase(waters, *DISPLAY_FORMS[WATER]),
        count_phrase(playgrounds, *DISPLAY_FORMS[PLAYGROUND]),
    ]
    return f"There are {parts[0]}, {parts[1]} and {parts[2]} in this scene."
