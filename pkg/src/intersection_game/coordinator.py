"""Four-arm intersection geometry and the n-vehicle to two-vehicle decomposition.

The box is a 2x2 grid of lane-width cells (one lane per direction, right-hand
traffic). Each path is the ordered list of cells it sweeps; two paths conflict
in every cell they share. Turning paths are approximated by their entry and
exit lane crossings, which is all the longitudinal kinematics needs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .game import Strategy

ARMS = ("S", "E", "N", "W")                 # counter-clockwise
QUADRANTS = ("SE", "NE", "NW", "SW")        # counter-clockwise
MANEUVERS = ("Straight", "Left", "Right")

# cell sequences for a vehicle entering from the south arm
_SOUTH_PATHS = {
    "Straight": ("SE", "NE"),
    "Left": ("SE", "NE", "NW"),
    "Right": ("SE",),
}


def _rotate(quadrant: str, quarter_turns: int) -> str:
    return QUADRANTS[(QUADRANTS.index(quadrant) + quarter_turns) % 4]


def right_arm(arm: str) -> str:
    """Arm whose traffic approaches from this arm's right-hand side."""
    return ARMS[(ARMS.index(arm) + 1) % 4]


@dataclass(frozen=True)
class PathIntent:
    origin: str
    maneuver: str = "Straight"

    def __post_init__(self):
        if self.origin not in ARMS:
            raise ValueError(f"unknown arm {self.origin!r}; expected one of {ARMS}")
        if self.maneuver not in MANEUVERS:
            raise ValueError(f"unsupported maneuver {self.maneuver!r}; expected one of {MANEUVERS}")


@dataclass(frozen=True)
class IntersectionLayout:
    lane_width: float = 3.5
    stopline_offset: float = 1.5    # stopline to box edge, m

    def cells(self, intent: PathIntent) -> tuple:
        k = ARMS.index(intent.origin)
        return tuple(_rotate(q, k) for q in _SOUTH_PATHS[intent.maneuver])

    def cell_entry(self, intent: PathIntent, quadrant: str) -> float:
        """Path coordinate (m past the stopline) of the cell's near edge."""
        idx = self.cells(intent).index(quadrant)
        return self.stopline_offset + idx * self.lane_width

    def exit_coordinate(self, intent: PathIntent) -> float:
        """Path coordinate at which the head leaves the box."""
        return self.stopline_offset + len(self.cells(intent)) * self.lane_width


@dataclass(frozen=True)
class ConflictRect:
    quadrant: str
    s_near_a: float     # near-edge path coordinate for the first vehicle
    s_near_b: float


def derive_conflicts(layout: IntersectionLayout, a: PathIntent, b: PathIntent) -> list:
    if a.origin == b.origin:
        raise ValueError(f"both paths start on arm {a.origin}; same-lane following is not modelled")
    shared = [q for q in layout.cells(a) if q in layout.cells(b)]
    return [ConflictRect(q, layout.cell_entry(a, q), layout.cell_entry(b, q)) for q in shared]


@dataclass(frozen=True)
class Subproblem:
    host: int
    opponent: int
    rect: ConflictRect      # s_near_a refers to the host

    @property
    def key(self) -> tuple:
        lo, hi = sorted((self.host, self.opponent))
        return (lo, hi, self.rect.quadrant)


def pair_conflicts(layout: IntersectionLayout, intents: list) -> dict:
    """Conflict rectangles for every unordered agent pair ``(i, j), i < j``."""
    out = {}
    for i in range(len(intents)):
        for j in range(i + 1, len(intents)):
            rects = derive_conflicts(layout, intents[i], intents[j])
            if rects:
                out[(i, j)] = rects
    return out


def decompose(intents: list, layout: IntersectionLayout, passed=None) -> list:
    """Per-agent subproblem lists.

    ``passed(i, rect_s_near)`` reports whether agent ``i`` has cleared a
    rectangle; a pair drops out of a rectangle once either vehicle cleared it.
    """
    per_agent = [[] for _ in intents]
    for (i, j), rects in pair_conflicts(layout, intents).items():
        for r in rects:
            if passed is not None and (passed(i, r.s_near_a, j) or passed(j, r.s_near_b, i)):
                continue
            per_agent[i].append(Subproblem(i, j, r))
            per_agent[j].append(Subproblem(j, i, ConflictRect(r.quadrant, r.s_near_b, r.s_near_a)))
    return per_agent


def aggregate(choices: Iterable, fallback_unsafe: bool = False) -> Strategy:
    """Combine per-subproblem strategies into one command for the vehicle.

    Unanimity keeps the common strategy, any disagreement decelerates, and a
    subproblem that ran out of escalations while predicting a collision
    triggers emergency braking. No subproblems means free road.
    """
    choices = list(choices)
    if fallback_unsafe:
        return Strategy.AEB
    if not choices:
        return Strategy.ACC
    if all(c == choices[0] for c in choices):
        return Strategy(choices[0])
    return Strategy.DEC
