from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kinematics import T_MAX


@dataclass(frozen=True)
class GameParams:
    """Knobs shared by the subgame machinery and the plant."""

    T: float = 0.5                      # subgame duration, s
    t_max: float = T_MAX
    dt_max: float = 3.0                 # cap on the residual interval, s
    # accelerations standing in for {Acc, Dec} when the matrix is built
    acc_nominal: float = 2.0
    dec_nominal: float = -1.0
    # "expected": tendency from arrival times under the strategy pair;
    # "current": tendency from arrival times under the present accelerations
    tendency_source: str = "current"
    # "nominal": cells use acc/dec_nominal; "best": each player's strategy is
    # realized by its best grid acceleration against the opponent's nominal
    realize: str = "best"
    # seconds an expected acceleration lasts before the speed is held;
    # None keeps it until the vehicle reaches the area
    exp_hold: Optional[float] = None
    sigma_step: float = 0.1
    max_escalations: int = 5
    sigma_cap: float = 1.0
    acc_grid: tuple = (0.0, 0.5, 1.0, 1.5, 2.0)
    dec_grid: tuple = (-0.5, -1.0, -2.0, -3.0, -4.0)
    a_aeb: float = -8.0
    v_max: float = 120 / 3.6
    aeb_margin: float = 3.0
    k_sigma: float = 0.05
    style_id: bool = False

    def __post_init__(self):
        if self.tendency_source not in ("expected", "current"):
            raise ValueError(f"unknown tendency_source {self.tendency_source!r}")
        if self.realize not in ("nominal", "best"):
            raise ValueError(f"unknown realize {self.realize!r}")
        if self.exp_hold is not None and self.exp_hold <= 0:
            raise ValueError("exp_hold must be positive or None")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.acc_nominal < 0 or self.dec_nominal >= 0:
            raise ValueError("acc_nominal must be >= 0 and dec_nominal < 0")
