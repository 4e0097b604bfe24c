import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from intersection_game.config import GameParams
from intersection_game.game import (
    DEC_DEC,
    PAIRS,
    Approach,
    Case,
    PayoffMatrix,
    Strategy,
    build_matrix,
    nominal_accel,
    pure_nash,
    realized_accels,
    resolve,
    strategy_grid,
    update_style,
)
from intersection_game.kinematics import HOST, OTHER, ConflictDistances
from intersection_game.payoffs import DriverProfile
from intersection_game.validation import brute_force_nash

ACC, DEC = Strategy.ACC, Strategy.DEC
PARAMS = GameParams()


def fixed_game(u_host, u_other, sigma_host=0.5, sigma_other=0.5, right_side=OTHER):
    """Matrix whose utilities equal the given arrays whatever sigma is."""
    uh, uo = np.asarray(u_host, float), np.asarray(u_other, float)
    one = np.ones((2, 2))
    return PayoffMatrix(uh, uo, uh, uo, one, one, sigma_host, sigma_other, right_side=right_side)


def app(speed, near, accel=0.0):
    return Approach(speed, accel, ConflictDistances(near, 4.5, 1.8))


# -- pure_nash -------------------------------------------------------------------

def test_prisoners_dilemma_dominant_pair():
    # cooperate = ACC, defect = DEC; defecting dominates
    uh = [[-1, -3], [0, -2]]
    uo = [[-1, 0], [-3, -2]]
    assert pure_nash(np.array(uh), np.array(uo)) == [(DEC, DEC)]


def test_coordination_two_equilibria():
    uh = np.array([[2, 0], [0, 2]])
    assert pure_nash(uh, uh) == [(ACC, ACC), (DEC, DEC)]


def test_matching_pennies_empty():
    uh = np.array([[1, -1], [-1, 1]])
    assert pure_nash(uh, -uh) == []
    assert brute_force_nash(uh, -uh) == []


def test_all_tied_gives_four():
    z = np.zeros((2, 2))
    assert len(pure_nash(z, z)) == 4


games = arrays(np.float64, (2, 2, 2), elements=st.floats(-10, 10))
int_games = arrays(np.int64, (2, 2, 2), elements=st.integers(-2, 2))


@settings(max_examples=500, deadline=None)
@given(st.one_of(games, int_games))
def test_nash_matches_brute_force(g):
    assert sorted(pure_nash(g[0], g[1])) == brute_force_nash(g[0], g[1])


@settings(max_examples=300, deadline=None)
@given(int_games, st.integers(-100, 100))
def test_nash_invariant_to_constant_shift(g, c):
    # integer payoffs keep the shift exact, so only the game structure is tested
    base = pure_nash(g[0], g[1])
    assert pure_nash(g[0] + c, g[1]) == base
    assert pure_nash(g[0], g[1] + c) == base


# -- resolve -------------------------------------------------------------------

def test_resolve_unique():
    uh = [[-1, -3], [0, -2]]
    uo = [[-1, 0], [-3, -2]]
    res = resolve(fixed_game(uh, uo))
    assert res.chosen == (DEC, DEC)
    assert res.case_id == Case.UNIQUE and res.escalation_steps == 0


def test_resolve_keeps_last_equilibrium():
    uh = [[0, 2], [2, 0]]
    res = resolve(fixed_game(uh, uh), last=(ACC, DEC))
    assert res.case_id == Case.MULTIPLE
    assert res.chosen == (ACC, DEC)
    assert resolve(fixed_game(uh, uh), last=(DEC, ACC)).chosen == (DEC, ACC)


def test_resolve_multiple_by_total_payoff():
    uh = [[0, 3], [2, 0]]
    uo = [[0, 3], [2, 0]]
    assert resolve(fixed_game(uh, uo)).chosen == (ACC, DEC)


def test_resolve_sum_tie_prefers_right_of_way_holder_going():
    uh = [[0, 2], [2, 0]]
    assert resolve(fixed_game(uh, uh, right_side=OTHER)).chosen == (DEC, ACC)
    assert resolve(fixed_game(uh, uh, right_side=HOST)).chosen == (ACC, DEC)


def test_resolve_sum_tie_prefers_more_decelerations():
    uh = np.array([[1, 0], [0, 1]])
    assert resolve(fixed_game(uh, uh)).chosen == DEC_DEC


def _escalating_game(sigma0):
    # speed terms: matching pennies; safety terms: Dec strictly better for both
    speed_h = np.array([[1.0, -1.0], [-1.0, 1.0]])
    safe_h = np.array([[0.0, 0.0], [1.0, 1.0]])
    safe_o = safe_h.T.copy()
    one = np.ones((2, 2))
    return PayoffMatrix(safe_h, safe_o, speed_h, -speed_h, one, one, sigma0, sigma0)


def test_resolve_escalation_converges():
    m = _escalating_game(0.3)
    assert pure_nash(m.u_host, m.u_other) == []
    res = resolve(m)
    assert res.case_id == Case.ESCALATED and not res.fallback
    assert 1 <= res.escalation_steps <= PARAMS.max_escalations
    assert res.sigma_host == pytest.approx(0.3 + 0.1 * res.escalation_steps)
    m2 = m.reweighted(res.sigma_host, res.sigma_other)
    assert res.chosen in brute_force_nash(m2.u_host, m2.u_other)


def test_resolve_escalation_exhausted_falls_back():
    uh = np.array([[1.0, -1.0], [-1.0, 1.0]])
    res = resolve(fixed_game(uh, -uh))
    assert res.chosen == DEC_DEC and res.fallback
    assert res.escalation_steps == PARAMS.max_escalations


def test_escalation_respects_cap():
    uh = np.array([[1.0, -1.0], [-1.0, 1.0]])
    res = resolve(fixed_game(uh, -uh, sigma_host=0.85, sigma_other=0.9))
    assert res.sigma_host == pytest.approx(1.0) and res.sigma_other == pytest.approx(1.0)


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, (6, 2, 2), elements=st.floats(-5, 5)), st.floats(0, 1), st.floats(0, 1),
       st.sampled_from([None] + list(PAIRS)))
def test_resolve_total(a, sh, so, last):
    m = PayoffMatrix(a[0], a[1], a[2], a[3], np.abs(a[4]), np.abs(a[5]), sh, so)
    res = resolve(m, last=last)
    assert res.chosen in [tuple(p) for p in PAIRS]
    assert res.escalation_steps <= PARAMS.max_escalations


# -- build_matrix ---------------------------------------------------------------

def test_role_swap_symmetry():
    h, o = app(11.0, 40.0), app(11.0, 44.0)
    p = DriverProfile(sigma=0.5)
    m1 = build_matrix(h, o, p, p, PARAMS, right_side=OTHER)
    m2 = build_matrix(o, h, p, p, PARAMS, right_side=HOST)
    for i, j in PAIRS:
        assert m1.u_host[i, j] == pytest.approx(m2.u_other[j, i], abs=1e-12)
        assert m1.u_other[i, j] == pytest.approx(m2.u_host[j, i], abs=1e-12)


def test_passed_vehicle_gives_saturated_interval():
    gone = Approach(10.0, 0.0, ConflictDistances(-8.0, 4.5, 1.8))
    coming = app(10.0, 20.0)
    p = DriverProfile()
    m = build_matrix(gone, coming, p, p, PARAMS)
    assert np.all(m.dt_exp == PARAMS.dt_max)
    # safety is then flat, so each player's ordering follows speed
    assert np.allclose(m.safety_host, m.safety_host[0, 0])
    assert np.all(m.speed_host[ACC] > m.speed_host[DEC])


def test_nominal_realization():
    params = replace(PARAMS, realize="nominal")
    p = DriverProfile()
    got = realized_accels(app(10, 30), app(10, 35), ACC, DEC, p, p, params, 0.0, (3.0, 3.5))
    assert got == (params.acc_nominal, params.dec_nominal)


def test_best_realization_stays_in_class():
    p = DriverProfile()
    for sh, so in PAIRS:
        a_h, a_o = realized_accels(app(10, 30), app(10, 35), sh, so, p, p, PARAMS, 0.0, (3.0, 3.5))
        assert (a_h >= 0) == (sh == ACC) and (a_o >= 0) == (so == ACC)


def test_strategy_grid_speed_cap():
    assert strategy_grid(ACC, PARAMS, speed=PARAMS.v_max) == (0.0,)
    assert strategy_grid(DEC, PARAMS) == PARAMS.dec_grid
    assert strategy_grid(Strategy.AEB, PARAMS) == (PARAMS.a_aeb,)
    assert nominal_accel(Strategy.AEB, PARAMS) == PARAMS.a_aeb


# -- style update ----------------------------------------------------------------

def test_update_style_zero_error():
    assert update_style(0.6, 1.0, 1.0, 0.05) == 0.6


def test_update_style_aggressive_lowers_sigma():
    assert update_style(0.6, 2.0, 0.5, 0.05) == pytest.approx(0.6 - 0.05 * 1.5)


def test_update_style_clamped():
    assert update_style(0.06, 10.0, 0.0, 0.05) == 0.05
    assert update_style(0.94, -10.0, 0.0, 0.05) == 0.95


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-4, 4))
def test_update_style_monotone(s0, err):
    s = s0
    for _ in range(30):
        s_next = update_style(s, err, 0.0, 0.05)
        if err > 0:
            assert s_next <= s
        elif err < 0:
            assert s_next >= s
        assert 0.05 <= s_next <= 0.95
        s = s_next
