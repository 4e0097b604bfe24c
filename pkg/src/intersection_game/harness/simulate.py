"""Closed-loop driver: subgame decisions every T, plant integration every dt."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..coordinator import PathIntent, aggregate, decompose, pair_conflicts, right_arm
from ..game import (
    Strategy,
    build_matrix,
    nominal_accel,
    resolve,
    update_style,
)
from ..kinematics import HOST, OTHER
from ..plant import OpponentContext, VehicleAgent, aeb_check, approach, step, strategy_to_accel
from .scenarios import ScenarioSpec

SUCCESS_CLEARANCE = 3.0


@dataclass
class RunResult:
    name: str
    success: bool
    aeb_triggered: bool
    timed_out: bool
    clearances: dict            # "A-B@NE" -> residual clearance, m
    T_f: float                  # interaction duration (limit) or clearing time (full)
    T_IC: float
    pass_times: dict            # agent id -> time its tail left the box
    crossing_order: tuple
    collision: bool             # two vehicles inside one conflict area at once
    first_decision: dict        # agent id -> strategy short name at t = 0
    trajectory: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    meta: tuple = ()

    @property
    def min_clearance(self) -> float:
        return min(self.clearances.values()) if self.clearances else math.inf

    def summary_row(self) -> dict:
        row = dict(self.meta)
        row.update(name=self.name, success=self.success, aeb=self.aeb_triggered,
                   timeout=self.timed_out, collision=self.collision,
                   min_clearance=_finite(self.min_clearance), T_f=_finite(self.T_f),
                   T_IC=_finite(self.T_IC), order="".join(self.crossing_order))
        return row


def _finite(x: float):
    return None if x is None or not math.isfinite(x) else round(float(x), 6)


def _right_side(arm_host: str, arm_other: str) -> str:
    if right_arm(arm_host) == arm_other:
        return OTHER
    if right_arm(arm_other) == arm_host:
        return HOST
    return OTHER


class _Sim:
    def __init__(self, spec: ScenarioSpec, record: bool = True):
        self.spec = spec
        self.params = spec.params
        self.layout = spec.layout
        self.record = record
        rng = np.random.default_rng(spec.seed)
        self.intents = [PathIntent(a.arm, a.maneuver) for a in spec.agents]
        self.pairs = pair_conflicts(self.layout, self.intents)
        noise = rng.normal(0.0, spec.disturbance_sd, len(spec.agents)) if spec.disturbance_sd > 0 \
            else np.zeros(len(spec.agents))
        self.agents = []
        for k, a in enumerate(spec.agents):
            if a.tts is not None:
                pos = -a.speed * a.tts
            else:
                firsts = [r.s_near_a if i == k else r.s_near_b
                          for (i, j), rects in self.pairs.items() if k in (i, j) for r in rects]
                s0 = min(firsts) if firsts else self.layout.stopline_offset
                pos = s0 - a.d0
            self.agents.append(VehicleAgent(
                a.id, max(a.speed + float(noise[k]), 0.0), a.accel, pos, self.intents[k],
                a.profile, a.length, a.width, a_target=a.accel, a_aeb=self.params.a_aeb,
                sigma_est={j: 0.5 for j in range(len(spec.agents)) if j != k}))
        self.exits = [self.layout.exit_coordinate(it) for it in self.intents]
        self.last = {}
        self.subs = [[] for _ in self.agents]
        self.contexts = [[] for _ in self.agents]
        self.predicted = {}
        self.t = 0.0
        self.aeb_triggered = False
        self.clearances = {}
        self.arrivals = {}
        self.pass_times = {}
        self.collision = False
        self.trajectory = []
        self.decisions = []
        self.first_decision = {}

    # -- geometry helpers ---------------------------------------------------
    def _passed(self, i: int, s_near: float, j: int) -> bool:
        a = self.agents[i]
        return a.pos - a.length - self.agents[j].width >= s_near

    def _approaches(self, sub, committed: bool = False):
        h, o = self.agents[sub.host], self.agents[sub.opponent]
        ha, oa = approach(h, sub.rect.s_near_a, o.width), approach(o, sub.rect.s_near_b, h.width)
        if committed:
            ha, oa = replace(ha, accel=h.a_target), replace(oa, accel=o.a_target)
        return ha, oa

    # -- decision layer -----------------------------------------------------
    def decide(self):
        params = self.params
        self.subs = decompose(self.intents, self.layout, self._passed)
        solved = {}
        if not params.style_id:
            for subs in self.subs:
                for sub in subs:
                    if sub.host > sub.opponent or sub.key in solved:
                        continue
                    solved[sub.key] = self._solve(sub, self.agents[sub.opponent].profile)
        strategies = []
        for i, subs in enumerate(self.subs):
            agent = self.agents[i]
            choices, contexts, unsafe = [], [], False
            for sub in subs:
                if params.style_id:
                    est = self.agents[sub.opponent].profile.with_sigma(
                        agent.sigma_est[sub.opponent])
                    res, m = self._solve(sub, est, key=(i,) + sub.key)
                    mine, theirs = res.chosen
                    p_mine = m.p_host[mine, theirs]
                    opp_profile = est
                else:
                    res, m = solved[sub.key]
                    if sub.host < sub.opponent:
                        mine, theirs = res.chosen
                        p_mine = m.p_host[mine, theirs]
                    else:
                        theirs, mine = res.chosen
                        p_mine = m.p_other[theirs, mine]
                    opp_profile = self.agents[sub.opponent].profile
                choices.append(mine)
                unsafe |= res.fallback and m.dt_now < 0.0
                h_app, o_app = self._approaches(sub)
                right = _right_side(agent.intent.origin, self.agents[sub.opponent].intent.origin)
                contexts.append(OpponentContext(h_app, o_app, opp_profile,
                                                nominal_accel(theirs, params), right,
                                                float(p_mine)))
                self.predicted[(i, sub.opponent)] = nominal_accel(theirs, params)
            strategy = aggregate(choices, unsafe)
            strategies.append(strategy)
            self.contexts[i] = contexts
            agent.aeb = strategy == Strategy.AEB
            if agent.aeb:
                self.aeb_triggered = True
            agent.a_target = strategy_to_accel(agent, strategy, contexts, params)
            agent.strategy_last = strategy
        if not self.first_decision:
            self.first_decision = {a.id: s.short for a, s in zip(self.agents, strategies)}

    def _solve(self, sub, other_profile, key=None):
        key = key or sub.key
        h, o = self.agents[sub.host], self.agents[sub.opponent]
        h_app, o_app = self._approaches(sub)
        right = _right_side(h.intent.origin, o.intent.origin)
        m = build_matrix(h_app, o_app, h.profile, other_profile, self.params, right)
        res = resolve(m, self.last.get(key), self.params)
        self.last[key] = res.chosen
        if self.record:
            uh, uo = m.u_host, m.u_other
            row = {"t": round(self.t, 6), "host": h.id, "opponent": o.id,
                   "area": sub.rect.quadrant, "dt_now": m.dt_now}
            for si in (Strategy.ACC, Strategy.DEC):
                for sj in (Strategy.ACC, Strategy.DEC):
                    tag = si.short + sj.short
                    row[f"u_{tag}_host"] = float(uh[si, sj])
                    row[f"u_{tag}_other"] = float(uo[si, sj])
                    row[f"p_{tag}_host"] = float(m.p_host[si, sj])
                    row[f"p_{tag}_other"] = float(m.p_other[si, sj])
            row.update(equilibria=" ".join(a.short + b.short for a, b in res.equilibria_found),
                       case=res.case_id.value, escalations=res.escalation_steps,
                       chosen=res.chosen[0].short + res.chosen[1].short)
            self.decisions.append(row)
        return res, m

    def update_styles(self):
        k = self.params.k_sigma
        for (i, j), a_eq in self.predicted.items():
            agent = self.agents[i]
            agent.sigma_est[j] = update_style(agent.sigma_est[j], self.agents[j].accel, a_eq, k)

    # -- bookkeeping --------------------------------------------------------
    def check_aeb(self):
        for i, agent in enumerate(self.agents):
            if agent.aeb:
                continue
            reach = agent.speed * agent.speed / (-2.0 * agent.a_aeb) + self.params.aeb_margin
            for ctx, sub in zip(self.contexts[i], self.subs[i]):
                near = sub.rect.s_near_a - agent.pos
                if near < 0.0 or reach < near:
                    continue
                # predict with the committed targets: the lag would otherwise
                # flag the vehicle told to go as late right after a decision
                h_app, o_app = self._approaches(sub, committed=True)
                live = OpponentContext(h_app, o_app, ctx.other_profile, ctx.other_accel,
                                       ctx.right_side)
                if aeb_check(agent, live, self.params):
                    agent.aeb = True
                    self.aeb_triggered = True
                    break

    def record_events(self):
        for (i, j), rects in self.pairs.items():
            ai, aj = self.agents[i], self.agents[j]
            for r in rects:
                key = f"{ai.id}-{aj.id}@{r.quadrant}"
                ni, nj = r.s_near_a - ai.pos, r.s_near_b - aj.pos
                if key not in self.clearances and (ni <= 0.0 or nj <= 0.0):
                    if ni <= 0.0 and nj <= 0.0:
                        self.clearances[key] = max(ni, nj)
                    else:
                        self.clearances[key] = nj if ni <= 0.0 else ni
                    self.arrivals[key] = self.t
                inside_i = ni <= 0.0 < ni + ai.length + aj.width
                inside_j = nj <= 0.0 < nj + aj.length + ai.width
                if inside_i and inside_j:
                    self.collision = True
        for k, a in enumerate(self.agents):
            if a.id not in self.pass_times and a.pos - a.length >= self.exits[k]:
                self.pass_times[a.id] = self.t

    def sample(self):
        for a in self.agents:
            self.trajectory.append({"t": round(self.t, 6), "agent": a.id, "pos": a.pos,
                                    "speed": a.speed, "accel": a.accel, "a_target": a.a_target,
                                    "strategy": a.strategy_last.short if a.strategy_last is not None else "",
                                    "aeb": a.aeb})

    def done(self) -> bool:
        if self.spec.mode == "limit":
            return bool(self.clearances) or not self.pairs and len(self.pass_times) == len(self.agents)
        return len(self.pass_times) == len(self.agents)

    def run(self) -> RunResult:
        spec = self.spec
        n_game = int(round(spec.T / spec.dt))
        n_sample = max(int(round(spec.sample_every / spec.dt)), 1)
        n_max = int(round(spec.timeout / spec.dt))
        k = 0
        timed_out = False
        while True:
            if k % n_game == 0:
                if self.params.style_id and k:
                    self.update_styles()
                self.decide()
            if self.record and k % n_sample == 0:
                self.sample()
            self.check_aeb()
            for a in self.agents:
                step(a, spec.dt)
            k += 1
            self.t = k * spec.dt
            self.record_events()
            if self.done():
                break
            if k >= n_max:
                timed_out = True
                break
        if self.record:
            self.sample()
        return self._result(timed_out)

    def _result(self, timed_out: bool) -> RunResult:
        spec = self.spec
        if spec.mode == "limit":
            T_f = min(self.arrivals.values()) if self.arrivals else math.inf
            T_IC = math.inf
        else:
            T_IC = max(self.pass_times.values()) if len(self.pass_times) == len(self.agents) \
                else math.inf
            T_f = T_IC
        order = tuple(sorted(self.pass_times, key=lambda a: self.pass_times[a]))
        all_clear = all(c >= SUCCESS_CLEARANCE for c in self.clearances.values())
        if spec.mode == "full":
            expected = sum(len(r) for r in self.pairs.values())
        else:
            expected = min(len(self.pairs), 1)
        complete = len(self.clearances) >= expected
        success = all_clear and complete and not self.aeb_triggered and not timed_out
        return RunResult(spec.name, success, self.aeb_triggered, timed_out, dict(self.clearances),
                         T_f, T_IC, dict(self.pass_times), order, self.collision,
                         self.first_decision, self.trajectory, self.decisions, spec.meta)


def run_scenario(spec: ScenarioSpec, record: bool = True) -> RunResult:
    """Simulate one scenario; deterministic given the spec (seed included)."""
    return _Sim(spec, record).run()
