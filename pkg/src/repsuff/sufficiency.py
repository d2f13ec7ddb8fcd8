"""Sufficiency verdicts, maximizer sets and the return-distribution identity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .information import OBJECTIVES, all_objectives, objective_value
from .mdp import (QTable, TabularMDP, check_distribution, check_policy, greedy_policy,
                  greedy_policy_sets, policy_return, q_star, stationary_occupancy,
                  uniform_policy, uniform_start)
from .representation import (BlockPartition, aggregate_mdp, aliased_pairs, as_representation,
                             enumerate_partitions, lift_policy, posterior_states)

Q_TOL = 1e-9
TIE_EPS = 1e-9
MAX_TRAJECTORIES = 10_000_000


@dataclass(frozen=True)
class Witness:
    s1: int
    s2: int
    action: int | None
    detail: str


@dataclass(frozen=True)
class Check:
    ok: bool
    witnesses: tuple[Witness, ...] = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class SufficiencyVerdict:
    pi_sufficient: bool
    q_sufficient: bool
    witnesses: tuple[Witness, ...] = ()


def check_q_sufficiency(mdp: TabularMDP, rep, tol: float = Q_TOL,
                        q: QTable | None = None) -> Check:
    """Aliased states must have equal optimal Q rows."""
    values = (q or q_star(mdp)).values
    witnesses = []
    for s1, s2 in aliased_pairs(rep):
        diff = np.abs(values[s1] - values[s2])
        for a in np.flatnonzero(diff > tol):
            witnesses.append(Witness(
                s1, s2, int(a), f"|Q*(s{s1},a{a}) - Q*(s{s2},a{a})| = {diff[a]:.6g}"))
    return Check(not witnesses, tuple(witnesses))


def check_pi_sufficiency(mdp: TabularMDP, rep, tie_tol: float = Q_TOL,
                         q: QTable | None = None) -> Check:
    """Aliased states must admit a common optimal action.

    Optimal policies are not unique under ties, so two aliased states pass when
    their argmax sets intersect: some optimal policy then acts identically on
    both.
    """
    sets = greedy_policy_sets(q or q_star(mdp), tie_tol)
    witnesses = []
    for s1, s2 in aliased_pairs(rep):
        if not sets[s1] & sets[s2]:
            witnesses.append(Witness(
                s1, s2, None,
                f"argmax sets {sorted(sets[s1])} and {sorted(sets[s2])} are disjoint"))
    return Check(not witnesses, tuple(witnesses))


def check_sufficiency(mdp: TabularMDP, rep, tol: float = Q_TOL, tie_tol: float = Q_TOL,
                      q: QTable | None = None) -> SufficiencyVerdict:
    q = q or q_star(mdp)
    qc = check_q_sufficiency(mdp, rep, tol, q)
    pc = check_pi_sufficiency(mdp, rep, tie_tol, q)
    return SufficiencyVerdict(pc.ok, qc.ok, pc.witnesses + qc.witnesses)


def exact_optimal_return(mdp: TabularMDP, start: np.ndarray | None = None,
                         tie_tol: float = Q_TOL, q: QTable | None = None) -> float:
    """Optimal return by exact evaluation of the greedy policy of Q*."""
    return policy_return(mdp, greedy_policy(q or q_star(mdp), tie_tol), start)


@dataclass(frozen=True)
class AliasedReturn:
    normalized: float
    achieved: float
    optimal: float
    degenerate: bool = False


def aliased_policy_return(mdp: TabularMDP, partition, policy: np.ndarray | None = None,
                          start: np.ndarray | None = None, tie_tol: float = Q_TOL,
                          occupancy: np.ndarray | None = None,
                          optimal: float | None = None) -> AliasedReturn:
    """Return of the policy planned on the aggregate MDP, relative to the optimum.

    Tied aggregate actions are mixed uniformly, so the result is deterministic.
    When the optimal return is zero the ratio is skipped (``degenerate``): it is
    reported as 1.0 if the lifted policy also achieves zero, otherwise NaN.
    """
    start = uniform_start(mdp) if start is None else check_distribution(start, mdp.n_states)
    agg = aggregate_mdp(mdp, partition, policy, occupancy)
    z_policy = greedy_policy(agg.q_star(), tie_tol)
    lifted = lift_policy(partition, z_policy)
    achieved = policy_return(mdp, lifted, start)
    if optimal is None:
        optimal = exact_optimal_return(mdp, start, tie_tol)
    if abs(optimal) < 1e-12:
        ratio = 1.0 if abs(achieved - optimal) < 1e-12 else math.nan
        return AliasedReturn(ratio, achieved, optimal, degenerate=True)
    return AliasedReturn(achieved / optimal, achieved, optimal)


@dataclass(frozen=True)
class ObjectiveReport:
    partition_id: int
    partition: BlockPartition
    values: dict[str, float]
    normalized_return: float
    verdict: SufficiencyVerdict
    in_maximizer_set: dict[str, bool] = field(default_factory=dict)


class SweepContext:
    """Per-MDP quantities shared by every partition in a sweep."""

    def __init__(self, mdp: TabularMDP, policy: np.ndarray | None = None,
                 start: np.ndarray | None = None, k: int = 1):
        self.mdp = mdp
        self.policy = uniform_policy(mdp) if policy is None else check_policy(
            policy, mdp.n_states, mdp.n_actions, full_support=True)
        self.start = uniform_start(mdp) if start is None else start
        self.k = k
        self.occupancy = stationary_occupancy(mdp, self.policy)
        self._q: QTable | None = None
        self._optimal: float | None = None

    @property
    def q(self) -> QTable:
        if self._q is None:
            self._q = q_star(self.mdp)
        return self._q

    def objective(self, partition, objective: str) -> float:
        return objective_value(self.mdp, self.policy, partition, objective, self.k,
                               self.occupancy).value

    def objectives(self, partition) -> dict[str, float]:
        return all_objectives(self.mdp, self.policy, partition, self.k, self.occupancy)

    def verdict(self, partition, tol: float = Q_TOL) -> SufficiencyVerdict:
        return check_sufficiency(self.mdp, partition, tol, tol, self.q)

    def aliased_return(self, partition) -> AliasedReturn:
        return aliased_policy_return(self.mdp, partition, self.policy, self.start,
                                     occupancy=self.occupancy,
                                     optimal=self.optimal_return)

    @property
    def optimal_return(self) -> float:
        if self._optimal is None:
            self._optimal = exact_optimal_return(self.mdp, self.start, q=self.q)
        return self._optimal

    def report(self, partition: BlockPartition, tol: float = Q_TOL) -> ObjectiveReport:
        return ObjectiveReport(partition.index, partition, self.objectives(partition),
                               self.aliased_return(partition).normalized,
                               self.verdict(partition, tol))


def maximizer_set(mdp: TabularMDP, policy: np.ndarray | None, objective: str, k: int = 1,
                  eps: float = TIE_EPS) -> set[int]:
    """IDs of every block partition within ``eps`` bits of the objective's maximum."""
    ctx = SweepContext(mdp, policy, k=k)
    return _maximizers(ctx, objective, eps)


def _maximizers(ctx: SweepContext, objective: str, eps: float) -> set[int]:
    scores = {p.index: ctx.objective(p, objective) for p in enumerate_partitions(ctx.mdp.n_states)}
    best = max(scores.values())
    return {pid for pid, v in scores.items() if v >= best - eps}


@dataclass(frozen=True)
class ObjectiveSufficiency:
    objective: str
    sufficient: bool
    reports: tuple[ObjectiveReport, ...]


def objective_sufficiency(mdp: TabularMDP, policy: np.ndarray | None, objective: str,
                          k: int = 1, eps: float = TIE_EPS,
                          tol: float = Q_TOL) -> ObjectiveSufficiency:
    """An objective is insufficient for ``mdp`` if any of its maximizers is not Q*-sufficient."""
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    ctx = SweepContext(mdp, policy, k=k)
    winners = _maximizers(ctx, objective, eps)
    reports = []
    for p in enumerate_partitions(mdp.n_states):
        if p.index in winners:
            r = ctx.report(p, tol)
            r.in_maximizer_set[objective] = True
            reports.append(r)
    return ObjectiveSufficiency(objective, all(r.verdict.q_sufficient for r in reports),
                                tuple(reports))


@dataclass(frozen=True, eq=False)
class ReturnDistribution:
    support: np.ndarray
    probs: np.ndarray
    horizon: int
    discount: float

    def mean(self) -> float:
        return float(self.support @ self.probs)


def _merge(values: Sequence[float], probs: Sequence[float], tol: float = 1e-12):
    order = np.argsort(values, kind="stable")
    support: list[float] = []
    mass: list[float] = []
    for i in order:
        v, p = values[i], probs[i]
        if support and v - support[-1] <= tol:
            mass[-1] += p
        else:
            support.append(v)
            mass.append(p)
    return np.array(support), np.array(mass)


def trajectory_count(mdp: TabularMDP, horizon: int) -> int:
    return mdp.n_states ** horizon * mdp.n_actions ** max(horizon - 1, 0)


def return_distribution(mdp: TabularMDP, policy: np.ndarray | None, s: int, a: int,
                        horizon: int) -> ReturnDistribution:
    """Exact law of sum_{i=1..H} gamma^i r(S_{t+i}) given S_t = s, A_t = a.

    Enumerates every trajectory of next states and intermediate actions, then
    merges equal returns.
    """
    count = trajectory_count(mdp, horizon)
    if count > MAX_TRAJECTORIES:
        raise ValueError(f"refusing to enumerate {count} trajectories "
                         f"(limit {MAX_TRAJECTORIES}) at horizon {horizon}")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    policy = uniform_policy(mdp) if policy is None else policy
    t, r, g = mdp.transitions, mdp.rewards, mdp.discount
    values: list[float] = []
    probs: list[float] = []

    def walk(state: int, action: int, step: int, ret: float, prob: float):
        for nxt in range(mdp.n_states):
            p = prob * t[state, action, nxt]
            if p == 0.0:
                continue
            total = ret + g ** step * r[nxt]
            if step == horizon:
                values.append(total)
                probs.append(p)
                continue
            for b in range(mdp.n_actions):
                pb = p * policy[nxt, b]
                if pb > 0.0:
                    walk(nxt, b, step + 1, total, pb)

    if horizon == 0:
        values, probs = [0.0], [1.0]
    else:
        walk(s, a, 1, 0.0, 1.0)
    support, mass = _merge(values, probs)
    return ReturnDistribution(support, mass, horizon, g)


def _on_support(dist: ReturnDistribution, support: np.ndarray) -> np.ndarray:
    out = np.zeros(len(support))
    idx = np.searchsorted(support, dist.support - 1e-12)
    for i, p in zip(idx, dist.probs):
        out[i] += p
    return out


@dataclass(frozen=True)
class IdentityCheck:
    passed: bool
    max_deviation: float
    deviations: np.ndarray  # worst total variation per (s, a)


def check_return_identity(mdp: TabularMDP, rep, policy: np.ndarray | None = None,
                          horizon: int = 4, tol: float = 1e-9,
                          occupancy: np.ndarray | None = None) -> IdentityCheck:
    """Compare sum_z p(z|s) p(R|z, a) with p(R|s, a) in total variation.

    ``p(R|z, a)`` mixes the state-level return laws with the stationary
    posterior ``p(s|z)``. The identity holds for every (s, a) when the
    representation keeps all forward-predictive information.
    """
    phi = as_representation(rep)
    policy = uniform_policy(mdp) if policy is None else policy
    if occupancy is None:
        occupancy = stationary_occupancy(mdp, policy)
    post = posterior_states(phi, occupancy)
    n, m = mdp.n_states, mdp.n_actions
    dists = [[return_distribution(mdp, policy, s, a, horizon) for a in range(m)] for s in range(n)]
    support, _ = _merge(np.concatenate([d.support for row in dists for d in row]),
                        np.zeros(sum(len(d.support) for row in dists for d in row)))
    table = np.array([[_on_support(d, support) for d in row] for row in dists])  # (S, A, R)
    by_symbol = np.einsum("zs,sar->zar", post, table)
    mixed = np.einsum("sz,zar->sar", phi, by_symbol)
    dev = 0.5 * np.abs(mixed - table).sum(axis=2)
    worst = float(dev.max())
    return IdentityCheck(worst < tol, worst, dev)
