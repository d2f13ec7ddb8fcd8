"""Exact tabular MDP machinery.

Rewards are attached to states and collected on arrival: taking action ``a``
in ``s`` and landing in ``s'`` yields ``r(s')``. The optimal action values are

    Q*(s, a) = sum_{s'} T(s'|s, a) * (r(s') + gamma * max_{a'} Q*(s', a'))

so a state's own reward never enters its Q row, only the rewards of states it
leads to. Two states with identical outgoing dynamics therefore share Q rows
regardless of their own rewards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ROW_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class TabularMDP:
    """Finite MDP with a state-only reward vector.

    ``transitions[s, a, s']`` is the probability of reaching ``s'``.
    ``action_rewards`` is reserved for ``r(s, a)`` tables; it exists only so
    that validation can refuse them loudly.
    """

    state_names: tuple[str, ...]
    action_names: tuple[str, ...]
    transitions: np.ndarray
    rewards: np.ndarray
    discount: float = 0.9
    action_rewards: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "state_names", tuple(str(s) for s in self.state_names))
        object.__setattr__(self, "action_names", tuple(str(a) for a in self.action_names))
        t = np.array(self.transitions, dtype=float)
        r = np.array(self.rewards, dtype=float)
        t.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "discount", float(self.discount))

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_actions(self) -> int:
        return len(self.action_names)

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def action_index(self, name: str) -> int:
        try:
            return self.action_names.index(name)
        except ValueError:
            raise KeyError(f"unknown action {name!r}") from None

    def with_rewards(self, rewards) -> "TabularMDP":
        return TabularMDP(self.state_names, self.action_names, self.transitions,
                          rewards, self.discount)

    def with_discount(self, discount: float) -> "TabularMDP":
        return TabularMDP(self.state_names, self.action_names, self.transitions,
                          self.rewards, discount)

    def equals(self, other: "TabularMDP", atol: float = 0.0) -> bool:
        return (
            self.state_names == other.state_names
            and self.action_names == other.action_names
            and self.transitions.shape == other.transitions.shape
            and self.rewards.shape == other.rewards.shape
            and np.allclose(self.transitions, other.transitions, rtol=0, atol=atol)
            and np.allclose(self.rewards, other.rewards, rtol=0, atol=atol)
            and abs(self.discount - other.discount) <= atol
        )


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    index: tuple = ()

    def __str__(self):
        return self.message


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_mdp(mdp: TabularMDP) -> ValidationResult:
    """Collect every structural problem with ``mdp`` instead of raising."""
    out: list[Violation] = []
    n, m = mdp.n_states, mdp.n_actions
    if len(set(mdp.state_names)) != n:
        out.append(Violation("names", "duplicate state names"))
    if len(set(mdp.action_names)) != m:
        out.append(Violation("names", "duplicate action names"))
    t = mdp.transitions
    if t.shape != (n, m, n):
        out.append(Violation("shape", f"transitions have shape {t.shape}, expected {(n, m, n)}"))
    else:
        for s in range(n):
            for a in range(m):
                row = t[s, a]
                if not np.all(np.isfinite(row)) or row.min() < 0.0 or row.max() > 1.0:
                    out.append(Violation(
                        "row", f"T[s={s}][a={a}] has entries outside [0, 1]", (s, a)))
                elif abs(row.sum() - 1.0) > ROW_TOL:
                    out.append(Violation(
                        "row", f"T[s={s}][a={a}] sums to {row.sum():.15g}, not 1", (s, a)))
    if mdp.rewards.shape != (n,):
        out.append(Violation(
            "rewards", f"rewards have shape {mdp.rewards.shape}, expected ({n},) (one per state)"))
    elif not np.all(np.isfinite(mdp.rewards)):
        out.append(Violation("rewards", "rewards must be finite"))
    if mdp.action_rewards is not None:
        out.append(Violation(
            "rewards", "state-action rewards r(s,a) are not supported; rewards must be a function of the state"))
    if not (0.0 <= mdp.discount < 1.0):
        out.append(Violation("discount", f"discount {mdp.discount} outside [0, 1)"))
    return ValidationResult(tuple(out))


def uniform_policy(mdp: TabularMDP) -> np.ndarray:
    return np.full((mdp.n_states, mdp.n_actions), 1.0 / mdp.n_actions)


def uniform_start(mdp: TabularMDP) -> np.ndarray:
    return np.full(mdp.n_states, 1.0 / mdp.n_states)


def check_policy(policy: np.ndarray, n_states: int, n_actions: int, full_support: bool = False):
    policy = np.asarray(policy, dtype=float)
    if policy.shape != (n_states, n_actions):
        raise ValueError(f"policy has shape {policy.shape}, expected {(n_states, n_actions)}")
    if policy.min() < 0 or np.abs(policy.sum(axis=1) - 1.0).max() > ROW_TOL:
        raise ValueError("policy rows must be probability distributions")
    if full_support and policy.min() <= 0:
        raise ValueError("policy must give every action nonzero probability")
    return policy


def check_distribution(p: np.ndarray, n: int, tol: float = 1e-10) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (n,):
        raise ValueError(f"distribution has shape {p.shape}, expected ({n},)")
    if p.min() < 0 or abs(p.sum() - 1.0) > tol:
        raise ValueError("distribution must be nonnegative and sum to 1")
    return p


def policy_transition_matrix(mdp: TabularMDP, policy: np.ndarray) -> np.ndarray:
    """P_pi[s, s'] = sum_a pi(a|s) T(s'|s, a)."""
    return np.einsum("sa,sat->st", policy, mdp.transitions)


def stationary_occupancy(mdp: TabularMDP, policy: np.ndarray | None = None,
                         init: np.ndarray | None = None, tol: float = 1e-10,
                         max_iters: int = 200) -> np.ndarray:
    """Long-run time-averaged state occupancy started from ``init``.

    The Cesaro limit of ``init @ P^t`` is reached by iterating the lazy chain
    ``(I + P) / 2``, which has the same limit projector as ``P`` but no
    periodic eigenvalues, so plain iterates converge geometrically even when
    ``P`` is periodic. The lazy operator is squared each step, so ``max_iters``
    bounds the number of squarings.
    """
    if policy is None:
        policy = uniform_policy(mdp)
    policy = check_policy(policy, mdp.n_states, mdp.n_actions, full_support=True)
    mu = uniform_start(mdp) if init is None else check_distribution(init, mdp.n_states)
    lazy = 0.5 * (np.eye(mdp.n_states) + policy_transition_matrix(mdp, policy))
    residual = np.inf
    for _ in range(max_iters):
        nxt = mu @ lazy
        residual = np.abs(nxt - mu).max()
        mu = nxt
        if residual < tol:
            # transient states keep a vanishing remnant; their limit mass is exactly 0
            mu = np.where(mu < tol, 0.0, mu)
            return mu / mu.sum()
        lazy = lazy @ lazy
    raise ConvergenceError("stationary occupancy did not converge", residual)


@dataclass(frozen=True)
class QTable:
    values: np.ndarray
    residual: float

    @property
    def v(self) -> np.ndarray:
        return self.values.max(axis=1)


def bellman_backup(mdp: TabularMDP, v: np.ndarray) -> np.ndarray:
    return mdp.transitions @ (mdp.rewards + mdp.discount * v)


def value_iteration(transitions: np.ndarray, expected_rewards: np.ndarray, discount: float,
                    tol: float = 1e-10, max_iters: int = 100_000) -> QTable:
    """Iterate Q <- R(s, a) + gamma * T max_a' Q until max-norm residual < tol.

    ``expected_rewards[s, a]`` is the expected reward collected on the step.
    """
    q = np.zeros(expected_rewards.shape)
    residual = np.inf

    def backup(q):
        return expected_rewards + discount * (transitions @ q.max(axis=1))

    for _ in range(max_iters):
        new = backup(q)
        residual = float(np.abs(new - q).max())
        q = new
        if residual < tol:
            break
    else:
        raise ConvergenceError("value iteration did not converge", residual)
    # residual of the returned table itself
    return QTable(q, float(np.abs(backup(q) - q).max()))


def arrival_rewards(mdp: TabularMDP) -> np.ndarray:
    """Expected reward of the state reached from each (s, a)."""
    return mdp.transitions @ mdp.rewards


def q_star(mdp: TabularMDP, tol: float = 1e-10, max_iters: int = 100_000) -> QTable:
    """Optimal action values by value iteration to max-norm residual < tol."""
    return value_iteration(mdp.transitions, arrival_rewards(mdp), mdp.discount, tol, max_iters)


def greedy_policy_sets(q: QTable | np.ndarray, tie_tol: float = 1e-9) -> list[frozenset[int]]:
    values = q.values if isinstance(q, QTable) else np.asarray(q)
    best = values.max(axis=1, keepdims=True)
    return [frozenset(np.flatnonzero(row >= b - tie_tol).tolist())
            for row, b in zip(values, best)]


def greedy_policy(q: QTable | np.ndarray, tie_tol: float = 1e-9) -> np.ndarray:
    """Uniform mixture over each state's tied optimal actions."""
    values = q.values if isinstance(q, QTable) else np.asarray(q)
    policy = np.zeros(values.shape)
    for s, acts in enumerate(greedy_policy_sets(values, tie_tol)):
        policy[s, sorted(acts)] = 1.0 / len(acts)
    return policy


def policy_values(mdp: TabularMDP, policy: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """V^pi(s) = sum_{s'} P_pi(s, s') (r(s') + gamma V^pi(s')), solved directly."""
    policy = check_policy(policy, mdp.n_states, mdp.n_actions)
    p = policy_transition_matrix(mdp, policy)
    rhs = p @ mdp.rewards
    v = np.linalg.solve(np.eye(mdp.n_states) - mdp.discount * p, rhs)
    residual = np.abs(rhs + mdp.discount * p @ v - v).max()
    if residual >= tol:
        # polish with fixed-point sweeps; contraction guarantees progress
        for _ in range(10_000):
            v = rhs + mdp.discount * p @ v
            residual = np.abs(rhs + mdp.discount * p @ v - v).max()
            if residual < tol:
                break
        else:
            raise ConvergenceError("policy evaluation did not converge", residual)
    return v


def policy_return(mdp: TabularMDP, policy: np.ndarray, start: np.ndarray | None = None,
                  tol: float = 1e-10) -> float:
    """Expected discounted return of ``policy`` from the start distribution."""
    start = uniform_start(mdp) if start is None else check_distribution(start, mdp.n_states)
    return float(start @ policy_values(mdp, policy, tol))


def optimal_return(mdp: TabularMDP, start: np.ndarray | None = None,
                   tol: float = 1e-10) -> float:
    start = uniform_start(mdp) if start is None else check_distribution(start, mdp.n_states)
    return float(start @ q_star(mdp, tol).v)


def state_names_for(n: int, prefix: str = "s") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


def make_mdp(transitions, rewards, discount: float = 0.9,
             state_names: Sequence[str] | None = None,
             action_names: Sequence[str] | None = None) -> TabularMDP:
    t = np.asarray(transitions, dtype=float)
    n, m = t.shape[0], t.shape[1]
    return TabularMDP(
        tuple(state_names) if state_names is not None else state_names_for(n),
        tuple(action_names) if action_names is not None else state_names_for(m, "a"),
        t, rewards, discount)
