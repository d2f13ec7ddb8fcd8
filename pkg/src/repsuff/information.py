"""Exact discrete information theory over MDP-induced joint tables.

All quantities are in bits. The variables available to :func:`build_joint`:

``S_t``, ``A_t``, ``S_tk``
    state, action and the state ``k`` steps later;
``Z_t``, ``Z_tk``
    representation symbols of ``S_t`` and ``S_tk``, drawn independently
    given their states;
``R_t``
    the reward of ``S_t``, over the distinct reward values of the MDP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .mdp import (TabularMDP, check_policy, policy_transition_matrix,
                  stationary_occupancy, uniform_policy)
from .representation import as_representation

MI_CLAMP = 1e-12
VARIABLES = ("S_t", "A_t", "S_tk", "Z_t", "Z_tk", "R_t")
OBJECTIVES = ("fwd", "state", "inv", "inv+r", "I_ZS")


@dataclass(frozen=True, eq=False)
class JointTable:
    axes: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        probs = np.asarray(self.probs, dtype=float)
        if len(set(axes)) != len(axes):
            raise ValueError(f"axis names must be unique: {axes}")
        if probs.ndim != len(axes):
            raise ValueError(f"{len(axes)} axes for a {probs.ndim}-d table")
        if probs.size and probs.min() < -1e-15:
            raise ValueError("joint table has negative entries")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError(f"joint table has total mass {probs.sum():.12g}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.axes, self.probs.shape))

    def marginal(self, keep: Iterable[str]) -> np.ndarray:
        """Marginal over ``keep`` with axes in the order given."""
        keep = list(keep)
        unknown = set(keep) - set(self.axes)
        if unknown:
            raise KeyError(f"unknown axes {sorted(unknown)}")
        drop = tuple(i for i, a in enumerate(self.axes) if a not in keep)
        m = self.probs.sum(axis=drop) if drop else self.probs
        kept = [a for a in self.axes if a in keep]
        return np.transpose(m, [kept.index(a) for a in keep]) if keep else m


def _h(p: np.ndarray) -> float:
    p = np.ravel(p)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def joint_entropy(j: JointTable, variables: Iterable[str]) -> float:
    variables = list(dict.fromkeys(variables))
    if not variables:
        return 0.0
    return _h(j.marginal(variables))


def entropy(j: JointTable, variables: Sequence[str], given: Sequence[str] = ()) -> float:
    """H(variables | given) in bits, with 0 log 0 = 0."""
    if set(variables) & set(given):
        # H(X|X) and friends: overlapping variables carry no residual uncertainty
        variables = [v for v in variables if v not in given]
    return joint_entropy(j, [*variables, *given]) - joint_entropy(j, given)


def mutual_information(j: JointTable, x: Sequence[str], y: Sequence[str],
                       given: Sequence[str] = ()) -> float:
    """I(x; y | given) = H(x | given) - H(x | y, given), clamped at zero for noise."""
    if set(x) & set(y) or set(x) & set(given) or set(y) & set(given):
        raise ValueError("x, y and given must be disjoint")
    value = entropy(j, x, given) - entropy(j, x, [*y, *given])
    if -MI_CLAMP < value < 0:
        return 0.0
    return value


def k_step_kernel(mdp: TabularMDP, policy: np.ndarray, k: int = 1) -> np.ndarray:
    """p(s_{t+k} | s_t, a_t): first action fixed, later actions drawn from ``policy``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    kernel = mdp.transitions
    if k > 1:
        p = policy_transition_matrix(mdp, policy)
        kernel = kernel @ np.linalg.matrix_power(p, k - 1)
    return kernel


def reward_alphabet(mdp: TabularMDP) -> tuple[np.ndarray, np.ndarray]:
    """Distinct reward values and the index of each state's reward among them."""
    values, inverse = np.unique(mdp.rewards, return_inverse=True)
    if not np.all(np.isfinite(values)):
        raise ValueError("reward alphabet must be finite")
    return values, inverse


def build_joint(mdp: TabularMDP, policy: np.ndarray | None, rep, k: int = 1,
                include: Iterable[str] = ("Z_t", "A_t", "Z_tk"),
                occupancy: np.ndarray | None = None) -> JointTable:
    """Exact joint over ``include`` under the stationary occupancy of ``policy``."""
    include = tuple(dict.fromkeys(include))
    unknown = set(include) - set(VARIABLES)
    if unknown:
        raise ValueError(f"unknown variables {sorted(unknown)}; choose from {VARIABLES}")
    if policy is None:
        policy = uniform_policy(mdp)
    policy = check_policy(policy, mdp.n_states, mdp.n_actions)
    if occupancy is None:
        occupancy = stationary_occupancy(mdp, policy)
    phi = as_representation(rep)
    core = occupancy[:, None, None] * policy[:, :, None] * k_step_kernel(mdp, policy, k)
    letters = {"S_t": "s", "A_t": "a", "S_tk": "t", "Z_t": "z", "Z_tk": "w", "R_t": "r"}
    operands = [core]
    subscripts = ["sat"]
    if "Z_t" in include:
        operands.append(phi)
        subscripts.append("sz")
    if "Z_tk" in include:
        operands.append(phi)
        subscripts.append("tw")
    if "R_t" in include:
        values, inverse = reward_alphabet(mdp)
        onehot = np.zeros((mdp.n_states, len(values)))
        onehot[np.arange(mdp.n_states), inverse] = 1.0
        operands.append(onehot)
        subscripts.append("sr")
    spec = ",".join(subscripts) + "->" + "".join(letters[v] for v in include)
    return JointTable(include, np.einsum(spec, *operands))


@dataclass(frozen=True)
class ObjectiveValue:
    objective: str
    k: int
    value: float


def objective_value(mdp: TabularMDP, policy: np.ndarray | None, rep, objective: str,
                    k: int = 1, occupancy: np.ndarray | None = None) -> ObjectiveValue:
    """Evaluate one of ``fwd``, ``state``, ``inv``, ``inv+r`` or ``I_ZS``.

    ``fwd`` always uses a one-step offset.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; choose from {OBJECTIVES}")
    if objective == "fwd":
        k = 1
    if objective == "I_ZS":
        j = build_joint(mdp, policy, rep, 1, ("Z_t", "S_t"), occupancy)
        value = mutual_information(j, ["Z_t"], ["S_t"])
    elif objective == "fwd":
        j = build_joint(mdp, policy, rep, 1, ("Z_t", "A_t", "Z_tk"), occupancy)
        value = mutual_information(j, ["Z_tk"], ["Z_t", "A_t"])
    elif objective == "state":
        j = build_joint(mdp, policy, rep, k, ("Z_t", "Z_tk"), occupancy)
        value = mutual_information(j, ["Z_tk"], ["Z_t"])
    else:
        inc = ("Z_t", "A_t", "Z_tk", "R_t") if objective == "inv+r" else ("Z_t", "A_t", "Z_tk")
        j = build_joint(mdp, policy, rep, k, inc, occupancy)
        value = mutual_information(j, ["A_t"], ["Z_tk"], ["Z_t"])
        if objective == "inv+r":
            value += mutual_information(j, ["R_t"], ["Z_t"])
    return ObjectiveValue(objective, k, value)


def all_objectives(mdp: TabularMDP, policy: np.ndarray | None, rep, k: int = 1,
                   occupancy: np.ndarray | None = None) -> dict[str, float]:
    """All five objective values from a single joint table."""
    if policy is None:
        policy = uniform_policy(mdp)
    if occupancy is None:
        occupancy = stationary_occupancy(mdp, policy)
    j = build_joint(mdp, policy, rep, k, ("Z_t", "A_t", "Z_tk", "R_t", "S_t"), occupancy)
    inv = mutual_information(j, ["A_t"], ["Z_tk"], ["Z_t"])
    out = {
        "I_ZS": mutual_information(j, ["Z_t"], ["S_t"]),
        "state": mutual_information(j, ["Z_tk"], ["Z_t"]),
        "inv": inv,
        "inv+r": inv + mutual_information(j, ["R_t"], ["Z_t"]),
    }
    if k == 1:
        out["fwd"] = mutual_information(j, ["Z_tk"], ["Z_t", "A_t"])
    else:
        out["fwd"] = objective_value(mdp, policy, rep, "fwd", 1, occupancy).value
    return {name: out[name] for name in OBJECTIVES}
