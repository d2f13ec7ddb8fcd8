"""Built-in counterexample MDPs and seeded random generators."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .mdp import TabularMDP, make_mdp
from .representation import BlockPartition

MAX_RANDOM_STATES = 13
MAX_RANDOM_ACTIONS = 16


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    name: str
    mdp: TabularMDP
    designated: BlockPartition
    expected: dict = field(default_factory=dict)
    description: str = ""


def _deterministic(n: int, m: int, edges: dict[tuple[int, int], int]) -> np.ndarray:
    t = np.zeros((n, m, n))
    for (s, a), nxt in edges.items():
        t[s, a, nxt] = 1.0
    return t


def jstate_counterexample(discount: float = 0.9) -> ScenarioSpec:
    """Four-state MDP where aliasing s0 and s3 keeps I(Z';Z) maximal.

    s0 and s3 both move to s1 or s2, but reach the rewarding s2 with different
    actions. s1 and s2 both return to s0 or s3.
    """
    t = _deterministic(4, 2, {
        (0, 0): 1, (0, 1): 2,
        (3, 0): 2, (3, 1): 1,
        (1, 0): 0, (1, 1): 3,
        (2, 0): 0, (2, 1): 3,
    })
    mdp = make_mdp(t, [0.0, 0.0, 1.0, 0.0], discount)
    return ScenarioSpec(
        "jstate", mdp, BlockPartition(((0, 3), (1,), (2,))),
        expected={"maximizes": ("state",), "not_maximizes": ("fwd",),
                  "pi_sufficient": False, "q_sufficient": False,
                  "normalized_return": 0.5},
        description="aliasing s0/s3 maximizes I(Z_t+k; Z_t) but loses the optimal policy")


def jinv_counterexample(discount: float = 0.9) -> ScenarioSpec:
    """Six-state MDP where aliasing s0 and s1 keeps the action identifiable.

    From s0, a0 reaches the rewarding s2; from s1, a1 reaches the rewarding
    s5. Every leaf returns to s0 or s1 uniformly, and r(s0) = r(s1).
    """
    t = _deterministic(6, 2, {(0, 0): 2, (0, 1): 3, (1, 0): 4, (1, 1): 5})
    t[2:, :, 0] = 0.5
    t[2:, :, 1] = 0.5
    mdp = make_mdp(t, [0.0, 0.0, 1.0, 0.0, 0.0, 1.0], discount)
    return ScenarioSpec(
        "jinv", mdp, BlockPartition(((0, 1), (2,), (3,), (4,), (5,))),
        expected={"maximizes": ("inv", "inv+r"), "not_maximizes": ("fwd",),
                  "pi_sufficient": False, "q_sufficient": False,
                  "normalized_return": 0.5},
        description="aliasing s0/s1 maximizes I(A; Z_t+k | Z_t) (and + I(R; Z)) but is insufficient")


def noise_mdp(base: ScenarioSpec | TabularMDP) -> ScenarioSpec:
    """Append an independent fair coin, resampled every step, to each state.

    State ``2*s + c`` is base state ``s`` with coin ``c``. The designated
    partition forgets the coin.
    """
    if isinstance(base, TabularMDP):
        base = ScenarioSpec("mdp", base, BlockPartition.identity(base.n_states))
    b = base.mdp
    n, m = b.n_states, b.n_actions
    t = np.zeros((2 * n, m, 2 * n))
    for c in (0, 1):
        for c2 in (0, 1):
            t[c::2, :, c2::2] = 0.5 * b.transitions
    names = tuple(f"{s}.c{c}" for s in b.state_names for c in (0, 1))
    mdp = TabularMDP(names, b.action_names, t, np.repeat(b.rewards, 2), b.discount)
    designated = BlockPartition(tuple((2 * s, 2 * s + 1) for s in range(n)))
    return ScenarioSpec(
        f"{base.name}+noise", mdp, designated,
        expected={"maximizes": ("fwd",), "q_sufficient": True, "pi_sufficient": True,
                  "normalized_return": 1.0},
        description=f"{base.name} with an irrelevant coin flipped every step")


def uniform_simplex(rng: np.random.Generator, size: tuple[int, ...], k: int) -> np.ndarray:
    """Uniform draws from the (k-1)-simplex as spacings of sorted uniforms."""
    u = np.sort(rng.random((*size, k - 1)), axis=-1)
    zeros = np.zeros((*size, 1))
    ones = np.ones((*size, 1))
    return np.diff(np.concatenate([zeros, u, ones], axis=-1), axis=-1)


def random_mdp(seed: int, n_states: int, n_actions: int, discount: float = 0.9) -> TabularMDP:
    """Seeded MDP with simplex-uniform transition rows and U[0, 1] rewards.

    Uses PCG64 via ``numpy.random.default_rng(seed)``: first ``n*m*(n-1)``
    uniforms build the rows, then ``n`` uniforms give the rewards.
    """
    if not (1 <= n_states <= MAX_RANDOM_STATES) or not (1 <= n_actions <= MAX_RANDOM_ACTIONS):
        raise ValueError(f"random_mdp sizes out of range: {n_states} states, {n_actions} actions")
    rng = np.random.default_rng(seed)
    t = uniform_simplex(rng, (n_states, n_actions), n_states)
    t /= t.sum(axis=2, keepdims=True)
    rewards = rng.random(n_states)
    return make_mdp(t, rewards, discount)


def random_reward(seed: int, n_states: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0x5EED])
    return rng.random(n_states)


def fingerprint(mdp: TabularMDP) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(mdp.transitions, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(mdp.rewards, dtype="<f8").tobytes())
    h.update(repr(mdp.discount).encode())
    return h.hexdigest()


SCENARIOS = {
    "jstate": jstate_counterexample,
    "jinv": jinv_counterexample,
    "noise": lambda discount=0.9: noise_mdp(jstate_counterexample(discount)),
}


def get_scenario(name: str, discount: float = 0.9) -> ScenarioSpec:
    try:
        return SCENARIOS[name](discount)
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
