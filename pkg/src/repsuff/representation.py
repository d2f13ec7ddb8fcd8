"""Stochastic representations, block partitions and MDP aggregation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .mdp import (QTable, TabularMDP, check_policy, stationary_occupancy, uniform_policy,
                  value_iteration)

MAX_ENUM_STATES = 13


class PartitionError(ValueError):
    pass


class EnumerationRefused(PartitionError):
    """Raised when enumerating partitions would be unreasonably expensive."""


def bell_number(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@dataclass(frozen=True)
class BlockPartition:
    """A set partition of ``range(n)`` in canonical form.

    Blocks are sorted tuples ordered by their smallest member, which makes the
    restricted growth string ``rgs`` (block index of each state) unique.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(s) for s in b)) for b in self.blocks))
        members = [s for b in blocks for s in b]
        if any(len(b) == 0 for b in blocks):
            raise PartitionError("blocks must be nonempty")
        if sorted(members) != list(range(len(members))):
            raise PartitionError(f"blocks {blocks} do not partition 0..{len(members) - 1}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "BlockPartition":
        groups: dict[int, list[int]] = {}
        for s, b in enumerate(rgs):
            groups.setdefault(int(b), []).append(s)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def identity(cls, n: int) -> "BlockPartition":
        return cls(tuple((s,) for s in range(n)))

    @classmethod
    def single(cls, n: int) -> "BlockPartition":
        return cls((tuple(range(n)),))

    @property
    def n_states(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_of(self) -> tuple[int, ...]:
        out = [0] * self.n_states
        for i, b in enumerate(self.blocks):
            for s in b:
                out[s] = i
        return tuple(out)

    rgs = block_of

    @property
    def index(self) -> int:
        """Rank of this partition in restricted-growth-string lexicographic order."""
        return partition_rank(self.block_of)

    def refines(self, other: "BlockPartition") -> bool:
        """True if every block of ``self`` lies inside a block of ``other``."""
        theirs = other.block_of
        return all(len({theirs[s] for s in b}) == 1 for b in self.blocks)

    def literal(self, state_names: Sequence[str]) -> str:
        return "{" + "|".join(",".join(state_names[s] for s in b) for b in self.blocks) + "}"


@lru_cache(maxsize=None)
def _completions(remaining: int, used: int) -> int:
    """Number of restricted growth suffixes of given length after ``used`` blocks."""
    if remaining == 0:
        return 1
    return used * _completions(remaining - 1, used) + _completions(remaining - 1, used + 1)


def partition_rank(rgs: Sequence[int]) -> int:
    rank, used = 0, 0
    n = len(rgs)
    for i, b in enumerate(rgs):
        # count every smaller admissible value at position i
        for smaller in range(min(b, used + 1)):
            rank += _completions(n - i - 1, max(used, smaller + 1))
        used = max(used, b + 1)
    return rank


def enumerate_partitions(n_states: int) -> Iterator[BlockPartition]:
    """Every set partition of ``n_states`` states, in RGS lexicographic order."""
    if n_states < 1:
        raise PartitionError("need at least one state")
    if n_states > MAX_ENUM_STATES:
        raise EnumerationRefused(
            f"refusing to enumerate partitions of {n_states} states: "
            f"Bell({n_states}) = {bell_number(n_states)} exceeds the limit of "
            f"Bell({MAX_ENUM_STATES}) = {bell_number(MAX_ENUM_STATES)}")
    rgs = [0] * n_states
    maxes = [0] * n_states  # maxes[i] = max(rgs[:i+1])
    while True:
        yield BlockPartition.from_rgs(rgs)
        i = n_states - 1
        while i > 0 and rgs[i] > maxes[i - 1]:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        maxes[i] = max(maxes[i - 1], rgs[i])
        for j in range(i + 1, n_states):
            rgs[j] = 0
            maxes[j] = maxes[i]


def parse_partition(text: str, state_names: Sequence[str]) -> BlockPartition:
    """Parse ``{s0,s3|s1|s2}`` against ``state_names``."""
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise PartitionError(f"partition literal must be wrapped in braces: {text!r}")
    lookup = {name: i for i, name in enumerate(state_names)}
    blocks = []
    seen: set[int] = set()
    for chunk in body[1:-1].split("|"):
        names = [x.strip() for x in chunk.split(",")]
        if not names or any(not x for x in names):
            raise PartitionError(f"empty block or member in {text!r}")
        block = []
        for name in names:
            if name not in lookup:
                raise PartitionError(f"unknown state {name!r} in partition literal")
            if lookup[name] in seen:
                raise PartitionError(f"state {name!r} appears twice in partition literal")
            seen.add(lookup[name])
            block.append(lookup[name])
        blocks.append(tuple(block))
    missing = [state_names[i] for i in range(len(state_names)) if i not in seen]
    if missing:
        raise PartitionError(f"partition literal does not cover states {missing}")
    return BlockPartition(tuple(blocks))


def partition_to_representation(p: BlockPartition) -> np.ndarray:
    """One-hot encoder phi[s, z]."""
    phi = np.zeros((p.n_states, p.n_blocks))
    phi[np.arange(p.n_states), p.block_of] = 1.0
    return phi


def as_representation(rep) -> np.ndarray:
    if isinstance(rep, BlockPartition):
        return partition_to_representation(rep)
    return check_representation(rep)


def check_representation(phi, tol: float = 1e-12) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2:
        raise ValueError("representation must be a 2-d table phi[s, z]")
    if phi.shape[1] > phi.shape[0]:
        raise ValueError("representation alphabet may not exceed the number of states")
    if phi.min() < 0 or np.abs(phi.sum(axis=1) - 1.0).max() > tol:
        raise ValueError("representation rows must be probability distributions")
    if np.any(phi.sum(axis=0) <= 0):
        raise ValueError("representation has a symbol no state can emit")
    return phi


def aliases(rep, s1: int, s2: int, tol: float = 1e-12) -> bool:
    phi = as_representation(rep)
    return bool(np.abs(phi[s1] - phi[s2]).max() < tol)


def aliased_pairs(rep, tol: float = 1e-12) -> list[tuple[int, int]]:
    phi = as_representation(rep)
    n = phi.shape[0]
    return [(i, j) for i in range(n) for j in range(i + 1, n)
            if np.abs(phi[i] - phi[j]).max() < tol]


@dataclass(frozen=True, eq=False)
class AggregateMDP:
    """MDP over representation symbols plus the weighting that built it.

    ``mdp.rewards`` holds the posterior-averaged state reward of each symbol.
    Planning uses ``arrival_rewards[z, a]``, the expected reward actually
    collected when acting from ``z``; averaging rewards after arrival would
    discard which member of a block pays.
    """

    mdp: TabularMDP
    posterior: np.ndarray  # p(s | z), shape (Z, S)
    occupancy: np.ndarray
    arrival_rewards: np.ndarray  # shape (Z, A)

    def q_star(self, tol: float = 1e-10) -> QTable:
        return value_iteration(self.mdp.transitions, self.arrival_rewards,
                               self.mdp.discount, tol)


def posterior_states(phi: np.ndarray, occupancy: np.ndarray) -> np.ndarray:
    """Bayes posterior p(s|z) proportional to mu(s) phi[s, z]."""
    joint = occupancy[:, None] * phi
    mass = joint.sum(axis=0)
    dead = np.flatnonzero(mass <= 0)
    if dead.size:
        raise ValueError(f"representation symbols {dead.tolist()} have zero posterior mass")
    return (joint / mass).T


def aggregate_mdp(mdp: TabularMDP, rep, policy: np.ndarray | None = None,
                  occupancy: np.ndarray | None = None) -> AggregateMDP:
    """Hard aggregation of ``mdp`` onto the representation alphabet.

    States are weighted within each symbol by the stationary occupancy of the
    data-collection ``policy`` (uniform by default).
    """
    phi = as_representation(rep)
    if occupancy is None:
        if policy is None:
            policy = uniform_policy(mdp)
        check_policy(policy, mdp.n_states, mdp.n_actions, full_support=True)
        occupancy = stationary_occupancy(mdp, policy)
    post = posterior_states(phi, occupancy)
    trans = np.einsum("zs,sat,tw->zaw", post, mdp.transitions, phi)
    # renormalize away rounding so aggregated rows satisfy the 1e-12 row rule
    trans = trans / trans.sum(axis=2, keepdims=True)
    rewards = post @ mdp.rewards
    arrival = np.einsum("zs,sat,t->za", post, mdp.transitions, mdp.rewards)
    if isinstance(rep, BlockPartition):
        names = tuple("+".join(mdp.state_names[s] for s in b) for b in rep.blocks)
    else:
        names = tuple(f"z{i}" for i in range(phi.shape[1]))
    agg = TabularMDP(names, mdp.action_names, trans, rewards, mdp.discount)
    return AggregateMDP(agg, post, occupancy, arrival)


def lift_policy(rep, z_policy: np.ndarray) -> np.ndarray:
    """pi(a|s) = sum_z phi[s, z] pi_z(a|z)."""
    phi = as_representation(rep)
    z_policy = np.asarray(z_policy, dtype=float)
    if z_policy.shape[0] != phi.shape[1]:
        raise ValueError(f"z-policy has {z_policy.shape[0]} rows for {phi.shape[1]} symbols")
    return phi @ z_policy
