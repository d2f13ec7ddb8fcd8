"""Checks of the three sufficiency propositions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .representation import enumerate_partitions
from .scenarios import (jinv_counterexample, jstate_counterexample, noise_mdp, random_mdp,
                        random_reward)
from .sufficiency import (TIE_EPS, SweepContext, _maximizers, check_q_sufficiency,
                          objective_sufficiency)


@dataclass
class PropReport:
    prop: int
    passed: bool
    lines: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return "\n".join(self.lines)


def random_sizes(i: int, size: int | None = None, actions: int | None = None) -> tuple[int, int]:
    """Sizes for the i-th random MDP: states cycle 2..6, actions cycle 2..3."""
    return (size or 2 + i % 5, actions or 2 + i % 2)


def verify_forward(seeds: int = 100, size: int | None = None, actions: int | None = None,
                   seed: int = 0, tol: float = 1e-6, noise: bool = False) -> PropReport:
    """Every J_fwd maximizer of each random MDP must be Q*-sufficient.

    Each MDP is checked under its own reward and one extra random state reward.
    With ``noise`` every MDP gets an irrelevant coin appended, which plants
    nontrivial maximizers.
    """
    failures, n_max, n_nontrivial = [], 0, 0
    for i in range(seeds):
        n, m = random_sizes(i, size, actions)
        if noise:
            n = max(1, (n + 1) // 2)
        mdp = random_mdp(seed + i, n, m)
        if noise:
            mdp = noise_mdp(mdp).mdp
        ctx = SweepContext(mdp)
        winners = _maximizers(ctx, "fwd", TIE_EPS)
        alt = mdp.with_rewards(random_reward(seed + i, mdp.n_states))
        for p in enumerate_partitions(mdp.n_states):
            if p.index not in winners:
                continue
            n_max += 1
            n_nontrivial += p.n_blocks < mdp.n_states
            for reward_mdp in (mdp, alt):
                check = check_q_sufficiency(reward_mdp, p, tol)
                if not check.ok:
                    failures.append((seed + i, p.literal(mdp.state_names), check.witnesses[0].detail))
    passed = not failures
    label = "noise-augmented random" if noise else "random"
    lines = [f"{'PASS' if passed else 'FAIL'}: {seeds - len({f[0] for f in failures})}/{seeds} "
             f"{label} MDPs, all J_fwd maximizers Q*-sufficient"
             f" ({n_max} maximizers checked, {n_nontrivial} non-identity)"]
    lines += [f"  counterexample: seed {s} partition {p}: {d}" for s, p, d in failures]
    return PropReport(1, passed, lines)


def verify_state() -> PropReport:
    sc = jstate_counterexample()
    result = objective_sufficiency(sc.mdp, None, "state")
    ctx = SweepContext(sc.mdp)
    ratio = ctx.aliased_return(sc.designated).normalized
    member = any(r.partition == sc.designated for r in result.reports)
    passed = member and not result.sufficient and abs(ratio - 0.5) < 1e-6
    word = "PASS" if passed else "FAIL"
    return PropReport(2, passed, [
        f"{word}: J_state insufficient on scenario {sc.name}, return ratio {ratio:.6f}",
        f"  designated {sc.designated.literal(sc.mdp.state_names)} in maximizer set: {member}; "
        f"{len(result.reports)} maximizers, "
        f"{sum(not r.verdict.q_sufficient for r in result.reports)} Q*-insufficient",
    ])


def verify_inverse() -> PropReport:
    sc = jinv_counterexample()
    ctx = SweepContext(sc.mdp)
    ratio = ctx.aliased_return(sc.designated).normalized
    verdict = ctx.verdict(sc.designated)
    lines, passed = [], abs(ratio - 0.5) < 1e-6 and not verdict.pi_sufficient
    for objective in ("inv", "inv+r"):
        result = objective_sufficiency(sc.mdp, None, objective)
        member = any(r.partition == sc.designated for r in result.reports)
        ok = member and not result.sufficient
        passed &= ok
        name = "J_inv" if objective == "inv" else "J_inv + I(R;Z)"
        lines.append(f"  {name}: designated in maximizer set: {member}; "
                     f"objective {'sufficient' if result.sufficient else 'insufficient'}")
    word = "PASS" if passed else "FAIL"
    lines.insert(0, f"{word}: J_inv and J_inv + I(R;Z) insufficient on scenario {sc.name}, "
                    f"return ratio {ratio:.6f}")
    return PropReport(3, passed, lines)
