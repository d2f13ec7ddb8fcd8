import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import optimal_values_by_enumeration, return_law_by_dp
from repsuff.mdp import make_mdp, q_star, uniform_policy
from repsuff.representation import BlockPartition, enumerate_partitions
from repsuff.scenarios import random_mdp
from repsuff.sufficiency import (SweepContext, aliased_policy_return, check_pi_sufficiency,
                                 check_q_sufficiency, check_return_identity, check_sufficiency,
                                 maximizer_set, objective_sufficiency, return_distribution)

ALIAS_03 = BlockPartition(((0, 3), (1,), (2,)))
ALIAS_01 = BlockPartition(((0, 1), (2,), (3,)))
ALIAS_12 = BlockPartition(((0,), (1, 2), (3,)))
JINV_ALIAS = BlockPartition(((0, 1), (2,), (3,), (4,), (5,)))


def duplicate_state_mdp():
    # s2 is a bit-identical copy of s1
    t = np.zeros((3, 2, 3))
    t[0, 0, 1] = t[0, 1, 2] = 1.0
    t[1, 0, 0] = t[2, 0, 0] = 1.0
    t[1, 1] = t[2, 1] = [0.5, 0.25, 0.25]
    return make_mdp(t, [1.0, 0.0, 0.0])


def test_identity_is_q_sufficient(jstate, jinv):
    for sc in (jstate, jinv):
        assert check_q_sufficiency(sc.mdp, BlockPartition.identity(sc.mdp.n_states)).ok


def test_jstate_alias_not_q_sufficient(jstate):
    check = check_q_sufficiency(jstate.mdp, ALIAS_03)
    assert not check.ok
    w = {(x.s1, x.s2, x.action) for x in check.witnesses}
    assert (0, 3, 0) in w
    # Q*(s0,a0) - Q*(s3,a0) is -1 exactly: the pair swaps which action pays
    q = q_star(jstate.mdp).values
    assert q[3, 0] - q[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_duplicate_states_q_sufficient():
    mdp = duplicate_state_mdp()
    assert check_q_sufficiency(mdp, BlockPartition(((0,), (1, 2)))).ok


def test_zero_reward_always_pi_sufficient(jstate):
    mdp = jstate.mdp.with_rewards(np.zeros(4))
    for p in enumerate_partitions(4):
        assert check_pi_sufficiency(mdp, p).ok


def test_jinv_alias_argmax_disjoint(jinv):
    check = check_pi_sufficiency(jinv.mdp, JINV_ALIAS)
    assert not check.ok
    assert [(w.s1, w.s2) for w in check.witnesses] == [(0, 1)]
    assert "[0] and [1]" in check.witnesses[0].detail


def test_pi_but_not_q_sufficient(jstate):
    v = check_sufficiency(jstate.mdp, ALIAS_01)
    assert v.pi_sufficient and not v.q_sufficient


def test_equal_dynamics_alias_is_q_sufficient(jstate):
    # s1 and s2 share outgoing dynamics; their own rewards never enter their Q rows
    v = check_sufficiency(jstate.mdp, ALIAS_12)
    assert v.pi_sufficient and v.q_sufficient


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 5), m=st.integers(1, 3))
def test_q_implies_pi(seed, n, m):
    mdp = random_mdp(seed, n, m)
    q = q_star(mdp)
    for p in enumerate_partitions(n):
        v = check_sufficiency(mdp, p, q=q)
        assert not v.q_sufficient or v.pi_sufficient


def test_q_sufficiency_matches_enumeration_oracle(jinv):
    mdp = jinv.mdp
    _, q = optimal_values_by_enumeration(np.array(mdp.transitions), np.array(mdp.rewards),
                                         mdp.discount)
    for p in enumerate_partitions(6):
        expect = all(np.abs(q[i] - q[j]).max() <= 1e-9
                     for b in p.blocks for i in b for j in b)
        assert check_q_sufficiency(mdp, p).ok == expect


def test_maximizer_sets(jstate, jinv):
    fwd = maximizer_set(jstate.mdp, None, "fwd")
    assert BlockPartition.identity(4).index in fwd
    assert jstate.designated.index not in fwd
    assert jstate.designated.index in maximizer_set(jstate.mdp, None, "state")
    for obj in ("inv", "inv+r"):
        assert jinv.designated.index in maximizer_set(jinv.mdp, None, obj)


def test_objective_sufficiency(jstate, jinv):
    res = objective_sufficiency(jstate.mdp, None, "state")
    assert not res.sufficient
    assert any(r.partition == jstate.designated for r in res.reports)
    assert not objective_sufficiency(jinv.mdp, None, "inv").sufficient
    assert objective_sufficiency(jstate.mdp, None, "fwd").sufficient


def test_aliased_return_examples(jstate, jinv):
    assert aliased_policy_return(jstate.mdp, BlockPartition.identity(4)).normalized == pytest.approx(1.0, abs=1e-12)
    assert aliased_policy_return(jstate.mdp, ALIAS_03).normalized == pytest.approx(0.5, abs=1e-12)
    assert aliased_policy_return(jinv.mdp, JINV_ALIAS).normalized == pytest.approx(0.5, abs=1e-12)


def test_aliased_return_degenerate(jstate):
    mdp = jstate.mdp.with_rewards(np.zeros(4))
    res = aliased_policy_return(mdp, ALIAS_03)
    assert res.degenerate and res.normalized == 1.0 and res.optimal == 0.0


def test_aliased_return_nan_when_optimum_is_zero():
    # staying put is worth 0 in s0 and s1, but they stay with different actions
    t = np.zeros((3, 2, 3))
    t[0, 0, 0] = t[0, 1, 2] = 1.0
    t[1, 0, 2] = t[1, 1, 1] = 1.0
    t[2, :, :2] = 0.5
    mdp = make_mdp(t, [0.0, 0.0, -1.0])
    res = aliased_policy_return(mdp, BlockPartition(((0, 1), (2,))))
    assert res.degenerate and res.optimal == pytest.approx(0.0, abs=1e-12)
    assert res.achieved < 0 and math.isnan(res.normalized)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 5), m=st.integers(1, 3))
def test_return_ratio_bounds(seed, n, m):
    mdp = random_mdp(seed, n, m)
    ctx = SweepContext(mdp)
    ident = ctx.aliased_return(BlockPartition.identity(n)).normalized
    assert ident == pytest.approx(1.0, abs=1e-9)
    for p in enumerate_partitions(n):
        ratio = ctx.aliased_return(p).normalized
        assert ratio <= ident + 1e-9
        if ctx.verdict(p).q_sufficient:
            assert ratio == pytest.approx(1.0, abs=1e-9)


def test_q_sufficient_partitions_score_one(jstate):
    ctx = SweepContext(jstate.mdp)
    for p in enumerate_partitions(4):
        if ctx.verdict(p).q_sufficient:
            assert ctx.aliased_return(p).normalized == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("sa", [(0, 0), (0, 1), (2, 1), (5, 0)])
@pytest.mark.parametrize("horizon", [1, 2, 3])
def test_return_distribution_matches_dp(jinv, sa, horizon):
    mdp = jinv.mdp
    pol = uniform_policy(mdp)
    dist = return_distribution(mdp, pol, *sa, horizon)
    law = return_law_by_dp(np.array(mdp.transitions), np.array(mdp.rewards), pol,
                           mdp.discount, *sa, horizon)
    got = {round(float(v), 12): float(p) for v, p in zip(dist.support, dist.probs)}
    assert set(got) == set(law)
    for v in law:
        assert got[v] == pytest.approx(law[v], abs=1e-12)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 4), m=st.integers(1, 2),
       horizon=st.integers(1, 3))
def test_return_distribution_random_matches_dp(seed, n, m, horizon):
    mdp = random_mdp(seed, n, m)
    pol = uniform_policy(mdp)
    dist = return_distribution(mdp, pol, 0, 0, horizon)
    law = return_law_by_dp(np.array(mdp.transitions), np.array(mdp.rewards), pol,
                           mdp.discount, 0, 0, horizon)
    assert dist.mean() == pytest.approx(sum(v * p for v, p in law.items()), abs=1e-9)
    assert np.all(np.diff(dist.support) > 1e-12)


def test_return_distribution_trivia(jstate):
    mdp = jstate.mdp
    zero = return_distribution(mdp.with_rewards(np.zeros(4)), None, 0, 0, 3)
    assert list(zero.support) == [0.0] and list(zero.probs) == [1.0]
    one = return_distribution(mdp, None, 0, 1, 1)
    np.testing.assert_allclose(one.support, [0.9])
    two = return_distribution(mdp, None, 0, 1, 2)
    np.testing.assert_allclose(two.support, [0.9])
    np.testing.assert_allclose(two.probs, [1.0])


def test_return_distribution_guard(noise):
    with pytest.raises(ValueError, match="trajectories"):
        return_distribution(noise.mdp, None, 0, 0, 8)


def test_identity_check_examples(jstate, jinv, noise):
    assert check_return_identity(jstate.mdp, BlockPartition.identity(4), horizon=3).max_deviation == 0.0
    assert check_return_identity(noise.mdp, noise.designated, horizon=3).passed
    bad = check_return_identity(jinv.mdp, jinv.designated, horizon=2)
    assert not bad.passed and bad.max_deviation >= 0.1


def test_identity_breakage_diagnostic(capsys):
    """Non-maximizers of J_fwd that fail Q*-sufficiency: does the identity break by H=4?

    Breakage is not guaranteed for these partitions, so this only records counts.
    """
    failing, broken = 0, 0
    for seed in range(10):
        mdp = random_mdp(seed, 3, 2)
        ctx = SweepContext(mdp)
        winners = maximizer_set(mdp, None, "fwd")
        for p in enumerate_partitions(3):
            if p.index in winners or ctx.verdict(p).q_sufficient:
                continue
            failing += 1
            if any(not check_return_identity(mdp, p, horizon=h).passed for h in range(1, 5)):
                broken += 1
    with capsys.disabled():
        print(f"\n[diagnostic] {broken}/{failing} insufficient non-maximizers break the return identity")
    assert broken <= failing
