import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leadersel.coherence import SystemContext, TraceSetFunction
from leadersel.errors import CombinatorialCapError, UnstableGainsError
from leadersel.graphs import build_graph, unit_kappa
from leadersel.linalg import Tolerances
from leadersel.selection import (
    certify_bound,
    check_monotone_submodular,
    exhaustive_select,
    greedy_select,
)
from leadersel.stability import auto_gains
from leadersel.system import GainVector

from conftest import graphs, random_connected_graph

K2 = build_graph(2, [(0, 1, 1.0)])
P3 = build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])


def context_for(graph, m, gains=None):
    kappa = unit_kappa(graph.n)
    if gains is None:
        gains = auto_gains(graph, kappa, m)
    return SystemContext(graph=graph, kappa=kappa, gains=gains)


# -- published single-leader picks ------------------------------------------------

def test_six_node_first_order_pick(six_node):
    ctx = context_for(six_node.graph, 1)
    result = greedy_select(ctx, 1)
    assert six_node.to_label(result.chosen[0]) == 2


@pytest.mark.parametrize("m", [2, 3])
def test_six_node_higher_order_pick(six_node, m):
    ctx = context_for(six_node.graph, m)
    result = greedy_select(ctx, 1)
    assert six_node.to_label(result.chosen[0]) == 4


def test_six_node_order_divergence(six_node):
    """The best single leader moves between first and higher orders."""
    first = exhaustive_select(context_for(six_node.graph, 1), 1).chosen[0]
    second = exhaustive_select(context_for(six_node.graph, 2), 1).chosen[0]
    third = exhaustive_select(context_for(six_node.graph, 3), 1).chosen[0]
    assert six_node.to_label(first) == 2
    assert six_node.to_label(second) == six_node.to_label(third) == 4
    assert first != second


def test_path_first_order_middle_node():
    ctx = context_for(P3, 1, gains=GainVector.of(1.0))
    result = greedy_select(ctx, 1)
    assert result.chosen == (1,)
    assert result.h_values[0] == pytest.approx(2.5, rel=1e-12)
    # end nodes are strictly worse
    assert ctx.coherence([0]) == pytest.approx(3.0, rel=1e-12)


def test_k2_symmetric_tie_breaks_to_smaller_id():
    ctx = context_for(K2, 2, gains=GainVector.of(1, 1))
    greedy = greedy_select(ctx, 1)
    exact = exhaustive_select(ctx, 1)
    assert greedy.chosen == exact.chosen == (0,)
    assert greedy.h_values[0] == pytest.approx(3.5, rel=1e-12)


# -- greedy behaviour ---------------------------------------------------------------

def test_greedy_trajectories_are_monotone(six_node):
    ctx = context_for(six_node.graph, 2)
    result = greedy_select(ctx, 4)
    assert list(result.f_values) == sorted(result.f_values)
    assert list(result.h_values) == sorted(result.h_values, reverse=True)
    assert len(result.chosen) <= 4


def test_greedy_rejects_bad_budget(six_node):
    with pytest.raises(ValueError):
        greedy_select(context_for(six_node.graph, 2), 0)


def test_greedy_rejects_unstable_gains():
    ctx = context_for(K2, 3, gains=GainVector.of(1, 1, 1))  # a*lambda_min < 1
    with pytest.raises(UnstableGainsError):
        greedy_select(ctx, 1)


def test_greedy_counts_evaluations(six_node):
    n = six_node.graph.n
    result = greedy_select(context_for(six_node.graph, 2), 2)
    assert result.evaluations == n + (n - 1)


def test_greedy_budget_beyond_n_selects_everything():
    ctx = context_for(P3, 2, gains=GainVector.of(1, 1))
    result = greedy_select(ctx, 10)
    assert set(result.chosen) == {0, 1, 2}


@given(graphs(min_nodes=3, max_nodes=9), st.integers(2, 4), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_incremental_greedy_equals_naive(g, m, k):
    ctx = context_for(g, m)
    fast = greedy_select(ctx, k, incremental=True)
    slow = greedy_select(ctx, k, incremental=False)
    assert fast.chosen == slow.chosen
    np.testing.assert_allclose(fast.f_values, slow.f_values, rtol=1e-9)
    np.testing.assert_allclose(fast.h_values, slow.h_values, rtol=1e-9)


# -- exhaustive search ---------------------------------------------------------------

def test_exhaustive_equals_greedy_for_k1(six_node):
    for m in (1, 2, 3, 4):
        ctx = context_for(six_node.graph, m)
        assert exhaustive_select(ctx, 1).chosen == greedy_select(ctx, 1).chosen


def test_exhaustive_respects_cap(six_node):
    tols = Tolerances(subset_cap=5)
    with pytest.raises(CombinatorialCapError):
        exhaustive_select(context_for(six_node.graph, 2), 3, tols=tols)


def test_exhaustive_prefers_smaller_subsets_on_budget():
    ctx = context_for(K2, 2, gains=GainVector.of(1, 1))
    result = exhaustive_select(ctx, 2)
    assert result.chosen == (0, 1)  # two leaders strictly beat one here


# -- the greedy guarantee ---------------------------------------------------------------

def test_certificate_ratio_zero_for_k1(six_node):
    for m in (1, 2, 3, 4):
        cert = certify_bound(context_for(six_node.graph, m), 1)
        assert cert.ratio == 0.0
        assert cert.holds


def test_certificate_single_node_graph_degenerate():
    single = build_graph(1, [])
    cert = certify_bound(context_for(single, 2, gains=GainVector.of(1, 1)), 1)
    assert cert.ratio == 0.0
    assert cert.holds


def test_certificate_holds_on_random_instances():
    rng = np.random.default_rng(23)
    for _ in range(6):
        n = int(rng.integers(4, 9))
        g = random_connected_graph(rng, n)
        m = int(rng.integers(1, 5))
        k = int(rng.integers(1, 4))
        cert = certify_bound(context_for(g, m), k)
        assert cert.holds
        assert cert.ratio <= 1.0 / math.e + 1e-12
        assert cert.coherence_greedy <= cert.coherence_bound * (1 + 1e-12)


# -- structural property checks -----------------------------------------------------------

@pytest.mark.parametrize("m", [2, 3, 4])
def test_no_violations_exhaustive_random_graphs(m):
    rng = np.random.default_rng(m)
    for _ in range(3):
        n = int(rng.integers(4, 8))
        g = random_connected_graph(rng, n)
        violations = check_monotone_submodular(context_for(g, m), mode="exhaustive")
        assert violations == []


def test_no_violations_sampled_mode(six_node):
    ctx = context_for(six_node.graph, 3)
    assert check_monotone_submodular(ctx, mode="sampled", samples=150, seed=5) == []


def test_trivial_pair_identity(six_node):
    # f(A) + f(A) = f(A|A) + f(A&A) exactly; never a violation
    ctx = context_for(six_node.graph, 2)
    violations = check_monotone_submodular(ctx, mode="sampled", samples=1, seed=0)
    assert violations == []


def test_generalized_product_form_clean():
    rng = np.random.default_rng(41)
    g = random_connected_graph(rng, 6)
    lam_floor = min(
        np.linalg.eigvalsh(
            context_for(g, 1, gains=GainVector.of(1.0)).grounded([v])
        )[0]
        for v in range(6)
    )
    b2 = 2.0 / lam_floor  # guarantees b2 * lambda_min > b3 = 1
    fn = TraceSetFunction(g, unit_kappa(6), "product", b1=1.3, b2=b2, b3=1.0)
    violations = check_monotone_submodular(value_fn=fn.value, n=6, mode="exhaustive")
    assert violations == []


def test_generalized_fourth_order_form_clean():
    rng = np.random.default_rng(42)
    g = random_connected_graph(rng, 6)
    lam_floor = min(
        np.linalg.eigvalsh(
            context_for(g, 1, gains=GainVector.of(1.0)).grounded([v])
        )[0]
        for v in range(6)
    )
    gap = 2.0 / lam_floor  # (b1 - b2) * lambda_min = 2 > 1
    fn = TraceSetFunction(g, unit_kappa(6), "fourth_order", b1=gap + 1.0, b2=1.0)
    violations = check_monotone_submodular(value_fn=fn.value, n=6, mode="exhaustive")
    assert violations == []


def test_exhaustive_mode_rejects_large_graphs():
    rng = np.random.default_rng(0)
    g = random_connected_graph(rng, 9)
    with pytest.raises(CombinatorialCapError):
        check_monotone_submodular(context_for(g, 2), mode="exhaustive")
