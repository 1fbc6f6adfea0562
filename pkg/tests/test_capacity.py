import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphaleak import (
    AlphaDomainError,
    Channel,
    ConvergenceError,
    Joint2,
    Joint3,
    Method,
    Pmf,
    ValidationError,
    conditional_maximal_alpha_leakage,
    grid_oracle_capacity,
    maximal_alpha_leakage,
    shannon_capacity,
    sibson_mi,
    sup_equality_check,
)
from alphaleak.capacity import sibson_gradient, sibson_objective
from alphaleak.experiments import bsc, markov_bsc_joint, xor_side_info_joint, random_joint3

from conftest import make_channel, oracle_mi

# 1 + log2(0.25^2 + 0.75^2), evaluated with the math module
BSC_ALPHA2 = 0.3219280948873623
LOG2_15 = 0.5849625007211562
seeds = st.integers(0, 2**32 - 1)


def _random_instance(seed, kmax=3, mmax=3):
    rng = np.random.default_rng(seed)
    k, m = rng.integers(2, kmax + 1), rng.integers(2, mmax + 1)
    return Pmf.uniform(range(k)), make_channel(rng.dirichlet(np.ones(m), size=k))


class TestExamples:
    def test_uninformative(self):
        ch = Channel.constant(range(3), ["a", "b"])
        for a in (1, 1.5, 2, math.inf):
            assert maximal_alpha_leakage(Pmf.uniform(range(3)), ch, a).value.value == pytest.approx(0, abs=1e-9)

    def test_bsc_alpha2(self, bsc025):
        r = maximal_alpha_leakage(*bsc025, 2)
        assert r.value.value == pytest.approx(BSC_ALPHA2, abs=1e-8)
        assert r.method is Method.SOLVER
        np.testing.assert_allclose(r.argmax_input.probs, [0.5, 0.5], atol=1e-4)

    def test_bsc_infinity(self, bsc025):
        r = maximal_alpha_leakage(*bsc025, "inf")
        assert r.value.value == pytest.approx(LOG2_15, abs=1e-12)
        assert r.method is Method.CLOSED_FORM

    def test_alpha_one_uses_given_input(self):
        px = Pmf([0, 1], [0.1, 0.9])
        ch = bsc(0.25)
        r = maximal_alpha_leakage(px, ch, 1)
        assert r.value.value == pytest.approx(oracle_mi(px.probs, ch.matrix) / math.log(2), abs=1e-12)

    def test_support_restriction(self):
        # Third input is the only informative one but lies outside supp(px)
        ch = make_channel([[0.5, 0.5], [0.5, 0.5], [1.0, 0.0]])
        px = Pmf(range(3), [0.5, 0.5, 0.0])
        for a in (2, math.inf):
            r = maximal_alpha_leakage(px, ch, a)
            assert r.value.value == pytest.approx(0, abs=1e-9)
            assert r.argmax_input.probs[2] == 0

    def test_single_point_support(self):
        r = maximal_alpha_leakage(Pmf.point(range(2), 0), bsc(0.1), 3)
        assert r.value.value == 0.0

    def test_xor_side_info_conditional(self):
        for p in (0.1, 0.25, 0.4):
            j = xor_side_info_joint(p)
            for a in (1, 1.5, 2, 5, math.inf):
                assert conditional_maximal_alpha_leakage(j, a).value.value == pytest.approx(1.0, abs=1e-7)

    def test_markov_bsc_conditional_alpha2(self, mbsc):
        r = conditional_maximal_alpha_leakage(mbsc, 2)
        assert r.value.value == pytest.approx(BSC_ALPHA2, abs=1e-7)
        assert r.argmax_z == 0

    def test_constant_z_matches_unconditional(self):
        rng = np.random.default_rng(4)
        px = Pmf(range(3), rng.dirichlet(np.ones(3)))
        ch = make_channel(rng.dirichlet(np.ones(3), size=3))
        j = Joint3.from_joint2(Joint2.from_channel(px, ch))
        for a in (1.5, 3, math.inf):
            assert conditional_maximal_alpha_leakage(j, a).value.value == pytest.approx(
                maximal_alpha_leakage(px, ch, a).value.value, abs=1e-9)


class TestOracle:
    def test_bsc_resolution_200(self, bsc025):
        g = grid_oracle_capacity([0, 1], bsc025[1], 2)
        assert g.method is Method.GRID_ORACLE
        assert g.value.value == pytest.approx(maximal_alpha_leakage(*bsc025, 2).value.value, abs=1e-3)

    def test_deterministic_channel(self):
        g = grid_oracle_capacity(range(3), Channel.identity(range(3)), 2, resolution=60)
        assert g.value.value == pytest.approx(math.log2(3), abs=1e-12)
        np.testing.assert_allclose(g.argmax_input.probs, [1 / 3] * 3)

    def test_single_letter(self):
        assert grid_oracle_capacity([1], bsc(0.2), 2).value.value == pytest.approx(0, abs=1e-12)

    def test_limits(self):
        ch = Channel.identity(range(5))
        with pytest.raises(ValidationError):
            grid_oracle_capacity(range(5), ch, 2)
        with pytest.raises(ValidationError):
            grid_oracle_capacity(range(2), ch, 2, resolution=10)

    @settings(max_examples=25, deadline=None)
    @given(seeds, st.sampled_from([1.2, 2, 5, 20]))
    def test_solver_agrees_with_oracle(self, seed, a):
        px, ch = _random_instance(seed)
        solved = maximal_alpha_leakage(px, ch, a).value.value
        grid = grid_oracle_capacity(px.labels, ch, a, resolution=400).value.value
        assert grid <= solved + 1e-9
        assert solved - grid <= 5e-3

    def test_sup_equality(self, bsc025):
        assert abs(sup_equality_check([0, 1], bsc025[1], 2).difference) < 1e-3
        assert sup_equality_check([0, 1], bsc025[1], 1).difference == 0.0
        rng = np.random.default_rng(8)
        ch = make_channel(rng.dirichlet(np.ones(3), size=3))
        assert abs(sup_equality_check(range(3), ch, 5).difference) < 1e-3


class TestSolverProperties:
    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_monotone_in_alpha(self, seed):
        px, ch = _random_instance(seed, 4, 4)
        vals = [maximal_alpha_leakage(px, ch, a, tol=1e-11).value.value for a in (1.1, 1.5, 2, 3, 5, 10, 50)]
        vals.append(maximal_alpha_leakage(px, ch, math.inf).value.value)
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_endpoints(self, seed):
        px, ch = _random_instance(seed, 4, 4)
        near_one = maximal_alpha_leakage(px, ch, 1 + 1e-4).value.value
        assert near_one == pytest.approx(shannon_capacity(ch).value.value, abs=1e-3)
        big = maximal_alpha_leakage(px, ch, 1e4).value.value
        assert big == pytest.approx(maximal_alpha_leakage(px, ch, "inf").value.value, abs=1e-3)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from([1.3, 2, 7]))
    def test_certificate(self, seed, a):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 5))
        probs = rng.dirichlet(np.ones(k))
        probs[rng.integers(k)] = 0.0 if k > 2 else probs[0]
        px = Pmf(range(k), probs / probs.sum())
        ch = make_channel(rng.dirichlet(np.ones(3), size=k))
        tol = 1e-8
        r = maximal_alpha_leakage(px, ch, a, tol=tol)
        assert 0 <= r.certificate_gap <= tol
        q = r.argmax_input.probs
        assert np.all(q[px.probs == 0] == 0)
        # recompute the Frank-Wolfe gap from the public gradient, in bits
        rows = px.probs > 0
        g = sibson_gradient(q[rows], ch.matrix[rows], a)
        gap = (g.max() - g @ q[rows]) / math.log(2)
        assert gap <= tol * (1 + 1e-6)
        assert r.value.value == pytest.approx(sibson_mi(r.argmax_input, ch, a).value, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_conditional_invariants(self, seed):
        rng = np.random.default_rng(seed)
        j = random_joint3(rng, 3, 3, 3)
        r = conditional_maximal_alpha_leakage(j, 2)
        vals = [res.value.value for res in r.per_z.values()]
        assert r.value.value == max(vals)
        assert r.per_z[r.argmax_z].value.value == r.value.value
        assert all(v <= r.value.value for v in vals)

    def test_argmax_z_tie_goes_first(self):
        j = markov_bsc_joint(0.25, 0.5)
        assert conditional_maximal_alpha_leakage(j, 2).argmax_z == 0

    def test_alpha_one_conditional_has_no_breakdown(self, mbsc):
        r = conditional_maximal_alpha_leakage(mbsc, 1)
        assert r.argmax_z is None and r.per_z == {}
        assert r.value.value == pytest.approx(0.14315587846583178, abs=1e-12)

    def test_deterministic(self):
        px, ch = _random_instance(99, 4, 4)
        a = maximal_alpha_leakage(px, ch, 3)
        b = maximal_alpha_leakage(px, ch, 3)
        assert a.value.value == b.value.value
        np.testing.assert_array_equal(a.argmax_input.probs, b.argmax_input.probs)


class TestGradient:
    @settings(max_examples=50, deadline=None)
    @given(seeds, st.sampled_from([1.2, 2, 5]))
    def test_central_differences(self, seed, a):
        rng = np.random.default_rng(seed)
        k, m = rng.integers(2, 5, size=2)
        W = rng.dirichlet(np.ones(m), size=k)
        p = rng.dirichlet(np.ones(k))
        g = sibson_gradient(p, W, a)
        h = 1e-6
        for x in range(k):
            e = np.zeros(k)
            e[x] = h
            fd = (sibson_objective(p + e, W, a) - sibson_objective(p - e, W, a)) / (2 * h)
            assert fd == pytest.approx(g[x], rel=1e-5)


class TestErrors:
    def test_alpha_below_one(self, bsc025):
        with pytest.raises(AlphaDomainError):
            maximal_alpha_leakage(*bsc025, 0.5)
        with pytest.raises(AlphaDomainError):
            conditional_maximal_alpha_leakage(markov_bsc_joint(0.25, 0.25), 0.9)

    def test_bad_tol(self, bsc025):
        with pytest.raises(ValueError):
            maximal_alpha_leakage(*bsc025, 2, tol=0)

    def test_iteration_cap(self):
        rng = np.random.default_rng(1)
        px = Pmf.uniform(range(4))
        ch = make_channel(rng.dirichlet(np.ones(4), size=4))
        with pytest.raises(ConvergenceError) as info:
            maximal_alpha_leakage(px, ch, 1.5, tol=1e-15, max_iter=2)
        assert info.value.iterations >= 1
        assert info.value.gap > 0
