import math

import numpy as np
import pytest

from alphaleak import (
    AlphaDomainError,
    Channel,
    LabelMismatchError,
    Pmf,
    ValidationError,
    conditional_maximal_alpha_leakage,
    marginalize,
    maximal_alpha_leakage,
)
from alphaleak.experiments import (
    TrialConfig,
    TrialReport,
    WitnessConfig,
    appendix_witness_lower_bound,
    bsc,
    bsc_closed_forms,
    composition_terms,
    markov_bsc_joint,
    xor_side_info_joint,
    make_markov_joint,
    random_joint3,
    verify_bsc,
    verify_composition_conjecture,
    verify_counterexample_nonmarkov,
    verify_robustness_theorem,
    verify_sibson_dpi,
    verify_conditional_leakage_identity,
    verify_witness,
    witness_config,
)
from alphaleak.prob_core import Alpha, Joint3

# H(0.375) - H(0.25) and 1 - H(0.25), from a standalone math-module script
MBSC_ALPHA1 = 0.14315587846583178
BSC_ALPHA1 = 0.18872187554086717
BSC_ALPHA2 = 0.3219280948873623
LOG2_18 = 0.8479969065549501


class TestReportSemantics:
    def test_le(self):
        r = TrialReport("s", "<=", 0, 1e-7)
        r.add(0, Alpha(2), 1.0, 1.0 + 1e-8)
        r.add(1, Alpha(2), 1.0 + 2e-7, 1.0)
        assert r.violations == 1
        assert r.max_violation == pytest.approx(2e-7)
        assert not r.ok

    def test_strict(self):
        r = TrialReport("s", "<", None, 1e-9)
        r.add(0, Alpha(2), 0.5, 1.0)
        r.add(1, Alpha(2), 1.0, 1.0)
        assert r.violations == 1

    def test_dict_schema(self):
        r = TrialReport("s", "==", 3, 1e-6)
        r.add(0, Alpha(math.inf), 1.0, 1.0)
        d = r.to_dict(per_trial=True)
        for key in ("trials", "alpha", "violations", "max_violation", "seed", "per_trial"):
            assert key in d
        assert d["alpha"] == ["inf"]
        assert "per_trial" not in r.to_dict()

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            TrialConfig(x_size=0)
        with pytest.raises(ValidationError):
            TrialConfig(trials=0)


class TestReproducibility:
    @pytest.mark.parametrize("verifier", [verify_robustness_theorem, verify_sibson_dpi, verify_conditional_leakage_identity,
                                          verify_composition_conjecture])
    def test_same_seed_same_report(self, verifier):
        cfg = TrialConfig(trials=15, seed=42, alphas=(1, 2, math.inf))
        a, b = verifier(cfg).to_dict(per_trial=True), verifier(cfg).to_dict(per_trial=True)
        assert a == b

    def test_different_seed_differs(self):
        a = verify_sibson_dpi(TrialConfig(trials=5, seed=1, alphas=(2,))).to_dict(per_trial=True)
        b = verify_sibson_dpi(TrialConfig(trials=5, seed=2, alphas=(2,))).to_dict(per_trial=True)
        assert a["per_trial"] != b["per_trial"]


class TestTheoremSuites:
    def test_robustness_small_run(self):
        r = verify_robustness_theorem(TrialConfig(trials=60, seed=7, x_size=3, y_size=3, z_size=3))
        assert r.violations == 0 and not r.failures

    def test_dpi_small_run(self):
        r = verify_sibson_dpi(TrialConfig(trials=80, seed=7, alphas=(0.5, 1, 2, 10, math.inf), tol=1e-9))
        assert r.violations == 0

    def test_identity_small_run(self):
        r = verify_conditional_leakage_identity(TrialConfig(trials=80, seed=3, x_size=3, y_size=2, z_size=3, tol=1e-9))
        assert r.violations == 0

    def test_markov_bsc_robustness_values(self):
        j = markov_bsc_joint(0.25, 0.25)
        px, ch = marginalize(j, "XY").split()
        cond = conditional_maximal_alpha_leakage(j, 1).value.value
        uncond = maximal_alpha_leakage(px, ch, 1).value.value
        assert cond == pytest.approx(MBSC_ALPHA1, abs=1e-12)
        assert uncond == pytest.approx(BSC_ALPHA1, abs=1e-12)

    def test_independent_side_info_equality(self):
        j = markov_bsc_joint(0.25, 0.5)
        px, ch = marginalize(j, "XY").split()
        for a in (1, 1.5, 2, 5, math.inf):
            assert conditional_maximal_alpha_leakage(j, a).value.value == pytest.approx(
                maximal_alpha_leakage(px, ch, a).value.value, abs=1e-7)

    def test_dpi_trivial_postprocessing(self):
        rng = np.random.default_rng(0)
        px = Pmf(range(3), rng.dirichlet(np.ones(3)))
        W = rng.dirichlet(np.ones(3), size=3)
        from alphaleak import sibson_mi

        ch = Channel(range(3), range(3), W)
        assert sibson_mi(px, Channel(range(3), range(3), W @ np.eye(3)), 2).value == sibson_mi(px, ch, 2).value
        const = Channel(range(3), ["c"], W @ np.ones((3, 1)))
        assert sibson_mi(px, const, 2).value == pytest.approx(0, abs=1e-12)


class TestCounterexample:
    def test_grid(self):
        r = verify_counterexample_nonmarkov()
        assert r.violations == 0
        for rec in r.records:
            assert rec.rhs == pytest.approx(1.0, abs=1e-7)

    def test_named_values(self):
        r = verify_counterexample_nonmarkov(p_grid=(0.25, 0.1), alphas=(2, math.inf))
        vals = {(rec.trial, str(rec.alpha)): rec.lhs for rec in r.records}
        assert vals[(0, "2")] == pytest.approx(BSC_ALPHA2, abs=1e-8)
        assert vals[(1, "inf")] == pytest.approx(LOG2_18, abs=1e-12)

    def test_pure_noise_at_half(self):
        j = xor_side_info_joint(0.5)
        px, ch = marginalize(j, "XY").split()
        assert maximal_alpha_leakage(px, ch, 1).value.value == pytest.approx(0, abs=1e-12)
        assert conditional_maximal_alpha_leakage(j, 1).value.value == pytest.approx(1, abs=1e-12)


class TestComposition:
    def test_constant_z(self):
        rng = np.random.default_rng(2)
        t = rng.dirichlet(np.ones(4)).reshape(2, 2, 1)
        j = Joint3(range(2), range(2), ["c"], t)
        for a in (1, 2, math.inf):
            lhs, rhs = composition_terms(j, a)
            assert lhs == pytest.approx(rhs, abs=1e-7)

    def test_constant_y(self):
        rng = np.random.default_rng(2)
        t = rng.dirichlet(np.ones(4)).reshape(2, 1, 2)
        j = Joint3(range(2), ["c"], range(2), t)
        for a in (1, 2, math.inf):
            lhs, rhs = composition_terms(j, a)
            assert lhs == pytest.approx(rhs, abs=1e-7)

    def test_experimental_flag(self):
        r = verify_composition_conjecture(TrialConfig(trials=10, alphas=(1, 2, math.inf)))
        assert r.experimental
        assert r.to_dict()["experimental"] is True


class TestBscTable:
    def test_default_grid(self):
        rows = bsc_closed_forms(0.25, 0.25, [1, 2, math.inf])
        got = [r.unconditional_closed for r in rows]
        np.testing.assert_allclose(got, [BSC_ALPHA1, BSC_ALPHA2, 0.5849625007211562], atol=1e-12)
        assert all(r.max_abs_diff <= 1e-6 for r in rows)

    def test_q_zero(self):
        for r in bsc_closed_forms(0.25, 0.0, [1, 2, math.inf]):
            assert r.conditional_closed == 0.0
            assert r.conditional_solver == pytest.approx(0, abs=1e-9)

    def test_q_half_alpha_one(self):
        r = bsc_closed_forms(0.25, 0.5, [1])[0]
        assert r.conditional_closed == pytest.approx(r.unconditional_closed, abs=1e-12)

    def test_bad_p(self):
        with pytest.raises(ValidationError):
            bsc_closed_forms(0.6, 0.1, [2])

    def test_verify_bsc(self):
        assert verify_bsc().violations == 0


class TestWitness:
    def test_unit_blocks_cross_check(self):
        j = random_joint3(np.random.default_rng(12), 2, 2, 2)
        z_star = conditional_maximal_alpha_leakage(j, 2).argmax_z
        k = j.z_labels.index(z_star)
        xs = [x for x, v in zip(j.x_labels, j.tensor.sum(axis=1)[:, k]) if v > 0]
        w = WitnessConfig(1, {x: 1 for x in xs})
        b = appendix_witness_lower_bound(j, 2, w)
        assert b.direct is not None
        assert b.value.value == pytest.approx(b.direct.value, abs=1e-10)

    def test_markov_bsc_sizes(self, mbsc):
        w = witness_config(mbsc, 2, 100)
        assert w.per_x_sizes == {0: 9, 1: 1}

    def test_markov_bsc_convergence(self, mbsc):
        target = conditional_maximal_alpha_leakage(mbsc, 2).value.value
        vals = []
        for u0 in (10**2, 10**4, 10**6):
            b = appendix_witness_lower_bound(mbsc, 2, witness_config(mbsc, 2, u0))
            if b.direct is not None:
                assert b.value.value == pytest.approx(b.direct.value, abs=1e-10)
            vals.append(b.value.value)
        assert vals == sorted(vals)
        assert vals[-1] <= target + 1e-8
        assert target - vals[-1] < 1e-2

    def test_induced_input_near_uniform(self, mbsc):
        b = appendix_witness_lower_bound(mbsc, 2, witness_config(mbsc, 2, 10**6))
        np.testing.assert_allclose(b.induced_input.probs, [0.5, 0.5], atol=1e-12)

    def test_rejects_endpoint_orders(self, mbsc):
        w = WitnessConfig(10, {0: 1, 1: 1})
        for a in (1, math.inf):
            with pytest.raises(AlphaDomainError):
                appendix_witness_lower_bound(mbsc, a, w)

    def test_key_mismatch(self, mbsc):
        with pytest.raises(LabelMismatchError):
            appendix_witness_lower_bound(mbsc, 2, WitnessConfig(10, {0: 1}))

    def test_sizes_positive(self):
        with pytest.raises(ValidationError):
            WitnessConfig(0, {0: 1})

    def test_verify_witness(self):
        r = verify_witness()
        assert r.violations == 0
        lhs = [rec.lhs for rec in r.records]
        assert lhs == sorted(lhs)


def test_markov_joint_matches_markov_bsc(mbsc):
    xs = [0, 1]
    j = make_markov_joint(Pmf.uniform(xs), bsc(0.25), bsc(0.25))
    np.testing.assert_allclose(j.tensor, mbsc.tensor)
