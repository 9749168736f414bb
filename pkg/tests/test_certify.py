"""Certificate tests: the exact linear condition against direct evaluation,
the smooth condition's soundness on quadratic models with a known constant,
reductions between the two, the line-search oracle, robustness probability,
and empirical smoothness estimation."""

import math

import numpy as np
import pytest

from stochcert import (
    AttackSpec,
    NoiseSpec,
    Seed,
    boundary_line_search,
    cosine_alignment,
    deterministic_distance,
    empirical_lipschitz,
    fgm_l2,
    linear_certificate,
    make_linear_gaussian,
    make_quadratic,
    mc_predict,
    quadratic_smoothness,
    r_linear,
    r_smooth,
    robustness_probability,
    sample_params,
    smooth_certificate,
    split_seed,
)


class TestCosineAlignment:
    def test_antiparallel(self):
        g = np.array([2.0, 1.0])
        assert cosine_alignment(g, -g) == -1.0

    def test_orthogonal(self):
        assert cosine_alignment(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_diagonal(self):
        got = cosine_alignment(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
        assert got == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            cosine_alignment(np.zeros(2), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            cosine_alignment(np.array([1.0, 0.0]), np.zeros(2))

    def test_clamped_against_rounding(self):
        g = np.array([1e-8, 1.0, 1e300 * 0.0])
        c = cosine_alignment(g, 3.0 * g)
        assert -1.0 <= c <= 1.0


class TestRFormulas:
    def test_linear_infinite_when_aligned(self):
        assert r_linear(2.0, 0.5) == math.inf
        assert r_linear(2.0, 0.0) == math.inf

    def test_linear_plug_in(self):
        # margin 2, grad norm 1, cosine -1 -> distance 2
        assert r_linear(2.0, -1.0) == pytest.approx(2.0)

    def test_linear_monotone_in_margin_and_slope(self, rng):
        for _ in range(200):
            margin = rng.uniform(0.1, 5.0)
            dd = -rng.uniform(0.01, 3.0)
            assert r_linear(margin * 1.5, dd) > r_linear(margin, dd)
            assert r_linear(margin, dd * 1.5) < r_linear(margin, dd)

    def test_smooth_infinite_branch(self):
        assert r_smooth(2.0, 0.3, 0.5, 0.1) == math.inf

    def test_smooth_plug_in(self):
        # margin 2, dd = -1, L = 0.5, ||delta|| = 1 -> V = -1.5, r = 4/3
        assert r_smooth(2.0, -1.0, 0.5, 1.0) == pytest.approx(4.0 / 3.0)

    def test_smooth_never_larger_with_more_l(self, rng):
        for _ in range(200):
            margin = rng.uniform(0.1, 4.0)
            dd = rng.uniform(-2.0, 2.0)
            dn = rng.uniform(0.1, 2.0)
            l_small, l_big = sorted(rng.uniform(0.0, 3.0, size=2))
            assert r_smooth(margin, dd, l_big, dn) <= r_smooth(margin, dd, l_small, dn)


def certified_binary_setup():
    """Deterministic binary linear model: margin 2, grad norm 1, cos = -1."""
    # f_0 - f_1 = u . x + 2 with u = (1, 0) at x = 0: margin 2, gradient u
    w = np.array([[0.5, 0.0], [-0.5, 0.0]])
    model = make_linear_gaussian(2, 2, w, 0.0, mu_b=np.array([2.0, 0.0]))
    return model, np.array([0.0, 0.0])


class TestLinearCertificate:
    def test_all_nonnegative_cosines_certify_any_budget(self, seed):
        model, x = certified_binary_setup()
        sset = sample_params(model, seed, 4, role="inference")
        delta = np.array([1e6, 0.0])  # along +gradient: cosine +1
        cert = linear_certificate(model, x, 0, sset, delta)
        assert cert.r_min == math.inf
        assert cert.certified

    def test_plug_in_matches_deterministic_distance(self, seed):
        model, x = certified_binary_setup()
        sset = sample_params(model, seed, 4, role="inference")
        delta = np.array([-1.5, 0.0])  # against the margin gradient: cos -1
        cert = linear_certificate(model, x, 0, sset, delta)
        # margin 2, grad norm 1, cos -1: r = 2 > 1.5
        assert cert.r_min == pytest.approx(2.0, rel=1e-12)
        assert cert.certified
        assert deterministic_distance(model, x, 0) == pytest.approx(
            cert.r_min, rel=1e-12
        )

    def test_hypothesis_violation_raises(self, seed):
        model, x = certified_binary_setup()
        sset = sample_params(model, seed, 4)
        with pytest.raises(ValueError, match="hypothesis"):
            linear_certificate(model, x, 1, sset, np.array([0.1, 0.0]))

    def test_zero_delta_rejected(self, seed):
        model, x = certified_binary_setup()
        sset = sample_params(model, seed, 4)
        with pytest.raises(ValueError):
            linear_certificate(model, x, 0, sset, np.zeros(2))

    def test_verdict_matches_direct_evaluation(self, seed, rng):
        # randomized trials on exactly linear discriminants
        agree = checked = 0
        for trial in range(200):
            k = int(rng.integers(2, 5))
            d = int(rng.integers(2, 6))
            model = make_linear_gaussian(
                k, d, rng.standard_normal((k, d)), 0.3 * rng.random() + 0.05
            )
            x = rng.standard_normal(d)
            tseed = split_seed(seed, "trial", trial)
            aset = sample_params(model, split_seed(tseed, "a"), 8, role="attack")
            iset = sample_params(model, split_seed(tseed, "i"), 8, role="inference")
            y = mc_predict(model, x, iset).predicted_class
            if mc_predict(model, x, aset).predicted_class != y:
                continue
            spec = AttackSpec(
                method="fgm_l2", eta=0.3 + rng.random(), loss="neg_margin", s_attack=8
            )
            res = fgm_l2(model, x, y, spec, aset)
            if res.zero_gradient:
                continue
            cert = linear_certificate(model, x, y, iset, res.delta)
            if not math.isfinite(cert.r_min):
                in_zone = False
            else:
                in_zone = abs(cert.r_min - cert.delta_norm) <= 1e-9 * cert.delta_norm
            if in_zone:
                continue
            robust = (
                mc_predict(model, x + res.delta, iset).predicted_class == y
            )
            agree += cert.certified == robust
            checked += 1
        assert checked > 100
        assert agree == checked

    def test_targeted_r_at_least_min(self, seed, rng):
        for trial in range(50):
            model = make_linear_gaussian(3, 3, rng.standard_normal((3, 3)), 0.2)
            x = rng.standard_normal(3)
            iset = sample_params(model, split_seed(seed, "i", trial), 6)
            y = mc_predict(model, x, iset).predicted_class
            delta = rng.standard_normal(3)
            cert = linear_certificate(model, x, y, iset, delta)
            for cond in cert.per_class:
                assert cond.r_value >= cert.r_min
                assert cert.certified_against(cond.label) == (
                    cond.r_value > cert.delta_norm
                )


class TestSmoothCertificate:
    def test_v_nonnegative_gives_infinite_r(self, seed):
        model, x = certified_binary_setup()
        sset = sample_params(model, seed, 4)
        delta = np.array([1.0, 0.0])  # cosine +1, V = 1 - L*1
        cert = smooth_certificate(model, x, 0, sset, delta, smooth_l=0.5)
        assert cert.r_min == math.inf

    def test_plug_in(self, seed):
        model, x = certified_binary_setup()
        sset = sample_params(model, seed, 4)
        delta = np.array([-1.0, 0.0])
        cert = smooth_certificate(model, x, 0, sset, delta, smooth_l=0.5)
        assert cert.per_class[0].v_value == pytest.approx(-1.5, rel=1e-12)
        assert cert.r_min == pytest.approx(2.0 / 1.5, rel=1e-12)
        assert cert.certified

    def test_l_zero_reduces_to_linear(self, seed, rng):
        for trial in range(100):
            model = make_linear_gaussian(3, 2, rng.standard_normal((3, 2)), 0.3)
            x = rng.standard_normal(2)
            iset = sample_params(model, split_seed(seed, "i", trial), 5)
            y = mc_predict(model, x, iset).predicted_class
            delta = rng.standard_normal(2)
            lin = linear_certificate(model, x, y, iset, delta)
            sm = smooth_certificate(model, x, y, iset, delta, smooth_l=0.0)
            for a, b in zip(lin.per_class, sm.per_class):
                if math.isfinite(a.r_value):
                    assert abs(a.r_value - b.r_value) <= 1e-12 * max(a.r_value, 1.0)
                else:
                    assert b.r_value == math.inf

    def test_sound_on_quadratic_model(self, seed, rng):
        violations = 0
        trials = 0
        for t in range(300):
            q = rng.standard_normal((2, 2, 2))
            q = 0.3 * (q + np.swapaxes(q, 1, 2))
            model = make_quadratic(q, rng.standard_normal((2, 2)), NoiseSpec.gaussian(0.3))
            smooth_l = quadratic_smoothness(model)
            x = 0.5 * rng.standard_normal(2)
            tseed = split_seed(seed, "quad", t)
            aset = sample_params(model, split_seed(tseed, "a"), 4, role="attack")
            iset = sample_params(model, split_seed(tseed, "i"), 4, role="inference")
            y = mc_predict(model, x, iset).predicted_class
            if mc_predict(model, x, aset).predicted_class != y:
                continue
            spec = AttackSpec(
                method="fgm_l2", eta=0.1 + 0.5 * rng.random(), loss="neg_margin",
                s_attack=4,
            )
            res = fgm_l2(model, x, y, spec, aset)
            if res.zero_gradient:
                continue
            cert = smooth_certificate(model, x, y, iset, res.delta, smooth_l)
            flipped = mc_predict(model, x + res.delta, iset).predicted_class != y
            trials += 1
            violations += cert.certified and flipped
        assert trials > 150
        assert violations == 0


class TestDeterministicDistance:
    def test_binary_antisymmetric_logits(self):
        w = np.array([[1.0, 0.0], [-1.0, 0.0]])
        model = make_linear_gaussian(2, 2, w, 0.0)
        assert deterministic_distance(model, np.array([2.0, 0.0]), 0) == pytest.approx(
            2.0
        )

    def test_on_boundary_zero(self):
        w = np.array([[1.0, 0.0], [-1.0, 0.0]])
        model = make_linear_gaussian(2, 2, w, 0.0)
        # argmax ties at x with margin 0 -> class 0 wins the tie
        assert deterministic_distance(model, np.array([0.0, 5.0]), 0) == 0.0

    def test_matches_line_search_random_linear(self, seed, rng):
        for trial in range(20):
            model = make_linear_gaussian(3, 2, rng.standard_normal((3, 2)), 0.0)
            x = rng.standard_normal(2)
            sset = sample_params(model, split_seed(seed, "d", trial), 1)
            y = mc_predict(model, x, sset).predicted_class
            dist = deterministic_distance(model, x, y)
            if not math.isfinite(dist) or dist <= 0.0:
                continue
            # steepest direction: against the nearest face's margin gradient
            from stochcert import mc_margin_gradient

            scores = mc_predict(model, x, sset).mean_scores
            ratios = {}
            for c in range(3):
                if c == y:
                    continue
                g_c = mc_margin_gradient(model, x, sset, y, c)
                if np.linalg.norm(g_c) > 0:
                    ratios[c] = (scores[y] - scores[c]) / np.linalg.norm(g_c)
            c = min(ratios, key=ratios.get)
            g = mc_margin_gradient(model, x, sset, y, c)
            t = boundary_line_search(model, x, y, sset, -g, t_max=4.0 * dist)
            assert t is not None
            assert abs(t - dist) / dist < 1e-6

    def test_requires_deterministic_model(self, seed):
        model = make_linear_gaussian(2, 2, np.eye(2), 0.5)
        with pytest.raises(ValueError):
            deterministic_distance(model, np.array([1.0, 0.0]), 0)


class TestBoundaryLineSearch:
    def test_linear_crossing_matches_analytic(self, seed, rng):
        for trial in range(20):
            model = make_linear_gaussian(2, 2, rng.standard_normal((2, 2)), 0.2)
            x = rng.standard_normal(2)
            iset = sample_params(model, split_seed(seed, "ls", trial), 6)
            y = mc_predict(model, x, iset).predicted_class
            direction = rng.standard_normal(2)
            cert = linear_certificate(model, x, y, iset, direction)
            t = boundary_line_search(model, x, y, iset, direction, t_max=50.0)
            if math.isfinite(cert.r_min) and cert.r_min < 50.0:
                assert t is not None
                assert abs(t - cert.r_min) <= 1e-9 * max(cert.r_min, 1.0)
            else:
                assert t is None

    def test_no_flip_for_aligned_direction(self, seed):
        model, x = certified_binary_setup()
        iset = sample_params(model, seed, 3)
        assert boundary_line_search(model, x, 0, iset, np.array([1.0, 0.0]), 100.0) is None

    def test_t_max_short_returns_none(self, seed):
        model, x = certified_binary_setup()
        iset = sample_params(model, seed, 3)
        # crossing at t = 2 along -gradient
        assert boundary_line_search(model, x, 0, iset, np.array([-1.0, 0.0]), 1.5) is None


class TestRobustnessProbability:
    def test_deterministic_model_degenerate(self, seed):
        model, x = certified_binary_setup()
        spec = AttackSpec(method="fgm_l2", eta=1.0, loss="neg_margin", s_attack=1)
        est = robustness_probability(model, x, 0, spec, 1, 1, 40, seed)
        assert est.p_hat in (0.0, 1.0)
        assert est.ci95 == 0.0

    def test_tiny_eta_certifies(self, seed):
        model = make_linear_gaussian(2, 2, np.array([[1.0, 0.0], [-1.0, 0.0]]), 0.1)
        spec = AttackSpec(method="fgm_l2", eta=1e-12, loss="neg_margin", s_attack=2)
        est = robustness_probability(
            model, np.array([2.0, 0.0]), 0, spec, 2, 4, 50, seed
        )
        assert est.p_hat == 1.0

    def test_agrees_with_reference_run(self, seed):
        model = make_linear_gaussian(2, 2, np.array([[1.0, 0.2], [-0.5, 0.4]]), 0.35)
        x = np.array([0.9, -0.2])
        spec = AttackSpec(method="fgm_l2", eta=0.9, loss="neg_margin", s_attack=3)
        small = robustness_probability(model, x, 0, spec, 3, 5, 300, seed)
        big = robustness_probability(
            model, x, 0, spec, 3, 5, 20_000, split_seed(seed, "ref")
        )
        assert 0.01 < big.p_hat < 0.99  # non-degenerate scenario
        assert abs(small.p_hat - big.p_hat) <= small.ci95 + big.ci95


class TestEmpiricalLipschitz:
    def test_linear_model_is_flat(self, seed):
        model = make_linear_gaussian(3, 2, np.random.default_rng(0).standard_normal((3, 2)), 0.0)
        est = empirical_lipschitz(model, (-1.0, 1.0), 200, seed)
        assert est <= 1e-9

    def test_quadratic_bounded_and_tight(self, seed):
        rng = np.random.default_rng(123)
        q = rng.standard_normal((2, 3, 3))
        q = 0.5 * (q + np.swapaxes(q, 1, 2))
        model = make_quadratic(q, rng.standard_normal((2, 3)), NoiseSpec.none())
        true_l = quadratic_smoothness(model)
        est = empirical_lipschitz(model, (-1.0, 1.0), 10_000, seed)
        assert est <= true_l + 1e-9
        assert est >= 0.99 * true_l
