"""Attack geometry tests: exact norms, sign structure, clipping arithmetic,
zero-gradient handling, projection idempotence, PGD/FGM equivalence, and
determinism."""

import numpy as np
import pytest

from stochcert import (
    Architecture,
    AttackSpec,
    NoiseSpec,
    Seed,
    StochasticModel,
    effective_length,
    fgm_l2,
    fgsm_linf,
    make_linear_gaussian,
    mc_loss_gradient,
    pgd,
    project_l2_ball,
    sample_params,
    split_seed,
)


def linear_logits_model(w, b=None):
    w = np.asarray(w, dtype=np.float64)
    k, d = w.shape
    arch = Architecture((d, k), output="logits")
    return StochasticModel(
        arch=arch,
        base_params=arch.pack([w], [np.zeros(k) if b is None else np.asarray(b)]),
    )


def margin_gradient_model(g):
    """Binary linear model whose neg_margin attack gradient at label 0 is g."""
    g = np.asarray(g, dtype=np.float64)
    # loss gradient = w_c - w_y; pick w_y = -g/2, w_c = g/2, biases keep y on top
    return linear_logits_model(np.stack([-g / 2.0, g / 2.0]), b=np.array([10.0, 0.0]))


def saturated_softmax_model(gap=1000.0):
    arch = Architecture((2, 2), output="softmax")
    w = np.array([[gap, 0.0], [-gap, 0.0]])
    return StochasticModel(arch=arch, base_params=arch.pack([w], [np.zeros(2)]))


@pytest.fixture
def attack_seed():
    return Seed(424242)


class TestFgmL2:
    def test_unit_budget_direction(self, attack_seed):
        model = margin_gradient_model([3.0, 4.0])
        spec = AttackSpec(method="fgm_l2", eta=1.0, loss="neg_margin", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgm_l2(model, np.array([0.0, 0.0]), 0, spec, sset)
        np.testing.assert_allclose(res.delta, [0.6, 0.8], rtol=1e-15)
        assert res.realized_norm == pytest.approx(1.0, abs=1e-12)
        assert not res.zero_gradient

    def test_saturated_softmax_zero_gradient(self, attack_seed):
        model = saturated_softmax_model()
        spec = AttackSpec(method="fgm_l2", eta=0.5, loss="cross_entropy", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgm_l2(model, np.array([1.0, 0.0]), 0, spec, sset)
        assert res.zero_gradient
        np.testing.assert_array_equal(res.delta, [0.0, 0.0])
        assert res.realized_norm == 0.0

    def test_box_clip_arithmetic(self, attack_seed):
        # raw delta (0.15, 0.2) at x = (0.95, 0.5) clips to (0.05, 0.2)
        g = np.array([0.15, 0.2])
        model = margin_gradient_model(g)
        eta = float(np.linalg.norm(g))
        spec = AttackSpec(
            method="fgm_l2", eta=eta, loss="neg_margin", s_attack=1, box=(0.0, 1.0)
        )
        sset = sample_params(model, attack_seed, 1)
        res = fgm_l2(model, np.array([0.95, 0.5]), 0, spec, sset)
        np.testing.assert_allclose(res.delta, [0.05, 0.2], atol=1e-12)
        assert res.realized_norm == pytest.approx(np.sqrt(0.0425), rel=1e-10)

    def test_norm_feasibility_random(self, attack_seed):
        model = make_linear_gaussian(3, 4, np.random.default_rng(5).standard_normal((3, 4)), 0.4)
        spec = AttackSpec(
            method="fgm_l2", eta=0.7, loss="neg_margin", s_attack=5, box=(0.0, 1.0)
        )
        rng = np.random.default_rng(11)
        for i in range(50):
            x = rng.random(4)
            sset = sample_params(model, split_seed(attack_seed, "set", i), 5)
            res = fgm_l2(model, x, 0, spec, sset)
            assert res.realized_norm <= 0.7 + 1e-12


class TestFgsmLinf:
    def test_sign_step(self, attack_seed):
        model = margin_gradient_model([0.2, -3.0])
        spec = AttackSpec(method="fgsm_linf", eta=0.1, loss="neg_margin", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgsm_linf(model, np.array([0.0, 0.0]), 0, spec, sset)
        np.testing.assert_allclose(res.delta, [0.1, -0.1], rtol=1e-15)
        assert res.realized_norm == pytest.approx(0.1)

    def test_zero_gradient_flag(self, attack_seed):
        model = saturated_softmax_model()
        spec = AttackSpec(method="fgsm_linf", eta=0.1, loss="cross_entropy", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgsm_linf(model, np.array([1.0, 0.0]), 0, spec, sset)
        assert res.zero_gradient and res.realized_norm == 0.0

    def test_zero_components_stay_zero(self, attack_seed):
        model = margin_gradient_model([0.0, 2.0])
        spec = AttackSpec(method="fgsm_linf", eta=0.3, loss="neg_margin", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgsm_linf(model, np.array([0.5, 0.5]), 0, spec, sset)
        assert res.delta[0] == 0.0
        assert set(np.round(res.delta, 15)) <= {-0.3, 0.0, 0.3}
        assert res.realized_norm == pytest.approx(0.3)


class TestPgd:
    def test_single_step_equals_fgm_bitwise(self, attack_seed):
        model = make_linear_gaussian(
            2, 3, np.random.default_rng(3).standard_normal((2, 3)), 0.3
        )
        x = np.array([0.4, 0.5, 0.6])
        fgm_spec = AttackSpec(
            method="fgm_l2", eta=0.25, loss="neg_margin", s_attack=6, box=(0.0, 1.0)
        )
        pgd_spec = AttackSpec(
            method="pgd",
            eta=0.25,
            loss="neg_margin",
            s_attack=6,
            pgd_steps=1,
            pgd_nu=0.25,
            box=(0.0, 1.0),
            resample_per_step=False,
        )
        sset = sample_params(
            model, split_seed(attack_seed, "attack", 0), 6, role="attack"
        )
        a = fgm_l2(model, x, 0, fgm_spec, sset)
        b = pgd(model, x, 0, pgd_spec, attack_seed)
        np.testing.assert_array_equal(a.delta, b.delta)
        assert a.realized_norm == b.realized_norm

    def test_zero_gradient_every_step(self, attack_seed):
        model = saturated_softmax_model()
        spec = AttackSpec(
            method="pgd", eta=0.5, loss="cross_entropy", s_attack=1,
            pgd_steps=5, pgd_nu=0.1,
        )
        res = pgd(model, np.array([1.0, 0.0]), 0, spec, attack_seed)
        assert res.zero_gradient
        np.testing.assert_array_equal(res.delta, [0.0, 0.0])
        assert res.per_step_norms == (0.0,) * 5

    def test_final_norm_within_budget(self, attack_seed):
        model = make_linear_gaussian(
            3, 2, np.random.default_rng(9).standard_normal((3, 2)), 0.5
        )
        spec = AttackSpec(
            method="pgd", eta=0.5, loss="neg_margin", s_attack=3,
            pgd_steps=10, pgd_nu=0.12, box=(0.0, 1.0),
        )
        rng = np.random.default_rng(2)
        for i in range(20):
            res = pgd(model, rng.random(2), 0, spec, split_seed(attack_seed, "t", i))
            assert res.realized_norm <= 0.5 + 1e-12
            assert len(res.per_step_norms) == 10

    def test_multistep_beats_single_step_loss(self, attack_seed):
        # deterministic nonlinear model: 10 small steps reach at least the
        # single-step loss in almost all instances
        from stochcert import loss_eval, mc_predict

        rng = np.random.default_rng(77)
        arch = Architecture((2, 16, 2), output="softmax")
        wins = 0
        trials = 200
        for t in range(trials):
            theta = 1.5 * rng.standard_normal(arch.n_params)
            model = StochasticModel(arch=arch, base_params=theta)
            x = rng.standard_normal(2)
            sset = sample_params(model, split_seed(attack_seed, "s", t), 1)
            y = int(np.argmax(mc_predict(model, x, sset).mean_scores))
            fgm_spec = AttackSpec(
                method="fgm_l2", eta=0.5, loss="cross_entropy", s_attack=1
            )
            pgd_spec = AttackSpec(
                method="pgd", eta=0.5, loss="cross_entropy", s_attack=1,
                pgd_steps=10, pgd_nu=0.1, resample_per_step=False,
            )
            single = fgm_l2(model, x, y, fgm_spec, sset)
            multi = pgd(model, x, y, pgd_spec, split_seed(attack_seed, "p", t))
            loss_single = loss_eval(
                mc_predict(model, x + single.delta, sset).mean_scores, y, "cross_entropy"
            )
            loss_multi = loss_eval(
                mc_predict(model, x + multi.delta, sset).mean_scores, y, "cross_entropy"
            )
            wins += loss_multi >= loss_single - 1e-12
        assert wins / trials >= 0.9


class TestProjection:
    def test_feasible_vector_unchanged(self):
        v = np.array([0.3, 0.4])
        out = project_l2_ball(v, 1.0)
        assert out is v

    def test_oversized_vector_scaled(self):
        v = np.array([3.0, 4.0])
        out = project_l2_ball(v, 1.0)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-15)

    def test_idempotent(self):
        v = np.array([3.0, 4.0])
        once = project_l2_ball(v, 1.0)
        twice = project_l2_ball(once, 1.0)
        np.testing.assert_array_equal(once, twice)


class TestTargetedMode:
    def test_sign_flip_identity_linear(self, attack_seed):
        model = linear_logits_model(
            np.array([[1.0, 0.5], [-0.3, 0.8], [0.2, -0.9]])
        )
        x = np.array([0.4, 0.4])
        sset = sample_params(model, attack_seed, 1)
        toward_j = AttackSpec(method="fgm_l2", eta=0.2, loss="neg_margin", s_attack=1)
        res_untargeted = fgm_l2(model, x, 2, toward_j, sset)  # label treated as 2
        targeted = AttackSpec(
            method="fgm_l2", eta=0.2, loss="neg_margin", s_attack=1, target=2
        )
        res_targeted = fgm_l2(model, x, 0, targeted, sset)
        np.testing.assert_allclose(
            res_targeted.delta, -res_untargeted.delta, rtol=1e-12
        )

    def test_cw_targeted_gradient_direction(self, attack_seed):
        model = linear_logits_model(np.array([[1.0, 0.0], [0.0, 1.0]]))
        x = np.array([1.0, 0.0])
        sset = sample_params(model, attack_seed, 1)
        g = mc_loss_gradient(model, x, sset, "cw_logits", 0, target=1)
        # ascend Z_1 - Z_0: gradient = w_1 - w_0 = (-1, 1)
        np.testing.assert_allclose(g, [-1.0, 1.0], rtol=1e-14)


class TestDeterminismAndLength:
    def test_identical_args_bit_identical(self, attack_seed):
        model = make_linear_gaussian(
            2, 2, np.random.default_rng(1).standard_normal((2, 2)), 0.4
        )
        spec = AttackSpec(method="fgm_l2", eta=0.3, loss="neg_margin", s_attack=8)
        x = np.array([0.2, 0.9])
        sset = sample_params(model, attack_seed, 8)
        a = fgm_l2(model, x, 0, spec, sset)
        b = fgm_l2(model, x, 0, spec, sset)
        np.testing.assert_array_equal(a.delta, b.delta)
        assert a.realized_norm == b.realized_norm

    def test_effective_length_unclipped_equals_eta(self, attack_seed):
        model = margin_gradient_model([1.0, 1.0])
        spec = AttackSpec(method="fgm_l2", eta=1.5, loss="neg_margin", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgm_l2(model, np.zeros(2), 0, spec, sset)
        assert effective_length(res) == pytest.approx(1.5, abs=1e-12)

    def test_effective_length_zero_gradient(self, attack_seed):
        model = saturated_softmax_model()
        spec = AttackSpec(method="fgm_l2", eta=1.5, loss="cross_entropy", s_attack=1)
        sset = sample_params(model, attack_seed, 1)
        res = fgm_l2(model, np.array([1.0, 0.0]), 0, spec, sset)
        assert effective_length(res) == 0.0

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            AttackSpec(method="fgm_l2", eta=0.0)
        with pytest.raises(ValueError):
            AttackSpec(method="pgd", eta=0.1)
        with pytest.raises(ValueError):
            AttackSpec(method="unknown", eta=0.1)
