import numpy as np
import pytest

from anmin.driver import AblationConfig, diagnose, init_hidden, train
from anmin.model import ActivationConfig, HyperParams, forward, make_dataset, mse
from anmin.data import gen_sin


class TestInitHidden:
    def test_deterministic(self):
        assert np.array_equal(init_hidden(42, 3, 5), init_hidden(42, 3, 5))

    def test_support(self):
        A = init_hidden(0, 7, 16)
        bound = 1.0 / np.sqrt(8)
        assert A.shape == (8, 16)
        assert np.all(np.abs(A) < bound)

    def test_empirical_mean_near_zero(self):
        A = init_hidden(1, 0, 100_000)  # d=0: 1 x 100000 draws on (-1, 1)
        sigma = 1.0 / np.sqrt(3)  # std of U(-1, 1)
        assert abs(A.mean()) <= 3 * sigma / np.sqrt(A.size)


def train_sin(seed=0, iterations=5, ab=AblationConfig(), n=150, d=2, h=8):
    data = gen_sin(n, d, seed=seed)
    hp = HyperParams(iterations=iterations)
    return data, train(data, ActivationConfig(0.0), hp, h, ab, seed=seed)


class TestTrain:
    def test_zero_iterations_returns_initial_fit(self):
        data, (params, trace) = train_sin(iterations=0)
        assert len(trace.rows) == 1
        assert trace.rows[0].iteration == 0
        assert trace.rows[0].path == "init"
        assert trace.best_loss == trace.rows[0].train_loss
        assert np.array_equal(params.A, init_hidden(0, 2, 8))

    def test_one_sided_ramp_fit_exactly(self):
        # y = 2*max(x, 0) has an exact two-unit ReLU representation
        x = np.linspace(-2.0, 2.0, 64)[:, None]
        data = make_dataset(x, 2.0 * np.maximum(x, 0.0))
        hp = HyperParams(lam=1e-6, iterations=5)
        params, trace = train(data, ActivationConfig(0.0), hp, 2, seed=3)
        assert mse(params, ActivationConfig(0.0), data) <= 1e-6

    def test_best_so_far_monotone_and_consistent(self):
        data, (params, trace) = train_sin(iterations=8)
        losses = [r.train_loss for r in trace.rows]
        assert trace.best_loss == min(losses)
        best_so_far = np.minimum.accumulate(losses)
        assert np.all(np.diff(best_so_far) <= 0)

    def test_returned_params_match_best(self):
        data, (params, trace) = train_sin(iterations=8)
        from anmin.model import loss

        assert loss(params, ActivationConfig(0.0), data, 0.001) == pytest.approx(
            trace.best_loss, rel=1e-12
        )

    def test_determinism_bitwise(self):
        _, (p1, t1) = train_sin(seed=5, iterations=6)
        _, (p2, t2) = train_sin(seed=5, iterations=6)
        assert np.array_equal(p1.A, p2.A)
        assert np.array_equal(p1.B, p2.B)
        assert [r.train_loss for r in t1.rows] == [r.train_loss for r in t2.rows]

    def test_ablation_dominance(self):
        data = gen_sin(150, 2, seed=9)
        hp = HyperParams(iterations=8)
        act = ActivationConfig(0.0)
        p_min, _ = train(data, act, hp, 8, AblationConfig(track_min=True), seed=9)
        p_fin, _ = train(data, act, hp, 8, AblationConfig(track_min=False), seed=9)
        from anmin.model import loss

        assert loss(p_min, act, data, hp.lam) <= loss(p_fin, act, data, hp.lam)

    def test_alternating_improvement_within_iteration(self):
        # the output-layer refit is the exact minimizer given A, so loss
        # after the refit is <= loss with the previous (B, b0)
        from anmin.firing import hidden_features
        from anmin.model import NetworkParams, loss
        from anmin.solvers import fit_output_layer

        data = gen_sin(120, 2, seed=11)
        act = ActivationConfig(0.0)
        hp = HyperParams(iterations=4)
        params, trace = train(data, act, hp, 8, seed=11)
        A = params.A
        rng = np.random.default_rng(0)
        stale = NetworkParams(A, rng.standard_normal(params.B.shape), rng.standard_normal(1))
        B, b0 = fit_output_layer(hidden_features(data.X, A, act), data.Y, hp.lam)
        refit = NetworkParams(A, B, b0)
        assert loss(refit, act, data, hp.lam) <= loss(stale, act, data, hp.lam)

    def test_stop_policy_halts_on_guard(self):
        data = gen_sin(100, 2, seed=1)
        # tau above any reachable logdet forces the guard to fail immediately
        hp = HyperParams(iterations=10, tau=1e9)
        ab = AblationConfig(track_min=False, degenerate_policy="stop")
        params, trace = train(data, ActivationConfig(0.0), hp, 8, ab, seed=1)
        assert trace.stopped_early
        assert len(trace.rows) == 1  # only the initialization row

    def test_random_restart_policy_redraws(self):
        data = gen_sin(100, 2, seed=2)
        hp = HyperParams(iterations=3, tau=1e9)
        ab = AblationConfig(track_min=True, degenerate_policy="random_restart")
        params, trace = train(data, ActivationConfig(0.0), hp, 8, ab, seed=2)
        assert all(r.path == "restart" for r in trace.rows[1:])

    def test_pseudo_policy_under_guard(self):
        data = gen_sin(100, 2, seed=3)
        hp = HyperParams(iterations=3, tau=1e9)
        params, trace = train(data, ActivationConfig(0.0), hp, 8, seed=3)
        assert all(r.path == "svd-clamped" for r in trace.rows[1:])

    def test_invalid_policy_rejected(self):
        with pytest.raises(ValueError):
            AblationConfig(degenerate_policy="bogus")


class TestDiagnose:
    def test_all_direct(self):
        data, (params, trace) = train_sin(iterations=5)
        report = diagnose(trace)
        assert report["svd_clamped_solves"] == 0
        assert report["neg_inf_logdets"] == 0
        assert report["best_iteration"] == trace.best_iteration

    def test_neg_inf_counted(self):
        data, (params, trace) = train_sin(iterations=3)
        trace.rows[2].logdet = -np.inf
        trace.rows[2].path = "svd-clamped"
        report = diagnose(trace)
        assert report["neg_inf_logdets"] == 1
        assert report["svd_clamped_solves"] == 1

    def test_empty_trace_rejected(self):
        from anmin.driver import AnminTrace

        with pytest.raises(ValueError):
            diagnose(AnminTrace())
