import numpy as np
import pytest

from inhibnet.errors import SpectralError
from inhibnet.model import (
    AffinePlusOneDrift,
    ConstantDrift,
    ConstantRate,
    ExplicitWeights,
    ExponentialReset,
    MeanFieldWeights,
    LinearDrift,
    NetworkModel,
    StepRate,
    TorusWeights,
)
from inhibnet.pdmp import states_after_horizon
from inhibnet.spectral import (
    build_H,
    drift_of_lyapunov,
    non_evanescence_verdict,
)


def mean_field_06(n=2):
    # gamma_sup = 4 (step rate peak 4 over affine drift slope 1), E[Y] = 0.1
    # rho = 4 * (0.1 + (n-1) * theta); theta = 0.05 and n = 2 give 0.6
    return NetworkModel(
        drift=AffinePlusOneDrift(1.0),
        rate=StepRate(3.0, 1.0, 2.0),
        reset=ExponentialReset(10.0),
        weights=MeanFieldWeights(0.05),
        n=n,
        initial_state=[1.0] * n,
    )


def torus_04():
    # gamma_sup = 0.2 (constant rate 1 over constant drift 5), E[Y] = 1
    # rho = 0.2 * (1 + 2 * 0.5) = 0.4
    return NetworkModel(
        drift=ConstantDrift(5.0),
        rate=ConstantRate(1.0),
        reset=ExponentialReset(1.0),
        weights=TorusWeights(0.5),
        n=4,
        initial_state=[0.0] * 4,
    )


class TestBuildH:
    def test_mean_field_closed_form(self):
        H = build_H(mean_field_06())
        assert H.rho == pytest.approx(0.6, abs=1e-10)
        assert np.allclose(H.kappa, [0.5, 0.5], atol=1e-10)

    def test_torus_closed_form(self):
        H = build_H(torus_04())
        assert H.rho == pytest.approx(0.4, abs=1e-10)
        assert np.allclose(H.kappa, 0.25, atol=1e-10)

    @pytest.mark.parametrize("model", [mean_field_06(), mean_field_06(4), torus_04()])
    def test_against_dense_eigensolve(self, model):
        H = build_H(model)
        eigs = np.linalg.eigvals(H.h)
        assert H.rho == pytest.approx(float(np.max(np.abs(eigs))), abs=1e-10)

    def test_left_eigenvector_residual(self):
        H = build_H(mean_field_06(5))
        assert np.max(np.abs(H.kappa @ H.h - H.rho * H.kappa)) / H.rho < 1e-10

    def test_reducible_rejected(self):
        m = NetworkModel(
            drift=ConstantDrift(5.0),
            rate=ConstantRate(1.0),
            reset=ExponentialReset(1.0),
            weights=ExplicitWeights([[0.0, 0.0], [0.0, 0.0]]),
            n=2,
            initial_state=[0.0, 0.0],
        )
        with pytest.raises(SpectralError, match="reducible"):
            build_H(m)

    def test_unbounded_gamma_rejected(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=MeanFieldWeights(0.1),
            n=2,
            initial_state=[0.0, 0.0],
        )
        with pytest.raises(SpectralError, match="unbounded"):
            build_H(m)


class TestDrift:
    def test_exact_le_bound_and_signs(self):
        model = mean_field_06()
        H = build_H(model)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            x = rng.uniform(1e-9, 100.0, size=2)
            exact, bound = drift_of_lyapunov(model, H, x)
            assert exact <= bound + 1e-12
            assert exact < 0.0
            assert bound <= 0.0

    def test_bound_at_gamma_peak(self):
        # gamma hits its sup at x = 0 for the affine drift
        model = mean_field_06()
        H = build_H(model)
        exact, bound = drift_of_lyapunov(model, H, [0.0, 0.0])
        expected = -sum(
            float(model.drift_of(i).alpha(0.0)) * H.gamma_sup[i] * H.kappa[i] * (1 - H.rho)
            for i in range(2)
        )
        assert bound == pytest.approx(expected, rel=1e-12)
        assert bound < 0.0
        assert exact == pytest.approx(bound, rel=1e-12)  # the -beta*x*m term is 0 at x = 0

    def test_zero_state_constant_drift_formula(self):
        model = torus_04()
        H = build_H(model)
        exact, _ = drift_of_lyapunov(model, H, [0.0] * 4)
        n = 4
        expected = 0.0
        for i in range(n):
            a = 5.0
            beta0 = 1.0
            spread = sum(
                (0.5 if (i - j) % n in (1, n - 1) else 0.0) * H.m[j]
                for j in range(n)
                if j != i
            )
            expected += -a * H.m[i] + beta0 * (H.m[i] * 1.0 + spread)
        assert exact == pytest.approx(expected, rel=1e-12)

    def test_monte_carlo_generator_estimate(self):
        # short-horizon estimate (E[V(X_h)] - V(x))/h against the exact drift
        model = mean_field_06()
        H = build_H(model)
        h = 1e-3
        x = np.array([0.7, 1.8])
        exact, _ = drift_of_lyapunov(model, H, x)
        states = states_after_horizon(model, x, h, 200_000, seed=42)
        v = states @ H.m
        v0 = float(x @ H.m)
        est = (v - v0) / h
        se = est.std(ddof=1) / np.sqrt(len(est))
        assert abs(est.mean() - exact) < 5 * se


class TestVerdict:
    def test_stable(self):
        assert non_evanescence_verdict(build_H(mean_field_06())).kind == "stable"

    def test_threshold_and_above_are_inconclusive(self):
        H = build_H(mean_field_06())
        at_one = type(H)(h=H.h, gamma_sup=H.gamma_sup, rho=1.0, kappa=H.kappa, m=H.m)
        assert non_evanescence_verdict(at_one).kind == "inconclusive"
        above = type(H)(h=H.h, gamma_sup=H.gamma_sup, rho=2.3, kappa=H.kappa, m=H.m)
        assert non_evanescence_verdict(above).kind == "inconclusive"
