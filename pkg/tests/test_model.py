import numpy as np
import pytest

from inhibnet.errors import ConfigError
from inhibnet.model import (
    AffinePlusOneDrift,
    ConstantRate,
    DiscreteReset,
    ExplicitWeights,
    ExponentialReset,
    ExpDecayRate,
    LinearDrift,
    MeanFieldWeights,
    NearestNeighborZWeights,
    NetworkModel,
    StepRate,
    TorusWeights,
    UniformReset,
    in_neighbors,
    model_from_config,
    rate_bounds,
    validate,
    weight,
)
from inhibnet.rng import substream


def mean_field_model(n=2, theta=0.5):
    return NetworkModel(
        drift=LinearDrift(1.0),
        rate=StepRate(3.0, 1.0, 2.0),
        reset=ExponentialReset(1.0),
        weights=MeanFieldWeights(theta),
        n=n,
        initial_state=[1.0] * n,
    )


class TestValidate:
    def test_valid_mean_field(self):
        assert validate(mean_field_model()).ok

    def test_torus_requires_three_neurons(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=TorusWeights(1.0),
            n=2,
            initial_state=[0.0, 0.0],
        )
        assert "weights.torus_too_small" in validate(m).codes()

    def test_discrete_probs_must_be_simplex(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=DiscreteReset([1.0, 2.0], [0.5, 0.6]),
            weights=MeanFieldWeights(0.1),
            n=2,
            initial_state=[0.0, 0.0],
        )
        assert "reset.probs_not_simplex" in validate(m).codes()

    def test_initial_state_length(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=MeanFieldWeights(0.1),
            n=3,
            initial_state=[0.0, 0.0],
        )
        assert "model.initial_state_length" in validate(m).codes()

    def test_lattice_rejects_heterogeneous_specs(self):
        m = NetworkModel(
            drift=[LinearDrift(1.0), LinearDrift(2.0)],
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=NearestNeighborZWeights(1.0),
            lattice=True,
        )
        assert "model.lattice_requires_homogeneous" in validate(m).codes()

    def test_explicit_diagonal_must_be_zero(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=ExplicitWeights([[0.5, 0.1], [0.1, 0.0]]),
            n=2,
            initial_state=[0.0, 0.0],
        )
        assert "weights.nonzero_diagonal" in validate(m).codes()


class TestRateBounds:
    def test_step(self):
        assert rate_bounds(StepRate(3.0, 1.0, 2.0)) == (3.0, 4.0)

    def test_constant(self):
        assert rate_bounds(ConstantRate(5.0)) == (5.0, 5.0)

    def test_exp_decay(self):
        assert rate_bounds(ExpDecayRate(2.0, 3.0, 1.0)) == (2.0, 5.0)

    @pytest.mark.parametrize(
        "rate",
        [StepRate(3.0, 1.0, 2.0), ConstantRate(5.0), ExpDecayRate(2.0, 3.0, 1.0)],
    )
    def test_beta_lies_within_bounds(self, rate):
        lo, hi = rate_bounds(rate)
        assert lo <= hi
        xs = np.linspace(0.0, 1e6, 1001)
        b = rate.beta(xs)
        assert np.all(b >= lo - 1e-12)
        assert np.all(b <= hi + 1e-12)


class TestWeight:
    def test_mean_field(self):
        assert weight(mean_field_model(theta=0.5), 0, 1) == 0.5

    def test_torus_non_neighbor_is_zero(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=TorusWeights(0.7),
            n=5,
            initial_state=[0.0] * 5,
        )
        assert weight(m, 0, 2) == 0.0
        assert weight(m, 0, 1) == 0.7
        assert weight(m, 4, 0) == 0.7  # wrap-around

    @pytest.mark.parametrize(
        "weights,n",
        [
            (MeanFieldWeights(0.5), 3),
            (TorusWeights(0.7), 5),
            (ExplicitWeights([[0.0, 1.0], [2.0, 0.0]]), 2),
        ],
    )
    def test_zero_diagonal_and_nonnegative(self, weights, n):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=weights,
            n=n,
            initial_state=[0.0] * n,
        )
        for k in range(n):
            assert weight(m, k, k) == 0.0
            for j in range(n):
                assert weight(m, j, k) >= 0.0

    def test_explicit_orientation(self):
        # matrix rows are receivers: matrix[i][j] = W[j -> i]
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=ConstantRate(3.0),
            reset=ExponentialReset(1.0),
            weights=ExplicitWeights([[0.0, 1.0], [2.0, 0.0]]),
            n=2,
            initial_state=[0.0, 0.0],
        )
        assert weight(m, 1, 0) == 1.0
        assert weight(m, 0, 1) == 2.0

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            weight(mean_field_model(), 0, 5)

    def test_lattice_nearest_neighbor(self):
        m = NetworkModel(
            drift=LinearDrift(1.0),
            rate=StepRate(3.0, 1.0, 2.0),
            reset=ExponentialReset(1.0),
            weights=NearestNeighborZWeights(1.0),
            lattice=True,
        )
        assert weight(m, -3, -2) == 1.0
        assert weight(m, -3, -1) == 0.0
        assert in_neighbors(m, 4) == (3, 5)


class TestResetMeans:
    @pytest.mark.parametrize(
        "reset",
        [
            ExponentialReset(2.0),
            UniformReset(0.5, 2.5),
            DiscreteReset([1.0, 2.0], [0.5, 0.5]),
        ],
    )
    def test_mean_matches_monte_carlo(self, reset):
        rng = substream(1234, 99)
        draws = np.array([reset.draw(rng) for _ in range(10**5)])
        se = draws.std(ddof=1) / np.sqrt(len(draws))
        assert abs(draws.mean() - reset.mean) < 4 * se

    def test_analytic_means(self):
        assert ExponentialReset(10.0).mean == pytest.approx(0.1)
        assert UniformReset(0.0, 4.0).mean == pytest.approx(2.0)
        assert DiscreteReset([1.0, 2.0], [0.5, 0.5]).mean == pytest.approx(1.5)


class TestConfig:
    def config(self):
        return {
            "n": 2,
            "drift": {"kind": "linear", "slope": 1.0},
            "rate": {"kind": "step", "base": 3.0, "boost": 1.0, "threshold": 2.0},
            "reset": {"kind": "exponential", "rate": 1.0},
            "weights": {"kind": "mean_field", "theta": 0.5},
            "initial_state": [1.0, 2.0],
            "seed": 7,
        }

    def test_round_trip(self):
        model, seed = model_from_config(self.config())
        assert seed == 7
        assert model.n == 2
        assert model.rate_of(1) == StepRate(3.0, 1.0, 2.0)
        assert validate(model).ok

    def test_unknown_top_level_key_rejected(self):
        doc = self.config()
        doc["extra"] = 1
        with pytest.raises(ConfigError):
            model_from_config(doc)

    def test_unknown_spec_key_rejected(self):
        doc = self.config()
        doc["drift"] = {"kind": "linear", "slope": 1.0, "bogus": 2}
        with pytest.raises(ConfigError):
            model_from_config(doc)

    def test_lattice_config(self):
        doc = {
            "lattice": True,
            "drift": {"kind": "linear", "slope": 1.0},
            "rate": {"kind": "step", "base": 3.0, "boost": 1.0, "threshold": 2.0},
            "reset": {"kind": "exponential", "rate": 1.0},
            "weights": {"kind": "nearest_neighbor_z", "w": 1.0},
        }
        model, seed = model_from_config(doc)
        assert seed is None
        assert model.lattice
        assert validate(model).ok

    def test_heterogeneous_lists(self):
        doc = self.config()
        doc["rate"] = [
            {"kind": "constant", "b": 3.0},
            {"kind": "exp_decay", "floor": 2.0, "amplitude": 3.0, "scale": 1.0},
        ]
        model, _ = model_from_config(doc)
        assert model.rate_of(0) == ConstantRate(3.0)
        assert model.global_rate_bounds() == (2.0, 5.0)
        assert validate(model).ok


def test_affine_drift_alpha():
    d = AffinePlusOneDrift(2.0)
    assert float(d.alpha(3.0)) == pytest.approx(8.0)
