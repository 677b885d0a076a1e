"""Model primitives: drifts, rate functions, reset laws, weight structures.

All types are immutable after construction and safe to share across
workers. Construction is permissive; :func:`validate` reports every
violated invariant with a machine-readable code instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError

# ---------------------------------------------------------------------------
# Drift specifications: the flow in between jumps is dx/dt = -alpha(x).


@dataclass(frozen=True)
class LinearDrift:
    """alpha(x) = slope * x."""

    slope: float

    def alpha(self, x):
        return self.slope * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ConstantDrift:
    """alpha(x) = level."""

    level: float

    def alpha(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.level)


@dataclass(frozen=True)
class AffinePlusOneDrift:
    """alpha(x) = slope * (1 + x)."""

    slope: float

    def alpha(self, x):
        return self.slope * (1.0 + np.asarray(x, dtype=float))


DriftSpec = Union[LinearDrift, ConstantDrift, AffinePlusOneDrift]


# ---------------------------------------------------------------------------
# Rate specifications: nonincreasing spiking rate beta(x) with finite
# positive bounds beta_star = inf beta, beta_sup = sup beta.


@dataclass(frozen=True)
class ConstantRate:
    b: float

    def beta(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.b)

    def bounds(self):
        return (self.b, self.b)


@dataclass(frozen=True)
class StepRate:
    """beta(x) = base + boost * 1{x <= threshold}."""

    base: float
    boost: float
    threshold: float

    def beta(self, x):
        x = np.asarray(x, dtype=float)
        return self.base + self.boost * (x <= self.threshold)

    def bounds(self):
        return (self.base, self.base + self.boost)


@dataclass(frozen=True)
class ExpDecayRate:
    """beta(x) = floor + amplitude * exp(-scale * x)."""

    floor: float
    amplitude: float
    scale: float

    def beta(self, x):
        x = np.asarray(x, dtype=float)
        return self.floor + self.amplitude * np.exp(-self.scale * x)

    def bounds(self):
        return (self.floor, self.floor + self.amplitude)


RateSpec = Union[ConstantRate, StepRate, ExpDecayRate]


def rate_bounds(rate: RateSpec) -> tuple[float, float]:
    """(inf beta, sup beta) over [0, infinity)."""
    return rate.bounds()


# ---------------------------------------------------------------------------
# Reset laws: the post-spike state Y, with analytic expectation E[Y].


@dataclass(frozen=True)
class ExponentialReset:
    rate: float

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.exponential(1.0 / self.rate))


@dataclass(frozen=True)
class UniformReset:
    lo: float
    hi: float

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class DiscreteReset:
    atoms: tuple[float, ...]
    probs: tuple[float, ...]

    def __init__(self, atoms: Sequence[float], probs: Sequence[float]):
        object.__setattr__(self, "atoms", tuple(float(a) for a in atoms))
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))

    @property
    def mean(self) -> float:
        return float(sum(a * p for a, p in zip(self.atoms, self.probs)))

    def draw(self, rng: np.random.Generator) -> float:
        u = rng.random()
        acc = 0.0
        for a, p in zip(self.atoms, self.probs):
            acc += p
            if u < acc:
                return a
        return self.atoms[-1]


ResetSpec = Union[ExponentialReset, UniformReset, DiscreteReset]


# ---------------------------------------------------------------------------
# Weight structures: W[j -> i] >= 0, zero diagonal.


@dataclass(frozen=True)
class ExplicitWeights:
    matrix: tuple[tuple[float, ...], ...]

    def __init__(self, matrix):
        object.__setattr__(
            self, "matrix", tuple(tuple(float(v) for v in row) for row in matrix)
        )


@dataclass(frozen=True)
class MeanFieldWeights:
    theta: float


@dataclass(frozen=True)
class TorusWeights:
    theta: float


@dataclass(frozen=True)
class NearestNeighborZWeights:
    w: float


WeightStructure = Union[
    ExplicitWeights, MeanFieldWeights, TorusWeights, NearestNeighborZWeights
]


# ---------------------------------------------------------------------------
# The full network model.


def _as_tuple(spec, n: Optional[int]):
    if isinstance(spec, (list, tuple)):
        return tuple(spec)
    return spec


@dataclass(frozen=True)
class NetworkModel:
    """Full parameterization of a finite network or a lattice model.

    For the finite case `n` is the neuron count; per-neuron specs may be
    given either as a single spec (homogeneous shortcut) or a sequence of
    length n. The lattice case (`lattice=True`) requires homogeneous
    specs and nearest-neighbor weights on Z.
    """

    drift: object
    rate: object
    reset: object
    weights: WeightStructure
    n: Optional[int] = None
    lattice: bool = False
    initial_state: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "drift", _as_tuple(self.drift, self.n))
        object.__setattr__(self, "rate", _as_tuple(self.rate, self.n))
        object.__setattr__(self, "reset", _as_tuple(self.reset, self.n))
        if self.initial_state is not None:
            object.__setattr__(
                self, "initial_state", tuple(float(v) for v in self.initial_state)
            )

    # -- per-neuron accessors ------------------------------------------------

    def drift_of(self, i: int) -> DriftSpec:
        return self.drift[i] if isinstance(self.drift, tuple) else self.drift

    def rate_of(self, i: int) -> RateSpec:
        return self.rate[i] if isinstance(self.rate, tuple) else self.rate

    def reset_of(self, i: int) -> ResetSpec:
        return self.reset[i] if isinstance(self.reset, tuple) else self.reset

    @property
    def homogeneous(self) -> bool:
        return not (
            isinstance(self.drift, tuple)
            or isinstance(self.rate, tuple)
            or isinstance(self.reset, tuple)
        )

    def global_rate_bounds(self) -> tuple[float, float]:
        """(min over neurons of inf beta, max over neurons of sup beta)."""
        if self.lattice or self.homogeneous:
            return rate_bounds(self.rate_of(0))
        lows, highs = zip(*(rate_bounds(self.rate_of(i)) for i in range(self.n)))
        return (min(lows), max(highs))


def weight(model: NetworkModel, frm: int, to: int) -> float:
    """Inhibition weight W[frm -> to]; zero on the diagonal and outside
    the interaction neighborhood."""
    w = model.weights
    if model.lattice:
        if not isinstance(w, NearestNeighborZWeights):
            raise ConfigError("lattice models require nearest-neighbor weights")
        return w.w if abs(frm - to) == 1 else 0.0
    n = model.n
    if not (0 <= frm < n and 0 <= to < n):
        raise IndexError(f"neuron index out of range: ({frm}, {to}) with n={n}")
    if frm == to:
        return 0.0
    if isinstance(w, MeanFieldWeights):
        return w.theta
    if isinstance(w, TorusWeights):
        if (frm - to) % n in (1, n - 1):
            return w.theta
        return 0.0
    if isinstance(w, NearestNeighborZWeights):
        return w.w if abs(frm - to) == 1 else 0.0
    if isinstance(w, ExplicitWeights):
        # matrix is stored as W[i][j] = W[j -> i]
        return w.matrix[to][frm]
    raise ConfigError(f"unknown weight structure: {type(w).__name__}")


def in_neighbors(model: NetworkModel, i: int) -> tuple[int, ...]:
    """Indices j with W[j -> i] > 0."""
    if model.lattice:
        return (i - 1, i + 1)
    return tuple(j for j in range(model.n) if j != i and weight(model, j, i) > 0.0)


def out_neighbors(model: NetworkModel, i: int) -> tuple[int, ...]:
    """Indices j with W[i -> j] > 0."""
    if model.lattice:
        return (i - 1, i + 1)
    return tuple(j for j in range(model.n) if j != i and weight(model, i, j) > 0.0)


# ---------------------------------------------------------------------------
# Validation.


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


_SIMPLEX_TOL = 1e-12


def _check_drift(spec, out, where):
    if isinstance(spec, LinearDrift):
        if not spec.slope > 0:
            out.append(Violation("drift.nonpositive_param", f"{where}: slope must be > 0"))
    elif isinstance(spec, ConstantDrift):
        if not spec.level > 0:
            out.append(Violation("drift.nonpositive_param", f"{where}: level must be > 0"))
    elif isinstance(spec, AffinePlusOneDrift):
        if not spec.slope > 0:
            out.append(Violation("drift.nonpositive_param", f"{where}: slope must be > 0"))
    else:
        out.append(Violation("drift.unknown_kind", f"{where}: {type(spec).__name__}"))


def _check_rate(spec, out, where):
    if isinstance(spec, ConstantRate):
        if not spec.b > 0:
            out.append(Violation("rate.nonpositive", f"{where}: b must be > 0"))
    elif isinstance(spec, StepRate):
        if not spec.base > 0:
            out.append(Violation("rate.nonpositive", f"{where}: base must be > 0"))
        if spec.boost < 0:
            out.append(Violation("rate.negative_boost", f"{where}: boost must be >= 0"))
        if not spec.threshold > 0:
            out.append(Violation("rate.nonpositive", f"{where}: threshold must be > 0"))
    elif isinstance(spec, ExpDecayRate):
        if not spec.floor > 0:
            out.append(Violation("rate.nonpositive", f"{where}: floor must be > 0"))
        if spec.amplitude < 0:
            out.append(Violation("rate.negative_amplitude", f"{where}: amplitude must be >= 0"))
        if not spec.scale > 0:
            out.append(Violation("rate.nonpositive", f"{where}: scale must be > 0"))
    else:
        out.append(Violation("rate.unknown_kind", f"{where}: {type(spec).__name__}"))


def _check_reset(spec, out, where):
    if isinstance(spec, ExponentialReset):
        if not spec.rate > 0:
            out.append(Violation("reset.nonpositive_rate", f"{where}: rate must be > 0"))
    elif isinstance(spec, UniformReset):
        if spec.lo < 0:
            out.append(Violation("reset.negative_support", f"{where}: lo must be >= 0"))
        if not spec.hi > spec.lo:
            out.append(Violation("reset.empty_support", f"{where}: hi must be > lo"))
    elif isinstance(spec, DiscreteReset):
        if len(spec.atoms) != len(spec.probs) or not spec.atoms:
            out.append(Violation("reset.atom_prob_mismatch", f"{where}: atoms/probs lengths"))
            return
        if any(a < 0 for a in spec.atoms):
            out.append(Violation("reset.negative_support", f"{where}: atoms must be >= 0"))
        if any(p < 0 for p in spec.probs) or abs(sum(spec.probs) - 1.0) > _SIMPLEX_TOL:
            out.append(Violation("reset.probs_not_simplex", f"{where}: probs must sum to 1"))
    else:
        out.append(Violation("reset.unknown_kind", f"{where}: {type(spec).__name__}"))


def _check_weights(model, out):
    w = model.weights
    if isinstance(w, MeanFieldWeights):
        if w.theta < 0:
            out.append(Violation("weights.negative_entry", "mean-field theta must be >= 0"))
    elif isinstance(w, TorusWeights):
        if w.theta < 0:
            out.append(Violation("weights.negative_entry", "torus theta must be >= 0"))
        if not model.lattice and model.n is not None and model.n < 3:
            out.append(Violation("weights.torus_too_small", "torus requires N >= 3"))
    elif isinstance(w, NearestNeighborZWeights):
        if w.w < 0:
            out.append(Violation("weights.negative_entry", "nearest-neighbor w must be >= 0"))
    elif isinstance(w, ExplicitWeights):
        m = w.matrix
        n = model.n
        if n is not None and (len(m) != n or any(len(row) != n for row in m)):
            out.append(Violation("weights.shape", f"explicit matrix must be {n}x{n}"))
            return
        for i, row in enumerate(m):
            for j, v in enumerate(row):
                if v < 0:
                    out.append(
                        Violation("weights.negative_entry", f"W[{j}->{i}] = {v} < 0")
                    )
                if i == j and v != 0:
                    out.append(
                        Violation("weights.nonzero_diagonal", f"W[{i}][{i}] must be 0")
                    )
    else:
        out.append(Violation("weights.unknown_kind", type(w).__name__))


def validate(model: NetworkModel) -> ValidationReport:
    """Check every model invariant; valid models yield an empty report."""
    out: list[Violation] = []

    if model.lattice:
        if model.n is not None:
            out.append(Violation("model.lattice_with_n", "lattice models take no neuron count"))
        if not model.homogeneous:
            out.append(
                Violation(
                    "model.lattice_requires_homogeneous",
                    "lattice models require homogeneous drift/rate/reset",
                )
            )
        if not isinstance(model.weights, NearestNeighborZWeights):
            out.append(
                Violation(
                    "model.lattice_weights",
                    "lattice models require translation-invariant nearest-neighbor weights",
                )
            )
        if model.initial_state is not None:
            out.append(Violation("model.lattice_initial_state", "lattice models take no initial state"))
    else:
        if model.n is None or model.n < 1:
            out.append(Violation("model.bad_n", "finite models need n >= 1"))
        else:
            for name, spec in (("drift", model.drift), ("rate", model.rate), ("reset", model.reset)):
                if isinstance(spec, tuple) and len(spec) != model.n:
                    out.append(
                        Violation(f"model.{name}_length", f"{name} list must have length n={model.n}")
                    )
        if model.initial_state is not None:
            if model.n is not None and len(model.initial_state) != model.n:
                out.append(
                    Violation("model.initial_state_length", f"initial_state must have length n={model.n}")
                )
            if any(v < 0 for v in model.initial_state):
                out.append(Violation("model.negative_initial_state", "initial_state must be >= 0"))

    n_specs = 1 if (model.lattice or model.n is None) else model.n
    for i in range(n_specs):
        suffix = f"neuron {i}" if n_specs > 1 else "model"
        try:
            _check_drift(model.drift_of(i), out, suffix)
            _check_rate(model.rate_of(i), out, suffix)
            _check_reset(model.reset_of(i), out, suffix)
        except IndexError:
            break  # length mismatch already reported

    _check_weights(model, out)
    return ValidationReport(tuple(out))


def require_valid(model: NetworkModel) -> NetworkModel:
    """Raise ConfigError when validate() reports problems."""
    report = validate(model)
    if not report.ok:
        raise ConfigError(
            "invalid model: " + "; ".join(v.message for v in report.violations),
            violations=report.violations,
        )
    return model


# ---------------------------------------------------------------------------
# JSON configuration documents.

_CONFIG_KEYS = {"n", "lattice", "drift", "rate", "reset", "weights", "initial_state", "seed"}

_DRIFT_FIELDS = {
    "linear": (LinearDrift, ("slope",)),
    "constant": (ConstantDrift, ("level",)),
    "affine_plus_one": (AffinePlusOneDrift, ("slope",)),
}
_RATE_FIELDS = {
    "constant": (ConstantRate, ("b",)),
    "step": (StepRate, ("base", "boost", "threshold")),
    "exp_decay": (ExpDecayRate, ("floor", "amplitude", "scale")),
}
_RESET_FIELDS = {
    "exponential": (ExponentialReset, ("rate",)),
    "uniform": (UniformReset, ("lo", "hi")),
    "discrete": (DiscreteReset, ("atoms", "probs")),
}
_WEIGHT_FIELDS = {
    "explicit": (ExplicitWeights, ("matrix",)),
    "mean_field": (MeanFieldWeights, ("theta",)),
    "torus": (TorusWeights, ("theta",)),
    "nearest_neighbor_z": (NearestNeighborZWeights, ("w",)),
}


def _parse_spec(obj, table, what):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{what} spec must be an object with a 'kind' key")
    kind = obj["kind"]
    if kind not in table:
        raise ConfigError(f"unknown {what} kind: {kind!r}")
    cls, fields = table[kind]
    extra = set(obj) - {"kind", *fields}
    if extra:
        raise ConfigError(f"unknown keys in {what} spec: {sorted(extra)}")
    missing = [f for f in fields if f not in obj]
    if missing:
        raise ConfigError(f"missing keys in {what} spec {kind!r}: {missing}")
    return cls(*(obj[f] for f in fields))


def _parse_per_neuron(obj, table, what):
    if isinstance(obj, list):
        return tuple(_parse_spec(o, table, what) for o in obj)
    return _parse_spec(obj, table, what)


def model_from_config(doc: dict) -> tuple[NetworkModel, Optional[int]]:
    """Parse a JSON configuration document into (model, seed).

    Unknown top-level keys are rejected. Structural problems raise
    ConfigError; invariant violations are left to validate().
    """
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    extra = set(doc) - _CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
    lattice = bool(doc.get("lattice", False))
    n = doc.get("n")
    if lattice and n is not None:
        raise ConfigError("give either 'n' or 'lattice': true, not both")
    if not lattice and n is None:
        raise ConfigError("configuration needs 'n' or 'lattice': true")
    for key in ("drift", "rate", "reset", "weights"):
        if key not in doc:
            raise ConfigError(f"missing configuration key: {key!r}")
    model = NetworkModel(
        drift=_parse_per_neuron(doc["drift"], _DRIFT_FIELDS, "drift"),
        rate=_parse_per_neuron(doc["rate"], _RATE_FIELDS, "rate"),
        reset=_parse_per_neuron(doc["reset"], _RESET_FIELDS, "reset"),
        weights=_parse_spec(doc["weights"], _WEIGHT_FIELDS, "weights"),
        n=None if lattice else int(n),
        lattice=lattice,
        initial_state=doc.get("initial_state"),
    )
    seed = doc.get("seed")
    return model, (int(seed) if seed is not None else None)
