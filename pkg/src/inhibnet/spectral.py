"""Reproduction-matrix stability diagnostics.

Builds the N x N matrix H with off-diagonal entries W[j -> i] * sup gamma_i
and diagonal sup gamma_i * E[Y_i], extracts its Perron root and left
eigenvector by power iteration, forms the linear Lyapunov weights, and
evaluates the generator drift of the Lyapunov function together with its
eigenvalue-based upper bound. A spectral radius below 1 certifies
non-evanescence; the converse is not claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SpectralError
from .flow import FlowContext, gamma_sup
from .model import NetworkModel, require_valid, weight

POWER_TOL = 1e-12
POWER_MAX_ITER = 10**5
RESIDUAL_TOL = 1e-10
STABILITY_MARGIN = 1e-12


@dataclass(frozen=True)
class ReproductionMatrix:
    h: np.ndarray
    gamma_sup: np.ndarray
    rho: float
    kappa: np.ndarray  # left Perron eigenvector, normalized to sum 1
    m: np.ndarray  # Lyapunov weights kappa_i * sup gamma_i


@dataclass(frozen=True)
class Verdict:
    kind: str  # "stable" | "inconclusive"
    rho: float


def weight_matrix(model: NetworkModel) -> np.ndarray:
    """Dense matrix with entry [i, j] = W[j -> i]."""
    n = model.n
    return np.array([[weight(model, j, i) for j in range(n)] for i in range(n)])


def _is_irreducible(w: np.ndarray) -> bool:
    """Strong connectivity of the directed graph with edges j -> i where
    W[j -> i] > 0, by boolean matrix reachability."""
    n = w.shape[0]
    if n == 1:
        return True
    adj = w > 0.0
    reach = adj.copy()
    power = adj.copy()
    for _ in range(n - 1):
        power = power @ adj
        reach |= power
    return bool(np.all(reach | np.eye(n, dtype=bool)))


def _left_perron(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Perron root and left eigenvector of a nonnegative irreducible
    matrix by power iteration on a diagonally shifted copy (the shift
    makes the matrix primitive, so the iteration cannot cycle)."""
    n = h.shape[0]
    shift = 1.0
    m = h + shift * np.eye(n)
    v = np.full(n, 1.0 / n)
    for _ in range(POWER_MAX_ITER):
        w = v @ m
        total = w.sum()
        if total == 0.0:
            raise SpectralError("power iteration collapsed to zero")
        w /= total
        if np.max(np.abs(w - v)) < POWER_TOL:
            v = w
            break
        v = w
    else:
        raise ConvergenceError(
            f"power iteration did not converge in {POWER_MAX_ITER} iterations"
        )
    rho = float((v @ m).sum()) - shift
    return rho, v


def build_H(model: NetworkModel) -> ReproductionMatrix:
    """Reproduction matrix with spectral diagnostics for a finite model."""
    require_valid(model)
    if model.lattice:
        raise SpectralError("the reproduction matrix is defined for finite models")
    n = model.n
    gs = np.array(
        [gamma_sup(FlowContext(model.drift_of(i), model.rate_of(i))) for i in range(n)]
    )
    if not np.all(np.isfinite(gs)):
        bad = [i for i in range(n) if not math.isfinite(gs[i])]
        raise SpectralError(
            f"gamma = beta/alpha is unbounded for neurons {bad}; "
            "the spectral analysis needs a bounded ratio (linear drift "
            "makes it blow up at 0)"
        )
    w = weight_matrix(model)
    if not _is_irreducible(w):
        raise SpectralError("the weight matrix is reducible; no Perron eigenvector")
    h = w * gs[:, None]
    means = np.array([model.reset_of(i).mean for i in range(n)])
    np.fill_diagonal(h, gs * means)
    rho, kappa = _left_perron(h)
    residual = np.max(np.abs(kappa @ h - rho * kappa))
    if rho > 0 and residual / rho > RESIDUAL_TOL:
        raise ConvergenceError(
            f"left eigenvector residual {residual / rho:.3e} above {RESIDUAL_TOL}"
        )
    return ReproductionMatrix(h=h, gamma_sup=gs, rho=rho, kappa=kappa, m=kappa * gs)


def drift_of_lyapunov(
    model: NetworkModel, H: ReproductionMatrix, x
) -> tuple[float, float]:
    """Generator drift of V(x) = sum m_i x_i at the state x.

    Returns (exact, bound): the exact generator value, and the upper
    bound obtained by dropping the -beta*x*m term and substituting the
    eigenvalue identity. exact <= bound always, with equality at x = 0.
    """
    x = np.asarray(x, dtype=float)
    n = model.n
    if x.shape != (n,):
        raise ValueError(f"state must have shape ({n},), got {x.shape}")
    alpha = np.array([float(model.drift_of(i).alpha(x[i])) for i in range(n)])
    beta = np.array([float(model.rate_of(i).beta(x[i])) for i in range(n)])
    means = np.array([model.reset_of(i).mean for i in range(n)])
    w = weight_matrix(model)  # w[j, i] = W[i -> j]
    m = H.m
    spread = np.array(
        [sum(w[j, i] * m[j] for j in range(n) if j != i) for i in range(n)]
    )
    exact = float(
        -(alpha * m).sum() + (beta * (m * means + spread)).sum() - (beta * x * m).sum()
    )
    gam = beta / alpha
    bound = float(-(alpha * H.gamma_sup * H.kappa * (1.0 - gam / H.gamma_sup * H.rho)).sum())
    return exact, bound


def non_evanescence_verdict(H: ReproductionMatrix) -> Verdict:
    """Stable when rho < 1 (up to a margin); otherwise inconclusive —
    no instability claim is made above 1."""
    if H.rho < 1.0 - STABILITY_MARGIN:
        return Verdict("stable", H.rho)
    return Verdict("inconclusive", H.rho)
