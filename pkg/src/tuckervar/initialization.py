"""Everything the main solver needs before iterating.

Nuclear-norm initial estimator (proximal gradient with singular value
thresholding), truncated higher-order SVD of the initial tensor, ridge-ratio
rank selection on its unfoldings, and Gaussian-kernel graph Laplacians built
from factor rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import TuckerFactors, fold, mode_product, unfold
from .var import DesignPair

__all__ = [
    "svt",
    "NnmConfig",
    "NnmResult",
    "default_nuclear_weight",
    "nnm_estimate",
    "hosvd",
    "ridge_constant",
    "select_ranks",
    "LaplacianSet",
    "laplacian_from_rows",
    "build_laplacians",
]


def svt(mat: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding, the proximal map of tau * nuclear norm."""
    if tau < 0:
        raise ValueError("threshold must be >= 0")
    mat = np.asarray(mat, dtype=float)
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)) @ vt


def default_nuclear_weight(m: int, p: int, T: int) -> float:
    """Rate factor sqrt(log(m^2 p) / T) of the automatic nuclear-norm weight."""
    return math.sqrt(math.log(m * m * p) / T)


def _auto_nuclear_weight(design: DesignPair) -> float:
    """Automatic weight: the rate factor times the mean squared response.

    The variance factor keeps the weight scale-equivariant (the penalty
    competes against a quadratic loss that scales with the data variance);
    a scale-free weight collapses the estimate to zero on small-amplitude
    series and leaves large-amplitude ones effectively unpenalized.
    """
    m, p, n = design.m, design.p, design.n_samples
    scale = float(np.mean(design.y**2))
    return max(scale, 1e-12) * default_nuclear_weight(m, p, n)


@dataclass
class NnmConfig:
    """Nuclear-norm initializer settings. ``lambda_nn=None`` picks the
    default rate sqrt(log(m^2 p) / T) at fit time."""

    lambda_nn: float | None = None
    max_iter: int = 500
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.lambda_nn is not None and self.lambda_nn <= 0:
            raise ValueError("lambda_nn must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class NnmResult:
    w: np.ndarray
    converged: bool
    iterations: int
    objective_trace: np.ndarray
    lambda_nn: float


def nnm_estimate(design: DesignPair, cfg: NnmConfig | None = None) -> NnmResult:
    """Minimize (1/T) sum ||y_t - W x_t||^2 + lambda ||W||_* over the mode-1
    unfolding W, by proximal gradient with the exact Lipschitz step.

    Returns the folded (m, m, p) tensor. If the iteration cap is hit before
    the relative-change tolerance, the last (best) iterate is returned with
    ``converged=False``.
    """
    cfg = cfg or NnmConfig()
    x, y = design.x, design.y
    n, mp = x.shape
    m = y.shape[1]
    p = mp // m
    lam = cfg.lambda_nn if cfg.lambda_nn is not None else _auto_nuclear_weight(design)

    gram = x.T @ x
    cross = y.T @ x
    yty = float(np.sum(y * y))
    lip = 2.0 * float(np.linalg.eigvalsh(gram)[-1]) / n
    if lip <= 0:
        # all-zero design: the prox of the nuclear norm at 0 is 0
        return NnmResult(
            w=np.zeros((m, m, p)),
            converged=True,
            iterations=0,
            objective_trace=np.array([lam * 0.0]),
            lambda_nn=lam,
        )
    step = 1.0 / lip
    tau = lam * step

    def objective(w: np.ndarray, w_gram: np.ndarray) -> float:
        quad = (yty - 2.0 * float(np.sum(cross * w)) + float(np.sum(w_gram * w))) / n
        return quad + lam * float(np.sum(np.linalg.svd(w, compute_uv=False)))

    w = np.zeros((m, mp))
    trace = [objective(w, w @ gram)]
    converged = False
    iterations = 0
    for k in range(cfg.max_iter):
        w_gram = w @ gram
        grad = 2.0 * (w_gram - cross) / n
        w_next = svt(w - step * grad, tau)
        trace.append(objective(w_next, w_next @ gram))
        delta = float(np.linalg.norm(w_next - w))
        denom = float(np.linalg.norm(w))
        w = w_next
        iterations = k + 1
        if denom > 0:
            rel = delta / denom
        else:
            rel = 0.0 if delta <= 1e-14 else np.inf
        if rel <= cfg.tol:
            converged = True
            break
    return NnmResult(
        w=fold(w, 1, (m, m, p)),
        converged=converged,
        iterations=iterations,
        objective_trace=np.asarray(trace),
        lambda_nn=lam,
    )


def _fix_column_signs(u: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive (first
    such index on ties); makes the SVD-based factors deterministic."""
    u = u.copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
    return u


def hosvd(w: np.ndarray, ranks: tuple[int, int, int]) -> TuckerFactors:
    """Truncated higher-order SVD at the given multilinear ranks.

    Factor i holds the leading left singular vectors of the mode-i unfolding
    (deterministic sign convention); the core is the tensor multiplied by the
    factor transposes.
    """
    w = np.asarray(w, dtype=float)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3 or any(r < 1 for r in ranks):
        raise ValueError(f"ranks must be three positive integers, got {ranks}")
    for i, r in enumerate(ranks):
        if r > w.shape[i]:
            raise ValueError(f"rank {r} exceeds mode-{i + 1} dimension {w.shape[i]}")
    factors = []
    for i, r in enumerate(ranks, start=1):
        u, _, _ = np.linalg.svd(unfold(w, i), full_matrices=False)
        factors.append(_fix_column_signs(u[:, :r]))
    core = w
    for i, a in enumerate(factors, start=1):
        core = mode_product(core, a.T, i)
    return TuckerFactors(core=core, a1=factors[0], a2=factors[1], a3=factors[2])


def ridge_constant(m: int, p: int, T: int) -> float:
    """Ridge offset sqrt(m p log(T) / (50 T)) used by the rank selector."""
    return math.sqrt(m * p * math.log(T) / (50.0 * T))


def select_ranks(w_init: np.ndarray, c_bar: float) -> tuple[int, int, int]:
    """Ridge-type ratio rank selector.

    Per mode i, returns the j in 1..n_i-1 minimizing
    (sigma_{j+1} + c_bar) / (sigma_j + c_bar) over the singular values of the
    mode-i unfolding (smallest j on ties).
    """
    if c_bar <= 0:
        raise ValueError("c_bar must be positive")
    w_init = np.asarray(w_init, dtype=float)
    ranks = []
    for i in range(1, 4):
        n_i = w_init.shape[i - 1]
        sigma = np.linalg.svd(unfold(w_init, i), compute_uv=False)
        if sigma.size < n_i:
            sigma = np.concatenate([sigma, np.zeros(n_i - sigma.size)])
        ratios = (sigma[1:n_i] + c_bar) / (sigma[: n_i - 1] + c_bar)
        ranks.append(int(np.argmin(ratios)) + 1)
    return tuple(ranks)


@dataclass
class LaplacianSet:
    """The three graph Laplacians (response, predictor, temporal) and the
    kernel bandwidth they were built with."""

    l1: np.ndarray
    l2: np.ndarray
    l3: np.ndarray
    epsilon: float

    def as_tuple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.l1, self.l2, self.l3)

    def validate(self) -> None:
        for lap in self.as_tuple():
            if np.linalg.norm(lap - lap.T) > 1e-12 * max(1.0, np.linalg.norm(lap)):
                raise ValueError("Laplacian is not symmetric")
            if np.max(np.abs(lap.sum(axis=1))) > 1e-10:
                raise ValueError("Laplacian rows do not sum to zero")
            if np.linalg.eigvalsh(lap)[0] < -1e-8:
                raise ValueError("Laplacian is not positive semidefinite")


def laplacian_from_rows(a: np.ndarray, epsilon: float) -> np.ndarray:
    """Gaussian-kernel graph Laplacian L = D - Z over the rows of ``a``,
    with weights z_lt = exp(-||a_l - a_t||^2 / (2 epsilon^2))."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a = np.asarray(a, dtype=float)
    diff = a[:, None, :] - a[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    z = np.exp(-d2 / (2.0 * epsilon * epsilon))
    return np.diag(z.sum(axis=1)) - z


def build_laplacians(factors: TuckerFactors, epsilon: float = 0.2) -> LaplacianSet:
    """One Laplacian per factor matrix, built from its rows."""
    return LaplacianSet(
        l1=laplacian_from_rows(factors.a1, epsilon),
        l2=laplacian_from_rows(factors.a2, epsilon),
        l3=laplacian_from_rows(factors.a3, epsilon),
        epsilon=epsilon,
    )
