"""Block-cyclic proximal solver for the graph-regularized sparse Tucker VAR fit.

Objective, over a core tensor G, column-orthonormal factors A1..A3 and
auxiliary factors U1..U3:

    F = (1/2T) sum_t ||y_t - W_(1) x_t||^2 + beta ||G||_1
        + sum_i alpha_i tr(U_i^T L_i U_i) + sum_i (gamma_i/2) ||U_i - A_i||^2

with W = G x1 A1 x2 A2 x3 A3, subject to ||G||_inf <= c and A_i^T A_i = I
(enforced exactly by the prox maps, never as penalty values).

One iteration updates G, A1, A2, A3, U1, U2, U3 in that order, each block
from a linearized gradient step at the freshest values of the blocks updated
before it: soft threshold + box clip for G, a polar (Procrustes) step for
each A_i, and an exact small linear solve for each U_i. Step sizes exceed the
per-block Lipschitz constants, which makes the objective monotone with a
quantified sufficient decrease.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .initialization import LaplacianSet
from .tensor import TuckerFactors, fold, kronecker, mode_product, tucker_reconstruct, unfold
from .var import DesignPair

__all__ = [
    "StdgrConfig",
    "StepSizes",
    "SolverState",
    "FitResult",
    "compute_step_sizes",
    "prox_core",
    "procrustes",
    "update_u",
    "grad_Q_full",
    "grad_partials",
    "psi_value",
    "objective",
    "convergence_metrics",
    "palm_step",
    "solve",
]


def _triple(value, name: str) -> tuple[float, float, float]:
    if np.isscalar(value):
        value = (value, value, value)
    out = tuple(float(v) for v in value)
    if len(out) != 3:
        raise ValueError(f"{name} must be a scalar or a triple")
    return out


@dataclass
class StdgrConfig:
    """Hyperparameters of the penalized model and its solver.

    ``alpha`` and ``gamma`` accept a scalar (broadcast to all three modes) or
    a triple. ``ranks`` is an explicit (r1, r2, r3) or "auto" for the
    ridge-ratio selector run on the initial estimate.
    """

    beta: float = 1e-3
    alpha: tuple[float, float, float] = (1e-3, 1e-3, 1e-3)
    gamma: tuple[float, float, float] = (0.1, 0.1, 0.1)
    c: float = 1.0
    a_bar1: float = 1.1
    a_bar2: float = 10.0
    tol: float = 3e-3
    max_iter: int = 200
    ranks: tuple[int, int, int] | str = "auto"

    def __post_init__(self) -> None:
        self.alpha = _triple(self.alpha, "alpha")
        self.gamma = _triple(self.gamma, "gamma")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if any(a < 0 for a in self.alpha):
            raise ValueError("alpha weights must be >= 0")
        if any(g <= 0 for g in self.gamma):
            raise ValueError("gamma weights must be positive")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.a_bar1 <= 1 or self.a_bar2 <= 1:
            raise ValueError("step multipliers a_bar1 and a_bar2 must exceed 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if isinstance(self.ranks, str):
            if self.ranks != "auto":
                raise ValueError('ranks must be "auto" or a triple of positive integers')
        else:
            self.ranks = tuple(int(r) for r in self.ranks)
            if len(self.ranks) != 3 or any(r < 1 for r in self.ranks):
                raise ValueError("ranks must be three positive integers")


@dataclass
class StepSizes:
    """Per-block proximal weights rho_1..rho_7 with the Lipschitz constants
    they must strictly exceed (rho_5..rho_7 exceed the coupling weights)."""

    rho: tuple[float, ...]
    lipschitz: tuple[float, float, float, float]
    nu: float
    c1: float
    gamma: tuple[float, float, float]

    def validate(self) -> None:
        bounds = self.lipschitz + self.gamma
        for i, (r, b) in enumerate(zip(self.rho, bounds), start=1):
            if not r > b:
                raise ValueError(f"step weight rho_{i}={r} does not exceed its bound {b}")

    def decrease_margin(self) -> float:
        """min over blocks of rho - bound; weights the sufficient-decrease
        inequality."""
        bounds = self.lipschitz + self.gamma
        return min(r - b for r, b in zip(self.rho, bounds))


def compute_step_sizes(
    design: DesignPair, cfg: StdgrConfig, ranks: tuple[int, int, int]
) -> StepSizes:
    """Lipschitz constants of the smooth coupling and the derived step weights.

    c1 = (1/T) sum ||x_t||^2 bounds the core block; the factor blocks add the
    core energy bound nu = sqrt(r1 r2 r3) c and the coupling weight.
    """
    n = design.n_samples
    c1 = float(np.sum(design.x * design.x)) / n
    nu = float(np.sqrt(np.prod(ranks)) * cfg.c)
    g1, g2, g3 = cfg.gamma
    lips = (c1, nu * nu * c1 + g1, nu * nu * c1 + g2, nu * nu * c1 + g3)
    # an all-zero design gives L1 = 0; floor it so rho_1 stays positive
    # (the huge resulting threshold maps the core straight to zero)
    rho = (
        cfg.a_bar1 * max(lips[0], 1e-30),
        cfg.a_bar1 * lips[1],
        cfg.a_bar1 * lips[2],
        cfg.a_bar1 * lips[3],
        cfg.a_bar2 * g1,
        cfg.a_bar2 * g2,
        cfg.a_bar2 * g3,
    )
    steps = StepSizes(rho=rho, lipschitz=lips, nu=nu, c1=c1, gamma=cfg.gamma)
    steps.validate()
    return steps


@dataclass
class SolverState:
    """One full iterate: core, factors, and auxiliary factors."""

    core: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def copy(self) -> "SolverState":
        return SolverState(*(arr.copy() for arr in self.blocks()))

    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.core, self.a1, self.a2, self.a3, self.u1, self.u2, self.u3)

    def factors(self) -> TuckerFactors:
        return TuckerFactors(core=self.core, a1=self.a1, a2=self.a2, a3=self.a3)

    def orthonormality_defect(self) -> float:
        return self.factors().orthonormality_defect()


@dataclass
class FitResult:
    """Final estimate plus per-iteration diagnostics."""

    w_hat: np.ndarray
    factors: TuckerFactors
    u: tuple[np.ndarray, np.ndarray, np.ndarray]
    objective_trace: np.ndarray
    lambda_trace: np.ndarray
    lambdas: np.ndarray
    block_change_sq: np.ndarray
    core_abs_max_trace: np.ndarray
    orth_defect_trace: np.ndarray
    iterations: int
    converged: bool
    init_core_clipped: bool
    step_sizes: StepSizes


def prox_core(l: np.ndarray, tau: float, c: float) -> np.ndarray:
    """Entrywise soft threshold followed by the box projection onto
    [-c, c]; the exact minimizer of tau|g| + (g - l)^2 / 2 over the box."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if c <= 0:
        raise ValueError("c must be positive")
    l = np.asarray(l, dtype=float)
    return np.clip(np.sign(l) * np.maximum(np.abs(l) - tau, 0.0), -c, c)


def procrustes(mat: np.ndarray) -> np.ndarray:
    """Polar factor U V^T of the thin SVD; maximizes tr(A^T mat) over
    column-orthonormal A."""
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] < mat.shape[1]:
        raise ValueError("procrustes needs a tall (rows >= cols) matrix")
    u, _, vt = np.linalg.svd(mat, full_matrices=False)
    return u @ vt


def update_u(
    u_prev: np.ndarray,
    a: np.ndarray,
    lap: np.ndarray,
    alpha: float,
    gamma: float,
    rho: float,
) -> np.ndarray:
    """Exact minimizer of the linearized auxiliary subproblem:
    (2 alpha L + rho I)^{-1} (rho U - gamma (U - A))."""
    n = u_prev.shape[0]
    rhs = rho * u_prev - gamma * (u_prev - a)
    return np.linalg.solve(2.0 * alpha * lap + rho * np.eye(n), rhs)


def _loss_gradient_mat(w1: np.ndarray, design: DesignPair) -> np.ndarray:
    """(1/T) sum (W_(1) x_t - y_t) x_t^T as a dense matrix."""
    residual = design.x @ w1.T - design.y
    return residual.T @ design.x / design.n_samples


def _loss_value(w1: np.ndarray, design: DesignPair) -> float:
    residual = design.x @ w1.T - design.y
    return float(np.sum(residual * residual)) / (2.0 * design.n_samples)


def _w1(core: np.ndarray, a1: np.ndarray, a2: np.ndarray, a3: np.ndarray) -> np.ndarray:
    return a1 @ unfold(core, 1) @ kronecker(a3, a2).T


def grad_Q_full(w: np.ndarray, design: DesignPair) -> np.ndarray:
    """Gradient of the quadratic loss with respect to the full transition
    tensor; its mode-1 unfolding is (1/T) sum (W_(1) x_t - y_t) x_t^T."""
    w = np.asarray(w, dtype=float)
    m, _, p = w.shape
    if design.x.shape[1] != m * p or design.y.shape[1] != m:
        raise ValueError("design dimensions do not match the transition tensor")
    return fold(_loss_gradient_mat(unfold(w, 1), design), 1, (m, m, p))


def _factor_gradients(
    core: np.ndarray,
    a1: np.ndarray,
    a2: np.ndarray,
    a3: np.ndarray,
    design: DesignPair,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Loss gradients with respect to (core, a1, a2, a3) at one point."""
    m = a1.shape[0]
    p = a3.shape[0]
    gq1 = _loss_gradient_mat(_w1(core, a1, a2, a3), design)
    gq = fold(gq1, 1, (m, m, p))
    g_core = mode_product(mode_product(mode_product(gq, a1.T, 1), a2.T, 2), a3.T, 3)
    g_a1 = gq1 @ kronecker(a3, a2) @ unfold(core, 1).T
    g_a2 = unfold(gq, 2) @ kronecker(a3, a1) @ unfold(core, 2).T
    g_a3 = unfold(gq, 3) @ kronecker(a2, a1) @ unfold(core, 3).T
    return g_core, g_a1, g_a2, g_a3


def grad_partials(
    state: SolverState, design: DesignPair, cfg: StdgrConfig
) -> tuple[np.ndarray, ...]:
    """The seven partial gradients of the smooth part (loss plus coupling)
    at a common point, in block order (G, A1, A2, A3, U1, U2, U3)."""
    g_core, g_a1, g_a2, g_a3 = _factor_gradients(
        state.core, state.a1, state.a2, state.a3, design
    )
    couplings = [
        cfg.gamma[i] * (u - a)
        for i, (u, a) in enumerate(
            zip((state.u1, state.u2, state.u3), (state.a1, state.a2, state.a3))
        )
    ]
    return (
        g_core,
        g_a1 - couplings[0],
        g_a2 - couplings[1],
        g_a3 - couplings[2],
        couplings[0],
        couplings[1],
        couplings[2],
    )


def psi_value(state: SolverState, design: DesignPair, cfg: StdgrConfig) -> float:
    """Smooth part: quadratic loss plus the three coupling penalties."""
    value = _loss_value(_w1(state.core, state.a1, state.a2, state.a3), design)
    for g, u, a in zip(cfg.gamma, (state.u1, state.u2, state.u3), (state.a1, state.a2, state.a3)):
        value += 0.5 * g * float(np.sum((u - a) ** 2))
    return value


def _check_feasible(state: SolverState, cfg: StdgrConfig) -> None:
    if float(np.max(np.abs(state.core))) > cfg.c + 1e-12:
        raise ValueError("core violates the box bound")
    if state.orthonormality_defect() > 1e-10:
        raise ValueError("factor matrices are not column-orthonormal")


def objective(
    state: SolverState, design: DesignPair, lap: LaplacianSet, cfg: StdgrConfig
) -> float:
    """Full objective value at a feasible state (box and orthonormality are
    constraints, not penalty terms)."""
    _check_feasible(state, cfg)
    value = psi_value(state, design, cfg)
    value += cfg.beta * float(np.sum(np.abs(state.core)))
    for a_w, u, l in zip(cfg.alpha, (state.u1, state.u2, state.u3), lap.as_tuple()):
        value += a_w * float(np.trace(u.T @ l @ u))
    return value


def convergence_metrics(prev: SolverState, new: SolverState) -> np.ndarray:
    """Relative Frobenius change of each of the seven blocks. A zero-norm
    previous block counts as converged only if the change is itself zero."""
    out = np.empty(7)
    for i, (b_prev, b_new) in enumerate(zip(prev.blocks(), new.blocks())):
        num = float(np.linalg.norm(b_new - b_prev))
        den = float(np.linalg.norm(b_prev))
        if den > 0:
            out[i] = num / den
        else:
            out[i] = 0.0 if num <= 1e-14 else np.inf
    return out


def palm_step(
    state: SolverState,
    design: DesignPair,
    lap: LaplacianSet,
    cfg: StdgrConfig,
    steps: StepSizes,
) -> SolverState:
    """One full block sweep; every block sees the freshest previous blocks."""
    rho = steps.rho
    g1, g2, g3 = cfg.gamma
    a1w, a2w, a3w = cfg.alpha

    g_core = _factor_gradients(state.core, state.a1, state.a2, state.a3, design)[0]
    core = prox_core(state.core - g_core / rho[0], cfg.beta / rho[0], cfg.c)

    g_a1 = _factor_gradients(core, state.a1, state.a2, state.a3, design)[1]
    g_a1 -= g1 * (state.u1 - state.a1)
    a1 = procrustes(state.a1 - g_a1 / rho[1])

    g_a2 = _factor_gradients(core, a1, state.a2, state.a3, design)[2]
    g_a2 -= g2 * (state.u2 - state.a2)
    a2 = procrustes(state.a2 - g_a2 / rho[2])

    g_a3 = _factor_gradients(core, a1, a2, state.a3, design)[3]
    g_a3 -= g3 * (state.u3 - state.a3)
    a3 = procrustes(state.a3 - g_a3 / rho[3])

    u1 = update_u(state.u1, a1, lap.l1, a1w, g1, rho[4])
    u2 = update_u(state.u2, a2, lap.l2, a2w, g2, rho[5])
    u3 = update_u(state.u3, a3, lap.l3, a3w, g3, rho[6])

    return SolverState(core=core, a1=a1, a2=a2, a3=a3, u1=u1, u2=u2, u3=u3)


def solve(
    design: DesignPair,
    lap: LaplacianSet,
    cfg: StdgrConfig,
    init: TuckerFactors,
) -> FitResult:
    """Run the block-cyclic solver from a Tucker initializer.

    The auxiliary factors start at the initial factor matrices. Stops when
    the largest relative block change drops to ``cfg.tol`` or after
    ``cfg.max_iter`` sweeps. The objective trace is monotone under the step
    rules enforced by :func:`compute_step_sizes`.
    """
    init.validate()
    if design.x.shape[1] != init.a1.shape[0] * init.a3.shape[0]:
        raise ValueError("design and initializer dimensions do not match")

    core0 = init.core
    clipped = False
    if float(np.max(np.abs(core0))) > cfg.c:
        core0 = np.clip(core0, -cfg.c, cfg.c)
        clipped = True

    state = SolverState(
        core=core0.copy(),
        a1=init.a1.copy(),
        a2=init.a2.copy(),
        a3=init.a3.copy(),
        u1=init.a1.copy(),
        u2=init.a2.copy(),
        u3=init.a3.copy(),
    )
    ranks = tuple(int(r) for r in core0.shape)
    steps = compute_step_sizes(design, cfg, ranks)
    steps.validate()

    obj_trace = [objective(state, design, lap, cfg)]
    lambdas = []
    change_sq = []
    core_max = [float(np.max(np.abs(state.core)))]
    orth_defect = [state.orthonormality_defect()]

    converged = False
    iterations = 0
    for _ in range(cfg.max_iter):
        prev = state
        state = palm_step(prev, design, lap, cfg, steps)
        metrics = convergence_metrics(prev, state)
        lambdas.append(metrics)
        change_sq.append(
            sum(
                float(np.sum((b_new - b_prev) ** 2))
                for b_prev, b_new in zip(prev.blocks(), state.blocks())
            )
        )
        obj_trace.append(objective(state, design, lap, cfg))
        core_max.append(float(np.max(np.abs(state.core))))
        orth_defect.append(state.orthonormality_defect())
        iterations += 1
        if float(np.max(metrics)) <= cfg.tol:
            converged = True
            break

    lambdas = np.asarray(lambdas).reshape(iterations, 7)
    factors = state.factors()
    return FitResult(
        w_hat=tucker_reconstruct(factors),
        factors=factors,
        u=(state.u1, state.u2, state.u3),
        objective_trace=np.asarray(obj_trace),
        lambda_trace=lambdas.max(axis=1) if iterations else np.empty(0),
        lambdas=lambdas,
        block_change_sq=np.asarray(change_sq),
        core_abs_max_trace=np.asarray(core_max),
        orth_defect_trace=np.asarray(orth_defect),
        iterations=iterations,
        converged=converged,
        init_core_clipped=clipped,
        step_sizes=steps,
    )
