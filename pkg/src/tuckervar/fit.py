"""End-to-end estimation pipeline.

Order of operations: nuclear-norm initial estimate, ridge-ratio rank
selection (when ranks are "auto"), truncated HOSVD at those ranks, graph
Laplacians from the initial factor rows, then the block-cyclic solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .initialization import (
    LaplacianSet,
    NnmConfig,
    NnmResult,
    build_laplacians,
    hosvd,
    nnm_estimate,
    ridge_constant,
    select_ranks,
)
from .solver import FitResult, StdgrConfig, solve
from .tensor import TuckerFactors
from .var import DesignPair, build_design

__all__ = ["FitReport", "fit_design", "fit_panel"]


@dataclass
class FitReport:
    """Everything produced by one fit: the solver result plus the
    initialization artifacts needed to reproduce or persist it."""

    result: FitResult
    ranks: tuple[int, int, int]
    ranks_selected: bool
    laplacians: LaplacianSet
    init: TuckerFactors
    nnm: NnmResult
    m: int
    p: int
    n_samples: int

    @property
    def w_hat(self) -> np.ndarray:
        return self.result.w_hat


def fit_design(
    design: DesignPair,
    cfg: StdgrConfig | None = None,
    nnm_cfg: NnmConfig | None = None,
    epsilon: float = 0.2,
    laplacians: LaplacianSet | None = None,
) -> FitReport:
    """Fit the transition tensor from a prepared (X, Y) regression pair."""
    cfg = cfg or StdgrConfig()
    m, p, n = design.m, design.p, design.n_samples

    nnm = nnm_estimate(design, nnm_cfg)
    if cfg.ranks == "auto":
        ranks = select_ranks(nnm.w, ridge_constant(m, p, n))
        selected = True
    else:
        ranks = tuple(int(r) for r in cfg.ranks)
        selected = False
    init = hosvd(nnm.w, ranks)
    lap = laplacians if laplacians is not None else build_laplacians(init, epsilon)
    result = solve(design, lap, cfg, init)
    return FitReport(
        result=result,
        ranks=ranks,
        ranks_selected=selected,
        laplacians=lap,
        init=init,
        nnm=nnm,
        m=m,
        p=p,
        n_samples=n,
    )


def fit_panel(
    panel: np.ndarray,
    p: int,
    cfg: StdgrConfig | None = None,
    nnm_cfg: NnmConfig | None = None,
    epsilon: float = 0.2,
    laplacians: LaplacianSet | None = None,
) -> FitReport:
    """Fit the transition tensor of a VAR(p) model from a (T, m) panel."""
    return fit_design(build_design(panel, p), cfg, nnm_cfg, epsilon, laplacians)
