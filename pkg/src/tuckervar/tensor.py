"""Dense third-order tensor algebra: unfoldings, mode products, Tucker reconstruction.

All routines use one fixed convention: a tensor entry (i1, i2, i3) sits at
column ``1 + sum_{m != k} (i_m - 1) L_m`` of the mode-k unfolding, where
``L_m`` is the product of the dimensions preceding mode m with mode k skipped
(earlier modes vary fastest). The flat layout of a tensor is i1-fastest,
which for a numpy array of shape (n1, n2, n3) is ``ravel(order="F")``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "unfold",
    "fold",
    "mode_product",
    "kronecker",
    "tucker_reconstruct",
    "TuckerFactors",
]

_MODES = (1, 2, 3)


def _require_tensor3(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    return t


def _index_maps(dims: tuple[int, int, int], mode: int):
    """Row and column index arrays of the mode-k unfolding, built from the
    explicit column-index formula (0-based)."""
    others = [m for m in _MODES if m != mode]
    strides = {}
    for m in others:
        length = 1
        for s in range(1, m):
            if s != mode:
                length *= dims[s - 1]
        strides[m] = length
    idx = np.indices(dims)
    rows = idx[mode - 1]
    cols = idx[others[0] - 1] * strides[others[0]] + idx[others[1] - 1] * strides[others[1]]
    return rows.ravel(), cols.ravel()


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-k unfolding: arrange the mode-k fibers as columns.

    Parameters
    ----------
    t : ndarray, shape (n1, n2, n3)
    mode : int
        Mode index in {1, 2, 3}.

    Returns
    -------
    ndarray of shape (n_k, prod of the other dims).
    """
    t = _require_tensor3(t)
    if mode not in _MODES:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    dims = t.shape
    rows, cols = _index_maps(dims, mode)
    n_cols = t.size // dims[mode - 1]
    out = np.empty((dims[mode - 1], n_cols))
    out[rows, cols] = t.ravel()
    return out


def fold(mat: np.ndarray, mode: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold`: ``fold(unfold(t, k), k, t.shape) == t`` exactly."""
    mat = np.asarray(mat, dtype=float)
    if mode not in _MODES:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError(f"dims must be three positive integers, got {dims}")
    n_cols = dims[0] * dims[1] * dims[2] // dims[mode - 1]
    if mat.shape != (dims[mode - 1], n_cols):
        raise ValueError(
            f"matrix of shape {mat.shape} does not fold into dims {dims} along mode {mode}"
        )
    rows, cols = _index_maps(dims, mode)
    return mat[rows, cols].reshape(dims)


def mode_product(t: np.ndarray, a: np.ndarray, mode: int) -> np.ndarray:
    """k-mode product ``t x_k a``; satisfies ``unfold(result, k) == a @ unfold(t, k)``."""
    t = _require_tensor3(t)
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("mode_product expects a matrix")
    if mode not in _MODES:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    if a.shape[1] != t.shape[mode - 1]:
        raise ValueError(
            f"matrix with {a.shape[1]} columns cannot multiply mode {mode} of size {t.shape[mode - 1]}"
        )
    new_dims = list(t.shape)
    new_dims[mode - 1] = a.shape[0]
    return fold(a @ unfold(t, mode), mode, tuple(new_dims))


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product (block matrix of a_ij * b)."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


@dataclass
class TuckerFactors:
    """Core tensor plus column-orthonormal factor matrices.

    ``core`` has shape (r1, r2, r3); ``a1`` and ``a2`` are m x r1 and m x r2,
    ``a3`` is p x r3. Factors are expected column-orthonormal.
    """

    core: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray

    @property
    def ranks(self) -> tuple[int, int, int]:
        return tuple(int(r) for r in self.core.shape)

    def orthonormality_defect(self) -> float:
        """Largest ||A_i^T A_i - I||_F over the three factors."""
        return max(
            float(np.linalg.norm(a.T @ a - np.eye(a.shape[1])))
            for a in (self.a1, self.a2, self.a3)
        )

    def validate(self, atol: float = 1e-10) -> None:
        core = _require_tensor3(self.core)
        for i, a in enumerate((self.a1, self.a2, self.a3), start=1):
            if a.ndim != 2:
                raise ValueError(f"factor {i} must be a matrix")
            if a.shape[1] != core.shape[i - 1]:
                raise ValueError(
                    f"factor {i} has {a.shape[1]} columns but core dim {i} is {core.shape[i - 1]}"
                )
            if a.shape[0] < a.shape[1]:
                raise ValueError(f"factor {i} has more columns than rows")
        if self.orthonormality_defect() > atol:
            raise ValueError("factor matrices are not column-orthonormal")


def tucker_reconstruct(f: TuckerFactors) -> np.ndarray:
    """Multiply the core by all three factors: ``core x1 a1 x2 a2 x3 a3``."""
    t = mode_product(f.core, f.a1, 1)
    t = mode_product(t, f.a2, 2)
    return mode_product(t, f.a3, 3)
