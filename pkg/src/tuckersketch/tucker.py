"""Tucker decompositions: reconstruction, coherence, and mode maps.

A Tucker decomposition stores a core tensor of shape ``(R_1, ..., R_q)``
together with q factor matrices, the j-th of shape ``(n_j, R_j)``.  The
represented tensor is the core multiplied by every factor along its
mode.  When the ``orthogonal`` flag is set each factor must have
orthonormal columns (checked at construction to 1e-10).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import as_tensor, matricize, dematricize, mode_multiply, multi_mode_multiply, kronecker

__all__ = [
    "TuckerDecomposition",
    "CoherenceReport",
    "reconstruct",
    "mode_coherence",
    "coherence",
    "apply_mode_map",
    "norm_via_gram",
    "psi_matrix",
]

_ORTHO_TOL = 1e-10
_SINGULAR_COLUMN_TOL = 1e-14


@dataclass
class TuckerDecomposition:
    """Core tensor plus per-mode factor matrices."""

    core: np.ndarray
    factors: list[np.ndarray]
    orthogonal: bool = False

    def __post_init__(self):
        self.core = as_tensor(self.core)
        self.factors = [as_tensor(f) for f in self.factors]
        if len(self.factors) != self.core.ndim:
            raise ValueError(
                f"core has order {self.core.ndim} but {len(self.factors)} factors given"
            )
        for j, f in enumerate(self.factors):
            if f.ndim != 2:
                raise ValueError(f"factor {j} is not a matrix")
            n_j, r_j = f.shape
            if r_j != self.core.shape[j]:
                raise ValueError(
                    f"factor {j} has {r_j} columns but core mode {j} has size {self.core.shape[j]}"
                )
            if r_j > n_j:
                raise ValueError(f"factor {j} has more columns ({r_j}) than rows ({n_j})")
        if self.orthogonal:
            for j, f in enumerate(self.factors):
                gram = f.T @ f
                dev = np.max(np.abs(gram - np.eye(f.shape[1])))
                if dev > _ORTHO_TOL:
                    raise ValueError(
                        f"factor {j} marked orthogonal but deviates from orthonormality by {dev:.3e}"
                    )

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(self.core.shape)

    @property
    def order(self) -> int:
        return self.core.ndim


@dataclass
class CoherenceReport:
    """Per-mode and overall mutual coherence of the factor columns."""

    per_mode: list[float] = field(default_factory=list)
    overall: float = 0.0


def reconstruct(T: TuckerDecomposition) -> np.ndarray:
    """Dense tensor represented by the decomposition."""
    return multi_mode_multiply(T.core, T.factors)


def mode_coherence(T: TuckerDecomposition, mode: int) -> float:
    """Largest absolute cosine between distinct columns of factor ``mode``.

    Single-column factors have coherence 0 by convention.  A zero column
    is an error (its direction is undefined).
    """
    if not 0 <= mode < T.order:
        raise ValueError(f"mode {mode} out of range for order-{T.order} decomposition")
    f = T.factors[mode]
    r = f.shape[1]
    if r == 1:
        return 0.0
    norms = np.linalg.norm(f, axis=0)
    if np.any(norms == 0.0):
        raise ValueError(f"factor {mode} has a zero column")
    gram = np.abs((f / norms).T @ (f / norms))
    np.fill_diagonal(gram, 0.0)
    return float(min(1.0, gram.max()))


def coherence(T: TuckerDecomposition) -> CoherenceReport:
    """Coherence of every factor; overall value is the maximum."""
    per_mode = [mode_coherence(T, j) for j in range(T.order)]
    return CoherenceReport(per_mode=per_mode, overall=max(per_mode))


def apply_mode_map(T: TuckerDecomposition, B, mode: int) -> TuckerDecomposition:
    """Push a linear map through one mode, renormalising the new columns.

    The mapped factor keeps unit columns ``B @ g / ||B @ g||`` and the
    core absorbs the column norms along the same mode, so the result
    represents ``mode_multiply(reconstruct(T), B, mode)``.  Raises if a
    transformed column has norm below 1e-14 (direction undefined).  The
    result's ``orthogonal`` flag is always cleared.
    """
    if not 0 <= mode < T.order:
        raise ValueError(f"mode {mode} out of range for order-{T.order} decomposition")
    B = as_tensor(B)
    mapped = B @ T.factors[mode]
    col_norms = np.linalg.norm(mapped, axis=0)
    if np.any(col_norms < _SINGULAR_COLUMN_TOL):
        raise ValueError("mode map sends a factor column below norm 1e-14")
    core_mat = matricize(T.core, mode) * col_norms[:, None]
    new_shape = list(T.core.shape)
    new_core = dematricize(core_mat, mode, new_shape)
    new_factors = list(T.factors)
    new_factors[mode] = mapped / col_norms
    return TuckerDecomposition(new_core, new_factors, orthogonal=False)


def psi_matrix(T: TuckerDecomposition, mode: int) -> np.ndarray:
    """Weight matrix pairing factor-``mode`` columns with everything else.

    Returns the ``(R_mode, prod(n_k, k != mode))`` matrix W such that the
    mode unfolding of the reconstruction is ``factor_mode @ W``.  This is
    the only place the (potentially wide) matrix is materialised.
    """
    if not 0 <= mode < T.order:
        raise ValueError(f"mode {mode} out of range for order-{T.order} decomposition")
    chain = None
    for k in reversed(range(T.order)):
        if k == mode:
            continue
        chain = T.factors[k] if chain is None else kronecker(chain, T.factors[k])
    if chain is None:  # order-1 decomposition
        chain = np.eye(1)
    return matricize(T.core, mode) @ chain.T


def norm_via_gram(T: TuckerDecomposition, B, mode: int) -> float:
    """Squared norm of the reconstruction mapped by ``B`` along ``mode``.

    Evaluates sum_{r,s} (W W^T)_{rs} <B g_r, B g_s> with W the mode
    weight matrix and g_r the columns of the mode factor, which equals
    ``norm(mode_multiply(reconstruct(T), B, mode)) ** 2`` without forming
    the mapped tensor.
    """
    B = as_tensor(B)
    if B.ndim != 2 or B.shape[1] != T.shape[mode]:
        raise ValueError(
            f"mode map must have {T.shape[mode]} columns, got shape {B.shape}"
        )
    psi = psi_matrix(T, mode)
    weight = psi @ psi.T
    mapped = B @ T.factors[mode]
    return float(np.sum(weight * (mapped.T @ mapped)))
