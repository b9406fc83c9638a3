"""Tucker solvers: truncated HOSVD and three orthogonal-iteration variants.

All solvers return factors with orthonormal columns plus a run report
with per-iteration stage timings.  The iterative methods share one ALS
sweep structure; they differ in what data the sweep sees:

* ``hooi``          classic alternating scheme on the raw tensor.
* ``hooi-re``       the tensor is mixed once along the compressed modes
                    (random signs then orthonormal DCT-II), every sweep
                    redraws a row sample per compressed mode, factor
                    updates use the sketched tensor and the core solves
                    a least-squares problem on the fully sketched data
                    (pseudoinverse when a sample is smaller than the
                    rank).
* ``hooi-re-star``  identical sweeps, but the core update projects the
                    full mixed tensor instead of the sketched one.

Factor updates are the closed-form polar solution of each block
least-squares problem: with every other quantity held fixed, the best
orthonormal factor is U V^T from a thin SVD of the partially contracted
unfolding times the core unfolding transposed.  The randomized variants
use the most recently updated core throughout a sweep.

Convergence is declared when the relative fit (1 - residual/norm),
measured on the data the method actually fits (sketched data for
``hooi-re``, mixed data for ``hooi-re-star``), improves by less than
``rel_tol``.  The reported ``final_error`` is always the Frobenius
reconstruction error against the original input, after the factors are
pulled back through the mixing maps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import rng
from .embeddings import (
    MixOperators,
    draw_sample_rows,
    make_mix_operators,
    mix,
    sample_size,
    subsample_mode,
    unmix_factor,
)
from .tensor import as_tensor, matricize, mode_multiply, multi_mode_multiply, norm
from .tucker import TuckerDecomposition, reconstruct

__all__ = [
    "DecomposerConfig",
    "RunReport",
    "METHODS",
    "STAGES",
    "decompose",
    "hosvd",
    "hooi",
    "hooi_re",
    "hooi_re_star",
    "reconstruction_error",
    "relative_fit",
]

METHODS = ("hosvd", "hooi", "hooi-re", "hooi-re-star")
RANDOMIZED = ("hooi-re", "hooi-re-star")
STAGES = ("embed_generate", "embed_apply", "factor_update", "core_update")

_PINV_RCOND = 1e-12


@dataclass
class DecomposerConfig:
    ranks: tuple[int, ...]
    method: str = "hooi"
    dr: float = 1.0
    compress_modes: tuple[int, ...] | None = None  # None = every mode
    max_iters: int = 100
    rel_tol: float = 1e-5
    seed: int = 0
    init: str = "hosvd"  # or "random"

    def resolved_compress_modes(self, order: int) -> tuple[int, ...]:
        if self.compress_modes is None:
            return tuple(range(order))
        return tuple(self.compress_modes)

    def validate(self, shape: tuple[int, ...]) -> None:
        q = len(shape)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.init not in ("hosvd", "random"):
            raise ValueError(f"unknown init {self.init!r}, expected 'hosvd' or 'random'")
        if len(self.ranks) != q:
            raise ValueError(f"{len(self.ranks)} ranks given for an order-{q} tensor")
        for j, (r, n) in enumerate(zip(self.ranks, shape)):
            if not 1 <= r <= n:
                raise ValueError(f"rank {r} for mode {j} must be in [1, {n}]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.method in RANDOMIZED:
            if not 0.0 < self.dr <= 1.0:
                raise ValueError(f"dr must be in (0, 1], got {self.dr}")
            modes = self.resolved_compress_modes(q)
            if len(modes) == 0:
                raise ValueError("randomized methods need at least one compressed mode")
            if len(set(modes)) != len(modes):
                raise ValueError(f"duplicate compressed modes: {modes}")
            for j in modes:
                if not 0 <= j < q:
                    raise ValueError(f"compressed mode {j} out of range for order-{q} tensor")


@dataclass
class RunReport:
    method: str
    ranks: tuple[int, ...]
    dr: float
    seed: int
    iterations: int
    final_error: float
    fit_trace: list[float] = field(default_factory=list)
    stage_times: dict[str, list[float]] = field(default_factory=dict)
    preprocess_ms: float = 0.0

    def mean_stage_ms(self, stage: str) -> float:
        times = self.stage_times.get(stage, [])
        return float(np.mean(times)) if times else 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ranks"] = list(self.ranks)
        return out


def reconstruction_error(X, T: TuckerDecomposition) -> float:
    """Frobenius norm of ``X - reconstruct(T)``."""
    X = as_tensor(X)
    if X.shape != T.shape:
        raise ValueError(f"tensor shape {X.shape} does not match decomposition {T.shape}")
    return norm(X - reconstruct(T))


def relative_fit(X, T: TuckerDecomposition) -> float:
    """1 - error/||X||; undefined (raises) for a zero tensor."""
    nx = norm(X)
    if nx == 0.0:
        raise ValueError("relative fit is undefined for a zero tensor")
    return 1.0 - reconstruction_error(X, T) / nx


def _fix_sign(U: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(U), axis=0)
    flips = np.where(U[idx, np.arange(U.shape[1])] < 0.0, -1.0, 1.0)
    return U * flips


def _leading_left_vectors(M: np.ndarray, r: int) -> np.ndarray:
    U = np.linalg.svd(M, full_matrices=False)[0][:, :r]
    return _fix_sign(U)


def _polar_factor(M: np.ndarray) -> np.ndarray:
    """Orthonormal polar factor U V^T of a tall matrix."""
    U, _, Vt = np.linalg.svd(M, full_matrices=False)
    return U @ Vt


def _ls_projector(A: np.ndarray) -> np.ndarray:
    """Matrix P with ``P @ y`` the least-squares solution of ``A x = y``.

    Solves the normal equations when A has full column rank and falls
    back to a pseudoinverse (relative cutoff 1e-12) when the sample is
    smaller than the rank or the normal matrix is ill conditioned.
    """
    m, r = A.shape
    if m >= r:
        gram = A.T @ A
        try:
            if np.linalg.cond(gram) < 1e12:
                return np.linalg.solve(gram, A.T)
        except np.linalg.LinAlgError:
            pass
    return np.linalg.pinv(A, rcond=_PINV_RCOND)


def _hosvd_factors(X: np.ndarray, ranks) -> list[np.ndarray]:
    return [_leading_left_vectors(matricize(X, j), r) for j, r in enumerate(ranks)]


def hosvd(X, ranks) -> TuckerDecomposition:
    """Truncated higher-order SVD baseline.

    Factor j holds the leading left singular vectors of the mode-j
    unfolding; the core is the projection of ``X`` onto those bases.
    """
    X = as_tensor(X)
    DecomposerConfig(ranks=tuple(ranks), method="hosvd").validate(X.shape)
    factors = _hosvd_factors(X, ranks)
    core = multi_mode_multiply(X, [f.T for f in factors])
    return TuckerDecomposition(core, factors, orthogonal=True)


def _run_hosvd(X: np.ndarray, config: DecomposerConfig):
    stage = {name: [0.0] for name in STAGES}
    t0 = time.perf_counter()
    factors = _hosvd_factors(X, config.ranks)
    stage["factor_update"][0] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    core = multi_mode_multiply(X, [f.T for f in factors])
    stage["core_update"][0] = (time.perf_counter() - t0) * 1e3
    T = TuckerDecomposition(core, factors, orthogonal=True)
    err = reconstruction_error(X, T)
    nx = norm(X)
    report = RunReport(
        method="hosvd",
        ranks=tuple(config.ranks),
        dr=config.dr,
        seed=config.seed,
        iterations=1,
        final_error=err,
        fit_trace=[1.0 - err / nx],
        stage_times=stage,
        preprocess_ms=0.0,
    )
    return T, report


def _initial_guess(
    Xw: np.ndarray,
    config: DecomposerConfig,
    modes: tuple[int, ...],
    sizes: dict[int, int],
):
    """Starting factors and core on the (possibly mixed) working tensor.

    The default sketches the working tensor along the other modes before
    each factor SVD, so initialisation costs no more than one sweep; the
    core starts from the same least-squares problem the first sweep will
    solve.  ``init="random"`` draws orthonormal bases instead.
    """
    q = Xw.ndim
    samples = {
        j: draw_sample_rows(rng.stream(config.seed, rng.SAMPLE, 0, j), Xw.shape[j], sizes[j])
        for j in modes
    }
    scales = {j: float(np.sqrt(Xw.shape[j] / sizes[j])) for j in modes}
    if config.init == "random":
        factors = []
        for j in range(q):
            G = rng.stream(config.seed, rng.INIT, j).standard_normal((Xw.shape[j], config.ranks[j]))
            factors.append(_fix_sign(np.linalg.qr(G)[0]))
    else:
        factors = []
        for j in range(q):
            W = Xw
            for k in modes:
                if k != j:
                    W = subsample_mode(W, samples[k], scales[k], k)
            factors.append(_leading_left_vectors(matricize(W, j), config.ranks[j]))
    if modes:
        Xc = Xw
        for k in modes:
            Xc = subsample_mode(Xc, samples[k], scales[k], k)
        sketched = [
            scales[k] * factors[k][samples[k], :] if k in modes else factors[k] for k in range(q)
        ]
        core = multi_mode_multiply(Xc, [_ls_projector(S) for S in sketched])
    else:
        core = multi_mode_multiply(Xw, [f.T for f in factors])
    return factors, core


def _run_hooi_family(X: np.ndarray, config: DecomposerConfig):
    q = X.ndim
    randomized = config.method in RANDOMIZED
    sketched_core = config.method == "hooi-re"
    modes = config.resolved_compress_modes(q) if randomized else ()
    sizes = {j: sample_size(config.dr, X.shape[j]) for j in modes}

    t0 = time.perf_counter()
    if randomized:
        ops = make_mix_operators(X.shape, modes, config.seed)
        Xw = mix(X, ops)
    else:
        ops = None
        Xw = X
    preprocess_ms = (time.perf_counter() - t0) * 1e3

    factors, core = _initial_guess(Xw, config, modes, sizes)
    norm_full = norm(Xw)
    stage: dict[str, list[float]] = {name: [] for name in STAGES}
    fit_trace: list[float] = []
    fit_prev = -np.inf

    for it in range(1, config.max_iters + 1):
        t0 = time.perf_counter()
        if randomized:
            samples = {
                j: draw_sample_rows(rng.stream(config.seed, rng.SAMPLE, it, j), X.shape[j], sizes[j])
                for j in modes
            }
            scales = {j: float(np.sqrt(X.shape[j] / sizes[j])) for j in modes}
        stage["embed_generate"].append((time.perf_counter() - t0) * 1e3)

        embed_ms = 0.0
        factor_ms = 0.0
        for j in range(q):
            t0 = time.perf_counter()
            Xj = Xw
            for k in modes:
                if k != j:
                    Xj = subsample_mode(Xj, samples[k], scales[k], k)
            embed_ms += (time.perf_counter() - t0) * 1e3

            t0 = time.perf_counter()
            W = Xj
            for k in range(q):
                if k == j:
                    continue
                Gk = scales[k] * factors[k][samples[k], :] if k in modes else factors[k]
                W = mode_multiply(W, Gk.T, k)
            factors[j] = _polar_factor(matricize(W, j) @ matricize(core, j).T)
            factor_ms += (time.perf_counter() - t0) * 1e3

        t0 = time.perf_counter()
        if sketched_core:
            Xc = Xw
            for k in modes:
                Xc = subsample_mode(Xc, samples[k], scales[k], k)
        embed_ms += (time.perf_counter() - t0) * 1e3
        stage["embed_apply"].append(embed_ms)
        stage["factor_update"].append(factor_ms)

        t0 = time.perf_counter()
        if sketched_core:
            sketched = [
                scales[k] * factors[k][samples[k], :] if k in modes else factors[k]
                for k in range(q)
            ]
            core = multi_mode_multiply(Xc, [_ls_projector(S) for S in sketched])
            fit = 1.0 - norm(Xc - multi_mode_multiply(core, sketched)) / norm(Xc)
        else:
            core = multi_mode_multiply(Xw, [f.T for f in factors])
            fit = 1.0 - norm(Xw - multi_mode_multiply(core, factors)) / norm_full
        stage["core_update"].append((time.perf_counter() - t0) * 1e3)

        fit_trace.append(fit)
        if fit - fit_prev < config.rel_tol:
            break
        fit_prev = fit

    if randomized:
        factors = [unmix_factor(f, ops, j) for j, f in enumerate(factors)]
    T = TuckerDecomposition(core, factors, orthogonal=True)
    report = RunReport(
        method=config.method,
        ranks=tuple(config.ranks),
        dr=config.dr if randomized else 1.0,
        seed=config.seed,
        iterations=len(fit_trace),
        final_error=reconstruction_error(X, T),
        fit_trace=fit_trace,
        stage_times=stage,
        preprocess_ms=preprocess_ms,
    )
    return T, report


def decompose(X, config: DecomposerConfig):
    """Run the configured solver; returns ``(decomposition, report)``."""
    X = as_tensor(X)
    config.validate(X.shape)
    if norm(X) == 0.0:
        raise ValueError("cannot decompose a zero tensor (fit undefined)")
    if config.method == "hosvd":
        return _run_hosvd(X, config)
    return _run_hooi_family(X, config)


def hooi(X, config: DecomposerConfig):
    """Alternating orthogonal iteration on the raw tensor."""
    return decompose(X, _with_method(config, "hooi"))


def hooi_re(X, config: DecomposerConfig):
    """Randomized iteration; core solved on the fully sketched data."""
    return decompose(X, _with_method(config, "hooi-re"))


def hooi_re_star(X, config: DecomposerConfig):
    """Randomized iteration; core projected from the full mixed data."""
    return decompose(X, _with_method(config, "hooi-re-star"))


def _with_method(config: DecomposerConfig, method: str) -> DecomposerConfig:
    if config.method == method:
        return config
    return DecomposerConfig(
        ranks=config.ranks,
        method=method,
        dr=config.dr,
        compress_modes=config.compress_modes,
        max_iters=config.max_iters,
        rel_tol=config.rel_tol,
        seed=config.seed,
        init=config.init,
    )
