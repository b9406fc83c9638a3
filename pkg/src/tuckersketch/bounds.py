"""Empirical verification of embedding perturbation and distortion bounds.

Two kinds of checks live here.

Conditional implications (inner-product preservation, single-mode
perturbation of a decomposition): the stated hypothesis, that the
embedding distorts a specific finite vector set by less than eps, is
verified first on each draw.  Draws failing the hypothesis are
discarded, not failed.  Among hypothesis-satisfying draws the
conclusion is an implication that holds with zero violations, so any
violation indicates an implementation bug rather than bad luck.

Monte-Carlo tail checks (multimode subspace distortion, residual
distortion): the empirical fraction of draws whose distortion exceeds
eps is compared against the target failure probability eta plus a
two-sigma binomial slack ``2 sqrt(eta (1 - eta) / trials)``.

Floating-point note: conditional conclusions are checked with a
relative slack of 1e-12 so that exact-arithmetic implications are not
flagged by rounding in the evaluation itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .embeddings import Embedding, apply_embedding, apply_embedding_mode, embedding_matrix, is_eps_jl, make_embedding
from .tensor import as_tensor, mode_multiply, norm
from .tucker import TuckerDecomposition, apply_mode_map, mode_coherence, norm_via_gram, psi_matrix, reconstruct

__all__ = [
    "BoundParams",
    "BoundReport",
    "max_admissible_eps",
    "max_admissible_residual_eps",
    "embedding_dim_bound",
    "residual_embedding_dim_bound",
    "random_orthogonal_tucker",
    "pair_vector_set",
    "check_inner_product_bound",
    "check_prop1",
    "check_multimode_distortion",
    "check_residual_distortion",
    "estimate_subspace_dim",
    "calibrate_embedding_dim",
    "run_lemma21_suite",
    "run_lemma_a_suite",
    "run_prop1_suite",
    "run_th1_suite",
    "run_th4_suite",
]

_FP_SLACK = 1e-12


@dataclass
class BoundParams:
    """Configuration for a distortion experiment."""

    eps: float
    eta: float
    dims: tuple[int, ...]
    ranks: tuple[int, ...]
    trials: int
    embed_dims: tuple[int, ...] | None = None
    cconst: float = 1.0
    seed: int = 0
    y_samples: int = 20

    @property
    def order(self) -> int:
        return len(self.dims)

    def validate(self) -> None:
        if not 0.0 < self.eps:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if len(self.ranks) != len(self.dims):
            raise ValueError("dims and ranks must have equal length")
        for n, r in zip(self.dims, self.ranks):
            if not 1 <= r <= n:
                raise ValueError(f"rank {r} invalid for dimension {n}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.embed_dims is not None and len(self.embed_dims) != len(self.dims):
            raise ValueError("embed_dims must list one size per mode")
        if self.cconst <= 0:
            raise ValueError("cconst must be positive")


@dataclass
class BoundReport:
    """Outcome of a bound check."""

    name: str
    trials: int
    failures: int
    discarded: int = 0
    threshold: float = 0.0
    passed: bool = True
    distortions: list[float] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "discarded": self.discarded,
            "failure_fraction": self.failure_fraction,
            "threshold": self.threshold,
            "passed": self.passed,
            "distortions": [float(d) for d in self.distortions],
            "details": _plain(self.details),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _binomial_threshold(eta: float, trials: int) -> float:
    return eta + 2.0 * math.sqrt(eta * (1.0 - eta) / trials)


def max_admissible_eps(rmax: int, order: int) -> float:
    """Largest eps the multimode subspace guarantee covers."""
    return math.log(2.0) / (1.0 / rmax + 0.5 + 1.0 / (order * rmax))


def max_admissible_residual_eps(rmax: int, order: int) -> float:
    """Largest eps the residual-distortion guarantee covers."""
    return math.log(2.0) / (0.5 / rmax + 0.25 + 0.5 / (order * rmax))


def embedding_dim_bound(params: BoundParams) -> list[int]:
    """Per-mode sample sizes sufficient for the multimode guarantee.

    Computes ``ceil((C rmax^2 q^2 / eps^2) ln(R_j^2 q / eta))`` per mode,
    clamped to at least 1 (the logarithm can go nonpositive in degenerate
    corners such as eta near 1 with R_j = q = 1).
    """
    params.validate()
    q = params.order
    rmax = max(params.ranks)
    lead = params.cconst * rmax**2 * q**2 / params.eps**2
    out = []
    for r in params.ranks:
        val = lead * math.log(r**2 * q / params.eta)
        out.append(max(1, math.ceil(val)))
    return out


def residual_embedding_dim_bound(params: BoundParams, p_dim: int) -> int:
    """Sample size sufficient for the residual-distortion guarantee.

    Computes ``ceil((C (q+1)^3 p / eps^2) ln(4 nmax / eta^(1/(q+1))))``,
    clamped to at least 1.
    """
    params.validate()
    if p_dim < 1:
        raise ValueError("subspace dimension must be at least 1")
    q = params.order
    nmax = max(params.dims)
    val = (
        params.cconst
        * (q + 1) ** 3
        * p_dim
        / params.eps**2
        * math.log(4.0 * nmax / params.eta ** (1.0 / (q + 1)))
    )
    return max(1, math.ceil(val))


def random_orthogonal_tucker(dims, ranks, gen: np.random.Generator) -> TuckerDecomposition:
    """Random decomposition with orthonormal factors and N(0,1) core."""
    factors = []
    for n, r in zip(dims, ranks):
        factors.append(np.linalg.qr(gen.standard_normal((n, r)))[0])
    core = gen.standard_normal(tuple(ranks))
    return TuckerDecomposition(core, factors, orthogonal=True)


def pair_vector_set(factor: np.ndarray) -> np.ndarray:
    """Columns plus all pairwise sums and differences, as rows.

    This is the finite set whose distortion the single-mode perturbation
    statements condition on.
    """
    cols = [factor[:, r] for r in range(factor.shape[1])]
    vecs = list(cols)
    for r in range(len(cols)):
        for s in range(r + 1, len(cols)):
            vecs.append(cols[r] + cols[s])
            vecs.append(cols[r] - cols[s])
    return np.array(vecs)


def check_inner_product_bound(E: Embedding, x, y, eps: float) -> BoundReport:
    """Inner-product preservation implied by low distortion of x+y, x-y.

    Hypothesis: the embedding distorts ``{x+y, x-y}`` by less than eps.
    Conclusion: ``|<Ax, Ay> - <x, y>| <= (eps/2) (||x||^2 + ||y||^2)``.
    A draw that fails the hypothesis is discarded, not failed.
    """
    x = as_tensor(x)
    y = as_tensor(y)
    hyp = is_eps_jl(E, np.array([x + y, x - y]), eps)
    if not hyp.ok:
        return BoundReport(name="inner-product", trials=1, failures=0, discarded=1)
    lhs = abs(float(np.dot(apply_embedding(E, x), apply_embedding(E, y))) - float(np.dot(x, y)))
    rhs = 0.5 * eps * (float(np.dot(x, x)) + float(np.dot(y, y)))
    violated = lhs > rhs + _FP_SLACK * (1.0 + rhs)
    return BoundReport(
        name="inner-product",
        trials=1,
        failures=int(violated),
        passed=not violated,
        distortions=[lhs],
        details={"lhs": lhs, "rhs": rhs},
    )


def check_prop1(T: TuckerDecomposition, E: Embedding, mode: int, eps: float) -> BoundReport:
    """Single-mode perturbation bounds for an orthogonal decomposition.

    Hypothesis: the embedding distorts the mode's columns and their
    pairwise sums/differences by less than eps.  Conclusions checked on
    hypothesis-satisfying draws:

      (i)   each core entry of the pushed-through decomposition moves by
            at most eps relative to its old value;
      (ii)  the mapped mode's coherence is at most eps / (1 - eps) and
            other modes' coherences are untouched;
      (iii) the squared norm moves by at most eps times the absolute sum
            of the mode weight Gram matrix.
    """
    if not T.orthogonal:
        raise ValueError("perturbation bounds assume orthonormal factors")
    if not 0 <= mode < T.order:
        raise ValueError(f"mode {mode} out of range")
    hyp = is_eps_jl(E, pair_vector_set(T.factors[mode]), eps)
    if not hyp.ok:
        return BoundReport(name="mode-perturbation", trials=1, failures=0, discarded=1)

    A = embedding_matrix(E)
    mapped = apply_mode_map(T, A, mode)

    core_dev = np.abs(mapped.core - T.core)
    core_ok = bool(np.all(core_dev <= eps * np.abs(T.core) + _FP_SLACK))

    mu_new = mode_coherence(mapped, mode)
    mu_bound = eps / (1.0 - eps) if eps < 1.0 else np.inf
    coher_ok = mu_new <= mu_bound + _FP_SLACK
    transport_ok = all(
        abs(mode_coherence(mapped, k) - mode_coherence(T, k)) <= 1e-12
        for k in range(T.order)
        if k != mode
    )

    Y = reconstruct(T)
    sq_old = norm(Y) ** 2
    sq_new = norm(mode_multiply(Y, A, mode)) ** 2
    psi = psi_matrix(T, mode)
    envelope = eps * float(np.sum(np.abs(psi @ psi.T)))
    norm_ok = abs(sq_new - sq_old) <= envelope + _FP_SLACK * (1.0 + envelope)

    ok = core_ok and coher_ok and transport_ok and norm_ok
    return BoundReport(
        name="mode-perturbation",
        trials=1,
        failures=int(not ok),
        passed=ok,
        distortions=[abs(sq_new - sq_old)],
        details={
            "core_ok": core_ok,
            "coherence_ok": coher_ok,
            "coherence_transport_ok": transport_ok,
            "norm_ok": norm_ok,
            "mapped_coherence": mu_new,
            "coherence_bound": mu_bound,
            "norm_shift": abs(sq_new - sq_old),
            "norm_envelope": envelope,
        },
    )


def check_multimode_distortion(params: BoundParams, family: str = "gaussian") -> BoundReport:
    """Monte-Carlo tail check for squared-norm distortion of low-rank draws.

    Each trial reconstructs a random orthogonal decomposition, embeds
    every mode with a fresh draw at the configured sizes and records the
    relative squared-norm distortion.  Passing means the fraction of
    trials exceeding eps is at most eta plus binomial slack.  Raises if
    eps sits outside the admissible range of the guarantee being checked.
    """
    params.validate()
    if params.embed_dims is None:
        raise ValueError("embed_dims must be set for distortion checks")
    rmax = max(params.ranks)
    limit = max_admissible_eps(rmax, params.order)
    if params.eps > limit:
        raise ValueError(f"eps={params.eps} exceeds admissible bound {limit:.4f}")
    distortions = []
    failures = 0
    for t in range(params.trials):
        T = random_orthogonal_tucker(params.dims, params.ranks, rng.stream(params.seed, rng.TRIAL, t, 0))
        Y = reconstruct(T)
        Yc = Y
        for j, (n, m) in enumerate(zip(params.dims, params.embed_dims)):
            E = make_embedding(family, n, m, rng.child_seed(params.seed, rng.TRIAL, t, 1 + j))
            Yc = apply_embedding_mode(E, Yc, j)
        sq = norm(Y) ** 2
        d = abs(norm(Yc) ** 2 - sq) / sq
        distortions.append(d)
        if d > params.eps:
            failures += 1
    threshold = _binomial_threshold(params.eta, params.trials)
    frac = failures / params.trials
    return BoundReport(
        name="multimode-distortion",
        trials=params.trials,
        failures=failures,
        threshold=threshold,
        passed=frac <= threshold,
        distortions=distortions,
        details={"family": family, "embed_dims": list(params.embed_dims)},
    )


def estimate_subspace_dim(core, factors, mode: int, seed: int = 0, extra: int = 8) -> int:
    """Numerical rank of the span swept out by varying one factor.

    Samples reconstructions with random orthonormal draws in the free
    mode and returns the rank of their stacked vectorisations.  Used for
    reporting only.
    """
    core = as_tensor(core)
    n = factors[mode].shape[0] if factors[mode] is not None else None
    if n is None:
        raise ValueError("the free mode still needs a row count; pass a placeholder factor")
    r = core.shape[mode]
    count = n * r + extra
    gen = rng.stream(seed, rng.TRIAL, 0, 99)
    cols = []
    for _ in range(count):
        G = np.linalg.qr(gen.standard_normal((n, r)))[0]
        fs = [G if k == mode else factors[k] for k in range(core.ndim)]
        cols.append(reconstruct(TuckerDecomposition(core, fs)).ravel(order="F"))
    return int(np.linalg.matrix_rank(np.column_stack(cols)))


def check_residual_distortion(
    X,
    params: BoundParams,
    core,
    factors,
    mode: int,
    family: str = "gaussian",
    report_subspace_dim: bool = False,
) -> BoundReport:
    """Monte-Carlo tail check for distortion of residuals against a sweep.

    The candidate set fixes the core and all factors but one; candidates
    Y arise from random orthonormal draws in the free mode.  Each trial
    embeds every mode with fresh draws and measures the worst relative
    squared-norm distortion of ``X - Y`` over ``params.y_samples``
    candidates; the trial fails if that worst case exceeds eps.
    """
    params.validate()
    if params.embed_dims is None:
        raise ValueError("embed_dims must be set for distortion checks")
    X = as_tensor(X)
    core = as_tensor(core)
    rmax = max(params.ranks)
    limit = max_admissible_residual_eps(rmax, params.order)
    if params.eps > limit:
        raise ValueError(f"eps={params.eps} exceeds admissible bound {limit:.4f}")
    q = params.order
    distortions = []
    failures = 0
    for t in range(params.trials):
        embeds = [
            make_embedding(family, n, m, rng.child_seed(params.seed, rng.TRIAL, t, 1 + j))
            for j, (n, m) in enumerate(zip(params.dims, params.embed_dims))
        ]
        LX = X
        for j, E in enumerate(embeds):
            LX = apply_embedding_mode(E, LX, j)
        worst = 0.0
        for s in range(params.y_samples):
            gen = rng.stream(params.seed, rng.TRIAL, t, 100 + s)
            G = np.linalg.qr(gen.standard_normal((params.dims[mode], core.shape[mode])))[0]
            fs = [G if k == mode else factors[k] for k in range(q)]
            Y = reconstruct(TuckerDecomposition(core, fs))
            # linearity: embed Y through its (small) mapped factors
            LY = reconstruct(
                TuckerDecomposition(core, [apply_embedding(embeds[k], fs[k]) for k in range(q)])
            )
            Z = X - Y
            sq = norm(Z) ** 2
            if sq == 0.0:
                continue
            worst = max(worst, abs(norm(LX - LY) ** 2 - sq) / sq)
        distortions.append(worst)
        if worst > params.eps:
            failures += 1
    threshold = _binomial_threshold(params.eta, params.trials)
    frac = failures / params.trials
    details = {"family": family, "embed_dims": list(params.embed_dims), "y_samples": params.y_samples}
    if report_subspace_dim:
        details["subspace_dim_estimate"] = estimate_subspace_dim(core, factors, mode, params.seed)
        details["residual_dim_bound"] = residual_embedding_dim_bound(
            params, details["subspace_dim_estimate"]
        )
    return BoundReport(
        name="residual-distortion",
        trials=params.trials,
        failures=failures,
        threshold=threshold,
        passed=frac <= threshold,
        distortions=distortions,
        details=details,
    )


def calibrate_embedding_dim(params: BoundParams, family: str, grid) -> dict:
    """Smallest per-mode sample size in ``grid`` passing the tail check.

    The theoretical sufficient sizes carry an unspecified constant, so
    this sweep reports what actually suffices empirically at the given
    configuration.  Returns the passing size (or None) plus the failure
    fraction at every grid point.
    """
    results = {}
    chosen = None
    for m in grid:
        p = BoundParams(
            eps=params.eps,
            eta=params.eta,
            dims=params.dims,
            ranks=params.ranks,
            trials=params.trials,
            embed_dims=tuple(int(m) for _ in params.dims),
            cconst=params.cconst,
            seed=params.seed,
        )
        rep = check_multimode_distortion(p, family)
        results[int(m)] = rep.failure_fraction
        if chosen is None and rep.passed:
            chosen = int(m)
    return {"chosen": chosen, "failure_fractions": results}


# ---------------------------------------------------------------------------
# Seeded suites (used by the verify CLI and the acceptance tests)
# ---------------------------------------------------------------------------


def run_lemma21_suite(trials: int = 200, seed: int = 0, tol: float = 1e-10) -> BoundReport:
    """Gram-identity suite: norm_via_gram against the dense route.

    Random small orthogonal decompositions of order 3 or 4 with a random
    mode map; the relative gap between the Gram evaluation and the dense
    mapped-tensor norm must stay within ``tol``.
    """
    errs = []
    failures = 0
    for t in range(trials):
        gen = rng.stream(seed, rng.TRIAL, t, 0)
        q = int(gen.integers(3, 5))
        dims = tuple(int(gen.integers(2, 13)) for _ in range(q))
        ranks = tuple(int(gen.integers(1, min(4, n) + 1)) for n in dims)
        T = random_orthogonal_tucker(dims, ranks, gen)
        j = int(gen.integers(0, q))
        p = int(gen.integers(1, dims[j] + 4))
        B = gen.standard_normal((p, dims[j]))
        lhs = norm_via_gram(T, B, j)
        rhs = norm(mode_multiply(reconstruct(T), B, j)) ** 2
        rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        errs.append(rel)
        if rel > tol:
            failures += 1
    return BoundReport(
        name="gram-identity",
        trials=trials,
        failures=failures,
        threshold=tol,
        passed=failures == 0,
        distortions=errs,
        details={"max_rel_err": max(errs)},
    )


def run_lemma_a_suite(
    trials: int = 500,
    eps: float = 0.5,
    seed: int = 0,
    n: int = 128,
    m: int = 64,
    family: str = "gaussian",
) -> BoundReport:
    """Inner-product bound over seeded random draws; zero violations."""
    failures = 0
    discarded = 0
    satisfied = 0
    worst = 0.0
    for t in range(trials):
        E = make_embedding(family, n, m, rng.child_seed(seed, rng.TRIAL, t, 0))
        gen = rng.stream(seed, rng.TRIAL, t, 1)
        x = gen.standard_normal(n)
        y = gen.standard_normal(n)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        rep = check_inner_product_bound(E, x, y, eps)
        if rep.discarded:
            discarded += 1
            continue
        satisfied += 1
        failures += rep.failures
        worst = max(worst, rep.details["lhs"] / rep.details["rhs"])
    return BoundReport(
        name="inner-product-suite",
        trials=trials,
        failures=failures,
        discarded=discarded,
        passed=failures == 0,
        details={"satisfied": satisfied, "worst_lhs_over_rhs": worst},
    )


def run_prop1_suite(
    target: int = 200,
    eps: float = 0.6,
    seed: int = 0,
    dims: tuple[int, ...] = (32, 32, 32),
    ranks: tuple[int, ...] = (3, 3, 3),
    m: int = 24,
    family: str = "gaussian",
) -> BoundReport:
    """Mode-perturbation bounds until ``target`` hypothesis-passing draws.

    Draws are capped at 20x the target; zero violations required among
    the satisfying draws.
    """
    failures = 0
    discarded = 0
    satisfied = 0
    draws = 0
    q = len(dims)
    while satisfied < target and draws < 20 * target:
        t = draws
        draws += 1
        gen = rng.stream(seed, rng.TRIAL, t, 0)
        T = random_orthogonal_tucker(dims, ranks, gen)
        j = t % q
        E = make_embedding(family, dims[j], m, rng.child_seed(seed, rng.TRIAL, t, 1))
        rep = check_prop1(T, E, j, eps)
        if rep.discarded:
            discarded += 1
            continue
        satisfied += 1
        failures += rep.failures
    return BoundReport(
        name="mode-perturbation-suite",
        trials=draws,
        failures=failures,
        discarded=discarded,
        passed=failures == 0 and satisfied >= target,
        details={"satisfied": satisfied, "target": target},
    )


def run_th1_suite(
    trials: int = 500,
    eps: float = 0.5,
    eta: float = 0.1,
    seed: int = 0,
    dims: tuple[int, ...] = (64, 64, 64),
    ranks: tuple[int, ...] = (3, 3, 3),
    embed_dim: int = 48,
    family: str = "gaussian",
) -> BoundReport:
    """Multimode distortion tail check at its standard configuration."""
    params = BoundParams(
        eps=eps,
        eta=eta,
        dims=dims,
        ranks=ranks,
        trials=trials,
        embed_dims=tuple(embed_dim for _ in dims),
        seed=seed,
    )
    return check_multimode_distortion(params, family)


def run_th4_suite(
    trials: int = 300,
    eps: float = 0.6,
    eta: float = 0.2,
    seed: int = 0,
    dims: tuple[int, ...] = (32, 32, 32),
    ranks: tuple[int, ...] = (2, 2, 2),
    embed_dim: int = 24,
    y_samples: int = 20,
    family: str = "gaussian",
) -> BoundReport:
    """Residual distortion tail check at its standard configuration."""
    gen = rng.stream(seed, rng.TRIAL, 10_000, 0)
    X = gen.standard_normal(dims)
    sub = random_orthogonal_tucker(dims, ranks, gen)
    params = BoundParams(
        eps=eps,
        eta=eta,
        dims=dims,
        ranks=ranks,
        trials=trials,
        embed_dims=tuple(embed_dim for _ in dims),
        seed=seed,
        y_samples=y_samples,
    )
    return check_residual_distortion(
        X, params, sub.core, sub.factors, mode=0, family=family, report_subspace_dim=True
    )
