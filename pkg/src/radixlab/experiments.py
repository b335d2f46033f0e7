"""Monte Carlo comparisons of number systems: sums, linear systems, eigenvalues, products.

Each trial draws its data from its own random stream (see :mod:`radixlab.rand`),
evaluates the computation once per system, and records a relative error
``alpha_j``.  Errors are measured against reference-precision results.  The
per-system rms ``beta_j`` and the ratio ``gamma_j = beta_j / beta_0`` to the
first system (the logarithmic yardstick) summarise a run.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__, linalg, rand
from .numsys import RoundingMode, SystemSpec, standard_systems
from .numsys import round_ref
from .refarith import REF, DivideByZero
from .simarith import ArithContext, FpContext, LogContext, RefContext, context_for
from .theory import delta_cdf, delta_density, delta_rms, eps_log, eps_worst, product_error_bound

REF_CTX = RefContext()
#: deflation parameter used when the reference pipeline produces "exact" spectra
REF_MACHEPS = 2.0**-60
MACHEPS = 1e-8
TOL = 1e-60
MAX_REDRAWS = 100
#: products draw magnitudes log-uniformly from [2**-2, 2**2)
PRODUCT_BINADES = (-2.0, 2.0)


class Kind(str, enum.Enum):
    SUMS = "sums"
    LINSYS = "linsys"
    EIG = "eig"
    PRODUCTS = "products"


class BoundViolated(ArithmeticError):
    pass


@dataclass
class ExperimentConfig:
    kind: Kind
    n: int
    m: int
    systems: list[ArithContext] = field(default_factory=lambda: default_contexts())
    master_seed: int = 0
    positive_only: bool = False

    def __post_init__(self):
        self.kind = Kind(self.kind)
        if self.m < 1:
            raise ValueError(f"need m >= 1 trials, got {self.m}")
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if self.kind is Kind.EIG and self.n < 2:
            raise ValueError("eigenvalue experiment needs n >= 2")
        if self.positive_only and self.kind is not Kind.SUMS:
            raise ValueError("positive_only applies to sums only")
        if not self.systems:
            raise ValueError("no systems given")

    @property
    def tag(self) -> str:
        tag = f"{self.kind.value}/n={self.n}"
        if self.positive_only:
            tag += "/positive"
        return tag

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "m": self.m,
            "systems": [describe_context(c) for c in self.systems],
            "master_seed": self.master_seed,
            "positive_only": self.positive_only,
            "tag": self.tag,
        }


@dataclass
class SystemStats:
    name: str
    beta: float
    se_beta: float
    gamma: float
    se_gamma: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    stats: list[SystemStats]
    alphas: np.ndarray          # shape (systems, m)
    redraws: int = 0
    metadata: dict = field(default_factory=dict)

    def by_name(self, name: str) -> SystemStats:
        for s in self.stats:
            if s.name == name:
                return s
        raise KeyError(name)

    def gamma(self, name: str) -> float:
        return self.by_name(name).gamma


def default_contexts() -> list[ArithContext]:
    return [context_for(spec, name) for name, spec in standard_systems()]


def describe_context(ctx: ArithContext) -> dict:
    if isinstance(ctx, FpContext):
        return {"name": ctx.name, "spec": str(ctx.spec)}
    if isinstance(ctx, LogContext):
        return {"name": ctx.name, "spec": str(ctx.spec)}
    return {"name": ctx.name, "spec": "ref"}


# -- statistics -----------------------------------------------------------

def rms(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.mean(v * v)))


def standard_error_of_rms(values) -> float:
    """Delta-method standard error of :func:`rms`."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise ValueError("need at least two values for a standard error")
    sq = v * v
    beta = math.sqrt(float(np.mean(sq)))
    if beta == 0.0:
        return 0.0
    se_mean = float(np.std(sq, ddof=1)) / math.sqrt(v.size)
    return se_mean / (2.0 * beta)


def gamma_ratios(result: ExperimentResult) -> dict[str, float]:
    return {s.name: s.gamma for s in result.stats}


def summarize(names: Sequence[str], alphas: np.ndarray) -> list[SystemStats]:
    """rms per system, ratio to the first system, uncorrelated SE propagation."""
    m = alphas.shape[1]
    betas = [rms(a) for a in alphas]
    ses = [standard_error_of_rms(a) if m >= 2 else math.nan for a in alphas]
    b0, s0 = betas[0], ses[0]
    out = []
    for j, name in enumerate(names):
        if j == 0:
            gamma, se_gamma = 1.0, 0.0
        elif b0 == 0.0:
            gamma, se_gamma = math.inf, math.nan
        else:
            gamma = betas[j] / b0
            rel_j = ses[j] / betas[j] if betas[j] else 0.0
            se_gamma = gamma * math.hypot(rel_j, s0 / b0)
        out.append(SystemStats(name, betas[j], ses[j], gamma, se_gamma))
    return out


# -- data -----------------------------------------------------------------

def draw_sums(stream: rand.RngStream, n: int, positive_only: bool = False) -> np.ndarray:
    """(n, trials) addends: a common scale 256**z, then n uniform draws."""
    Z = rand.scale_factor(stream)
    draw = rand.uniform_pos if positive_only else rand.uniform_sym
    return np.stack([draw(stream, Z) for _ in range(n)])


def draw_linsys(stream: rand.RngStream, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrix entries (n, n, trials) and solution (n, trials), independent scales."""
    Z1 = rand.scale_factor(stream)
    Z2 = rand.scale_factor(stream)
    A = np.stack([rand.uniform_sym(stream, Z1) for _ in range(n * n)])
    x = np.stack([rand.uniform_sym(stream, Z2) for _ in range(n)])
    return A.reshape((n, n) + A.shape[1:]), x


def draw_symmetric(stream: rand.RngStream, n: int) -> np.ndarray:
    """(n, n, trials): upper triangle drawn row by row, lower by symmetry."""
    Z = rand.scale_factor(stream)
    A = np.empty((n, n) + stream.shape)
    for p in range(n):
        for q in range(p, n):
            A[p, q] = A[q, p] = rand.uniform_sym(stream, Z)
    return A


def draw_products(stream: rand.RngStream, n: int) -> np.ndarray:
    """(n+1, trials) signed factors with log-uniform magnitudes."""
    lo, hi = PRODUCT_BINADES
    rows = []
    for _ in range(n + 1):
        mag = rand.log_uniform(stream, lo, hi)
        rows.append(rand.random_sign(stream) * mag)
    return np.stack(rows)


# -- per-computation kernels ----------------------------------------------

def sums_alpha(ctx: ArithContext, x: np.ndarray) -> np.ndarray:
    """Relative error of left-to-right summation of the rounded addends."""
    x = np.asarray(x, dtype=np.float64)
    xr = x.astype(REF)
    true = xr[0].copy()
    denom = np.abs(xr[0])
    for i in range(1, x.shape[0]):
        true = true + xr[i]
        denom = denom + np.abs(xr[i])
    s = ctx.round(xr[0])
    for i in range(1, x.shape[0]):
        s = ctx.add(s, ctx.round(xr[i]))
    return ((true - ctx.value(s)) / denom).astype(np.float64)


def _rounded_entries(ctx: ArithContext, data: np.ndarray) -> list:
    """Round a matrix/vector of host reals elementwise, returning nested lists."""
    r = ctx.round(np.asarray(data, dtype=REF))
    return r.tolist() if isinstance(ctx, LogContext) else _as_lists(r)


def _as_lists(arr: np.ndarray):
    if arr.ndim == 1:
        return list(arr)
    return [list(row) for row in arr]


def linsys_alpha(ctx: ArithContext, A: np.ndarray, x: np.ndarray) -> float:
    """Residual of the solution computed in ``ctx``, relative to ``||A||_E ||x||_2``."""
    A_ref = _as_lists(np.asarray(A, dtype=REF))
    x_ref = list(np.asarray(x, dtype=REF))
    b = linalg.matvec(REF_CTX, A_ref, x_ref)
    y = linalg.gauss_solve_complete_pivot(
        ctx, _rounded_entries(ctx, A), _rounded_entries(ctx, np.array(b, dtype=REF))
    )
    y_ref = [ctx.value(v) for v in y]
    resid = [r - bi for r, bi in zip(linalg.matvec(REF_CTX, A_ref, y_ref), b)]
    num = linalg.two_norm(REF_CTX, resid)
    den = linalg.frobenius_norm(REF_CTX, A_ref) * linalg.two_norm(REF_CTX, x_ref)
    return float(num / den)


def spectrum(ctx: ArithContext, A: Sequence[Sequence], macheps: float = MACHEPS,
             tol: float = TOL) -> list:
    """Ascending eigenvalues of a symmetric matrix given in ``ctx`` values.

    Order 2 skips the Householder stage (the matrix is already tridiagonal)
    and goes straight to QL.
    """
    return linalg.symmetric_eigenvalues(ctx, A, macheps=macheps, tol=tol)


def exact_spectrum(A: np.ndarray) -> list:
    return spectrum(REF_CTX, _as_lists(np.asarray(A, dtype=REF)), macheps=REF_MACHEPS)


def eig_alpha(ctx: ArithContext, A: np.ndarray, exact: Sequence | None = None) -> float:
    """Eigenvalue error of ``ctx`` relative to ``||A||_E``."""
    A = np.asarray(A, dtype=np.float64)
    if exact is None:
        exact = exact_spectrum(A)
    lam = [ctx.value(v) for v in spectrum(ctx, _rounded_entries(ctx, A))]
    diff = [le - lj for le, lj in zip(exact, lam)]
    num = linalg.two_norm(REF_CTX, diff)
    den = linalg.frobenius_norm(REF_CTX, _as_lists(A.astype(REF)))
    return float(num / den)


def context_eps(ctx: ArithContext) -> float:
    """Worst relative error of one rounding in ``ctx``."""
    if isinstance(ctx, FpContext):
        return eps_worst(ctx.spec.k, ctx.spec.u, ctx.spec.mode)
    if isinstance(ctx, LogContext):
        return eps_log(ctx.spec.a)
    return 0.0


def products_alpha(ctx: ArithContext, x: np.ndarray) -> np.ndarray:
    """Relative error of a chain of rounded products of the rounded factors."""
    X = ctx.round(np.asarray(x, dtype=REF))
    p = X[0]
    for i in range(1, X.shape[0]):
        p = ctx.mul(p, X[i])
    if isinstance(ctx, LogContext):
        # exact product of representable factors, computed in code space
        b = ctx.spec.b
        codes = np.abs(X)
        exact = (codes - b).sum(axis=0) + b
        shift = (np.abs(p) - exact).astype(np.float64)
        delta = -np.expm1(shift * (math.log(2.0) / ctx.spec.a))
    else:
        vals = np.asarray(ctx.value(X), dtype=REF)
        P = np.prod(vals, axis=0)
        delta = ((P - ctx.value(p)) / P).astype(np.float64)
    n = X.shape[0] - 1
    eps = context_eps(ctx)
    if eps > 0:
        bound = product_error_bound(n, eps, quadratic=True)
        worst = float(np.max(np.abs(delta)))
        if worst > bound:
            raise BoundViolated(f"{ctx.name}: |delta| = {worst:.3e} exceeds {bound:.3e}")
    return delta


# -- drivers --------------------------------------------------------------

MatrixHook = Callable[[np.ndarray], np.ndarray]


def _vector_chunk(config: ExperimentConfig, trials: np.ndarray) -> tuple[np.ndarray, int]:
    stream = rand.substream(config.master_seed, config.tag, trials)
    if config.kind is Kind.SUMS:
        data = draw_sums(stream, config.n, config.positive_only)
        kernel = sums_alpha
    else:
        data = draw_products(stream, config.n)
        kernel = products_alpha
    alphas = np.stack([kernel(ctx, data) for ctx in config.systems])
    return alphas, 0


def _matrix_chunk(config: ExperimentConfig, trials: np.ndarray,
                  hook: MatrixHook | None = None) -> tuple[np.ndarray, int]:
    stream = rand.substream(config.master_seed, config.tag, trials)
    n = config.n
    if config.kind is Kind.LINSYS:
        A_all, x_all = draw_linsys(stream, n)
    else:
        A_all = draw_symmetric(stream, n)
    alphas = np.empty((len(config.systems), len(trials)))
    redraws = 0
    for t in range(len(trials)):
        A = A_all[..., t]
        x = x_all[:, t] if config.kind is Kind.LINSYS else None
        own = None
        for attempt in range(MAX_REDRAWS + 1):
            if hook is not None:
                A = hook(A)
            try:
                alphas[:, t] = _matrix_trial(config, A, x)
                break
            except (linalg.SingularMatrix, linalg.NoConvergence, DivideByZero):
                if attempt == MAX_REDRAWS:
                    raise
                redraws += 1
                # continue this trial's own stream for replacement data
                if own is None:
                    own = stream.take(slice(t, t + 1))
                if config.kind is Kind.LINSYS:
                    A2, x2 = draw_linsys(own, n)
                    A, x = A2[..., 0], x2[:, 0]
                else:
                    A = draw_symmetric(own, n)[..., 0]
    return alphas, redraws


def _matrix_trial(config: ExperimentConfig, A: np.ndarray, x) -> list[float]:
    if config.kind is Kind.LINSYS:
        return [linsys_alpha(ctx, A, x) for ctx in config.systems]
    exact = exact_spectrum(A)
    return [eig_alpha(ctx, A, exact) for ctx in config.systems]


def _chunk(config: ExperimentConfig, start: int, stop: int, hook: MatrixHook | None = None):
    trials = np.arange(start, stop, dtype=np.uint64)
    if config.kind in (Kind.SUMS, Kind.PRODUCTS):
        return _vector_chunk(config, trials)
    return _matrix_chunk(config, trials, hook)


def _chunk_bounds(m: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, m))
    edges = np.linspace(0, m, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run(config: ExperimentConfig, jobs: int = 1, hook: MatrixHook | None = None,
        chunk_size: int = 20000) -> ExperimentResult:
    """Run every trial of ``config``; results do not depend on ``jobs``."""
    started = time.time()
    if config.kind in (Kind.SUMS, Kind.PRODUCTS):
        parts = max(jobs, -(-config.m // chunk_size))
    else:
        parts = jobs
    bounds = _chunk_bounds(config.m, parts)
    if jobs > 1 and len(bounds) > 1:
        if hook is not None:
            raise ValueError("matrix hooks are only supported with jobs=1")
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_chunk, config, a, b) for a, b in bounds]
            pieces = [f.result() for f in futures]
    else:
        pieces = [_chunk(config, a, b, hook) for a, b in bounds]
    alphas = np.concatenate([p[0] for p in pieces], axis=1)
    redraws = sum(p[1] for p in pieces)
    names = [c.name for c in config.systems]
    result = ExperimentResult(config, summarize(names, alphas), alphas, redraws)
    result.metadata = {
        "config": config.describe(),
        "generator": rand.GENERATOR,
        "version": __version__,
        "redraws": redraws,
        "started": started,
        "finished": time.time(),
    }
    return result


def run_sums(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    if config.kind is not Kind.SUMS:
        raise ValueError("run_sums needs kind=sums")
    return run(config, jobs)


def run_linsys(config: ExperimentConfig, jobs: int = 1,
               hook: MatrixHook | None = None) -> ExperimentResult:
    if config.kind is not Kind.LINSYS:
        raise ValueError("run_linsys needs kind=linsys")
    return run(config, jobs, hook)


def run_eig(config: ExperimentConfig, jobs: int = 1,
            hook: MatrixHook | None = None) -> ExperimentResult:
    if config.kind is not Kind.EIG:
        raise ValueError("run_eig needs kind=eig")
    return run(config, jobs, hook)


def run_products(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    if config.kind is not Kind.PRODUCTS:
        raise ValueError("run_products needs kind=products")
    return run(config, jobs)


# -- representation-error density ----------------------------------------

def relative_errors(spec: SystemSpec, x) -> np.ndarray:
    """``(x - fl(x)) / x`` for host reals ``x``."""
    xr = np.asarray(x, dtype=REF)
    return ((xr - round_ref(spec, xr)) / xr).astype(np.float64)


def log_uniform_significands(spec: SystemSpec, samples: int, seed: int,
                             tag: str = "density") -> np.ndarray:
    """Reals with ``log_beta(x)`` uniform on [-1, 0)."""
    stream = rand.substream(seed, f"{tag}/k={spec.k}", np.arange(samples, dtype=np.uint64))
    v = rand.uniform01(stream)
    return np.exp2(-spec.k * (1.0 - v))


def with_mode(ctx: FpContext, mode: RoundingMode | str, name: str) -> FpContext:
    return FpContext(ctx.spec.with_mode(mode, name), name)


__all__ = [
    "Kind", "ExperimentConfig", "ExperimentResult", "SystemStats", "BoundViolated",
    "run", "run_sums", "run_linsys", "run_eig", "run_products",
    "rms", "standard_error_of_rms", "gamma_ratios", "summarize",
    "sums_alpha", "linsys_alpha", "eig_alpha", "products_alpha", "spectrum",
    "draw_sums", "draw_linsys", "draw_symmetric", "draw_products",
    "relative_errors", "log_uniform_significands", "default_contexts",
    "DensityReport", "density_report",
]


@dataclass
class DensityReport:
    """Histogram of representation errors against the closed-form density."""

    system: str
    k: int
    u: int
    samples: int
    edges: np.ndarray
    counts: np.ndarray
    expected: np.ndarray        # expected counts per bin from the distribution function
    rms: float
    rms_theory: float
    mean: float
    se_mean: float

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def empirical_density(self) -> np.ndarray:
        return self.counts / (self.samples * self.widths)

    @property
    def theoretical_density(self) -> np.ndarray:
        return np.array([delta_density(self.k, self.u, c) for c in self.centers])

    @property
    def z_scores(self) -> np.ndarray:
        p = self.expected / self.samples
        sd = np.sqrt(self.samples * p * (1.0 - p))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (self.counts - self.expected) / sd
        return np.where(sd > 0, z, np.where(self.counts == self.expected, 0.0, np.inf))


def density_report(spec: SystemSpec, samples: int, bins: int, seed: int,
                   name: str = "") -> DensityReport:
    x = log_uniform_significands(spec, samples, seed)
    delta = relative_errors(spec, x)
    hi = math.ldexp(1.0, spec.k - spec.u - 1)
    edges = np.linspace(-hi, hi, bins + 1)
    counts, _ = np.histogram(delta, bins=edges)
    cdf = np.array([delta_cdf(spec.k, spec.u, t) for t in edges])
    return DensityReport(
        system=name or spec.name or str(spec), k=spec.k, u=spec.u, samples=samples,
        edges=edges, counts=counts, expected=samples * np.diff(cdf),
        rms=rms(delta), rms_theory=delta_rms(spec.k, spec.u),
        mean=float(np.mean(delta)), se_mean=float(np.std(delta, ddof=1) / math.sqrt(samples)),
    )
