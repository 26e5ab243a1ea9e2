"""Finite-horizon diagnostics for bounded vector sequences.

For a sequence x_1, x_2, ... in a finite-dimensional normed space the module
computes, on a grid of horizons n, the Cesaro statistics

    W(n)  = (1/n) sum_k |f(x_k)|             weak mixing, one functional f
    WE(n) = (1/n) |sum_k f(x_k)|             weak ergodicity
    E(n)  = (1/n) ||sum_k x_k||              ergodicity
    U(n)  = sup_{||f||* <= 1} (1/n) sum_k |f(x_k)|   uniform weak mixing

with all sums over k = 1..n.  U is computed exactly on sup- and l1-normed
spaces and bracketed on euclidean spaces by

    S(n)/M <= U(n) <= sqrt(S(n)),   S(n) = sup_f (1/n) sum_k |f(x_k)|^2,

where M bounds ||x_k||.  `classify` turns the profiles into yes / no /
undecided verdicts.
"""

import enum
import functools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .numerics import as_vector, gram_top_eig

log = logging.getLogger(__name__)

NORM_TAGS = ("euclidean", "sup", "l1")
DUAL_TAG = {"euclidean": "euclidean", "sup": "l1", "l1": "sup"}
DEFAULT_GRID = (10, 100, 1000, 10000)
DEFAULT_TOL = 1e-2
EXACT_MAX_N = 16
L1_MAX_DIM = 20
BOUND_SLACK = 1e-12
# trend thresholds on the apparent decay exponent of Cesaro means
DECAY_EXPONENT = 0.25
PLATEAU_EXPONENT = 0.05


def vector_norm(x, tag):
    """Norm along the last axis."""
    x = np.asarray(x)
    if tag == "euclidean":
        return np.linalg.norm(x, axis=-1)
    if tag == "sup":
        return np.max(np.abs(x), axis=-1)
    if tag == "l1":
        return np.sum(np.abs(x), axis=-1)
    raise ValueError(f"unknown norm tag {tag!r}")


@dataclass(frozen=True)
class NormedSpace:
    dim: int
    norm_tag: str = "euclidean"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dim must be positive")
        if self.norm_tag not in NORM_TAGS:
            raise ValueError(f"norm_tag must be one of {NORM_TAGS}, got {self.norm_tag!r}")

    @property
    def dual_tag(self):
        return DUAL_TAG[self.norm_tag]

    def norm(self, x):
        return vector_norm(x, self.norm_tag)

    def dual_norm(self, f):
        return vector_norm(f, self.dual_tag)

    def coordinate_functionals(self):
        return [Functional(self, np.eye(self.dim)[i]) for i in range(self.dim)]


@dataclass(frozen=True)
class Functional:
    """Linear functional f(x) = sum_i conj(c_i) x_i."""

    space: NormedSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = as_vector(self.coefficients, "coefficients")
        if c.shape[0] != self.space.dim:
            raise ValueError(f"functional has dim {c.shape[0]}, space has dim {self.space.dim}")
        object.__setattr__(self, "coefficients", c)

    @property
    def dual_norm(self):
        return float(self.space.dual_norm(self.coefficients))

    @property
    def in_dual_ball(self):
        return self.dual_norm <= 1.0 + BOUND_SLACK

    def __call__(self, x):
        return np.asarray(x) @ self.coefficients.conj()


class BoundedSequence:
    """Lazily generated sequence k -> x_k (k = 1..horizon) with ||x_k|| <= bound.

    `generator` maps a 1-based index to a vector.  `batch`, when given, maps n
    to the (n, dim) array of the first n terms and is used instead of
    repeated generator calls.  Terms are cached once computed; every emitted
    term is checked against `bound`.
    """

    def __init__(self, space, generator, bound, horizon, batch=None, label="",
                 thread_safe=True):
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not np.isfinite(bound) or bound < 0:
            raise ValueError("bound must be a finite nonnegative number")
        self.space = space
        self.generator = generator
        self.batch = batch
        self.bound = float(bound)
        self.horizon = int(horizon)
        self.label = label
        self.thread_safe = thread_safe
        self._cache = np.zeros((0, space.dim))

    def __repr__(self):
        return (f"BoundedSequence({self.label or 'unnamed'}, dim={self.space.dim}, "
                f"norm={self.space.norm_tag}, M={self.bound:g}, horizon={self.horizon})")

    @classmethod
    def from_array(cls, terms, norm_tag="euclidean", bound=None, label=""):
        terms = np.asarray(terms)
        if terms.ndim != 2 or terms.shape[0] == 0:
            raise ValueError("terms must be a non-empty (n, dim) array")
        if not np.all(np.isfinite(terms)):
            raise ValueError("terms contain non-finite values")
        if not np.iscomplexobj(terms):
            terms = terms.astype(float)
        space = NormedSpace(terms.shape[1], norm_tag)
        if bound is None:
            bound = float(np.max(space.norm(terms)))
        return cls(space, lambda k: terms[k - 1], bound, terms.shape[0],
                   batch=lambda n: terms[:n], label=label)

    def terms(self, n):
        """The first n terms as an (n, dim) array."""
        if n > self.horizon:
            raise ValueError(f"requested {n} terms beyond horizon {self.horizon}")
        have = self._cache.shape[0]
        if n > have:
            if self.batch is not None:
                new = np.asarray(self.batch(n))[have:n]
            else:
                new = np.array([as_vector(self.generator(k)) for k in range(have + 1, n + 1)])
            new = new.reshape(n - have, self.space.dim)
            if not np.all(np.isfinite(new)):
                raise ValueError(f"{self!r} produced non-finite terms")
            norms = self.space.norm(new)
            worst = int(np.argmax(norms))
            if norms[worst] > self.bound * (1 + BOUND_SLACK) + BOUND_SLACK:
                raise ValueError(
                    f"term {have + worst + 1} has norm {norms[worst]:.6g} > bound {self.bound:.6g}")
            dtype = np.result_type(self._cache, new)
            self._cache = np.concatenate([self._cache.astype(dtype), new.astype(dtype)])
        return self._cache[:n]

    def term(self, k):
        if k < 1:
            raise IndexError("sequences are 1-indexed")
        return self.terms(k)[k - 1]

    @property
    def is_real(self):
        return not np.iscomplexobj(self._cache) and not np.iscomplexobj(self.term(1))

    def scaled(self, c):
        """The sequence c * x_k."""
        c = float(c)
        if c < 0:
            raise ValueError("scale must be nonnegative")
        return BoundedSequence(self.space, lambda k: c * self.term(k), abs(c) * self.bound,
                               self.horizon, batch=lambda n: c * self.terms(n),
                               label=f"{c:g}*{self.label}")


def _check_grid(seq, grid):
    grid = np.asarray(list(grid), dtype=int)
    if grid.size == 0:
        raise ValueError("grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 1:
        raise ValueError("grid entries must be >= 1")
    if grid[-1] > seq.horizon:
        raise ValueError(f"grid point {grid[-1]} exceeds horizon {seq.horizon}")
    return grid


def _check_functional(seq, f):
    if f.space.dim != seq.space.dim:
        raise ValueError(f"functional dim {f.space.dim} != sequence dim {seq.space.dim}")
    if f.space.norm_tag != seq.space.norm_tag:
        raise ValueError("functional and sequence live in differently normed spaces")


def weak_profile(seq, f, grid):
    """(1/n) sum_{k<=n} |f(x_k)| on the grid."""
    grid = _check_grid(seq, grid)
    _check_functional(seq, f)
    vals = np.abs(f(seq.terms(grid[-1])))
    return np.cumsum(vals)[grid - 1] / grid


def weak_ergodic_profile(seq, f, grid):
    """(1/n) |sum_{k<=n} f(x_k)| on the grid."""
    grid = _check_grid(seq, grid)
    _check_functional(seq, f)
    vals = f(seq.terms(grid[-1]))
    return np.abs(np.cumsum(vals)[grid - 1]) / grid


def ergodic_profile(seq, grid):
    """(1/n) ||sum_{k<=n} x_k|| on the grid."""
    grid = _check_grid(seq, grid)
    partial = np.cumsum(seq.terms(grid[-1]), axis=0)[grid - 1]
    return seq.space.norm(partial) / grid


@functools.lru_cache(maxsize=32)
def _sign_vectors(m):
    # {+-1}^m with first coordinate +1; the sign-flipped half is redundant.
    # Column j + 1 carries bit j, so the first 2^(p-1) rows restricted to the
    # first p columns enumerate every pattern of length p.
    if m == 0:
        return np.ones((1, 0))
    codes = np.arange(2 ** (m - 1))[:, None]
    bits = (codes >> np.arange(m - 1)) & 1
    out = np.hstack([np.ones((codes.shape[0], 1)), 1.0 - 2.0 * bits])
    out.setflags(write=False)
    return out


def _window_uniform(xs, tag, bound):
    """Lower/upper values of sup_f mean_k |f(x_k)| over the rows of `xs`."""
    n = xs.shape[0]
    if tag == "sup":
        u = float(np.max(np.sum(np.abs(xs), axis=0)) / n)
        return u, u
    if tag == "l1":
        if np.iscomplexobj(xs):
            raise ValueError("exact uniform statistic on complex l1 spaces is unsupported")
        dim = xs.shape[1]
        if dim > L1_MAX_DIM:
            raise ValueError(f"l1 sign enumeration limited to dim <= {L1_MAX_DIM}")
        signs = _sign_vectors(dim)
        u = float(np.max(np.sum(np.abs(xs @ signs.T), axis=0)) / n)
        return u, u
    s = gram_top_eig(xs)
    if bound == 0:
        if s > 0:
            raise ValueError("bound M = 0 but the sequence is nonzero")
        return 0.0, 0.0
    return s / bound, float(np.sqrt(s))


def uniform_bounds(seq, grid):
    """Bracket (U_lower, U_upper) of the uniform weak-mixing statistic.

    On sup-normed spaces U is exact, max_i (1/n) sum_k |x_k(i)|, because the
    dual l1 ball is the hull of the (phase-rotated) coordinate functionals.
    On real l1 spaces the dual sup ball is enumerated by sign vectors.  On
    euclidean spaces the bracket S/M <= U <= sqrt(S) is returned.
    """
    grid = _check_grid(seq, grid)
    xs = seq.terms(grid[-1])
    tag = seq.space.norm_tag
    if tag == "sup":
        u = np.max(np.cumsum(np.abs(xs), axis=0)[grid - 1], axis=1) / grid
        return u, u.copy()
    lower = np.empty(grid.size)
    upper = np.empty(grid.size)
    if tag == "l1":
        for i, n in enumerate(grid):
            lower[i], upper[i] = _window_uniform(xs[:n], tag, seq.bound)
        return lower, upper
    # euclidean: accumulate the Gram matrix between grid points
    G = np.zeros((xs.shape[1], xs.shape[1]), dtype=xs.dtype)
    prev = 0
    for i, n in enumerate(grid):
        block = xs[prev:n]
        G = G + block.T @ block.conj()
        prev = n
        s = max(float(np.linalg.eigvalsh(G / n)[-1]), 0.0)
        if seq.bound == 0:
            if s > 0:
                raise ValueError("bound M = 0 but the sequence is nonzero")
            lower[i] = upper[i] = 0.0
        else:
            lower[i] = s / seq.bound
            upper[i] = np.sqrt(s)
    return lower, upper


def uniform_exact(seq, grid, max_n=EXACT_MAX_N):
    """Exact uniform statistic on real euclidean spaces by sign enumeration.

    U(n) = (1/n) max_{eps in {+-1}^n} ||sum_k eps_k x_k||_2.  Grid points
    above `max_n` come back as NaN.
    """
    grid = _check_grid(seq, grid)
    if seq.space.norm_tag != "euclidean":
        raise ValueError("uniform_exact is defined for euclidean spaces only")
    xs = seq.terms(grid[-1])
    if np.iscomplexobj(xs) and np.any(xs.imag != 0):
        raise ValueError("uniform_exact supports real sequences only")
    xs = np.real(xs)
    out = np.full(grid.size, np.nan)
    inside = grid[grid <= max_n]
    if inside.size:
        signs = _sign_vectors(int(inside[-1]))
        for i, n in enumerate(inside):
            sums = signs[:2 ** (n - 1), :n] @ xs[:n]
            out[i] = float(np.sqrt(np.max(np.einsum("ij,ij->i", sums, sums)))) / n
    return out


def tensor_sequences(a, b):
    """The sequence x_k (x) y_k; bound and norm tag multiply through."""
    if a.space.norm_tag != b.space.norm_tag or a.space.norm_tag not in ("euclidean", "sup"):
        raise ValueError("tensor_sequences needs two euclidean or two sup-normed sequences")
    space = NormedSpace(a.space.dim * b.space.dim, a.space.norm_tag)
    horizon = min(a.horizon, b.horizon)

    def batch(n):
        xa, xb = a.terms(n), b.terms(n)
        return (xa[:, :, None] * xb[:, None, :]).reshape(n, -1)

    return BoundedSequence(space, lambda k: np.kron(a.term(k), b.term(k)),
                           a.bound * b.bound, horizon, batch=batch,
                           label=f"({a.label})x({b.label})")


@dataclass(frozen=True)
class BlumHansonResult:
    profile: np.ndarray
    density_bound: float
    observed_density: float


def blum_hanson_test(seq, subseq, grid, density_bound=None):
    """Ergodic profile of the reindexed sequence x_{k_1}, x_{k_2}, ...

    `subseq` is an array of strictly increasing 1-based indices (or a callable
    n -> k_n) with k_n <= C n.  When `density_bound` C is omitted the observed
    sup k_n / n is recorded instead.
    """
    grid = np.asarray(list(grid), dtype=int)
    if grid.size == 0:
        raise ValueError("grid is empty")
    m = int(grid[-1])
    if callable(subseq):
        ks = np.array([subseq(n) for n in range(1, m + 1)], dtype=int)
    else:
        ks = np.asarray(subseq, dtype=int)[:m]
    if ks.size < m:
        raise ValueError(f"subsequence has {ks.size} indices, grid needs {m}")
    if ks[0] < 1 or np.any(np.diff(ks) <= 0):
        raise ValueError("subsequence must be strictly increasing and start at >= 1")
    if ks[-1] > seq.horizon:
        raise ValueError(f"subsequence index {ks[-1]} exceeds horizon {seq.horizon}")
    observed = float(np.max(ks / np.arange(1, m + 1)))
    if density_bound is not None and observed > density_bound * (1 + 1e-12):
        raise ValueError(f"density bound violated: sup k_n/n = {observed:g} > {density_bound:g}")
    base = seq.terms(int(ks[-1]))
    picked = base[ks - 1]
    re = BoundedSequence(seq.space, lambda n: picked[n - 1], seq.bound, m,
                         batch=lambda n: picked[:n], label=f"{seq.label}[k_n]")
    return BlumHansonResult(
        profile=ergodic_profile(re, grid),
        density_bound=float(density_bound) if density_bound is not None else observed,
        observed_density=observed,
    )


class ShiftBoundEstimate(NamedTuple):
    estimate: float
    samples: int
    skipped: int


def convex_shift_bounded_estimate(seq, trials=200, rng_seed=0, max_p=None, max_shift=None):
    """Lower estimate of the convex shift-boundedness constant.

    Samples (p, lambda >= 0, k >= 1) and returns the largest observed
    ||sum_j lambda_j x_{j+k}|| / ||sum_j lambda_j x_j||.  Samples with a zero
    denominator are skipped and counted.
    """
    if seq.horizon < 2:
        raise ValueError("horizon too short to shift")
    max_p = max_p or max(1, seq.horizon // 2)
    max_shift = max_shift or max(1, seq.horizon // 2)
    xs = seq.terms(seq.horizon)
    rng = np.random.default_rng(rng_seed)
    best = 0.0
    used = skipped = 0
    for t in range(trials):
        p = int(rng.integers(1, min(max_p, seq.horizon - 1) + 1))
        k = int(rng.integers(1, min(max_shift, seq.horizon - p) + 1))
        if t % 3 == 0:
            lam = np.zeros(p)
            lam[rng.integers(p)] = 1.0
        else:
            lam = rng.exponential(size=p)
            lam /= lam.sum()
        den = float(seq.space.norm(lam @ xs[:p]))
        if den <= 1e-300:
            skipped += 1
            continue
        num = float(seq.space.norm(lam @ xs[k:k + p]))
        best = max(best, num / den)
        used += 1
    if used == 0:
        raise ValueError("all sampled denominators were zero")
    if skipped:
        log.info("convex shift estimate: skipped %d zero-denominator samples", skipped)
    return ShiftBoundEstimate(best, used, skipped)


@dataclass
class MixingProfile:
    """Per-n Cesaro statistics.  W and WE refer to `functional`, or, when no
    functional was supplied, to the maximum over coordinate functionals."""

    grid: np.ndarray
    W: np.ndarray
    WE: np.ndarray
    E: np.ndarray
    U_lower: np.ndarray
    U_upper: np.ndarray
    U_exact: Optional[np.ndarray] = None

    def as_columns(self):
        cols = {"n": self.grid, "W": self.W, "WE": self.WE, "E": self.E,
                "U_lower": self.U_lower, "U_upper": self.U_upper}
        if self.U_exact is not None:
            cols["U_exact"] = self.U_exact
        return cols


def mixing_profile(seq, grid, f=None, exact_max_n=EXACT_MAX_N):
    grid = _check_grid(seq, grid)
    if f is None:
        fs = seq.space.coordinate_functionals()
        W = np.max([weak_profile(seq, g, grid) for g in fs], axis=0)
        WE = np.max([weak_ergodic_profile(seq, g, grid) for g in fs], axis=0)
    else:
        W = weak_profile(seq, f, grid)
        WE = weak_ergodic_profile(seq, f, grid)
    lo, hi = uniform_bounds(seq, grid)
    exact = None
    if seq.space.norm_tag == "euclidean" and grid[0] <= exact_max_n and seq.is_real:
        exact = uniform_exact(seq, grid, exact_max_n)
    return MixingProfile(grid, W, WE, ergodic_profile(seq, grid), lo, hi, exact)


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"

    def __str__(self):
        return self.value


@dataclass
class SequenceVerdicts:
    weak_mixing: Verdict
    uniform_weak_mixing: Verdict
    weak_ergodic: Verdict
    ergodic: Verdict
    profile: MixingProfile
    tol: float
    window: tuple
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {"weak_mixing": self.weak_mixing.value,
                "uniform_weak_mixing": self.uniform_weak_mixing.value,
                "weak_ergodic": self.weak_ergodic.value,
                "ergodic": self.ergodic.value}


class _Tail(NamedTuple):
    """A statistic's tail-window mean and its full Cesaro means at the last
    two grid points."""

    rate: float
    last: float
    prev: float


def _decay_exponent(t, n_prev, n_last):
    """Apparent p in C / n^p from the Cesaro means at the last two grid points.

    A 1/n law gives p = 1 and a plateau p = 0.  Growth, or no earlier grid
    point, gives -inf.
    """
    if n_prev == 0 or t.prev <= 0:
        return -np.inf
    if t.last <= 0:
        return np.inf
    return float(np.log(t.prev / t.last) / np.log(n_last / n_prev))


def _decide(hi, lo, n_prev, n_last, tol, floor):
    """Verdict for one statistic.

    `hi` and `lo` bracket the statistic (equal when it is exact).  The mean
    over the tail window (n_prev, n_last] estimates the Cesaro limit and the
    decay exponent of the Cesaro means gives the trend.

    yes: the estimate is numerically zero, or below tol while the means
        still decay at least like n^-DECAY_EXPONENT.
    no: the estimate is nonzero and either at least 10 tol or sitting on a
        plateau (exponent at most PLATEAU_EXPONENT), which no choice of tol
        can turn into convergence to zero.
    """
    if hi.rate <= floor or (hi.rate <= tol
                            and _decay_exponent(hi, n_prev, n_last) >= DECAY_EXPONENT):
        return Verdict.YES
    if lo.rate > floor and (lo.rate >= 10 * tol
                            or _decay_exponent(lo, n_prev, n_last) <= PLATEAU_EXPONENT):
        return Verdict.NO
    return Verdict.UNDECIDED


def _tail(per_term, n_prev, n_last, absolute):
    """_Tail for values v_k (scalars or vectors reduced by `absolute`)."""
    reduce = absolute
    if n_prev:
        prev = reduce(per_term[:n_prev]) / n_prev
    else:
        prev = 0.0
    return _Tail(reduce(per_term[n_prev:n_last]) / (n_last - n_prev),
                 reduce(per_term[:n_last]) / n_last, prev)


def _per_functional(vals, n_prev, n_last, tol, floor, absolute):
    """Verdict for one functional's values f(x_k), k = 1..n_last.

    Returns (verdict, fresh, settled): `fresh` means no mass before the
    window, `settled` means earlier mass that has since died out.
    """
    if absolute:
        t = _tail(vals, n_prev, n_last, lambda v: float(np.sum(np.abs(v))))
    else:
        t = _tail(vals, n_prev, n_last, lambda v: float(abs(np.sum(v))))
    verdict = _decide(t, t, n_prev, n_last, tol, floor)
    head_mass = float(np.sum(np.abs(vals[:n_prev])))
    fresh = n_prev > 0 and head_mass <= floor * n_prev and verdict is not Verdict.YES
    settled = head_mass > floor * max(n_prev, 1) and verdict is Verdict.YES
    return verdict, fresh, settled


def _combine_functionals(results):
    """Aggregate per-functional verdicts of a 'for every f' statement.

    A functional whose mass first appears inside the final window cannot be
    judged at this horizon.  Such fresh directions are excused when some
    other direction has already carried mass and died out, the pattern of a
    sequence that keeps moving to new coordinates.
    """
    judged = [v for v, fresh, _ in results if not fresh]
    n_fresh = sum(1 for _, fresh, _ in results if fresh)
    moving = any(settled for _, _, settled in results)
    if any(v is Verdict.NO for v in judged):
        return Verdict.NO, n_fresh
    if n_fresh and not moving:
        return Verdict.UNDECIDED, n_fresh
    if all(v is Verdict.YES for v in judged):
        return Verdict.YES, n_fresh
    return Verdict.UNDECIDED, n_fresh


def _meet(strong, weak):
    """Cap a verdict by one it implies: strong => weak."""
    if weak is Verdict.NO:
        return Verdict.NO
    if strong is Verdict.YES and weak is not Verdict.YES:
        return Verdict.UNDECIDED
    return strong


def classify(seq, grid=DEFAULT_GRID, tol=DEFAULT_TOL, functionals=None,
             exact_max_n=EXACT_MAX_N):
    """Yes / no / undecided verdicts for the four mixing notions.

    Each statistic is judged by its mean over the tail window
    (grid[-2], grid[-1]] and by the trend of its Cesaro means between the
    last two grid points (see `_decide`).  The two 'for every f' notions are
    decided over `functionals` (default: coordinate functionals).  Verdicts
    are then made consistent with uniform => weak mixing and ergodic =>
    weak ergodic: a failed weaker property fails the stronger one, and an
    undecided weaker property leaves the stronger one undecided.
    """
    grid = _check_grid(seq, grid)
    tol = float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n_last = int(grid[-1])
    n_prev = int(grid[-2]) if grid.size >= 2 else 0
    xs = seq.terms(n_last)
    fs = functionals if functionals is not None else seq.space.coordinate_functionals()
    for f in fs:
        _check_functional(seq, f)
    scale = max(seq.bound, float(np.max(seq.space.norm(xs))))
    floor = BOUND_SLACK * scale

    weak, weak_erg = [], []
    for f in fs:
        vals = f(xs)
        weak.append(_per_functional(vals, n_prev, n_last, tol, floor, True))
        weak_erg.append(_per_functional(vals, n_prev, n_last, tol, floor, False))
    v_weak, fresh_w = _combine_functionals(weak)
    v_weak_erg, fresh_we = _combine_functionals(weak_erg)

    tag = seq.space.norm_tag
    lo_hi = [_window_uniform(xs[a:b], tag, seq.bound) if b > a else (0.0, 0.0)
             for a, b in ((n_prev, n_last), (0, n_last), (0, n_prev))]
    u_lo = _Tail(*(v[0] for v in lo_hi))
    u_hi = _Tail(*(v[1] for v in lo_hi))
    v_unif = _decide(u_hi, u_lo, n_prev, n_last, tol, floor)

    e = _tail(xs, n_prev, n_last, lambda v: float(seq.space.norm(v.sum(axis=0))))
    v_erg = _decide(e, e, n_prev, n_last, tol, floor)

    raw = {"uniform_weak_mixing": v_unif.value, "ergodic": v_erg.value}
    if all(f.in_dual_ball for f in fs):
        v_unif = _meet(v_unif, v_weak)
        v_erg = _meet(v_erg, v_weak_erg)
    if (v_unif is Verdict.YES and v_weak is not Verdict.YES) or \
            (v_erg is Verdict.YES and v_weak_erg is not Verdict.YES):
        raise RuntimeError("internal inconsistency in the implication lattice")

    profile = mixing_profile(seq, grid, None if functionals is None else fs[0], exact_max_n)
    return SequenceVerdicts(
        weak_mixing=v_weak,
        uniform_weak_mixing=v_unif,
        weak_ergodic=v_weak_erg,
        ergodic=v_erg,
        profile=profile,
        tol=tol,
        window=(n_prev, n_last),
        details={
            "uniform_tail_lower": u_lo._asdict(),
            "uniform_tail_upper": u_hi._asdict(),
            "ergodic_tail": e._asdict(),
            "unconstrained": raw,
            "fresh_functionals": fresh_w,
            "fresh_functionals_weak_ergodic": fresh_we,
        },
    )
