"""Finite-dimensional abelian C*-dynamical systems (C^d, T).

On the abelian algebra C^d with the sup norm a unital positive map is a
row-stochastic nonnegative matrix, (Tx)_i = sum_j T[i, j] x_j, and positivity
plus unitality already gives complete positivity.  States are probability
vectors acting by phi(x) = sum_i phi_i x_i, so invariant states are fixed
points of the transpose.

The Cesaro projection E_T = lim (1/n) sum_{k=1}^n T^k is computed two ways:
spectrally, as the eigenprojection for eigenvalue 1, and iteratively, by the
doubling recurrence A_{2n} = (A_n + T^n A_n) / 2.  Weak mixing (the absolute
Cesaro deviations |phi(T^k x) - phi(E x)| averaging to zero) is decided both
by the peripheral spectrum and by direct summation, and the two must agree.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .numerics import as_matrix, as_vector, kron, null_space, spectrum

UCP_ATOL = 1e-12
PROJECTION_ATOL = 1e-10
DOUBLING_CAP = 2 ** 50
DEVIATION_GRID = (10, 100, 1000, 10000)


class MethodDisagreement(RuntimeError):
    """Spectral and direct weak-mixing criteria gave different answers."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True)
class UcpMap:
    matrix: np.ndarray

    @property
    def d(self):
        return self.matrix.shape[0]

    def __call__(self, x):
        return self.matrix @ np.asarray(x)


def validate_ucp(M, atol=UCP_ATOL):
    """Accept a real square nonnegative row-stochastic matrix.

    Entries down to -atol and row sums within atol of 1 are tolerated; the
    accepted matrix is clamped to nonnegative and its rows renormalized.
    """
    M = as_matrix(M, "ucp matrix")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"ucp matrix must be square, got {M.shape}")
    if np.iscomplexobj(M):
        if np.any(M.imag != 0):
            raise ValueError("ucp matrix on an abelian algebra must be real")
        M = M.real
    if np.min(M) < -atol:
        i, j = np.unravel_index(np.argmin(M), M.shape)
        raise ValueError(f"negative entry {M[i, j]:.3g} at ({i}, {j}): map is not positive")
    sums = M.sum(axis=1)
    bad = np.abs(sums - 1.0) > atol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"row {i} sums to {sums[i]:.15g}: map is not unital")
    M = np.clip(M, 0.0, None)
    M = M / M.sum(axis=1, keepdims=True)
    M.setflags(write=False)
    return UcpMap(M)


@dataclass(frozen=True)
class DynSystem:
    map: UcpMap
    label: str = ""

    @classmethod
    def from_matrix(cls, M, label=""):
        return cls(validate_ucp(M), label)

    @property
    def algebra_dim(self):
        return self.map.d

    @property
    def matrix(self):
        return self.map.matrix


@dataclass(frozen=True)
class ProjectionE:
    matrix: np.ndarray
    range_basis: np.ndarray

    def __call__(self, x):
        return self.matrix @ np.asarray(x)


def fixed_point_space(sys):
    """Orthonormal basis (rows) of {x : Tx = x}."""
    T = sys.matrix
    return null_space(T - np.eye(T.shape[0]))


def invariant_functionals(sys):
    """Orthonormal basis (rows) of {phi : phi T = phi}."""
    T = sys.matrix
    return null_space(T.T - np.eye(T.shape[0]))


def _spectral_projection(T):
    R = null_space(T - np.eye(T.shape[0])).T
    L = null_space(T.T - np.eye(T.shape[0])).T
    if R.shape[1] != L.shape[1]:
        raise ArithmeticError("left and right fixed spaces differ in dimension")
    return R @ np.linalg.solve(L.T @ R, L.T)


def _doublings(T):
    """Yield (A_n, T^n, n) for n = 1, 2, 4, ... with A_n the n-th Cesaro mean."""
    stochastic = bool(np.all(T >= 0) and np.allclose(T.sum(axis=1), 1.0, atol=1e-12))
    A = np.array(T, dtype=float)
    P = A.copy()
    n = 1
    while True:
        yield A, P, n
        A = 0.5 * (A + P @ A)
        P = P @ P
        # keep T^n stochastic; otherwise the unit eigenvalue drifts under squaring
        if stochastic:
            P = np.clip(P, 0.0, None)
            P /= P.sum(axis=1, keepdims=True)
        n *= 2


def cesaro_means(T, tol, cap=DOUBLING_CAP):
    """Doubling iteration for A_n = (1/n) sum_{k=1}^n T^k, n = 1, 2, 4, ...

    Stops when ||A_{2n} - A_n||_max <= tol and returns (A_{2n}, 2n, step).
    """
    prev = None
    for A, _, n in _doublings(T):
        if prev is not None:
            step = float(np.max(np.abs(A - prev)))
            if step <= tol:
                return A, n, step
        if n >= cap:
            raise ArithmeticError(f"Cesaro means did not settle by n = {n}")
        prev = A


def cesaro_projection(sys, method="spectral", tol=PROJECTION_ATOL):
    """The norm-one projection E_T onto the fixed-point space.

    method="spectral" uses left/right eigenvectors for eigenvalue 1;
    method="iterative" runs the doubling Cesaro iteration to tolerance `tol`;
    method="both" computes both, requires agreement within 10 tol and returns
    the spectral one.
    """
    T = sys.matrix
    if method == "spectral":
        E = _spectral_projection(T)
    elif method == "iterative":
        E, _, _ = cesaro_means(T, tol)
    elif method == "both":
        E = _spectral_projection(T)
        E_it, _, _ = cesaro_means(T, tol)
        gap = float(np.max(np.abs(E - E_it)))
        if gap > 10 * tol:
            raise ArithmeticError(f"spectral and iterative projections differ by {gap:.3g}")
    else:
        raise ValueError(f"unknown method {method!r}")
    return ProjectionE(E, fixed_point_space(sys))


def projection_defects(E, T):
    """Max-entry violations of E^2 = E, E1 = 1, E >= 0, ET = TE = E."""
    one = np.ones(T.shape[0])
    return {
        "idempotent": float(np.max(np.abs(E @ E - E))),
        "unital": float(np.max(np.abs(E @ one - one))),
        "positive": float(max(0.0, -np.min(E))),
        "ET": float(np.max(np.abs(E @ T - E))),
        "TE": float(np.max(np.abs(T @ E - E))),
    }


def deviation_matrices(T, E, grid):
    """(1/n) sum_{k=1}^n |T^k - E| entrywise, for each n in the grid.

    Entry (i, j) is the Cesaro deviation for x = e_j and phi = e_i.
    """
    grid = np.asarray(list(grid), dtype=int)
    if grid.size == 0 or grid[0] < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a nonempty strictly increasing list of positive ints")
    n_max = int(grid[-1])
    out = np.empty((grid.size,) + T.shape)
    # powers come in blocks: T^{mj + r} = T^{mj} T^r for r = 1..m
    m = min(256, n_max)
    Q = np.empty((m,) + T.shape, dtype=T.dtype)
    Q[0] = T
    for r in range(1, m):
        Q[r] = Q[r - 1] @ T
    base = np.eye(T.shape[0])
    acc = np.zeros(T.shape)
    g = 0
    for start in range(0, n_max, m):
        size = min(m, n_max - start)
        block = np.abs(np.matmul(base, Q[:size]) - E)
        if g < grid.size and grid[g] <= start + size:
            run = acc + np.cumsum(block, axis=0)
            while g < grid.size and grid[g] <= start + size:
                k = int(grid[g])
                out[g] = run[k - start - 1] / k
                g += 1
            acc = run[-1]
        else:
            acc = acc + block.sum(axis=0)
        base = base @ Q[m - 1]
    return out


def _as_state_vector(phi, d):
    coeffs = getattr(phi, "coefficients", phi)
    phi = as_vector(coeffs, "phi")
    if phi.shape[0] != d:
        raise ValueError(f"functional has dim {phi.shape[0]}, algebra has dim {d}")
    return phi


def deviation_profile(sys, x, phi, grid):
    """(1/n) sum_{k=1}^n |phi(T^k x) - phi(E_T x)| on the grid."""
    d = sys.algebra_dim
    x = as_vector(x, "x")
    if x.shape[0] != d:
        raise ValueError(f"x has dim {x.shape[0]}, algebra has dim {d}")
    phi = _as_state_vector(phi, d)
    grid = np.asarray(list(grid), dtype=int)
    if grid.size == 0 or grid[0] < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a nonempty strictly increasing list of positive ints")
    target = phi @ (cesaro_projection(sys).matrix @ x)
    vals = orbit(sys.matrix, x, int(grid[-1])) @ phi
    return np.cumsum(np.abs(vals - target))[grid - 1] / grid


def orbit(T, x, n, block=64):
    """Rows T^k x for k = 1..n, computed block-wise as T^r (T^{mj} x)."""
    m = min(block, n)
    Q = np.empty((m,) + T.shape, dtype=T.dtype)
    Q[0] = T
    for r in range(1, m):
        Q[r] = Q[r - 1] @ T
    out = np.empty((n, x.shape[0]), dtype=np.result_type(T, x))
    y = x
    for start in range(0, n, m):
        size = min(m, n - start)
        out[start:start + size] = Q[:size] @ y
        y = out[start + size - 1]
    return out


@dataclass
class MixClass:
    unique_E_ergodic: bool
    unique_E_weak_mixing: bool
    peripheral_eigenvalues: np.ndarray
    method_agreement: bool
    spectral_weak_mixing: bool
    direct_weak_mixing: bool
    projection: ProjectionE
    ergodic_gap: float
    direct_rate: float
    worst_pair: tuple
    details: dict = field(default_factory=dict)


def classify_system(sys, tol=1e-2, grid=DEVIATION_GRID, projection_tol=PROJECTION_ATOL,
                    strict=True):
    """Unique E-ergodicity and unique E-weak mixing of (C^d, T).

    Ergodicity: the doubling Cesaro iteration must reproduce the spectral E_T
    within 10 projection_tol.  Weak mixing is decided (a) spectrally, by the
    peripheral spectrum being {1}, and (b) directly, by the tail-window mean
    of |T^k - E| over coordinate pairs (x = e_j, phi = e_i).  Any unit x and
    state phi have deviation at most d^2 times the worst coordinate pair, so
    (b) compares that worst pair against tol / d^2.  With `strict`, a
    disagreement between (a) and (b) raises MethodDisagreement.
    """
    T = sys.matrix
    d = T.shape[0]
    rep = spectrum(T)
    spectral_wm = rep.peripheral_is_one

    proj = cesaro_projection(sys, "spectral")
    E = proj.matrix
    E_it, _, _ = cesaro_means(T, projection_tol)
    gap = float(np.max(np.abs(E - E_it)))
    ergodic = gap <= 10 * projection_tol
    if not ergodic:
        raise ArithmeticError(f"Cesaro means do not reach E_T (gap {gap:.3g}); invalid ucp map?")

    grid = np.asarray(list(grid), dtype=int)
    D = deviation_matrices(T, E, grid)
    n_last = int(grid[-1])
    n_prev = int(grid[-2]) if grid.size >= 2 else 0
    window = (D[-1] * n_last - (D[-2] * n_prev if grid.size >= 2 else 0)) / (n_last - n_prev)
    worst = np.unravel_index(int(np.argmax(window)), window.shape)
    rate = float(window[worst])
    direct_wm = rate <= tol / d ** 2
    agree = spectral_wm == direct_wm
    pair = (int(worst[1]), int(worst[0]))  # (x = e_j, phi = e_i)
    if strict and not agree:
        raise MethodDisagreement(
            f"{sys.label or 'system'}: spectral weak mixing {spectral_wm}, direct {direct_wm} "
            f"(window deviation {rate:.3g} at x=e_{pair[0]}, phi=e_{pair[1]})", pair)
    return MixClass(
        unique_E_ergodic=ergodic,
        unique_E_weak_mixing=spectral_wm and direct_wm,
        peripheral_eigenvalues=rep.peripheral,
        method_agreement=agree,
        spectral_weak_mixing=spectral_wm,
        direct_weak_mixing=direct_wm,
        projection=proj,
        ergodic_gap=gap,
        direct_rate=rate,
        worst_pair=pair,
        details={"spectral_radius": rep.spectral_radius,
                 "semisimple_peripheral": rep.semisimple_peripheral,
                 "deviation_profile_max": D.reshape(grid.size, -1).max(axis=1)},
    )


def tensor_system(a, b):
    """(A (x) B, T (x) H); the Kronecker product of ucp maps is ucp."""
    return DynSystem(validate_ucp(kron(a.matrix, b.matrix)),
                     f"{a.label or 'A'}(x){b.label or 'B'}")


@dataclass
class FactorizationReport:
    factorizes: bool
    lhs: ProjectionE
    rhs: np.ndarray
    error: float
    fixed_dim_tensor: int
    fixed_dim_product: int


def e_factorization_check(a, b, tol=1e-10):
    """Compare E_{T(x)H} with E_T (x) E_H in max-entry distance."""
    t = tensor_system(a, b)
    lhs = cesaro_projection(t)
    Ea = cesaro_projection(a)
    Eb = cesaro_projection(b)
    rhs = kron(Ea.matrix, Eb.matrix)
    err = float(np.max(np.abs(lhs.matrix - rhs)))
    return FactorizationReport(
        factorizes=err <= tol,
        lhs=lhs,
        rhs=rhs,
        error=err,
        fixed_dim_tensor=lhs.range_basis.shape[0],
        fixed_dim_product=Ea.range_basis.shape[0] * Eb.range_basis.shape[0],
    )


@dataclass
class MixAReport:
    holds: bool
    weak_mixing_a: bool
    weak_mixing_b: bool
    weak_mixing_tensor: bool
    peripheral_a: np.ndarray
    peripheral_b: np.ndarray
    peripheral_tensor: np.ndarray
    method_agreement: bool


def theorem_mix_a_check(a, b, tol=1e-2):
    """Both factors weakly mixing iff the tensor system is weakly mixing."""
    ca = classify_system(a, tol)
    cb = classify_system(b, tol)
    ct = classify_system(tensor_system(a, b), tol)
    both = ca.unique_E_weak_mixing and cb.unique_E_weak_mixing
    return MixAReport(
        holds=both == ct.unique_E_weak_mixing,
        weak_mixing_a=ca.unique_E_weak_mixing,
        weak_mixing_b=cb.unique_E_weak_mixing,
        weak_mixing_tensor=ct.unique_E_weak_mixing,
        peripheral_a=ca.peripheral_eigenvalues,
        peripheral_b=cb.peripheral_eigenvalues,
        peripheral_tensor=ct.peripheral_eigenvalues,
        method_agreement=ca.method_agreement and cb.method_agreement and ct.method_agreement,
    )


@dataclass
class MixCReport:
    skipped: bool
    reason: str
    holds: Optional[bool] = None
    residual: Optional[float] = None
    n: Optional[int] = None


def cesaro_convergence(sys, target, tol, max_n=DOUBLING_CAP):
    """First doubling horizon n <= max_n with ||A_n - target||_max <= tol.

    Returns (converged, residual, n).  Column j of A_n - target is the Cesaro
    residual for x = e_j, so this covers a spanning set of x.
    """
    target = np.asarray(target)
    for A, _, n in _doublings(sys.matrix):
        res = float(np.max(np.abs(A - target)))
        if res <= tol:
            return True, res, n
        if n >= max_n:
            return False, res, n


def theorem_mix_c_check(a, b, tol=1e-8, mix_tol=1e-2):
    """Weakly mixing a and ergodic b with E factorizing give an ergodic tensor.

    One-directional.  When `a` is not weakly mixing or E_{T(x)H} does not
    factorize the check is skipped, not failed.
    """
    ca = classify_system(a, mix_tol)
    if not ca.unique_E_weak_mixing:
        return MixCReport(True, f"{a.label or 'first system'} is not weakly mixing")
    fac = e_factorization_check(a, b)
    if not fac.factorizes:
        return MixCReport(True, f"E does not factorize (error {fac.error:.3g})")
    ok, res, n = cesaro_convergence(tensor_system(a, b), fac.rhs, tol)
    return MixCReport(False, "", ok, res, n)


@dataclass
class InvariantStates:
    extreme_states: np.ndarray
    faithful: bool
    closed_classes: list


def state_set_probe(sys):
    """Invariant states of T as the hull of their extreme points.

    Each closed communicating class of the transition graph carries exactly
    one invariant probability vector; these are the extreme invariant states.
    An invariant state with full support (a faithful one) exists iff the
    closed classes cover every coordinate.
    """
    T = sys.matrix
    d = T.shape[0]
    _, labels = connected_components(T > 0, directed=True, connection="strong")
    classes = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        outside = np.setdiff1d(np.arange(d), members)
        if outside.size == 0 or not np.any(T[np.ix_(members, outside)] > 0):
            classes.append(members)
    classes.sort(key=lambda m: int(m[0]))
    states = np.zeros((len(classes), d))
    for r, members in enumerate(classes):
        block = T[np.ix_(members, members)]
        v = null_space(block.T - np.eye(members.size))
        if v.shape[0] != 1:
            raise ArithmeticError("closed class without a unique invariant state")
        v = np.real(v[0])
        states[r, members] = v / v.sum()
    covered = np.zeros(d, dtype=bool)
    for members in classes:
        covered[members] = True
    return InvariantStates(states, bool(np.all(covered)), [m.tolist() for m in classes])
