"""Dense linear-algebra substrate shared by the other modules.

Everything here is a thin, validated layer over numpy: Kronecker products,
spectral reports with semisimplicity tests, Gram-matrix top eigenvalues and
singular values.  Inputs containing NaN or Inf are rejected.
"""

from dataclasses import dataclass

import numpy as np

# relative tolerances, scaled by max(1, ||A||_F)
RANK_RTOL = 1e-9
CLUSTER_RTOL = 1e-6
PERIPHERAL_RTOL = 1e-8


def as_matrix(A, name="matrix"):
    """Return `A` as a 2-D finite ndarray (float or complex)."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.issubdtype(A.dtype, np.number):
        raise TypeError(f"{name} must be numeric")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.iscomplexobj(A):
        A = A.astype(float)
    return A


def as_vector(x, name="vector"):
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {x.shape}")
    if not np.issubdtype(x.dtype, np.number):
        raise TypeError(f"{name} must be numeric")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.iscomplexobj(x):
        x = x.astype(float)
    return x


def scale_of(A):
    return max(1.0, float(np.linalg.norm(A)))


def kron(A, B):
    """Kronecker product, with (A (x) B)(u (x) v) = Au (x) Bv."""
    return np.kron(as_matrix(A, "A"), as_matrix(B, "B"))


def matrix_rank(A, rtol=RANK_RTOL):
    A = as_matrix(A)
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > rtol * scale_of(A)))


def null_space(A, rtol=RANK_RTOL):
    """Orthonormal basis of ker(A), returned as the rows of an array."""
    A = as_matrix(A)
    _, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > rtol * scale_of(A)))
    basis = vh[rank:].conj()
    # fix the phase of each row so its largest entry is real and positive
    for row in basis:
        big = row[int(np.argmax(np.abs(row)))]
        row *= abs(big) / big
    return basis


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues of a square matrix with multiplicity bookkeeping.

    `eigenvalues` lists all d eigenvalues; `distinct` holds one representative
    per cluster with matching `algebraic_mults` and `geometric_mults`.
    """

    eigenvalues: np.ndarray
    distinct: np.ndarray
    algebraic_mults: np.ndarray
    geometric_mults: np.ndarray
    peripheral: np.ndarray
    spectral_radius: float
    semisimple_peripheral: bool

    @property
    def peripheral_is_one(self):
        """True when the only peripheral eigenvalue is 1."""
        return self.peripheral.size == 1 and abs(self.peripheral[0] - 1.0) <= 1e-8


def _order_key(lam):
    # (-|lambda|, arg lambda), rounded so near-ties order reproducibly
    return (-round(abs(lam), 10), round(float(np.angle(lam)), 10), round(lam.real, 10))


def _cluster(values, tol):
    clusters = []
    for lam in values:
        for c in clusters:
            if abs(np.mean(c) - lam) <= tol:
                c.append(lam)
                break
        else:
            clusters.append([lam])
    return clusters


def spectrum(A):
    """Spectral report for a square matrix.

    Multiplicities are decided by rank tests on ``A - lam I`` rather than a
    Jordan form: an eigenvalue is semisimple when ``rank(A - lam I)`` equals
    ``rank((A - lam I)^2)``.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"spectrum needs a square matrix, got {A.shape}")
    d = A.shape[0]
    scale = scale_of(A)
    raw = np.linalg.eigvals(A).astype(complex)

    clusters = _cluster(sorted(raw, key=_order_key), CLUSTER_RTOL * scale)
    reps = []
    alg = []
    geo = []
    semisimple = []
    eye = np.eye(d)
    for c in clusters:
        lam = complex(np.mean(c))
        if abs(lam.imag) <= 1e-14 * scale:
            lam = complex(lam.real, 0.0)
        shifted = A - lam * eye
        r1 = matrix_rank(shifted)
        r2 = matrix_rank(shifted @ shifted)
        reps.append(lam)
        alg.append(len(c))
        # a cluster mean need not be an exact eigenvalue of A, so the rank
        # test can miss the kernel; every eigenvalue has an eigenvector
        geo.append(max(1, min(d - r1, len(c))))
        semisimple.append(r1 == r2)

    order = sorted(range(len(reps)), key=lambda i: _order_key(reps[i]))
    reps = np.array([reps[i] for i in order])
    alg = np.array([alg[i] for i in order], dtype=int)
    geo = np.array([geo[i] for i in order], dtype=int)
    semisimple = [semisimple[i] for i in order]

    radius = float(np.max(np.abs(reps)))
    is_peripheral = np.abs(reps) >= radius - PERIPHERAL_RTOL * scale
    eigenvalues = np.array(sorted(raw, key=_order_key))
    return SpectralReport(
        eigenvalues=eigenvalues,
        distinct=reps,
        algebraic_mults=alg,
        geometric_mults=geo,
        peripheral=reps[is_peripheral],
        spectral_radius=radius,
        semisimple_peripheral=all(s for s, p in zip(semisimple, is_peripheral) if p),
    )


def gram_top_eig(xs):
    """Largest eigenvalue of ``(1/n) sum_k x_k x_k^*`` for rows ``x_k`` of `xs`.

    This is ``sup_{||f||_2 <= 1} (1/n) sum_k |<f, x_k>|^2``.
    """
    xs = np.asarray(xs)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError("gram_top_eig needs a non-empty (n, dim) array")
    if not np.all(np.isfinite(xs)):
        raise ValueError("non-finite sequence terms")
    n, dim = xs.shape
    # same nonzero spectrum either way; pick the smaller Gram matrix
    if n < dim:
        G = xs @ xs.conj().T
    else:
        G = xs.T @ xs.conj()
    top = float(np.linalg.eigvalsh(G / n)[-1])
    return max(top, 0.0)


def singular_values(A):
    """Singular values in nonincreasing order."""
    return np.linalg.svd(as_matrix(A), compute_uv=False)


def operator_norm(A):
    return float(singular_values(A)[0])


def nuclear_norm(A):
    return float(np.sum(singular_values(A)))
