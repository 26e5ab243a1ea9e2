"""Cross norms on order-2 tensors over euclidean factors.

A tensor w in X (x) Y is stored as its dim X by dim Y coefficient matrix, so
the elementary tensor x (x) y is ``np.outer(x, y)``.  The two extreme cross
norms are

* injective: the largest singular value (operator norm), and
* projective: the sum of singular values (nuclear norm).

They are dual to each other.  Hence the unit ball of the dual of the
injective tensor product is the nuclear ball, which equals the closed convex
hull of {f (x) g : ||f||, ||g|| <= 1}; for the projective product the dual
ball is the operator-norm ball, which is strictly larger once both factors
have dimension at least 2.

The companion requirement that the dual of the tensor product coincide with
the completed tensor product of the duals is automatic in finite dimensions
(both are the same set of matrices), so it has no runtime check here.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import as_matrix, singular_values

TAGS = ("injective", "projective")
DUAL_OF = {"injective": "projective", "projective": "injective"}


def _check_tag(tag):
    if tag not in TAGS:
        raise ValueError(f"cross norm tag must be one of {TAGS}, got {tag!r}")


def cross_norm(w, tag):
    """Injective (operator) or projective (nuclear) norm of `w`."""
    _check_tag(tag)
    s = singular_values(w)
    return float(s[0]) if tag == "injective" else float(np.sum(s))


def dual_cross_norm(w, tag):
    """Norm of `w` viewed as a functional on X (x)_tag Y."""
    _check_tag(tag)
    return cross_norm(w, DUAL_OF[tag])


@dataclass(frozen=True)
class BallMembershipCertificate:
    """w = sum_k lambdas[k] * outer(f[k], g[k]) up to `residual` (nuclear norm)."""

    lambdas: np.ndarray
    f: np.ndarray
    g: np.ndarray
    residual: float

    def reconstruct(self):
        return np.einsum("k,ki,kj->ij", self.lambdas, self.f, self.g)


@dataclass(frozen=True)
class BallRefusal:
    nuclear_norm: float


def elementary_ball_membership(w, tol=1e-12):
    """Decide whether `w` lies in the hull of elementary tensors of unit vectors.

    Membership holds iff the nuclear norm of w is at most 1.  On success the
    SVD w = sum_k s_k u_k conj(v_k)^T supplies the decomposition.
    """
    w = as_matrix(w, "w")
    u, s, vh = np.linalg.svd(w)
    nuc = float(np.sum(s))
    if nuc > 1.0 + tol:
        return BallRefusal(nuc)
    keep = s > 0
    lambdas = s[keep]
    f = u[:, :s.size].T[keep]
    g = vh[:s.size][keep]
    cert = BallMembershipCertificate(lambdas, f, g, 0.0)
    residual = float(np.sum(singular_values(w - cert.reconstruct())))
    return BallMembershipCertificate(lambdas, f, g, residual)


def is_hull_member(w, tol=1e-12):
    return isinstance(elementary_ball_membership(w, tol), BallMembershipCertificate)


def sample_dual_ball(shape, tag, rng, samples, boundary=True, complex_=False):
    """Random points of the unit ball of the dual of X (x)_tag Y."""
    out = []
    for _ in range(samples):
        z = rng.standard_normal(shape)
        if complex_:
            z = z + 1j * rng.standard_normal(shape)
        z = z / dual_cross_norm(z, tag)
        if not boundary:
            z = z * rng.uniform() ** (1.0 / z.size)
        out.append(z)
    return out


@dataclass(frozen=True)
class ConditionICheck:
    holds: bool
    witness: Optional[np.ndarray]
    samples_checked: int


def condition_I_check(dim_x, dim_y, tag, samples=1000, rng_seed=0, tol=1e-10):
    """Does the dual unit ball of X (x)_tag Y equal the elementary-tensor hull?

    For the injective norm it does, which is confirmed on sampled dual-ball
    points.  For the projective norm with both dimensions >= 2 it fails, and
    the identity tensor is returned as witness: operator norm 1, nuclear norm
    min(dim_x, dim_y).
    """
    _check_tag(tag)
    if dim_x < 1 or dim_y < 1:
        raise ValueError("dimensions must be positive")
    if tag == "projective" and min(dim_x, dim_y) >= 2:
        witness = np.eye(dim_x, dim_y)
        assert dual_cross_norm(witness, tag) <= 1 + tol
        assert not is_hull_member(witness, tol)
        return ConditionICheck(False, witness, 0)
    rng = np.random.default_rng(rng_seed)
    for z in sample_dual_ball((dim_x, dim_y), tag, rng, samples):
        if not is_hull_member(z, tol):
            return ConditionICheck(False, z, samples)
    return ConditionICheck(True, None, samples)


def ball_inclusion_probe(y0, r, samples=1000, rng_seed=0, tag="injective", tol=1e-10):
    """Sampled test of B_r(y0) (dual-norm ball) being inside the hull.

    Returns True when every sampled point of the radius-r ball around `y0`
    (boundary and interior) is a hull member.  One-sided: True is evidence,
    False is a refutation.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    y0 = as_matrix(y0, "y0")
    rng = np.random.default_rng(rng_seed)
    half = samples // 2
    points = sample_dual_ball(y0.shape, tag, rng, half, boundary=True)
    points += sample_dual_ball(y0.shape, tag, rng, samples - half, boundary=False)
    return all(is_hull_member(y0 + r * z, tol) for z in points)
