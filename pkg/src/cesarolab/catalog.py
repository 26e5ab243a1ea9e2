"""Named constructors for the concrete sequences and systems.

Names registered in `CATALOG` are stable identifiers used by the CLI.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import as_matrix, as_vector, operator_norm
from .sequences import BoundedSequence, NormedSpace, vector_norm
from .systems import DynSystem, cesaro_projection, orbit, validate_ucp

PROFILES = ("generic", "reducible", "periodic")


def block_boundaries(J):
    """n_1 = 1, n_2 = 2, n_{j+1} = 2 n_j - 1; returns n_1 .. n_{J+1}."""
    if J < 1:
        raise ValueError("J must be positive")
    n = [1, 2]
    while len(n) < J + 1:
        n.append(2 * n[-1] - 1)
    return n[:J + 1]


def block_counterexample(J=8, norm_tag="sup"):
    """x_k = e_j for n_j <= k < n_{j+1}, j = 1..J.

    The orthonormal vectors e_j stand in for disjointly supported unit bumps
    in L^2: only inner products and norms enter the diagnostics.  The
    sequence is weakly mixing to zero but not uniformly so.
    """
    if J < 2:
        raise ValueError("block counterexample needs J >= 2 blocks")
    bounds = block_boundaries(J)
    horizon = bounds[-1] - 1
    block_of = np.empty(horizon, dtype=int)
    for j in range(J):
        block_of[bounds[j] - 1:bounds[j + 1] - 1] = j
    terms = np.eye(J)[block_of]
    seq = BoundedSequence(NormedSpace(J, norm_tag), lambda k: terms[k - 1], 1.0, horizon,
                          batch=lambda n: terms[:n], label=f"block_counterexample(J={J})")
    seq.block_boundaries = bounds
    return seq


def block_grid(J):
    """The block ends n_{j+1} - 1, j = 1..J, where the uniform statistic peaks."""
    return [b - 1 for b in block_boundaries(J)[1:]]


def _orbit_batch(U, x, shift):
    return lambda n: orbit(U, x, n) - shift


def orbit_sequence(sys, x, centered=True, horizon=10000):
    """k -> T^k x, minus E_T x when centered, in the sup-normed algebra."""
    x = as_vector(x, "x")
    if x.shape[0] != sys.algebra_dim:
        raise ValueError(f"x has dim {x.shape[0]}, system has dim {sys.algebra_dim}")
    shift = cesaro_projection(sys).matrix @ x if centered else np.zeros_like(x)
    sup_x = float(vector_norm(x, "sup"))
    bound = sup_x + float(vector_norm(shift, "sup"))
    batch = _orbit_batch(sys.matrix, x, shift)
    return BoundedSequence(NormedSpace(x.shape[0], "sup"), lambda k: batch(k)[-1], bound,
                           horizon, batch=batch,
                           label=f"{'centered ' if centered else ''}orbit of {sys.label}")


def operator_orbit(U, x, norm_tag="euclidean", horizon=1000):
    """k -> U^k x for a general square U.

    The bound is sup_{k <= horizon} ||U^k x||, measured exactly on the horizon.
    """
    U = as_matrix(U, "U")
    x = as_vector(x, "x")
    batch = _orbit_batch(U, x, np.zeros_like(x))
    terms = batch(horizon)
    bound = float(np.max(vector_norm(terms, norm_tag)))
    return BoundedSequence(NormedSpace(x.shape[0], norm_tag), lambda k: terms[k - 1], bound,
                           horizon, batch=lambda n: terms[:n], label="operator orbit")


def power_bound(U, horizon, norm_tag="euclidean"):
    """max_{1 <= k <= horizon} ||U^k|| in the operator norm induced by norm_tag."""
    U = as_matrix(U, "U")
    ord_ = {"euclidean": 2, "sup": np.inf, "l1": 1}[norm_tag]
    P = np.eye(U.shape[0])
    best = 0.0
    for _ in range(horizon):
        P = P @ U
        best = max(best, float(np.linalg.norm(P, ord_)) if ord_ != 2 else operator_norm(P))
    return best


def swap():
    return DynSystem(validate_ucp([[0.0, 1.0], [1.0, 0.0]]), "swap")


def named_system(name, u=0.5, v=0.5):
    """One of T31, H31, swap, P33 (P33 takes weights u, v > 0 with u + v = 1)."""
    if name == "T31":
        return DynSystem(validate_ucp([[0.5, 0.5], [0.0, 1.0]]), "T31")
    if name == "H31":
        return DynSystem(validate_ucp([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.5, 0.5]]),
                         "H31")
    if name == "swap":
        return swap()
    if name == "P33":
        if not (u > 0 and v > 0 and abs(u + v - 1.0) <= 1e-12):
            raise ValueError(f"P33 needs u, v > 0 with u + v = 1, got u={u}, v={v}")
        # P(x, y, z) = (y, x, u y + v z)
        P = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, u, v]]
        return DynSystem(validate_ucp(P), f"P33(u={u:g},v={v:g})")
    raise KeyError(f"unknown system {name!r}; choose from T31, H31, swap, P33")


def identity_system(d=1):
    return DynSystem(validate_ucp(np.eye(d)), f"id{d}")


def _stochastic_rows(rng, rows, mask):
    W = rng.uniform(0.05, 1.0, size=(rows, mask.shape[1])) * mask
    return W / W.sum(axis=1, keepdims=True)


def random_system(d, rng_seed=0, profile="generic"):
    """Seeded random row-stochastic map.

    generic: strictly positive entries, so peripheral spectrum {1}.
    periodic: p >= 2 cyclic classes with transitions class c -> c + 1 mod p,
        so the peripheral spectrum is the p-th roots of unity.
    reducible: block upper triangular [[A, B], [0, C]] with a transient top
        block leaking at least 20% of its mass down, and C one or two closed
        positive blocks.
    d = 1 always gives the identity on C.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    rng = np.random.default_rng(rng_seed)
    label = f"random_{profile}(d={d},seed={rng_seed})"
    if d == 1:
        return DynSystem(validate_ucp([[1.0]]), label)
    if profile == "generic":
        M = _stochastic_rows(rng, d, np.ones((d, d)))
    elif profile == "periodic":
        p = int(rng.integers(2, d + 1))
        cls = np.concatenate([np.arange(p), rng.integers(0, p, size=d - p)])
        rng.shuffle(cls)
        mask = (cls[None, :] == (cls[:, None] + 1) % p).astype(float)
        M = _stochastic_rows(rng, d, mask)
    else:
        t = int(rng.integers(1, d))
        m = d - t
        M = np.zeros((d, d))
        if m >= 2 and rng.uniform() < 0.5:
            s = int(rng.integers(1, m))
            C = np.zeros((m, m))
            C[:s, :s] = _stochastic_rows(rng, s, np.ones((s, s)))
            C[s:, s:] = _stochastic_rows(rng, m - s, np.ones((m - s, m - s)))
        else:
            C = _stochastic_rows(rng, m, np.ones((m, m)))
        M[t:, t:] = C
        leak = rng.uniform(0.2, 0.8, size=(t, 1))
        M[:t, :t] = _stochastic_rows(rng, t, np.ones((t, t))) * (1 - leak)
        M[:t, t:] = _stochastic_rows(rng, t, np.ones((t, m))) * leak
    return DynSystem(validate_ucp(M), label)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # sequence | system | system-pair
    params: dict
    locator: str
    builder: Callable = field(repr=False)

    def build(self, **overrides):
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise KeyError(f"{self.name}: unknown parameter(s) {sorted(unknown)}")
        kwargs = {**self.params, **overrides}
        return self.builder(**kwargs)


def _swap_orbit(horizon=10000):
    return orbit_sequence(swap(), [1.0, 0.0], True, horizon)


def _t31_orbit(horizon=10000):
    return orbit_sequence(named_system("T31"), [1.0, 0.0], True, horizon)


def _system(name):
    return lambda **kw: named_system(name, **kw)


CATALOG = {
    e.name: e
    for e in [
        CatalogEntry("block_counterexample", "sequence", {"J": 8, "norm_tag": "sup"},
                     "L^2 block sequence with n_{j+1} = 2 n_j - 1: weakly mixing to zero, "
                     "not uniformly", block_counterexample),
        CatalogEntry("swap_orbit", "sequence", {"horizon": 10000},
                     "centered orbit T^k(1,0) - E_T(1,0) of the coordinate swap on C^2",
                     _swap_orbit),
        CatalogEntry("T31_orbit", "sequence", {"horizon": 10000},
                     "centered orbit of (1,0) under T31; decays like 2^-k", _t31_orbit),
        CatalogEntry("T31", "system", {}, "T = [[1/2, 1/2], [0, 1]] on C^2, weakly mixing",
                     _system("T31")),
        CatalogEntry("H31", "system", {},
                     "H = [[1,0,0],[0,1,0],[0,1/2,1/2]] on C^3, no faithful invariant state",
                     _system("H31")),
        CatalogEntry("swap", "system", {}, "coordinate swap on C^2: ergodic, not weakly mixing",
                     _system("swap")),
        CatalogEntry("P33", "system", {"u": 0.5, "v": 0.5},
                     "P(x,y,z) = (y, x, u y + v z) on C^3, u + v = 1", _system("P33")),
        CatalogEntry("identity", "system", {"d": 1}, "identity map on C^d", identity_system),
        CatalogEntry("random_system", "system", {"d": 3, "rng_seed": 0, "profile": "generic"},
                     "seeded random stochastic map (generic | reducible | periodic)",
                     random_system),
        CatalogEntry("T31_H31", "system-pair", {},
                     "(T31, H31): E of the tensor factorizes although H has no faithful "
                     "invariant state", lambda: (named_system("T31"), named_system("H31"))),
        CatalogEntry("swap_swap", "system-pair", {},
                     "(swap, swap): tensor is E-ergodic but not weakly mixing",
                     lambda: (swap(), swap())),
        CatalogEntry("P33_swap", "system-pair", {"u": 0.5, "v": 0.5},
                     "(P33, swap): E of the tensor does not factorize",
                     lambda u, v: (named_system("P33", u, v), swap())),
        CatalogEntry("T31_swap", "system-pair", {},
                     "(T31, swap): weakly mixing times ergodic, E factorizes",
                     lambda: (named_system("T31"), swap())),
    ]
}


def get(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog name {name!r}; known: {', '.join(sorted(CATALOG))}") \
            from None
