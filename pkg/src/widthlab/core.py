"""Quasi-norms, rearrangements, best s-term approximation and test vectors."""

import math

import numpy as np
from scipy.special import logsumexp

from widthlab import rng
from widthlab.exceptions import DomainError

# below this exponent the sum of |x|^p is accumulated in the log domain
LOG_DOMAIN_P = 0.1


def as_vector(x):
    """Validate and return ``x`` as a finite 1-d float array of length >= 1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DomainError(f"expected a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("vector has non-finite entries")
    return x


def check_exponent(p, allow_inf=True):
    p = float(p)
    if math.isnan(p) or p <= 0 or (math.isinf(p) and not allow_inf):
        raise DomainError(f"exponent must lie in (0, inf], got {p}")
    return p


def check_width_exponents(p, q):
    """Exponent pair accepted by width routines: 0 < p <= 1 and p < q."""
    p = check_exponent(p, allow_inf=False)
    q = check_exponent(q)
    if p > 1:
        raise DomainError(f"width routines need 0 < p <= 1, got p={p}")
    if not q > p:
        raise DomainError(f"width routines need q > p, got p={p}, q={q}")
    return p, q


def _sparsity(s, n):
    s = int(s)
    if s < 0 or s > n:
        raise DomainError(f"sparsity must lie in [0, {n}], got {s}")
    return s


def lp_quasinorm(x, p):
    """(sum |x_i|^p)^(1/p), or max |x_i| for p = inf.

    For p < 0.1 the sum is formed in the log domain so that the final power
    1/p does not overflow on intermediate values.
    """
    x = as_vector(x)
    p = check_exponent(p)
    a = np.abs(x)
    if math.isinf(p):
        return float(a.max())
    if not a.any():
        return 0.0
    if p < LOG_DOMAIN_P:
        nz = a[a > 0]
        return float(math.exp(logsumexp(p * np.log(nz)) / p))
    return float(np.sum(a**p) ** (1.0 / p))


def lp_power(x, p):
    """sum |x_i|^p, the p-th power of the quasi-norm (finite p only)."""
    return float(np.sum(np.abs(np.asarray(x, dtype=float)) ** p))


def rearrangement_order(x):
    """Indices sorting |x| by magnitude descending, ties by index ascending."""
    return np.argsort(-np.abs(np.asarray(x, dtype=float)), kind="stable")


def nonincreasing_rearrangement(x):
    """Absolute values of ``x`` in nonincreasing order."""
    x = as_vector(x)
    return np.abs(x)[rearrangement_order(x)]


def weak_lp_quasinorm(x, p):
    """max over l of l^(1/p) x*_l."""
    p = check_exponent(p)
    xs = nonincreasing_rearrangement(x)
    if math.isinf(p):
        return float(xs[0])
    ranks = np.arange(1, xs.size + 1, dtype=float)
    return float(np.max(ranks ** (1.0 / p) * xs))


def hard_threshold(x, s):
    """Keep the ``s`` largest-magnitude entries of ``x`` (lowest index wins ties)."""
    x = as_vector(x)
    s = _sparsity(s, x.size)
    z = np.zeros_like(x)
    keep = rearrangement_order(x)[:s]
    z[keep] = x[keep]
    return z


def best_s_term_error(x, s, p):
    """sigma_s(x)_p: the l_p distance from ``x`` to the nearest s-sparse vector."""
    x = as_vector(x)
    s = _sparsity(s, x.size)
    p = check_exponent(p)
    tail = np.abs(x)[rearrangement_order(x)[s:]]
    if tail.size == 0:
        return 0.0
    return lp_quasinorm(tail, p)


def packing_vector(index_set, s, p, N):
    """x_I = s^(-1/p) * sum of e_i over I (1-based indices), with unit l_p norm."""
    idx = sorted(int(i) for i in index_set)
    s = int(s)
    if len(idx) != s or len(set(idx)) != s:
        raise DomainError(f"index set must have exactly s={s} distinct elements")
    if idx and (idx[0] < 1 or idx[-1] > N):
        raise DomainError(f"indices must lie in 1..{N}")
    p = check_exponent(p, allow_inf=False)
    x = np.zeros(int(N))
    x[np.array(idx, dtype=int) - 1] = s ** (-1.0 / p)
    return x


def compressible_model_vector(N, p, seed, permute=True, random_signs=True):
    """Extremal element of the weak-l_p unit ball: x*_l = l^(-1/p).

    Signs and positions are drawn from the deterministic stream keyed by
    ``seed``; with ``permute=False`` and ``random_signs=False`` the result is
    (1, 2^(-1/p), 3^(-1/p), ...).
    """
    p = check_exponent(p, allow_inf=False)
    if p > 1:
        raise DomainError(f"compressible model needs 0 < p <= 1, got {p}")
    N = int(N)
    values = np.arange(1, N + 1, dtype=float) ** (-1.0 / p)
    if random_signs:
        values = values * rng.signs(seed, ("compressible", "signs"), N)
    x = np.empty(N)
    if permute:
        x[rng.permutation(seed, ("compressible", "perm"), N)] = values
    else:
        x[:] = values
    return x


def support_of(x, tol=0.0):
    return np.flatnonzero(np.abs(np.asarray(x)) > tol)
