"""Restricted isometry constants, the p-null space property and quotient norms."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from widthlab import rng
from widthlab.core import check_exponent, lp_power, lp_quasinorm, packing_vector
from widthlab.exceptions import BudgetExceededError, DomainError
from widthlab.linalg import as_matrix, batched_gram_extremes, kernel_basis
from widthlab.simplex import OPTIMAL, solve_standard_form
from widthlab.solvers import (
    N_ORACLE_MAX,
    exact_minimizers,
    l1_minimize,
    lp_minimize_exact,
)

RIP_BUDGET = 2_000_000
NSP_LP_BUDGET = 100_000
NSP_BOUNDARY = 1e-10
HEURISTIC_STARTS = 64
HEURISTIC_SMOOTHING = 1e-9


# --------------------------------------------------------------------- RIP


@dataclass
class RipEstimate:
    s: int
    delta: float
    support: tuple  # 0-based witness support
    method: str
    supports_examined: int

    def to_dict(self):
        return {"s": self.s, "delta": self.delta, "support": [i + 1 for i in self.support],
                "method": self.method, "supports_examined": self.supports_examined}


def _deviation(lo, hi):
    return np.maximum(hi - 1.0, 1.0 - lo)


def rip_constant(A, s, method="exhaustive", n_samples=1000, seed=0, budget=RIP_BUDGET,
                 chunk=20000):
    """delta_s(A) = max over |S| = s of the spectral deviation of A_S^T A_S from I.

    ``exhaustive`` enumerates every support (lexicographic order, first
    maximizer kept as witness).  ``sampled`` evaluates ``n_samples`` seeded
    random supports and is a lower bound on delta_s.
    """
    A = as_matrix(A)
    m, N = A.shape
    s = int(s)
    if not 1 <= s <= N:
        raise DomainError(f"RIP order must lie in [1, N] = [1, {N}], got {s}")
    if method == "exhaustive":
        total = math.comb(N, s)
        if total > budget:
            raise BudgetExceededError(f"C({N},{s}) = {total} supports exceed budget {budget}",
                                      required=total, budget=budget)
        best, witness = -math.inf, None
        it = itertools.combinations(range(N), s)
        while True:
            block = np.array(list(itertools.islice(it, chunk)), dtype=int)
            if block.size == 0:
                break
            dev = _deviation(*batched_gram_extremes(A, block))
            i = int(np.argmax(dev))
            if dev[i] > best:
                best, witness = float(dev[i]), tuple(int(v) for v in block[i])
        return RipEstimate(s, max(best, 0.0), witness, "exhaustive", total)
    if method == "sampled":
        block = np.array([rng.subset(seed, ("rip-sample", s, k), N, s) for k in range(n_samples)])
        dev = _deviation(*batched_gram_extremes(A, block))
        i = int(np.argmax(dev))
        return RipEstimate(s, max(float(dev[i]), 0.0), tuple(int(v) for v in block[i]),
                           "sampled", n_samples)
    raise DomainError(f"unknown RIP method {method!r}")


# --------------------------------------------------------------------- NSP


@dataclass
class NspReport:
    """Outcome of a null space property check.

    ``worst_ratio`` is the largest ||v_S||_p^p / ||v||_p^p seen; ``witness``
    and ``support`` (0-based) attain it.  ``certified`` says whether
    ``holds`` is a proof: always for failures, and for successes only under
    the exact methods.
    """

    s: int
    p: float
    holds: bool
    worst_ratio: float
    witness: np.ndarray
    support: tuple
    method: str
    certified: bool
    boundary: bool = False
    work: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "s": self.s, "p": self.p, "holds": self.holds, "worst_ratio": self.worst_ratio,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "support": None if self.support is None else [i + 1 for i in self.support],
            "method": self.method, "certified": self.certified, "boundary": self.boundary,
            "work": self.work, "notes": list(self.notes),
        }


def concentration_ratio(v, s, p):
    """max over |S| <= s of ||v_S||_p^p / ||v||_p^p, with the maximizing S."""
    a = np.abs(np.asarray(v, dtype=float))
    total = float(np.sum(a**p))
    S = tuple(sorted(int(i) for i in np.argsort(-a, kind="stable")[:s]))
    if total == 0:
        return 0.0, S
    return float(np.sum(a[list(S)] ** p)) / total, S


def _decide(ratio):
    boundary = abs(ratio - 0.5) <= NSP_BOUNDARY
    return (ratio < 0.5 and not boundary), boundary


def check_nsp(A, s, p=1.0, method="exact-l1", budget=NSP_LP_BUDGET, n_max=N_ORACLE_MAX,
              seed=0, starts=HEURISTIC_STARTS):
    """Decide (or refute) the p-null space property of order s.

    Methods: ``exact-l1`` (p = 1, one LP per support and sign pattern),
    ``oracle-equivalence`` (unique recovery of every sign-pattern vector by
    the exact oracle) and ``heuristic`` (multi-start ascent; refutation only).
    """
    A = as_matrix(A)
    p = check_exponent(p, allow_inf=False)
    m, N = A.shape
    s = int(s)
    if not 1 <= s < N:
        raise DomainError(f"NSP order must lie in [1, N), got {s}")
    V = kernel_basis(A)
    if V.shape[1] == 0:
        return NspReport(s, p, True, 0.0, None, None, method, True,
                         notes=["trivial kernel"])
    if method == "exact-l1":
        if p != 1:
            raise DomainError("exact-l1 NSP check requires p = 1")
        return _nsp_exact_l1(A, s, budget)
    if method == "oracle-equivalence":
        return _nsp_oracle(A, V, s, p, n_max)
    if method == "heuristic":
        return _nsp_heuristic(A, V, s, p, seed, starts)
    raise DomainError(f"unknown NSP method {method!r}")


def sign_patterns(s):
    """Sign vectors on s coordinates with a positive first entry (v and -v agree)."""
    for rest in itertools.product((1.0, -1.0), repeat=s - 1):
        yield np.array((1.0,) + rest)


def max_signed_mass(A, support, sigma):
    """max sum_{i in S} sigma_i v_i subject to Av = 0, ||v||_1 <= 1, by LP."""
    m, N = A.shape
    n = 2 * N + 1
    Aeq = np.zeros((m + 1, n))
    Aeq[:m, :N] = A
    Aeq[:m, N:2 * N] = -A
    Aeq[m, :2 * N] = 1.0
    Aeq[m, -1] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    c = np.zeros(n)
    c[list(support)] = -sigma
    c[[N + i for i in support]] = sigma
    lp = solve_standard_form(c, Aeq, b)
    if lp.status != OPTIMAL:
        raise RuntimeError(f"NSP linear program ended with status {lp.status}")
    return lp.x[:N] - lp.x[N:2 * N]


def _nsp_exact_l1(A, s, budget):
    m, N = A.shape
    need = math.comb(N, s) * 2 ** (s - 1)
    if need > budget:
        raise BudgetExceededError(f"exact-l1 NSP needs {need} LPs, budget {budget}",
                                  required=need, budget=budget)
    best, wv, wS = -1.0, None, None
    for S in itertools.combinations(range(N), s):
        for sigma in sign_patterns(s):
            v = max_signed_mass(A, S, sigma)
            total = float(np.sum(np.abs(v)))
            ratio = float(np.sum(np.abs(v[list(S)]))) / total if total > 0 else 0.0
            if ratio > best:
                best, wv, wS = ratio, v, S
    holds, boundary = _decide(best)
    return NspReport(s, 1.0, holds, best, wv, wS, "exact-l1", True, boundary, need)


def _nsp_oracle(A, V, s, p, n_max):
    m, N = A.shape
    X = []
    for S in itertools.combinations(range(N), s):
        for sigma in sign_patterns(s):
            x = np.zeros(N)
            x[list(S)] = sigma
            X.append(x)
    X = np.array(X).T
    results = exact_minimizers(A, A @ X, p, n_max=n_max)
    probe = max(concentration_ratio(V[:, j], s, p)[0] for j in range(V.shape[1]))
    for j, res in enumerate(results):
        x = X[:, j]
        others = [res.solution] + list(res.alternatives)
        # a distinct point at least as good as x; it exists iff recovery of x fails
        alt = next((z for z in others if np.max(np.abs(z - x)) > 1e-7), None)
        if alt is None:
            continue
        v = x - alt
        ratio, S = concentration_ratio(v, s, p)
        return NspReport(s, p, False, max(ratio, probe), v, S, "oracle-equivalence", True,
                         _decide(ratio)[1], X.shape[1],
                         notes=["non-unique recovery of a sign-pattern vector"])
    notes = []
    if p < 1:
        notes.append("for p < 1 only sign-pattern vectors were tested")
    return NspReport(s, p, True, probe, None, None, "oracle-equivalence", p == 1, False,
                     X.shape[1], notes=notes)


def _smoothed_ratio_grad(v, S, p, eps):
    w = (v * v + eps * eps) ** (p / 2)
    dw = p * v * (v * v + eps * eps) ** (p / 2 - 1)
    num = w[list(S)].sum()
    den = w.sum()
    mask = np.zeros_like(v)
    mask[list(S)] = 1.0
    return dw * (mask / den - num / den**2)


def _sparse_kernel_vector(A, v, size):
    from widthlab.linalg import kernel_vector_on

    support = np.sort(np.argsort(-np.abs(v), kind="stable")[:size])
    return kernel_vector_on(A, support)


def _nsp_heuristic(A, V, s, p, seed, starts, iters=150):
    m, N = A.shape
    k = V.shape[1]
    best, wv, wS = -1.0, None, None

    def consider(v):
        nonlocal best, wv, wS
        if v is None or not np.any(v):
            return
        ratio, S = concentration_ratio(v, s, p)
        if ratio > best:
            best, wv, wS = ratio, v.copy(), S

    for j in range(k):
        consider(V[:, j])
        consider(_sparse_kernel_vector(A, V[:, j], min(m + 1, N)))
    for start in range(starts):
        c = rng.gaussians(seed, ("nsp-start", start), k)
        v = V @ c
        step = 0.5
        cur = concentration_ratio(v, s, p)[0]
        for _ in range(iters):
            S = concentration_ratio(v, s, p)[1]
            g = V.T @ _smoothed_ratio_grad(v, S, p, HEURISTIC_SMOOTHING * (1 + np.abs(v).max()))
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            cn = np.linalg.norm(c)
            while step > 1e-8:
                c_try = c + step * cn * g / gn
                v_try = V @ c_try
                val = concentration_ratio(v_try, s, p)[0]
                if val > cur:
                    c, v, cur = c_try, v_try, val
                    step = min(1.0, step * 1.5)
                    break
                step *= 0.5
            else:
                break
        consider(v)
        consider(_sparse_kernel_vector(A, v, min(m + 1, N)))
    holds, boundary = _decide(best)
    notes = [] if not holds else ["no violation found; not a proof"]
    return NspReport(s, p, holds, best, wv, wS, "heuristic", not holds, boundary,
                     starts, notes=notes)


def nsp_counterexample(A, report, tol=1e-8):
    """From a failing report build x = v_S and z = -v_{S^c} with Az = Ax, ||z||_p <= ||x||_p.

    Returns ``(x, z, verified)``.
    """
    v = np.asarray(report.witness, dtype=float)
    mask = np.zeros(v.size, dtype=bool)
    mask[list(report.support)] = True
    x = np.where(mask, v, 0.0)
    z = np.where(mask, 0.0, -v)
    A = as_matrix(A)
    scale = 1.0 + np.linalg.norm(v)
    same_measurements = np.linalg.norm(A @ x - A @ z) <= tol * scale
    no_better = lp_power(z, report.p) <= lp_power(x, report.p) * (1 + 1e-9) + 1e-12
    return x, z, bool(same_measurements and no_better)


# ---------------------------------------------------------- quotient norm


@dataclass
class QuotientNormResult:
    value: float
    representative: np.ndarray


def quotient_norm(A, x, p, n_max=N_ORACLE_MAX):
    """inf over v in ker A of ||x + v||_p, realised by the l_p-minimal point with data Ax."""
    A = as_matrix(A)
    x = np.asarray(x, dtype=float)
    p = check_exponent(p, allow_inf=False)
    y = A @ x
    res = l1_minimize(A, y) if p == 1 else lp_minimize_exact(A, y, p, n_max=n_max)
    w = res.solution
    norm_x = lp_quasinorm(x, p)
    value = lp_quasinorm(w, p)
    if value > norm_x:
        w, value = x.copy(), norm_x
    return QuotientNormResult(value, w)


@dataclass
class PreservationReport:
    pairs: int
    violations: list  # (I, J, quotient value, direct norm)
    separation_ok: bool

    @property
    def ok(self):
        return not self.violations and self.separation_ok


def norm_preservation_check(A, family, p, tol=1e-8, n_max=N_ORACLE_MAX):
    """Check ||[x_I - x_J]||_{A,p} = ||x_I - x_J||_p and ||x_I - x_J||_p^p > 1 for I != J."""
    A = as_matrix(A)
    vecs = [packing_vector(I, family.s, p, family.N) for I in family.sets]
    violations = []
    separation_ok = True
    pairs = 0
    for a in range(len(vecs)):
        for b in range(a + 1, len(vecs)):
            d = vecs[a] - vecs[b]
            pairs += 1
            direct = lp_quasinorm(d, p)
            if lp_power(d, p) <= 1 + 1e-12:
                separation_ok = False
            q = quotient_norm(A, d, p, n_max=n_max).value
            if abs(q - direct) > tol * max(1.0, direct):
                violations.append((family.sets[a], family.sets[b], q, direct))
    return PreservationReport(pairs, violations, separation_ok)
