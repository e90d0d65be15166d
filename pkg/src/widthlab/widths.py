"""Gelfand widths of l_p and weak-l_p balls: rate and constant calculators,
empirical lower estimates over kernels and certified upper bounds.

For a fixed matrix A the quantity estimated is

    w(A) = sup { ||v||_q : v in ker A, ||v||_p <= 1 },

whose infimum over all m x N matrices is d^m(B_p^N, l_q^N).  Every value
reported as ``empirical_lower`` is ||v||_q / ||v||_p for an explicit kernel
vector v, hence a true lower bound on w(A).  Upper bounds are certified:

- ``rip-chain``: the shell-decomposition argument driven by an exhaustively
  computed delta_2s and the adopted stable-recovery constant;
- ``linf-lp``: rho = max ||v||_inf over ker A with ||v||_1 <= 1, computed
  exactly by linear programming.  For p <= 1, ||v||_1 <= ||v||_inf^(1-p) ||v||_p^p
  turns this into ||v||_inf <= rho^(1/p) ||v||_p, which is then
  interpolated to l_q;
- ``trivial``: ||v||_q <= ||v||_p.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import zeta

from widthlab import rng
from widthlab.certify import check_nsp, max_signed_mass, rip_constant
from widthlab.core import (
    best_s_term_error,
    check_exponent,
    check_width_exponents,
    compressible_model_vector,
    lp_quasinorm,
    packing_vector,
)
from widthlab.exceptions import BudgetExceededError, DomainError
from widthlab.linalg import as_matrix, kernel_basis, kernel_vector_on
from widthlab.solvers import reconstruct, stability_constant

C1_LOG9 = 1.0 / math.log(9.0)
C2_PACKING = 4.0
SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0


def _gap(p, q):
    """1/p - 1/q, with 1/inf = 0."""
    return 1.0 / p - (0.0 if math.isinf(q) else 1.0 / q)


def _check_dims(N, m):
    N, m = int(N), int(m)
    if not 1 <= m < N:
        raise DomainError(f"need 1 <= m < N, got m={m}, N={N}")
    return N, m


# ------------------------------------------------------------- calculators


@dataclass
class RateBand:
    N: int
    m: int
    p: float
    q: float
    rate: float
    alt_rate: float
    lower_const: float
    vybiral: float
    q_gt_2_upper: float = None
    q_gt_2_comparison: float = None

    @property
    def lower_bound(self):
        return self.lower_const * self.alt_rate

    def to_dict(self):
        return dict(self.__dict__)


def rate_band(N, m, p, q):
    """min{1, (ln(N/m)+1)/m}^(1/p-1/q) and its companions for an (N, m, p, q) cell."""
    N, m = _check_dims(N, m)
    p, q = check_width_exponents(p, q)
    g = _gap(p, q)
    rate = min(1.0, (math.log(N / m) + 1.0) / m) ** g
    alt = min(1.0, math.log(math.e * N / m) / m) ** g
    band = RateBand(N, m, p, q, rate, alt, lower_bound_constants(p, q).c_pq,
                    (1.0 / (m + 1)) ** g)
    if q > 2:
        # display only: these regimes are not claimed sharp
        band.q_gt_2_upper = min(1.0, (math.log(N / m) + 1.0) / m) ** (1.0 / p - 0.5)
        band.q_gt_2_comparison = m ** -0.5
    return band


@dataclass
class LowerBoundConstants:
    p: float
    q: float
    c: float
    c1: float
    c2: float
    d: float
    c_pq: float


def lower_bound_constants(p, q):
    p, q = check_width_exponents(p, q)
    c = 0.5 ** (2.0 / p - (0.0 if math.isinf(q) else 1.0 / q))
    d = 2.0 * C1_LOG9 * p / (4.0 + C1_LOG9)
    return LowerBoundConstants(p, q, c, C1_LOG9, C2_PACKING, d, c * d ** _gap(p, q))


def min_measurements_lp(s, N, p):
    """Measurements forced by exact recovery of all 2s-sparse vectors by l_p-minimization.

    ceil(max(2s, c1 * p * s * ln(N / (c2 s)))) with c1 = 1/ln 9, c2 = 4.  The
    argument ``s`` is half the recovered sparsity.
    """
    s, N = int(s), int(N)
    p = check_exponent(p, allow_inf=False)
    if p > 1 or s < 1 or not s < N / 2:
        raise DomainError(f"need 0 < p <= 1 and 1 <= s < N/2, got p={p}, s={s}, N={N}")
    return math.ceil(max(2 * s, C1_LOG9 * p * s * math.log(N / (C2_PACKING * s))))


def stability_constants(C):
    """(c, C') with c = 1/(2 ln(2C+3)) and C' = 2c/(2 + c ln(4e))."""
    if not C > 0:
        raise DomainError(f"stability constant must be positive, got {C}")
    c = 1.0 / (2.0 * math.log(2.0 * C + 3.0))
    return c, 2.0 * c / (2.0 + c * math.log(4.0 * math.e))


def stability_min_measurements(s, N, p, C):
    """ceil(C' p s ln(eN/s)): measurements forced by C-stable l_p recovery of order s."""
    s, N = int(s), int(N)
    p = check_exponent(p, allow_inf=False)
    if not (1 <= s < N and p <= 1):
        raise DomainError(f"need 1 <= s < N and 0 < p <= 1, got s={s}, N={N}, p={p}")
    _, c_prime = stability_constants(C)
    return math.ceil(c_prime * p * s * math.log(math.e * N / s))


def rip_sample_complexity(s, N, C1):
    """ceil(C1 s ln(eN/s))."""
    s, N = int(s), int(N)
    if not 1 <= s <= N or not C1 > 0:
        raise DomainError(f"need 1 <= s <= N and C1 > 0, got s={s}, N={N}, C1={C1}")
    return math.ceil(C1 * s * math.log(math.e * N / s))


def case_split_constant(C1):
    """Smallest D (up to a relative 1e-12 margin) with D/2 > e and (D/2)/(1+ln(D/2)) > C1."""
    if not C1 > 0:
        raise DomainError(f"C1 must be positive, got {C1}")

    def g(u):
        return u / (1.0 + math.log(u)) - C1

    u = math.e
    if g(u) <= 0:
        hi = 2 * math.e
        while g(hi) <= 0:
            hi *= 2
        u = brentq(g, math.e, hi, xtol=1e-14, rtol=1e-14)
    return 2.0 * u * (1.0 + 1e-12)


@dataclass
class UpperProofCase:
    case: int
    D: float
    s: int  # 0 in case 2


def upper_proof_case(N, m, C1=2.0):
    """Which case of the upper-bound argument applies, and the block size s."""
    N, m = _check_dims(N, m)
    D = case_split_constant(C1)
    L = D * math.log(math.e * N / m)
    if m > L:
        return UpperProofCase(1, D, math.ceil(m / L) - 1)
    return UpperProofCase(2, D, 0)


def weak_to_strong_constant(p, q):
    """D_{p,q} = (q/p - 1)^(-1/q), the weak-l_p compressibility constant (q > p)."""
    if not q > p:
        raise DomainError("need q > p")
    if q / p - 1.0 == 0:
        return math.inf
    return (q / p - 1.0) ** (-1.0 / q)


def weak_ball_lq_constant(p, q, N=None):
    """Sup of ||x||_q over the weak-l_p unit ball: (sum_l l^(-q/p))^(1/q).

    With ``N`` omitted the dimension-free value zeta(q/p)^(1/q) is returned.
    """
    if not q > p:
        raise DomainError("need q > p")
    if math.isinf(q):
        return 1.0
    if N is None:
        return float(zeta(q / p)) ** (1.0 / q)
    return float(np.sum(np.arange(1, int(N) + 1, dtype=float) ** (-q / p))) ** (1.0 / q)


def upper_proof_constants(p, q, C1=2.0, delta=1.0 / 3.0):
    """Constants of the two-case upper-bound argument for the weak-l_p ball.

    Returns D, C'' = C^(1/r) D_{p,r} 2^(1/r + 1/2 + 1/p - 1/q), C''' and
    C' = max(C'', C''').  For p = 1 (r = 1) D_{p,r} is infinite: the
    weak-l_1 case is not covered.
    """
    p, q = check_width_exponents(p, q)
    r = min(1.0, q)
    C = stability_constant(delta)
    D = case_split_constant(C1)
    Dpr = weak_to_strong_constant(p, r) if r > p else math.inf
    c2 = C ** (1 / r) * Dpr * 2 ** (1 / r + 0.5 + _gap(p, q))
    c3 = weak_ball_lq_constant(p, q)
    return {"D": D, "C_stable": C, "C_double_prime": c2, "C_triple_prime": c3,
            "C_prime": max(c2, c3), "r": r}


def sandwich_constants(sampler, p, q):
    """(C1, C2): K + K in C1 K for the sampled set, and the l_q quasi-norm constant."""
    if sampler in ("ball-lp", "packing-vectors"):
        c1 = 2.0 ** (1.0 / p)
    elif sampler == "weak-ball":
        c1 = 2.0 ** (1.0 + 1.0 / p)
    else:
        raise DomainError(f"unknown sampler {sampler!r}")
    c2 = max(1.0, 2.0 ** ((0.0 if math.isinf(q) else 1.0 / q) - 1.0))
    return c1, c2


# -------------------------------------------------------- empirical lower


@dataclass
class WidthEstimate:
    empirical_lower: float = None
    certified_upper: float = None
    upper_method: str = None
    witness: np.ndarray = None
    provenance: str = ""
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {"empirical_lower": self.empirical_lower,
                "certified_upper": self.certified_upper,
                "upper_method": self.upper_method,
                "witness": None if self.witness is None else [float(v) for v in self.witness],
                "provenance": self.provenance, "diagnostics": self.diagnostics}


def _ratio(v, p, q):
    n = lp_quasinorm(v, p)
    return lp_quasinorm(v, q) / n if n > 0 else 0.0


def _log_ratio_grad(v, p, q, eps):
    a = np.abs(v)
    if math.isinf(q):
        gq = np.zeros_like(v)
        i = int(np.argmax(a))
        gq[i] = np.sign(v[i]) / max(a[i], eps)
    else:
        w = a**q
        gq = np.sign(v) * a ** (q - 1) / max(w.sum(), eps)
    sm = (v * v + eps * eps) ** (p / 2)
    gp = v * (v * v + eps * eps) ** (p / 2 - 1) / sm.sum()
    return gq - gp


def _refine_support(A, v, p, q, size, rounds=10):
    """Alternate 'keep the largest `size` entries' and 'project onto the kernel there'."""
    best, best_val = v, _ratio(v, p, q)
    for _ in range(rounds):
        u = kernel_vector_on(A, np.sort(np.argsort(-np.abs(best), kind="stable")[:size]))
        if u is None:
            break
        val = _ratio(u, p, q)
        if val <= best_val * (1 + 1e-12):
            break
        best, best_val = u, val
    return best, best_val


def empirical_width_lower(A, p, q, budget=64, seed=0, iters=200, extra_candidates=()):
    """Best ||v||_q / ||v||_p over kernel vectors found by a deterministic search.

    Candidates: every kernel basis vector, the kernel vector vanishing
    beyond the first m+1 coordinates, support-refined versions of all of
    these, ``extra_candidates``, and the end points of ``budget`` seeded
    normalized-gradient ascents over kernel-basis coefficients.
    """
    A = as_matrix(A)
    p, q = check_width_exponents(p, q)
    m, N = A.shape
    V = kernel_basis(A)
    k = V.shape[1]
    if k == 0:
        raise DomainError("trivial kernel: the width over ker A is zero")
    size = min(N, N - k + 1)  # rank + 1 coordinates carry a kernel vector
    best = {"value": -1.0, "v": None, "source": None}
    counts = {}

    def consider(v, source):
        if v is None or not np.any(v):
            return
        counts[source] = counts.get(source, 0) + 1
        val = _ratio(v, p, q)
        if val > best["value"]:
            best.update(value=val, v=np.array(v, dtype=float), source=source)
        u, uval = _refine_support(A, v, p, q, size)
        if uval > best["value"]:
            best.update(value=uval, v=u, source=source + "+refined")

    vyb = kernel_vector_on(A, np.arange(min(m + 1, N)))
    consider(vyb, "vybiral")
    for j in range(k):
        consider(V[:, j], "basis")
    for v in extra_candidates:
        consider(np.asarray(v, dtype=float), "extra")
    for start in range(int(budget)):
        c = rng.gaussians(seed, ("width-start", start), k)
        c /= np.linalg.norm(c)
        v = V @ c
        cur = _ratio(v, p, q)
        step = 0.3
        for _ in range(iters):
            eps = 1e-6 * np.abs(v).max()
            g = V.T @ _log_ratio_grad(v, p, q, eps)
            g -= (g @ c) * c  # stay on the coefficient sphere
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            while step > 1e-7:
                c_try = c + step * g / gn
                c_try /= np.linalg.norm(c_try)
                v_try = V @ c_try
                val = _ratio(v_try, p, q)
                if val > cur:
                    c, v, cur = c_try, v_try, val
                    step = min(1.0, 1.5 * step)
                    break
                step *= 0.5
            else:
                break
        consider(v, "ascent")
    vyb_floor = (1.0 / (m + 1)) ** _gap(p, q)
    witness = best["v"] / lp_quasinorm(best["v"], p)
    return WidthEstimate(
        empirical_lower=best["value"], witness=witness,
        diagnostics={"source": best["source"], "candidates": counts, "starts": int(budget),
                     "vybiral_floor": vyb_floor,
                     "vybiral_candidate": None if vyb is None else _ratio(vyb, p, q)})


# -------------------------------------------------------- certified upper


def certified_width_upper(A, p, q, s, delta=None, budget=None):
    """Upper bound on w(A) from the shell-decomposition chain.

        ||v||_q <= 2^(1/r) sqrt((1+d)/(1-d)) s^-(1/r-1/q) ||v||_r       (blocks of size s)
        ||v||_r <= C(d)^(1/r) sigma_s(v)_r                              (stable recovery)
        sigma_s(v)_r <= s^-(1/p-1/r) ||v||_p                            (compressibility)

    with d = delta_2s(A) computed exhaustively (or supplied) and r = min(1, q).
    The stable-recovery constant is the adopted classical one, rigorous for
    r = 1; ``diagnostics['rigorous']`` records that.
    """
    A = as_matrix(A)
    p, q = check_width_exponents(p, q)
    if math.isinf(q) or q > 2:
        raise DomainError("the shell-decomposition chain needs q <= 2")
    m, N = A.shape
    s = int(s)
    if kernel_basis(A).shape[1] == 0:
        raise DomainError("trivial kernel: nothing to bound")
    if not 1 <= 2 * s <= N:
        raise DomainError(f"need 1 <= 2s <= N, got s={s}")
    if delta is None:
        kwargs = {} if budget is None else {"budget": budget}
        delta = rip_constant(A, 2 * s, "exhaustive", **kwargs).delta
    if not delta < SQRT2_MINUS_1:
        raise DomainError(f"delta_2s = {delta:.4f} is not below sqrt(2)-1; chain unavailable")
    r = min(1.0, q)
    block = 2 ** (1 / r) * math.sqrt((1 + delta) / (1 - delta)) * s ** (-(1 / r - 1 / q))
    stable = stability_constant(delta) ** (1 / r)
    compress = s ** (-(1 / p - 1 / r))
    return WidthEstimate(
        certified_upper=block * stable * compress, upper_method="rip-chain",
        diagnostics={"delta_2s": delta, "s": s, "r": r, "block_factor": block,
                     "stability_factor": stable, "compressibility_factor": compress,
                     "rigorous": r == 1})


def linf_kernel_bound(A):
    """rho = max over ker A with ||v||_1 <= 1 of ||v||_inf, exactly, by N linear programs.

    Returns ``(rho, vertices)`` where vertices are the maximizing kernel vectors.
    """
    A = as_matrix(A)
    N = A.shape[1]
    rho, vertices = 0.0, []
    for i in range(N):
        v = max_signed_mass(A, (i,), np.array([1.0]))
        vertices.append(v)
        rho = max(rho, float(v[i]))
    return rho, vertices


def interpolated_upper(rho, p, q, N):
    """max ||v||_q subject to ||v||_p <= 1 and ||v||_inf <= rho, in closed form."""
    rho = min(max(rho, 0.0), 1.0)
    if math.isinf(q):
        return rho
    if rho == 0:
        return 0.0
    cap = rho**p
    k = min(int(math.floor(1.0 / cap + 1e-15)), N)
    rest = max(0.0, 1.0 - k * cap) if k < N else 0.0
    return (k * rho**q + rest ** (q / p)) ** (1.0 / q)


def width_estimate(A, p, q, budget=64, seed=0, rip_s=1, rip_budget=200_000, lp_bound=True,
                   provenance="", linf=None):
    """Empirical lower bound plus the best certified upper bound available for ker A.

    ``linf`` may carry a previously computed ``linf_kernel_bound(A)`` result.
    """
    A = as_matrix(A)
    p, q = check_width_exponents(p, q)
    m, N = A.shape
    uppers = {"trivial": 1.0}
    vertices = ()
    diag = {}
    if lp_bound:
        rho, vertices = linf_kernel_bound(A) if linf is None else linf
        uppers["linf-lp"] = interpolated_upper((rho * (1 + 1e-9)) ** (1.0 / p), p, q, N)
        diag["linf_rho"] = rho
    if q <= 2 and rip_s and 2 * rip_s <= N and m < N:
        try:
            delta = rip_constant(A, 2 * rip_s, "exhaustive", budget=rip_budget).delta
            diag["delta_2s"] = delta
            chain = certified_width_upper(A, p, q, rip_s, delta=delta)
            if chain.diagnostics["rigorous"]:
                uppers["rip-chain"] = chain.certified_upper
        except (DomainError, BudgetExceededError) as exc:
            diag["rip_chain"] = str(exc)
    est = empirical_width_lower(A, p, q, budget=budget, seed=seed, extra_candidates=vertices)
    method = min(uppers, key=lambda k: (uppers[k], k))
    est.certified_upper = uppers[method]
    est.upper_method = method
    est.provenance = provenance
    est.diagnostics.update(diag)
    est.diagnostics["upper_candidates"] = uppers
    return est


# ----------------------------------------------------- recovery error E_m


@dataclass
class EmEstimate:
    value: float
    worst: np.ndarray
    samples: int
    C1: float
    C2: float
    sampler: str


def sample_set(sampler, N, p, trials, seed, family=None):
    """Deterministic sample of vectors from B_p^N, the weak-l_p ball or a packing."""
    if sampler == "packing-vectors":
        if family is None:
            raise DomainError("packing-vectors sampler needs a family")
        return [packing_vector(I, family.s, p, family.N) for I in family.sets]
    out = []
    for t in range(trials):
        if sampler == "ball-lp":
            k = 1 + int(rng.uniforms(seed, ("ball-k", t), 1)[0] * N)
            x = np.zeros(N)
            x[rng.subset(seed, ("ball-support", t), N, k)] = rng.gaussians(seed, ("ball-val", t), k)
            out.append(x / lp_quasinorm(x, p))
        elif sampler == "weak-ball":
            out.append(compressible_model_vector(N, p, rng.derive_seed(seed, "weak", t)))
        else:
            raise DomainError(f"unknown sampler {sampler!r}")
    return out


def em_recovery_error(A, method, sampler, q, trials=20, seed=0, p=1.0, method_p=None,
                      family=None, extra_samples=()):
    """max over sampled x in K of ||x - Delta(Ax)||_q, a lower estimate of the worst case."""
    A = as_matrix(A)
    p = check_exponent(p, allow_inf=False)
    q = check_exponent(q)
    xs = sample_set(sampler, A.shape[1], p, trials, seed, family) + [np.asarray(v, float)
                                                                       for v in extra_samples]
    worst, worst_x = 0.0, None
    for x in xs:
        res = reconstruct(A, A @ x, method, p=method_p)
        err = lp_quasinorm(x - res.solution, q)
        if err > worst or worst_x is None:
            worst, worst_x = err, x
    c1, c2 = sandwich_constants(sampler, p, q)
    return EmEstimate(worst, worst_x, len(xs), c1, c2, sampler)


# --------------------------------------------- lower-bound argument replay


def contradiction_replay(A, p, q, values, nsp_method="oracle-equivalence", **nsp_kwargs):
    """Replay the lower-bound contradiction on a small instance.

    ``values`` are ||v||_q/||v||_p for the kernel vectors a search found.  If
    all of them fall below c mu^(1/p-1/q), the null space property of order
    2 floor(1/mu) is checked; should it hold, the flag ``review`` is raised,
    since the argument shows that combination to be impossible.
    """
    A = as_matrix(A)
    m, N = A.shape
    consts = lower_bound_constants(p, q)
    mu = min(1.0, consts.d * math.log(math.e * N / m) / m)
    threshold = consts.c * mu ** _gap(p, q)
    below = bool(len(values)) and all(v < threshold for v in values)
    out = {"mu": mu, "threshold": threshold, "all_below": below, "review": False, "order": None}
    if below:
        s = int(math.floor(1.0 / mu))
        out["order"] = 2 * s
        if 2 * s < N:
            rep = check_nsp(A, 2 * s, p, nsp_method, **nsp_kwargs)
            out["review"] = bool(rep.holds and rep.certified)
    return out


def stable_recovery_ratio(x, xhat, s, p):
    """||x - xhat||_p^p / sigma_s(x)_p^p (inf when sigma = 0 but x != xhat, nan for 0/0)."""
    err = float(np.sum(np.abs(np.asarray(x) - np.asarray(xhat)) ** p))
    sig = best_s_term_error(x, s, p) ** p
    if sig == 0:
        return 0.0 if err == 0 else (math.nan if err < 1e-16 else math.inf)
    return err / sig
