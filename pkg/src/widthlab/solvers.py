"""Reconstruction maps: basis pursuit, IRLS for l_p, and an exact support oracle.

The oracle rests on a vertex argument: for 0 < p <= 1 the map z -> sum |z_i|^p
is concave on every orthant, so its minimum over the affine set {Az = y}
is attained at a vertex of some orthant slice, i.e. at a basic solution
supported on at most rank(A) <= m columns.  Enumerating all supports of size
at most m and solving A_S z_S = y therefore finds every candidate global
minimizer.  Strict concavity of t -> t^p (p < 1) and the polyhedral
structure (p = 1) also imply that the minimizer is unique exactly when a
single distinct basic solution attains the minimum, which is how ties are
detected.
"""

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from widthlab.core import as_vector, check_exponent, lp_power, lp_quasinorm
from widthlab.exceptions import DomainError, OracleSizeError
from widthlab.linalg import as_matrix, matrix_rank
from widthlab.simplex import OPTIMAL, solve_standard_form

TIE_DETECTED = "tie-detected"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max-iterations"

N_ORACLE_MAX = 20
TOL_TIE = 1e-9
TOL_DISTINCT = 1e-7
ORACLE_CHUNK = 4096


def feasibility_tolerance(y):
    return 1e-8 * (1.0 + float(np.linalg.norm(y)))


@dataclass
class RecoveryResult:
    solution: np.ndarray
    objective: float
    residual: float
    status: str
    iterations: int
    method: str
    p: float = 1.0
    history: list = field(default_factory=list, repr=False)
    # other distinct optimal points, when the solver exposes them
    alternatives: list = field(default_factory=list, repr=False)

    @property
    def ok(self):
        return self.status == OPTIMAL

    def to_dict(self):
        d = asdict(self)
        d["solution"] = [float(v) for v in self.solution]
        d.pop("history")
        d.pop("alternatives")
        return d


@dataclass
class IrlsParams:
    """Epsilon-continuation schedule for IRLS.

    epsilon is multiplied by ``decay`` whenever the relative change of the
    smoothed objective drops below ``stagnation_tol``; the run is declared
    converged once that happens at ``eps_min``.
    """

    eps0: float = 1.0
    decay: float = 0.5
    eps_min: float = 1e-10
    max_iter: int = 500
    stagnation_tol: float = 1e-6

    def __post_init__(self):
        if not self.eps0 > self.eps_min > 0:
            raise DomainError("IRLS needs eps0 > eps_min > 0")
        if not 0 < self.decay < 1:
            raise DomainError("IRLS decay must lie in (0, 1)")


def _prepare(A, y):
    A = as_matrix(A)
    y = as_vector(y) if np.size(y) else np.zeros(0)
    if y.size != A.shape[0]:
        raise DomainError(f"rhs has length {y.size}, matrix has {A.shape[0]} rows")
    return A, y


def _infeasible(A, y, method, p):
    """Return an infeasible result if y lies outside range(A), else None."""
    z, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ z - y))
    if residual > feasibility_tolerance(y):
        return RecoveryResult(z, lp_quasinorm(z, p), residual, INFEASIBLE, 0, method, p)
    return None


def _distinct(u, v):
    scale = 1.0 + max(np.max(np.abs(u)), np.max(np.abs(v)))
    return np.max(np.abs(u - v)) > TOL_DISTINCT * scale


def l1_minimize(A, y, rule="dantzig"):
    """Basis pursuit: argmin ||z||_1 subject to Az = y.

    Solved as the linear program over the split z = z+ - z- with the
    package's own simplex method.  If another optimal vertex with a different
    z is reachable along a zero-reduced-cost direction the status is
    ``tie-detected``.
    """
    A, y = _prepare(A, y)
    bad = _infeasible(A, y, "l1", 1.0)
    if bad is not None:
        return bad
    N = A.shape[1]
    lp = solve_standard_form(np.ones(2 * N), np.hstack([A, -A]), y, rule=rule,
                             find_alternatives=True)
    z = lp.x[:N] - lp.x[N:]
    status = lp.status
    others = []
    if status == OPTIMAL:
        others = [a[:N] - a[N:] for a in lp.alternatives if _distinct(a[:N] - a[N:], z)]
        if others:
            status = TIE_DETECTED
    residual = float(np.linalg.norm(A @ z - y))
    return RecoveryResult(z, lp_quasinorm(z, 1), residual, status, lp.iterations, "l1",
                          alternatives=others)


def _smoothed(z, eps, p):
    return float(np.sum((z * z + eps * eps) ** (p / 2)))


def lp_minimize_irls(A, y, p, params=None):
    """Local l_p minimization (0 < p < 1) by iteratively reweighted least squares.

    Each step solves the weighted minimum-norm problem
    min sum w_i z_i^2 s.t. Az = y with w_i = (z_i^2 + eps^2)^(p/2 - 1), a
    majorize-minimize step for the smoothed objective sum (z_i^2 + eps^2)^(p/2),
    so the recorded ``history`` of that objective is nonincreasing.  A final
    polish re-solves on the detected support when that lowers ||z||_p.
    """
    p = check_exponent(p, allow_inf=False)
    if not 0 < p < 1:
        raise DomainError(f"IRLS needs 0 < p < 1, got {p}")
    params = params or IrlsParams()
    A, y = _prepare(A, y)
    bad = _infeasible(A, y, "irls", p)
    if bad is not None:
        return bad
    m, N = A.shape
    z, *_ = np.linalg.lstsq(A, y, rcond=None)
    tol = feasibility_tolerance(y)
    if matrix_rank(A) == N:
        return RecoveryResult(z, lp_quasinorm(z, p), float(np.linalg.norm(A @ z - y)),
                              OPTIMAL, 1, "irls", p)

    eps = params.eps0
    current = _smoothed(z, eps, p)
    history = [current]
    status = MAX_ITERATIONS
    it = 0
    for it in range(1, params.max_iter + 1):
        d = (z * z + eps * eps) ** ((1 - p / 2) / 2)
        u, *_ = np.linalg.lstsq(A * d, y, rcond=None)
        z_new = d * u
        new = _smoothed(z_new, eps, p)
        if new > current:
            # numerical noise only; keep the monotone record honest
            z_new, new = z, current
        change = (current - new) / max(current, np.finfo(float).tiny)
        z, current = z_new, new
        if change < params.stagnation_tol:
            if eps <= params.eps_min:
                status = OPTIMAL
                history.append(current)
                break
            eps = max(eps * params.decay, params.eps_min)
            current = _smoothed(z, eps, p)
        history.append(current)

    z = _polish(A, y, z, p, tol)
    residual = float(np.linalg.norm(A @ z - y))
    return RecoveryResult(z, lp_quasinorm(z, p), residual, status, it, "irls", p, history)


def _polish(A, y, z, p, tol):
    m = A.shape[0]
    mags = np.abs(z)
    if not mags.any():
        return z
    support = np.flatnonzero(mags > 1e-6 * mags.max())
    if support.size > m:
        support = np.argsort(-mags, kind="stable")[:m]
    coef, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
    cand = np.zeros_like(z)
    cand[support] = coef
    if np.linalg.norm(A @ cand - y) <= tol and lp_power(cand, p) <= lp_power(z, p):
        return cand
    return z


def _support_chunks(N, kmax, chunk=ORACLE_CHUNK):
    """All supports of size 0..kmax in (size, lexicographic) order, in blocks."""
    for k in range(kmax + 1):
        it = itertools.combinations(range(N), k)
        while True:
            block = list(itertools.islice(it, chunk))
            if not block:
                break
            yield k, np.array(block, dtype=int).reshape(len(block), k)


class _Candidates:
    """Running set of distinct near-minimal basic solutions for one rhs."""

    def __init__(self):
        self.best = math.inf
        self.reps = []  # (order, objective, z)

    def merge(self, objectives, orders, vectors, tol_rel):
        cmin = objectives.min()
        if cmin > self.best + tol_rel * max(1.0, self.best):
            return
        self.best = min(self.best, cmin)
        thresh = self.best + tol_rel * max(1.0, self.best)
        self.reps = [r for r in self.reps if r[1] <= thresh]
        for i in np.flatnonzero(objectives <= thresh):
            z = vectors(i)
            if all(_distinct(z, r[2]) for r in self.reps):
                self.reps.append((orders[i], float(objectives[i]), z))
                if len(self.reps) > 2:
                    self.reps.sort(key=lambda r: (r[1], r[0]))
                    del self.reps[2:]


def exact_minimizers(A, Y, p, n_max=N_ORACLE_MAX):
    """Exact global l_p minimizers for every column of Y (one pass over supports).

    Returns one RecoveryResult per column.  Among near-equal optima the
    solution with the earliest support in (size, lexicographic) order is
    returned and the status is ``tie-detected``.
    """
    A = as_matrix(A)
    p = check_exponent(p, allow_inf=False)
    if not 0 < p <= 1:
        raise DomainError(f"exact oracle needs 0 < p <= 1, got {p}")
    m, N = A.shape
    if N > n_max:
        raise OracleSizeError(f"exact oracle limited to N <= {n_max}, got {N}",
                              required=N, budget=n_max)
    Y = np.asarray(Y, dtype=float).reshape(m, -1)
    ny = Y.shape[1]
    tols = np.array([feasibility_tolerance(Y[:, j]) for j in range(ny)])
    state = [_Candidates() for _ in range(ny)]
    order = 0
    for k, sup in _support_chunks(N, min(m, N)):
        n = sup.shape[0]
        if k == 0:
            Z = np.zeros((n, 0, ny))
            res = np.broadcast_to(np.linalg.norm(Y, axis=0), (n, ny))
        else:
            As = A[:, sup].transpose(1, 0, 2)  # (n, m, k)
            Z = np.linalg.pinv(As) @ Y  # (n, k, ny)
            res = np.linalg.norm(As @ Z - Y, axis=1)
        obj = np.sum(np.abs(Z) ** p, axis=1)  # (n, ny)
        feas = res <= tols
        orders = np.arange(order, order + n)
        order += n
        for j in np.flatnonzero(feas.any(axis=0)):
            rows = np.flatnonzero(feas[:, j])

            def vec(i, j=j, rows=rows):
                z = np.zeros(N)
                z[sup[rows[i]]] = Z[rows[i], :, j]
                return z

            state[j].merge(obj[rows, j], orders[rows], vec, TOL_TIE)

    results = []
    for j, st in enumerate(state):
        y = Y[:, j]
        if not st.reps:
            z, *_ = np.linalg.lstsq(A, y, rcond=None)
            results.append(RecoveryResult(z, lp_quasinorm(z, p),
                                          float(np.linalg.norm(A @ z - y)),
                                          INFEASIBLE, order, "exact", p))
            continue
        reps = sorted(st.reps, key=lambda r: r[0])
        z = reps[0][2]
        status = TIE_DETECTED if len(reps) > 1 else OPTIMAL
        results.append(RecoveryResult(z, lp_quasinorm(z, p), float(np.linalg.norm(A @ z - y)),
                                      status, order, "exact", p,
                                      alternatives=[r[2] for r in reps[1:]]))
    return results


def lp_minimize_exact(A, y, p, n_max=N_ORACLE_MAX):
    """Global minimizer of ||z||_p subject to Az = y by support enumeration."""
    A, y = _prepare(A, y)
    return exact_minimizers(A, y[:, None], p, n_max=n_max)[0]


def reconstruct(A, y, method="l1", p=None, params=None):
    """Dispatch to ``l1``, ``irls`` or ``exact`` reconstruction."""
    if method == "l1":
        return l1_minimize(A, y)
    if p is None:
        raise DomainError(f"method {method!r} needs an exponent p")
    if method == "irls":
        return lp_minimize_irls(A, y, p, params)
    if method == "exact":
        return lp_minimize_exact(A, y, p)
    raise DomainError(f"unknown reconstruction method {method!r}")


def stability_constant(delta):
    """Adopted constant C(delta) for ||x - Delta(Ax)||_1 <= C sigma_s(x)_1.

    C = 2(1 + rho)/(1 - rho) with rho = sqrt(2) delta / (1 - delta), the
    classical value for delta_2s < sqrt(2) - 1.
    """
    delta = float(delta)
    if not 0 <= delta < math.sqrt(2) - 1:
        raise DomainError(f"stability constant needs 0 <= delta < sqrt(2)-1, got {delta}")
    rho = math.sqrt(2) * delta / (1 - delta)
    return 2 * (1 + rho) / (1 - rho)
