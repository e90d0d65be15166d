"""Dense-tableau two-phase primal simplex for standard-form linear programs.

    minimize c @ x  subject to  A @ x = b,  x >= 0

Two pivot rules are available.  ``"bland"`` takes the smallest eligible
entering index and the smallest basic index among tied leaving rows, which
rules out cycling.  ``"dantzig"`` (the default) takes the most negative
reduced cost and falls back to Bland after a run of degenerate pivots.

Sparse-recovery programs are massively degenerate (most basic variables sit
at zero), which makes pure Bland pivoting crawl.  By default the right-hand
side is therefore shifted by a tiny deterministic perturbation while
pivoting; the final vertex is recomputed from the unperturbed data.
"""

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max-iterations"

TOL_REDUCED_COST = 1e-9
TOL_PIVOT = 1e-9
TOL_PHASE1 = 1e-8
DEGENERATE_RUN = 10
PERTURBATION = 1e-10


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    status: str
    iterations: int
    basis: np.ndarray
    # other optimal vertices reachable by one zero-reduced-cost pivot
    alternatives: list = field(default_factory=list)


class _Tableau:
    def __init__(self, T, basis, rule, max_iter):
        self.T = T
        self.basis = basis
        self.rule = rule
        self.max_iter = max_iter
        self.iterations = 0

    @property
    def m(self):
        return self.T.shape[0] - 1

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def leaving_row(self, j):
        col = self.T[:-1, j]
        rows = np.flatnonzero(col > TOL_PIVOT)
        if rows.size == 0:
            return None, np.inf
        ratios = self.T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        return int(tied[np.argmin(self.basis[tied])]), float(max(best, 0.0))

    def entering(self, ncols, bland):
        rc = self.T[-1, :ncols]
        eligible = np.flatnonzero(rc < -TOL_REDUCED_COST)
        if eligible.size == 0:
            return None
        if bland:
            return int(eligible[0])
        return int(eligible[np.argmin(rc[eligible])])

    def run(self, ncols):
        degenerate = 0
        while True:
            if self.iterations >= self.max_iter:
                return MAX_ITERATIONS
            bland = self.rule == "bland" or degenerate >= DEGENERATE_RUN
            j = self.entering(ncols, bland)
            if j is None:
                return OPTIMAL
            r, step = self.leaving_row(j)
            if r is None:
                return UNBOUNDED
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            self.pivot(r, j)


def solve_standard_form(c, A, b, rule="dantzig", max_iter=None,
                        find_alternatives=False, perturb=True):
    """Solve min c@x s.t. A@x = b, x >= 0 with the two-phase simplex method.

    With ``find_alternatives`` the optimal tableau is scanned for nonbasic
    columns of zero reduced cost; each one along which a strictly positive
    step is possible yields another optimal vertex, returned in
    ``LPResult.alternatives``.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 100

    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    bw = b
    if perturb and m:
        # fixed generator: the perturbation is part of the algorithm, not the experiment
        u = np.random.Generator(np.random.Philox(key=0x5EED)).random(m)
        bw = b + PERTURBATION * (1.0 + np.abs(b)) * (0.5 + 0.5 * u)

    # phase 1 with one artificial per row; artificial columns are never
    # re-entered, so only their basis labels (n..n+m-1) are kept
    T = np.zeros((m + 1, n + 1))
    T[:m, :n] = A
    T[:m, -1] = bw
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -bw.sum()
    tab = _Tableau(T, np.arange(n, n + m), rule, max_iter)
    status = tab.run(n)
    if status == MAX_ITERATIONS:
        return _result(tab, c, A, b, n, status)
    if -tab.T[-1, -1] > TOL_PHASE1 * max(1.0, bw.sum()):
        return _result(tab, c, A, b, n, INFEASIBLE)

    # drive artificials out of the basis; rows where that fails are redundant
    keep = []
    for r in range(m):
        if tab.basis[r] >= n:
            row = np.abs(tab.T[r, :n])
            j = int(np.argmax(row))
            if row[j] > TOL_PIVOT:
                tab.pivot(r, j)
                keep.append(r)
        else:
            keep.append(r)
    T2 = np.vstack([tab.T[keep], np.zeros((1, n + 1))])
    basis = tab.basis[keep].copy()
    cb = c[basis]
    T2[-1, :n] = c - cb @ T2[:-1, :n]
    T2[-1, -1] = -cb @ T2[:-1, -1]
    tab2 = _Tableau(T2, basis, rule, max_iter)
    tab2.iterations = tab.iterations
    status = tab2.run(n)
    res = _result(tab2, c, A, b, n, status, rows=keep)
    if status == OPTIMAL and find_alternatives:
        tab2.T[:-1, -1] = res.x[tab2.basis]
        res.alternatives = _alternatives(tab2, res.x, n)
    return res


def _basic_solution(tab, A, b, n, rows):
    x = np.zeros(n)
    basis = tab.basis
    if np.all(basis < n) and basis.size:
        # recompute from the original data to shed accumulated pivot error
        sub = A[rows][:, basis] if rows is not None else A[:, basis]
        rhs = b[rows] if rows is not None else b
        sol, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
        x[basis] = np.maximum(sol, 0.0)
    else:
        real = basis < n
        x[basis[real]] = np.maximum(tab.T[:-1, -1][real], 0.0)
    return x


def _result(tab, c, A, b, n, status, rows=None):
    x = _basic_solution(tab, A, b, n, rows)
    return LPResult(x, float(c @ x), status, tab.iterations, tab.basis.copy())


def _alternatives(tab, x, n, tol=1e-9):
    T = tab.T
    basic = np.zeros(n, dtype=bool)
    basic[tab.basis] = True
    found = []
    for j in np.flatnonzero((np.abs(T[-1, :n]) <= tol) & ~basic):
        r, step = tab.leaving_row(j)
        if r is None:
            step = 1.0  # optimal ray; any positive step stays optimal
        if step <= 1e-10:
            continue
        alt = x.copy()
        alt[tab.basis] -= step * T[:-1, j]
        alt[j] += step
        found.append(np.maximum(alt, 0.0))
    return found
