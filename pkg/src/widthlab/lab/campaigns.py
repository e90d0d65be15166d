"""Phase-transition, stability, width-sweep and packing campaigns.

Every random draw is keyed by ``derive_seed(master, campaign, *cell, trial)``
so any single trial can be replayed in isolation.  Cells run sequentially in
grid order; wall-clock times go to the sidecar metadata only.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from widthlab import rng
from widthlab.certify import rip_constant
from widthlab.core import best_s_term_error, compressible_model_vector, hard_threshold, lp_quasinorm
from widthlab.exceptions import BudgetExceededError, ConfigError, DomainError
from widthlab.lab import svg
from widthlab.lab.config import ExperimentConfig
from widthlab.lab.outputs import PACK_COLUMNS, PHASE_COLUMNS, WIDTH_COLUMNS, emit_outputs
from widthlab.linalg import ensemble_matrix, gaussian_matrix
from widthlab.packing import check_packing, greedy_packing, max_overlap, packing_size_bound
from widthlab.solvers import TIE_DETECTED, reconstruct, stability_constant
from widthlab.widths import SQRT2_MINUS_1, linf_kernel_bound, rate_band, width_estimate

log = logging.getLogger(__name__)

RATIO_BAND = 100.0  # two decades


@dataclass
class CellResult:
    N: int
    m: int
    s: int
    p: float
    q: float
    trials: int
    successes: int
    mean_err: float
    max_err: float
    seed: int
    trial_seeds: list
    status: str = "ok"
    extra: dict = field(default_factory=dict)
    mean_runtime: float = field(default=0.0, compare=False)

    @property
    def success_rate(self):
        return self.successes / self.trials if self.trials else 0.0

    def row(self):
        return {"N": self.N, "m": self.m, "s": self.s, "p": self.p, "q": self.q,
                "trials": self.trials, "success_rate": self.success_rate,
                "mean_err": self.mean_err, "max_err": self.max_err, "seed": self.seed}

    def to_dict(self):
        d = self.row()
        d.update(successes=self.successes, trial_seeds=self.trial_seeds, status=self.status,
                 extra=self.extra)
        return d


@dataclass
class CampaignResult:
    campaign: str
    config: ExperimentConfig
    cells: list
    summary: dict
    paths: list = field(default_factory=list)


def _require(cfg, campaign):
    if cfg.campaign != campaign:
        raise ConfigError(f"expected a {campaign!r} configuration, got {cfg.campaign!r}")


def _method_p(cfg):
    p = cfg.p_values[0]
    if cfg.method == "l1" and p != 1:
        raise ConfigError("method l1 needs p = 1")
    return None if cfg.method == "l1" else p


def sparse_unit_vector(N, s, seed):
    """Random s-sparse vector with Gaussian entries, unit l_2 norm."""
    x = np.zeros(N)
    if s:
        x[rng.subset(seed, ("sparse-support",), N, s)] = rng.gaussians(seed, ("sparse-values",), s)
        x /= np.linalg.norm(x)
    return x


def phase_trial(N, m, s, seed, method="l1", p=None, tol=1e-6, ensemble="gaussian"):
    """One recovery trial; returns (success, relative l_2 error, status)."""
    A = ensemble_matrix(ensemble, m, N, rng.derive_seed(seed, "matrix"))
    x = sparse_unit_vector(N, s, rng.derive_seed(seed, "signal"))
    res = reconstruct(A, A @ x, method, p=p)
    err = float(np.linalg.norm(res.solution - x)) / max(float(np.linalg.norm(x)), 1.0 if s == 0 else 0.0)
    return (err <= tol and res.status != TIE_DETECTED), err, res.status


# ------------------------------------------------------------------ phase


def run_phase_transition(cfg, write=True):
    _require(cfg, "phase")
    p = _method_p(cfg)
    cells, runtimes = [], []
    for N in cfg.N:
        for s in cfg.s:
            if s > N:
                raise ConfigError(f"s={s} exceeds N={N}")
            for m in cfg.m_values(N, s):
                t0 = time.perf_counter()
                seeds, errs, ok = [], [], 0
                for t in range(cfg.trials):
                    seed = rng.derive_seed(cfg.seed, "phase", N, m, s, t)
                    success, err, _ = phase_trial(N, m, s, seed, cfg.method, p, cfg.success_tol,
                                                  cfg.ensemble)
                    seeds.append(seed)
                    errs.append(err)
                    ok += bool(success)
                dt = (time.perf_counter() - t0) / cfg.trials
                runtimes.append(dt)
                cells.append(CellResult(N, m, s, cfg.p_values[0], float(cfg.q), cfg.trials, ok,
                                        float(np.mean(errs)), float(np.max(errs)), cfg.seed,
                                        seeds, mean_runtime=dt))
    summary = phase_summary(cells, cfg.trials)
    return _finish(cfg, "phase", cells, summary, runtimes, write,
                   [c.row() for c in cells], PHASE_COLUMNS, _phase_svg(cells))


def phase_summary(cells, trials):
    """Monotonicity in m (with slack 2/sqrt(trials)) and the boundary m*(s) per N."""
    slack = 2.0 / math.sqrt(trials)
    out = {"monotone_slack": slack, "monotone_violations": [], "boundary": {}}
    by = {}
    for c in cells:
        by.setdefault((c.N, c.s), []).append(c)
    for (N, s), group in sorted(by.items()):
        group = sorted(group, key=lambda c: c.m)
        for a, b in zip(group, group[1:]):
            if b.success_rate < a.success_rate - slack:
                out["monotone_violations"].append({"N": N, "s": s, "m": [a.m, b.m],
                                                   "rates": [a.success_rate, b.success_rate]})
        mstar = next((c.m for c in group if c.success_rate >= 0.9), None)
        out["boundary"].setdefault(str(N), {})[str(s)] = mstar
    bound_ok = True
    for N, per_s in out["boundary"].items():
        vals = [per_s[k] for k in sorted(per_s, key=int)]
        seen = [v for v in vals if v is not None]
        bound_ok &= all(a <= b for a, b in zip(seen, seen[1:]))
    out["boundary_nondecreasing"] = bool(bound_ok)
    return out


def _phase_svg(cells):
    if not cells:
        return None
    N = cells[0].N
    sub = [c for c in cells if c.N == N]
    ms = sorted({c.m for c in sub})
    ss = sorted({c.s for c in sub})
    look = {(c.m, c.s): c.success_rate for c in sub}
    values = [[look.get((m, s)) for m in ms] for s in ss]
    return svg.heatmap(values, ms, ss, title=f"recovery success rate, N={N}",
                       xname="m (measurements)", yname="s (sparsity)")


# -------------------------------------------------------------- stability


def stability_matrix(cfg, N, m, s, max_attempts):
    """Rejection-sample a matrix with exhaustive delta_2s < sqrt(2) - 1.

    Returns ``(A, delta, attempts, seed)``; A is None when no draw qualified.
    """
    best = None
    for a in range(max_attempts):
        seed = rng.derive_seed(cfg.seed, "stability-matrix", N, m, s, a)
        A = ensemble_matrix(cfg.ensemble, m, N, seed)
        delta = rip_constant(A, min(2 * s, N), "exhaustive").delta
        if best is None or delta < best[1]:
            best = (A, delta, a + 1, seed)
        if delta < SQRT2_MINUS_1:
            return A, delta, a + 1, seed
    return None, best[1] if best else math.nan, max_attempts, None


def run_stability(cfg, write=True):
    _require(cfg, "stability")
    p = cfg.p_values[0]
    method_p = _method_p(cfg)
    attempts_max = int(cfg.options.get("max_attempts", 2000))
    ratio_slack = float(cfg.options.get("ratio_slack", 1e-9))
    cells, runtimes = [], []
    for N in cfg.N:
        for s in cfg.s:
            if not 1 <= s < N:
                raise ConfigError(f"stability cells need 1 <= s < N, got s={s}, N={N}")
            for m in cfg.m_values(N, s):
                t0 = time.perf_counter()
                A, delta, attempts, mseed = stability_matrix(cfg, N, m, s, attempts_max)
                extra = {"delta_2s": delta, "attempts": attempts, "matrix_seed": mseed,
                         "ensemble": cfg.ensemble}
                if A is None:
                    log.info("stability cell N=%d m=%d s=%d skipped: best delta %.4f", N, m, s, delta)
                    cells.append(CellResult(N, m, s, p, float(cfg.q), cfg.trials, 0, math.nan,
                                            math.nan, cfg.seed, [], "skipped", extra))
                    runtimes.append(0.0)
                    continue
                C = stability_constant(delta)
                seeds, ratios, sparse_errs, ok = [], [], [], 0
                for t in range(cfg.trials):
                    seed = rng.derive_seed(cfg.seed, "stability", N, m, s, t)
                    x = compressible_model_vector(N, p, seed)
                    xs = hard_threshold(x, s)
                    xh = reconstruct(A, A @ x, cfg.method, p=method_p).solution
                    xsh = reconstruct(A, A @ xs, cfg.method, p=method_p).solution
                    err = float(np.sum(np.abs(x - xh) ** p))
                    ratio = err / best_s_term_error(x, s, p) ** p
                    sparse_err = float(np.linalg.norm(xs - xsh))
                    seeds.append(seed)
                    ratios.append(ratio)
                    sparse_errs.append(sparse_err)
                    ok += ratio <= C * (1 + ratio_slack) and sparse_err <= 1e-8
                dt = (time.perf_counter() - t0) / cfg.trials
                runtimes.append(dt)
                extra.update(C=C, max_sparse_err=float(max(sparse_errs)),
                             err_kind="||x - xhat||_p^p / sigma_s(x)_p^p")
                cells.append(CellResult(N, m, s, p, float(cfg.q), cfg.trials, ok,
                                        float(np.mean(ratios)), float(np.max(ratios)), cfg.seed,
                                        seeds, "ok", extra, dt))
    active = [c for c in cells if c.status == "ok"]
    summary = {"cells": len(cells), "skipped": len(cells) - len(active),
               "all_within_C": all(c.successes == c.trials for c in active),
               "max_ratio_over_C": max((c.max_err / c.extra["C"] for c in active), default=None)}
    series = [("max ratio / C", list(range(len(active))), [c.max_err / c.extra["C"] for c in active]),
              ("mean ratio / C", list(range(len(active))), [c.mean_err / c.extra["C"] for c in active])]
    plot = svg.line_plot(series, title="stability ratio relative to C(delta_2s)",
                         xname="cell index", yname="ratio / C")
    return _finish(cfg, "stability", cells, summary, runtimes, write,
                   [c.row() for c in cells], PHASE_COLUMNS, plot)


# ---------------------------------------------------------------- widths


def run_width_sweep(cfg, write=True):
    _require(cfg, "widths")
    q = float(cfg.q)
    budget = int(cfg.options.get("starts", 64))
    rip_s = int(cfg.options.get("rip_s", 1))
    rip_budget = int(cfg.options.get("rip_budget", 200_000))
    rows, estimates, runtimes = [], [], []
    for N in cfg.N:
        for m in cfg.m_values(N):
            if not 1 <= m < N:
                raise ConfigError(f"width cells need 1 <= m < N, got m={m}, N={N}")
            seed = rng.derive_seed(cfg.seed, "widths", N, m)
            A = gaussian_matrix(m, N, seed)
            t0 = time.perf_counter()
            linf = linf_kernel_bound(A)
            for p in cfg.p_values:
                band = rate_band(N, m, p, q)
                row = {"N": N, "m": m, "p": p, "q": q, "seed": seed, "rate": band.rate,
                       "alt_rate": band.alt_rate, "vybiral": band.vybiral}
                try:
                    est = width_estimate(A, p, q, budget=budget, seed=seed, rip_s=rip_s,
                                         rip_budget=rip_budget, linf=linf,
                                         provenance=f"gaussian_matrix({m}, {N}, {seed})")
                except (DomainError, BudgetExceededError) as exc:
                    row["upper_method"] = f"error: {exc}"
                    rows.append(row)
                    estimates.append({"row": row, "estimate": None})
                    continue
                row.update(empirical_lower=est.empirical_lower, certified_upper=est.certified_upper,
                           upper_method=est.upper_method,
                           lower_ratio=est.empirical_lower / band.rate,
                           upper_ratio=est.certified_upper / band.rate,
                           delta_2s=est.diagnostics.get("delta_2s"))
                rows.append(row)
                estimates.append({"row": row, "band": band.to_dict(), "estimate": est.to_dict()})
            runtimes.append(time.perf_counter() - t0)
    summary = width_summary(rows)
    return _finish(cfg, "widths", estimates, summary, runtimes, write, rows, WIDTH_COLUMNS,
                   _width_svg(rows))


def width_summary(rows, band=RATIO_BAND):
    """Per-p spread of the ratio columns, ordering and floor checks."""
    out = {"band": band, "per_p": {}}
    good = [r for r in rows if r.get("empirical_lower") is not None]
    out["lower_le_upper"] = all(r["empirical_lower"] <= r["certified_upper"] * (1 + 1e-9)
                                for r in good)
    out["above_vybiral"] = all(r["empirical_lower"] >= r["vybiral"] - 1e-6 for r in good)
    ok = out["lower_le_upper"] and out["above_vybiral"] and len(good) == len(rows)
    for p in sorted({r["p"] for r in good}):
        sub = [r for r in good if r["p"] == p]
        stats = {}
        for col in ("lower_ratio", "upper_ratio"):
            vals = [r[col] for r in sub]
            lo, hi = min(vals), max(vals)
            stats[col] = {"min": lo, "max": hi, "spread": hi / lo}
            ok &= hi / lo <= band
        # log-slope of each ratio against N, a drift indicator
        if len(sub) > 1:
            lnN = np.log([r["N"] for r in sub])
            for col in ("lower_ratio", "upper_ratio"):
                stats[col]["log_slope"] = float(np.polyfit(lnN, np.log([r[col] for r in sub]), 1)[0])
        out["per_p"][repr(p)] = stats
    out["ok"] = bool(ok)
    return out


def _width_svg(rows):
    series = []
    for p in sorted({r["p"] for r in rows}):
        sub = [r for r in rows if r["p"] == p and r.get("empirical_lower") is not None]
        Ns = [r["N"] for r in sub]
        series += [(f"lower p={p:g}", Ns, [r["empirical_lower"] for r in sub]),
                   (f"upper p={p:g}", Ns, [r["certified_upper"] for r in sub]),
                   (f"rate p={p:g}", Ns, [r["rate"] for r in sub])]
    return svg.line_plot(series, title="width estimates vs rate", xname="N", yname="value",
                         logx=True, logy=True)


# ------------------------------------------------------------ pack demo


def run_pack_demo(cfg, write=True):
    _require(cfg, "pack-demo")
    rows, fams, runtimes = [], [], []
    for N in cfg.N:
        for s in cfg.s:
            if not 1 <= s < N:
                raise ConfigError(f"packing cells need 1 <= s < N, got s={s}, N={N}")
            t0 = time.perf_counter()
            fam = greedy_packing(N, s)
            rep = check_packing(fam)
            runtimes.append(time.perf_counter() - t0)
            rows.append({"N": N, "s": s, "size": len(fam), "bound": packing_size_bound(N, s),
                         "max_overlap": max_overlap(s), "ok": rep.ok})
            fams.append({"N": N, "s": s, "report": rep.__dict__, "sets": [list(I) for I in fam.sets]})
    summary = {"all_ok": all(r["ok"] for r in rows)}
    return _finish(cfg, "pack-demo", fams, summary, runtimes, write, rows, PACK_COLUMNS, None)


CAMPAIGN_RUNNERS = {"phase": run_phase_transition, "stability": run_stability,
                    "widths": run_width_sweep, "pack-demo": run_pack_demo}


def run_campaign(cfg, write=True):
    return CAMPAIGN_RUNNERS[cfg.campaign](cfg, write)


def _finish(cfg, name, cells, summary, runtimes, write, rows, columns, plot):
    result = CampaignResult(name, cfg, cells, summary)
    if write:
        # the output location is not part of the experiment
        config = {k: v for k, v in cfg.to_dict().items() if k != "out_dir"}
        payload = {"campaign": name, "config": config, "summary": summary,
                   "cells": [c.to_dict() if hasattr(c, "to_dict") else c for c in cells]}
        meta = {"runtimes_s": runtimes, "total_runtime_s": float(sum(runtimes))}
        result.paths = emit_outputs(cfg.out_dir, name, rows, columns, payload, plot, meta)
    return result
