"""Command line interface: ``widthlab <subcommand> --config cfg.json [--out dir] [--seed n]``.

Instance subcommands (recover, rip, nsp, pack, bounds, widths) read their
parameters from the JSON config and/or flags, flags taking precedence, and
print a JSON report.  Campaign subcommands (phase, stability, widths with a
``campaign`` key) run an ExperimentConfig and write artifacts to the output
directory.

Exit codes: 0 success, 2 property failure (witness in the report),
3 budget exceeded, 4 bad configuration.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from widthlab import io, widths
from widthlab.certify import check_nsp, nsp_counterexample, rip_constant
from widthlab.exceptions import BudgetExceededError, ConfigError, DomainError
from widthlab.lab.campaigns import run_campaign
from widthlab.lab.config import ExperimentConfig
from widthlab.lab.outputs import json_text
from widthlab.linalg import gaussian_matrix
from widthlab.packing import PackingFamily, check_packing, greedy_packing
from widthlab.solvers import OPTIMAL, reconstruct

EXIT_OK, EXIT_PROPERTY, EXIT_BUDGET, EXIT_CONFIG = 0, 2, 3, 4

# flag name -> (type, help); shared by the instance subcommands
FLAGS = {
    "matrix_file": (str, "matrix CSV (header 'm,N')"),
    "rhs_file": (str, "measurement vector y (JSON array or 1-based 'i,value' CSV)"),
    "vector_file": (str, "signal x; measurements are formed as y = Ax"),
    "family_file": (str, "packing family JSON to validate instead of building one"),
    "method": (str, "algorithm variant"),
    "p": (float, "exponent p"),
    "q": (float, "exponent q"),
    "s": (int, "sparsity / order"),
    "N": (int, "ambient dimension"),
    "m": (int, "number of measurements"),
    "C": (float, "stability constant C"),
    "C1": (float, "sample-complexity constant C1"),
    "samples": (int, "number of sampled supports"),
    "budget": (int, "enumeration budget"),
    "starts": (int, "multi-start count"),
}

COMMANDS = {
    "recover": ("matrix_file", "rhs_file", "vector_file", "method", "p"),
    "rip": ("matrix_file", "s", "method", "samples", "budget"),
    "nsp": ("matrix_file", "s", "p", "method", "budget", "starts"),
    "pack": ("N", "s", "family_file"),
    "bounds": ("N", "m", "s", "p", "q", "C", "C1"),
    "widths": ("matrix_file", "N", "m", "p", "q", "s", "starts", "budget"),
    "phase": (),
    "stability": (),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="widthlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("-v", "--verbose", action="store_true")
        for f in flags:
            typ, help_ = FLAGS[f]
            sp.add_argument("--" + f.replace("_", "-"), dest=f, type=typ, help=help_)
    return parser


def _load_json(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    return data


def _settings(args):
    cfg = _load_json(args.config)
    for f in COMMANDS[args.command]:
        v = getattr(args, f)
        if v is not None:
            cfg[f] = v
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["out_dir"] = args.out
    return cfg


def _need(cfg, key, typ=None):
    if key not in cfg:
        raise ConfigError(f"missing parameter {key!r}")
    v = cfg[key]
    if typ is not None:
        try:
            v = typ(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {key!r}: {exc}") from exc
    return v


def _matrix(cfg):
    if "matrix_file" in cfg:
        return io.read_matrix_csv(cfg["matrix_file"])
    if "matrix" in cfg:
        A = np.atleast_2d(np.array(cfg["matrix"], dtype=float))
        if A.ndim != 2:
            raise ConfigError("'matrix' must be a list of rows")
        return A
    if "N" in cfg and "m" in cfg:
        return gaussian_matrix(_need(cfg, "m", int), _need(cfg, "N", int), int(cfg.get("seed", 0)))
    raise ConfigError("no matrix: give matrix_file, matrix, or N and m")


def cmd_recover(cfg):
    A = _matrix(cfg)
    if "rhs_file" in cfg:
        y = io.read_vector(cfg["rhs_file"], A.shape[0])
    elif "vector_file" in cfg:
        y = A @ io.read_vector(cfg["vector_file"], A.shape[1])
    elif "rhs" in cfg:
        y = np.array(cfg["rhs"], dtype=float)
    else:
        raise ConfigError("no measurements: give rhs_file, vector_file or rhs")
    method = cfg.get("method", "l1")
    p = cfg.get("p")
    res = reconstruct(A, y, method, p=None if p is None else float(p))
    return res.to_dict(), EXIT_OK if res.status == OPTIMAL else EXIT_PROPERTY


def cmd_rip(cfg):
    A = _matrix(cfg)
    est = rip_constant(A, _need(cfg, "s", int), cfg.get("method", "exhaustive"),
                       n_samples=int(cfg.get("samples", 1000)), seed=int(cfg.get("seed", 0)),
                       budget=int(cfg.get("budget", 2_000_000)))
    return est.to_dict(), EXIT_OK


def cmd_nsp(cfg):
    A = _matrix(cfg)
    kwargs = {"seed": int(cfg.get("seed", 0))}
    if "budget" in cfg:
        kwargs["budget"] = int(cfg["budget"])
    if "starts" in cfg:
        kwargs["starts"] = int(cfg["starts"])
    rep = check_nsp(A, _need(cfg, "s", int), float(cfg.get("p", 1.0)),
                    cfg.get("method", "exact-l1"), **kwargs)
    out = rep.to_dict()
    if not rep.holds and rep.witness is not None:
        x, z, ok = nsp_counterexample(A, rep)
        out["counterexample"] = {"x": x, "z": z, "verified": ok}
    return out, EXIT_OK if rep.holds else EXIT_PROPERTY


def cmd_pack(cfg):
    if "family_file" in cfg:
        try:
            with open(cfg["family_file"]) as fh:
                fam = PackingFamily.from_json(fh.read())
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad family file: {exc}") from exc
    else:
        fam = greedy_packing(_need(cfg, "N", int), _need(cfg, "s", int))
    rep = check_packing(fam)
    out = {"N": fam.N, "s": fam.s, "size": len(fam), "report": rep.__dict__, "ok": rep.ok,
           "sets": [list(I) for I in fam.sets]}
    return out, EXIT_OK if rep.ok else EXIT_PROPERTY


def cmd_bounds(cfg):
    N, m = _need(cfg, "N", int), _need(cfg, "m", int)
    p, q = float(cfg.get("p", 1.0)), float(cfg.get("q", 2.0))
    out = {"rate_band": widths.rate_band(N, m, p, q).to_dict(),
           "lower_bound_constants": widths.lower_bound_constants(p, q).__dict__,
           "upper_proof_case": widths.upper_proof_case(N, m, float(cfg.get("C1", 2.0))).__dict__}
    if "s" in cfg:
        s = _need(cfg, "s", int)
        C = float(cfg.get("C", 1.0))
        out["rip_sample_complexity"] = widths.rip_sample_complexity(s, N, float(cfg.get("C1", 2.0)))
        out["stability_min_measurements"] = widths.stability_min_measurements(s, N, p, C)
        out["stability_constants"] = dict(zip(("c", "C_prime"), widths.stability_constants(C)))
        if s < N / 2:
            # s means recovery of 2s-sparse vectors
            out["min_measurements_lp"] = widths.min_measurements_lp(s, N, p)
    return out, EXIT_OK


def cmd_widths(cfg):
    if "campaign" in cfg:
        return _campaign(cfg)
    A = _matrix(cfg)
    m, N = A.shape
    p, q = float(cfg.get("p", 1.0)), float(cfg.get("q", 2.0))
    est = widths.width_estimate(A, p, q, budget=int(cfg.get("starts", 64)),
                                seed=int(cfg.get("seed", 0)), rip_s=int(cfg.get("s", 1)),
                                rip_budget=int(cfg.get("budget", 200_000)))
    out = {"empirical_lower": est.empirical_lower, "certified_upper": est.certified_upper,
           "upper_method": est.upper_method, "witness": est.witness,
           "diagnostics": est.diagnostics, "rate_band": widths.rate_band(N, m, p, q).to_dict()}
    if p == 1 or cfg.get("sandwich", True):
        em = widths.em_recovery_error(A, "l1" if p == 1 else "irls", "ball-lp", q,
                                      trials=int(cfg.get("trials", 10)),
                                      seed=int(cfg.get("seed", 0)), p=p,
                                      method_p=None if p == 1 else p)
        out["sandwich"] = {"em_estimate": em.value, "C1": em.C1, "C2": em.C2,
                           "em_le_C1_upper": em.value <= em.C1 * est.certified_upper * (1 + 1e-9),
                           "samples": em.samples}
    ok = est.empirical_lower <= est.certified_upper * (1 + 1e-9)
    return out, EXIT_OK if ok else EXIT_PROPERTY


def _campaign(cfg, name=None):
    data = dict(cfg)
    if name is not None:
        data.setdefault("campaign", name)
    cfg_obj = ExperimentConfig.from_dict(data)
    res = run_campaign(cfg_obj)
    s = res.summary
    ok = s.get("ok", True) and s.get("all_within_C", True) and not s.get("monotone_violations")
    return {"campaign": res.campaign, "summary": s, "artifacts": res.paths}, \
        EXIT_OK if ok else EXIT_PROPERTY


HANDLERS = {"recover": cmd_recover, "rip": cmd_rip, "nsp": cmd_nsp, "pack": cmd_pack,
            "bounds": cmd_bounds, "widths": cmd_widths,
            "phase": lambda c: _campaign(c, "phase"),
            "stability": lambda c: _campaign(c, "stability")}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _settings(args)
        out, code = HANDLERS[args.command](cfg)
    except BudgetExceededError as exc:
        out, code = {"error": "budget", "message": str(exc), "required": exc.required,
                     "budget": exc.budget}, EXIT_BUDGET
    except (ConfigError, DomainError) as exc:
        out, code = {"error": "config", "message": str(exc)}, EXIT_CONFIG
    text = json_text(out)
    sys.stdout.write(text)
    if args.out and args.command not in ("phase", "stability") and "campaign" not in out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, f"{args.command}.json"), "w") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
