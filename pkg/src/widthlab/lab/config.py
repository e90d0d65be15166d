"""Experiment configuration: parsing, validation and m-rules."""

import json
import math
from dataclasses import asdict, dataclass, field

from widthlab.exceptions import ConfigError
from widthlab.linalg import MATRIX_ENSEMBLES
from widthlab.widths import rip_sample_complexity

CAMPAIGNS = ("phase", "stability", "widths", "pack-demo")
METHODS = ("l1", "irls", "exact")


@dataclass
class ExperimentConfig:
    """One campaign over a grid of (N, m, s) cells.

    ``m`` is either an explicit list or a rule: ``{"rule": "fraction",
    "alpha": a}`` gives m = ceil(a N) and ``{"rule": "rip", "C1": c}`` gives
    m = rip_sample_complexity(s, N, c).  For the widths campaign ``p`` may be
    a list.  ``options`` holds campaign-specific knobs (budgets, start counts,
    rejection attempts).
    """

    campaign: str
    N: list
    m: object = None
    s: list = field(default_factory=lambda: [1])
    p: object = 1.0
    q: float = 2.0
    trials: int = 10
    seed: int = 0
    method: str = "l1"
    ensemble: str = "gaussian"
    out_dir: str = "out"
    success_tol: float = 1e-6
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.campaign not in CAMPAIGNS:
            raise ConfigError(f"campaign must be one of {CAMPAIGNS}, got {self.campaign!r}")
        self.N = _int_list(self.N, "N", minimum=1)
        self.s = _int_list(self.s, "s", minimum=0)
        if self.m is None:
            self.m = {"rule": "fraction", "alpha": 0.25}
        if isinstance(self.m, dict):
            rule = self.m.get("rule")
            if rule == "fraction":
                a = self.m.get("alpha")
                if not isinstance(a, (int, float)) or not 0 < a <= 1:
                    raise ConfigError(f"fraction rule needs 0 < alpha <= 1, got {a!r}")
            elif rule == "rip":
                c = self.m.get("C1", 2.0)
                if not isinstance(c, (int, float)) or not c > 0:
                    raise ConfigError(f"rip rule needs C1 > 0, got {c!r}")
            else:
                raise ConfigError(f"unknown m rule {rule!r}")
        else:
            self.m = _int_list(self.m, "m", minimum=1)
        ps = self.p if isinstance(self.p, list) else [self.p]
        for p in ps:
            if not isinstance(p, (int, float)) or not 0 < p <= 1:
                raise ConfigError(f"p must lie in (0, 1], got {p!r}")
        if isinstance(self.p, list) and self.campaign != "widths":
            raise ConfigError("a list of p values is only accepted by the widths campaign")
        if not isinstance(self.q, (int, float)) or not self.q > 0:
            raise ConfigError(f"q must be positive, got {self.q!r}")
        if not isinstance(self.trials, int) or isinstance(self.trials, bool) or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.ensemble not in MATRIX_ENSEMBLES:
            raise ConfigError(f"unknown matrix ensemble {self.ensemble!r}")
        if not isinstance(self.success_tol, (int, float)) or not self.success_tol > 0:
            raise ConfigError(f"success_tol must be positive, got {self.success_tol!r}")
        if not isinstance(self.options, dict):
            raise ConfigError("options must be a JSON object")

    @property
    def p_values(self):
        return [float(p) for p in (self.p if isinstance(self.p, list) else [self.p])]

    def m_values(self, N, s=None):
        """Measurement counts for the cells at dimension N (and sparsity s)."""
        if isinstance(self.m, list):
            return [m for m in self.m if m <= N]
        if self.m["rule"] == "fraction":
            return [min(N, math.ceil(self.m["alpha"] * N))]
        return [min(N, rip_sample_complexity(max(s or 1, 1), N, self.m.get("C1", 2.0)))]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        if "campaign" not in data or "N" not in data:
            raise ConfigError("configuration needs 'campaign' and 'N'")
        return cls(**data)


def load_config(path, overrides=None):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if overrides:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _int_list(value, name, minimum):
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name} must be a non-empty list of integers")
    for v in value:
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            raise ConfigError(f"{name} entries must be integers >= {minimum}, got {v!r}")
    return list(value)
