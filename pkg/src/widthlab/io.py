"""Plain-text interchange formats for matrices and vectors.

Matrix CSV: a header line ``m,N`` followed by m rows of N comma-separated
numbers.  Vector files: a JSON array, or CSV lines ``i,value`` with 1-based
indices (an optional ``i,value`` header; missing indices are zero, the length
is the largest index unless given).
"""

import csv
import json

import numpy as np

from widthlab.exceptions import ConfigError


def read_matrix_csv(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"matrix file {path} is empty")
    try:
        m, N = (int(v) for v in rows[0])
        A = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"matrix file {path}: {exc}") from exc
    if A.shape != (m, N):
        raise ConfigError(f"matrix file {path}: header says {m}x{N}, body is {A.shape}")
    return A


def write_matrix_csv(path, A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(A.shape)
        for row in A:
            w.writerow([repr(float(v)) for v in row])


def read_vector(path, length=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read vector file {path}: {exc}") from exc
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            v = np.array(json.loads(stripped), dtype=float)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"vector file {path}: {exc}") from exc
        if v.ndim != 1:
            raise ConfigError(f"vector file {path} must hold a flat array")
        if length is not None and v.size != length:
            raise ConfigError(f"vector file {path} has length {v.size}, expected {length}")
        return v
    entries = []
    for r in csv.reader(stripped.splitlines()):
        if not r or r[0].strip().lower() == "i":
            continue
        try:
            entries.append((int(r[0]), float(r[1])))
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"vector file {path}: bad line {r!r}") from exc
    n = length if length is not None else max((i for i, _ in entries), default=0)
    v = np.zeros(n)
    for i, val in entries:
        if not 1 <= i <= n:
            raise ConfigError(f"vector file {path}: index {i} outside 1..{n}")
        v[i - 1] = val
    return v
