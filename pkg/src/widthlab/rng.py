"""Counter-based deterministic random streams.

Every random object in the package is drawn from a Philox stream whose key is
a hash of ``(seed, *labels)``.  The position inside the stream plays the role
of the counter, so a stream depends only on its key and never on the order in
which other streams were consumed.  Gaussian variates are produced with the
Box-Muller transform from pairs of uniforms, which keeps the values a fixed
function of the uniform stream (numpy's ziggurat sampler is not used).
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(seed, *labels):
    """128-bit integer key for the stream identified by seed and labels."""
    text = repr((int(seed),) + tuple(labels)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=16).digest(), "little")


def derive_seed(seed, *labels):
    """Derive a child seed (a non-negative 63-bit int) from a parent seed."""
    return stream_key(seed, "derive", *labels) & (_MASK64 >> 1)


def stream(seed, *labels):
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *labels)))


def uniforms(seed, labels, n):
    """``n`` uniforms on [0, 1) from the stream keyed by ``(seed, *labels)``."""
    return stream(seed, *labels).random(n)


def gaussians(seed, labels, n):
    """``n`` standard normal variates via Box-Muller."""
    n_pairs = (n + 1) // 2
    u = uniforms(seed, labels, 2 * n_pairs)
    radius = np.sqrt(-2.0 * np.log(1.0 - u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * n_pairs)
    out[0::2] = radius * np.cos(theta)
    out[1::2] = radius * np.sin(theta)
    return out[:n]


def permutation(seed, labels, n):
    """Random permutation of range(n) by sorting uniform keys."""
    return np.argsort(uniforms(seed, labels, n), kind="stable")


def signs(seed, labels, n):
    return np.where(uniforms(seed, labels, n) < 0.5, -1.0, 1.0)


def subset(seed, labels, n, k):
    """Sorted random k-subset of range(n)."""
    return np.sort(permutation(seed, labels, n)[:k])
