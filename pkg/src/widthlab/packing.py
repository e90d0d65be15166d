"""Families of s-subsets of [N] with pairwise intersections below s/2.

The greedy construction repeatedly takes the lexicographically smallest
s-subset that is still admissible and discards everything that meets it in
s/2 or more elements.  Instead of materializing all C(N, s) subsets, the
lexicographic tree is walked depth first while tracking, for every chosen
set, how many elements the current prefix shares with it; a prefix whose
overlap with some chosen set already exceeds the threshold cannot be
completed and its subtree is skipped.  The walk visits candidates in exactly
the greedy order, so the result equals the naive procedure.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from widthlab.exceptions import DomainError


@dataclass
class PackingFamily:
    """Sets are stored as sorted tuples of 1-based indices."""

    N: int
    s: int
    sets: list

    def to_json(self):
        return json.dumps({"N": self.N, "s": self.s, "sets": [list(c) for c in self.sets]})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(int(d["N"]), int(d["s"]), [tuple(sorted(int(i) for i in c)) for c in d["sets"]])

    def __len__(self):
        return len(self.sets)


@dataclass
class PackingReport:
    sizes_ok: bool
    intersections_ok: bool
    large_ok: bool
    size: int
    bound: float
    violation: tuple = None  # first offending pair for (ii), or offending set for (i)

    @property
    def ok(self):
        return self.sizes_ok and self.intersections_ok and self.large_ok


def max_overlap(s):
    """Largest admissible |I & J|: strict |I & J| < s/2."""
    return math.ceil(s / 2) - 1


def packing_size_bound(N, s):
    """(N / (4s))^(s/2)."""
    if not 1 <= s < N:
        raise DomainError(f"need 1 <= s < N, got s={s}, N={N}")
    return (N / (4 * s)) ** (s / 2)


def greedy_packing(N, s):
    N, s = int(N), int(s)
    if s < 1 or s >= N:
        raise DomainError(f"need 1 <= s < N, got s={s}, N={N}")
    t = max_overlap(s)
    chosen = np.zeros((16, N), dtype=np.int16)  # indicator rows, grown on demand
    n_chosen = 0
    sets = []

    # iterative DFS; counts[d] holds overlaps of the depth-d prefix with chosen sets
    prefix = []
    counts = [np.zeros(0, dtype=np.int16)]
    nxt = 0
    while True:
        depth = len(prefix)
        if depth == s:
            sets.append(tuple(i + 1 for i in prefix))
            if n_chosen == chosen.shape[0]:
                chosen = np.vstack([chosen, np.zeros_like(chosen)])
            chosen[n_chosen, prefix] = 1
            n_chosen += 1
            # refresh stored prefix overlaps with the new set
            for d in range(len(counts)):
                c = np.zeros(n_chosen, dtype=np.int16)
                c[: counts[d].size] = counts[d]
                c[-1] = d
                counts[d] = c
            nxt = prefix.pop() + 1
            counts.pop()
            continue
        # first extension e >= nxt keeping every overlap <= t and leaving room
        limit = N - (s - depth) + 1
        base = counts[depth]
        found = None
        if nxt < limit:
            if n_chosen == 0 or base.size == 0:
                found = nxt
            else:
                ok = (base[:, None] + chosen[:n_chosen, nxt:limit]).max(axis=0) <= t
                hits = np.flatnonzero(ok)
                if hits.size:
                    found = nxt + int(hits[0])
        if found is None:
            if not prefix:
                break
            nxt = prefix.pop() + 1
            counts.pop()
            continue
        prefix.append(found)
        counts.append(base + chosen[:n_chosen, found] if n_chosen else base)
        nxt = found + 1
    return PackingFamily(N, s, sets)


def intersection_profile(sets):
    """Pairwise intersection sizes as a dense matrix."""
    return [[len(set(a) & set(b)) for b in sets] for a in sets]


def check_packing(family):
    """Check properties (i) exact size, (ii) overlaps < s/2, (iii) size bound."""
    N, s, sets = family.N, family.s, family.sets
    for c in sets:
        if len(set(c)) != s or not all(1 <= i <= N for i in c):
            bound = packing_size_bound(N, s) if 1 <= s < N else math.nan
            return PackingReport(False, False, len(sets) >= bound, len(sets), bound, (tuple(c),))
    violation = None
    members = [set(c) for c in sets]
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            if len(members[a] & members[b]) >= s / 2:
                violation = (tuple(sets[a]), tuple(sets[b]))
                break
        if violation:
            break
    bound = packing_size_bound(N, s)
    return PackingReport(True, violation is None, len(sets) >= bound, len(sets), bound, violation)


def elimination_bound(N, s):
    """2^s * C(N - s, floor(s/2)): sets discarded per greedy step, at most."""
    return 2**s * math.comb(N - s, s // 2)
