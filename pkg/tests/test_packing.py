import itertools
import math

import pytest

from widthlab.exceptions import DomainError
from widthlab.packing import (
    PackingFamily,
    check_packing,
    elimination_bound,
    greedy_packing,
    intersection_profile,
    max_overlap,
    packing_size_bound,
)


def naive_greedy(N, s):
    """First-fit over all s-subsets in lexicographic order."""
    chosen = []
    for c in itertools.combinations(range(1, N + 1), s):
        if all(len(set(c) & set(d)) < s / 2 for d in chosen):
            chosen.append(c)
    return chosen


def test_examples():
    assert greedy_packing(4, 2).sets == [(1, 2), (3, 4)]
    fam = greedy_packing(16, 2)
    assert len(fam) == 8 and all(len(set(a) & set(b)) == 0
                                 for a, b in itertools.combinations(fam.sets, 2))
    fam = greedy_packing(64, 4)
    assert check_packing(fam).ok and len(fam) >= 16


def test_bound_examples():
    assert packing_size_bound(16, 2) == pytest.approx(2)
    assert packing_size_bound(12, 3) == pytest.approx(1)
    assert packing_size_bound(64, 4) == pytest.approx(16)
    with pytest.raises(DomainError):
        packing_size_bound(4, 4)


def test_check_packing_examples():
    assert not check_packing(PackingFamily(3, 2, [(1, 2), (2, 3)])).intersections_ok
    single = check_packing(PackingFamily(5, 2, [(1, 4)]))
    assert single.sizes_ok and single.intersections_ok
    bad = check_packing(PackingFamily(5, 2, [(1, 2, 3)]))
    assert not bad.sizes_ok
    assert not check_packing(PackingFamily(5, 2, [(1, 9)])).sizes_ok


@pytest.mark.parametrize("N,s", [(N, s) for N in range(4, 13) for s in range(1, 5) if s < N])
def test_matches_naive_greedy(N, s):
    assert greedy_packing(N, s).sets == naive_greedy(N, s)


def test_odd_s_threshold():
    assert max_overlap(3) == 1 and max_overlap(4) == 1 and max_overlap(5) == 2
    fam = greedy_packing(10, 3)
    prof = intersection_profile(fam.sets)
    assert max(prof[i][j] for i in range(len(fam)) for j in range(len(fam)) if i != j) <= 1


@pytest.mark.parametrize("N", [8, 12, 16, 20, 24])
@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_elimination_count(N, s):
    remaining = set(itertools.combinations(range(1, N + 1), s))
    bound = elimination_bound(N, s)
    steps = 0
    while remaining:
        I = min(remaining)
        removed = {J for J in remaining if len(set(I) & set(J)) >= s / 2}
        assert I in removed and len(removed) <= bound
        remaining -= removed
        steps += 1
    assert steps == len(greedy_packing(N, s))
    assert steps >= math.comb(N, s) / bound


@pytest.mark.parametrize("N", [8, 16, 32, 64])
@pytest.mark.parametrize("s", [2, 3, 4])
def test_size_bound_when_s_small(N, s):
    if s > N / 4:
        fam = greedy_packing(N, s)
        assert len(fam) >= 1 and check_packing(fam).sizes_ok
        return
    fam = greedy_packing(N, s)
    rep = check_packing(fam)
    assert rep.ok and len(fam) >= packing_size_bound(N, s)


def test_deterministic_and_json_roundtrip():
    a, b = greedy_packing(20, 3), greedy_packing(20, 3)
    assert a == b
    assert PackingFamily.from_json(a.to_json()) == a


def test_rejects_bad_sizes():
    with pytest.raises(DomainError):
        greedy_packing(4, 4)
    with pytest.raises(DomainError):
        greedy_packing(4, 0)
