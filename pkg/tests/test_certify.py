import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from widthlab.certify import (
    check_nsp,
    concentration_ratio,
    max_signed_mass,
    norm_preservation_check,
    nsp_counterexample,
    quotient_norm,
    rip_constant,
    sign_patterns,
)
from widthlab.core import lp_quasinorm
from widthlab.exceptions import BudgetExceededError, DomainError
from widthlab.linalg import gaussian_matrix, kernel_basis
from widthlab.packing import greedy_packing

H = 1 / math.sqrt(2)
A23 = np.array([[1.0, 0, 1], [0, 1, 1]])


def test_rip_examples():
    assert rip_constant(np.eye(4), 3).delta == pytest.approx(0, abs=1e-12)
    assert rip_constant([[1.0, 1.0]], 1).delta == pytest.approx(0, abs=1e-12)
    assert rip_constant([[1.0, 1.0]], 2).delta == pytest.approx(1, abs=1e-10)
    est = rip_constant([[1.0, 0, H], [0, 1, H]], 2)
    assert est.delta == pytest.approx(H, abs=1e-10)
    assert est.support == (0, 2) and est.supports_examined == 3
    assert est.to_dict()["support"] == [1, 3]


def test_rip_budget_and_domain():
    with pytest.raises(BudgetExceededError) as e:
        rip_constant(gaussian_matrix(5, 30, 0), 5, budget=1000)
    assert e.value.required == math.comb(30, 5)
    with pytest.raises(DomainError):
        rip_constant(A23, 4)
    with pytest.raises(DomainError):
        rip_constant(A23, 1, method="other")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 7))
def test_rip_monotone_and_sampled_below(seed, m):
    A = gaussian_matrix(m, 9, seed)
    deltas = [rip_constant(A, s).delta for s in range(1, 6)]
    assert all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:]))
    for s in (1, 2, 3):
        assert rip_constant(A, s, "sampled", n_samples=40, seed=seed).delta <= deltas[s - 1] + 1e-12


def test_sampled_equals_exhaustive_when_witness_sampled():
    A = gaussian_matrix(3, 5, 1)
    # 400 draws from the 10 pairs include every pair
    assert rip_constant(A, 2, "sampled", n_samples=400).delta == pytest.approx(rip_constant(A, 2).delta)


def test_nsp_examples():
    rep = check_nsp(np.eye(3), 1)
    assert rep.holds and rep.worst_ratio == 0
    rep = check_nsp([[1.0, 1.0]], 1)
    assert not rep.holds and rep.boundary and rep.worst_ratio == pytest.approx(0.5)
    rep = check_nsp(A23, 1)
    assert rep.holds and rep.certified and rep.worst_ratio == pytest.approx(1 / 3)
    rep = check_nsp(A23, 1, method="oracle-equivalence")
    assert rep.holds and rep.worst_ratio == pytest.approx(1 / 3)


def test_nsp_domain_and_budget():
    with pytest.raises(DomainError):
        check_nsp(A23, 1, 0.5, "exact-l1")
    with pytest.raises(DomainError):
        check_nsp(A23, 3)
    with pytest.raises(BudgetExceededError):
        check_nsp(gaussian_matrix(8, 16, 0), 3, budget=100)


def test_sign_patterns_half():
    pats = [tuple(p) for p in sign_patterns(3)]
    # one representative per +-pair
    assert len(pats) == 4
    assert all(p[0] == 1 for p in pats)


def test_max_signed_mass_lp():
    A = gaussian_matrix(4, 8, 2)
    v = max_signed_mass(A, (0, 3), np.array([1.0, -1.0]))
    assert np.allclose(A @ v, 0, atol=1e-9) and np.sum(np.abs(v)) <= 1 + 1e-9
    ratio = v[0] - v[3]
    # no kernel basis combination beats the LP value
    V = kernel_basis(A)
    g = np.random.default_rng(0).standard_normal((V.shape[1], 2000))
    W = V @ g
    W /= np.sum(np.abs(W), axis=0)
    assert np.max(W[0] - W[3]) <= ratio + 1e-9


def test_exact_and_oracle_and_heuristic_agree():
    for seed in range(6):
        A = gaussian_matrix(4, 9, seed)
        for s in (1, 2):
            a = check_nsp(A, s, 1.0, "exact-l1")
            b = check_nsp(A, s, 1.0, "oracle-equivalence")
            h = check_nsp(A, s, 1.0, "heuristic", seed=seed)
            assert a.holds == b.holds
            assert h.worst_ratio <= a.worst_ratio + 1e-9
            if not h.holds:
                assert h.certified and not a.holds
            for rep in (a, b, h):
                if not rep.holds and rep.witness is not None:
                    assert nsp_counterexample(A, rep)[2]


def test_heuristic_refutes_when_far_from_nsp():
    A = gaussian_matrix(3, 12, 5)
    h = check_nsp(A, 2, 0.5, "heuristic", seed=1)
    assert not h.holds and h.certified
    x, z, ok = nsp_counterexample(A, h)
    assert ok and np.allclose(A @ x, A @ z)


def test_concentration_ratio():
    r, S = concentration_ratio([3.0, -1.0, 0.0, 2.0], 2, 1.0)
    assert r == pytest.approx(5 / 6) and S == (0, 3)


def test_quotient_norm_examples():
    v = quotient_norm([[1.0, 1.0]], [1.0, 0.0], 1).value
    assert v == pytest.approx(1)
    assert quotient_norm(A23, [1.0, 1.0, -1.0], 1).value == pytest.approx(0, abs=1e-9)
    x = np.array([0.5, -2.0, 1.0])
    assert quotient_norm(np.eye(3), x, 0.5).value == pytest.approx(lp_quasinorm(x, 0.5))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 1.0]))
def test_quotient_norm_below_norm(seed, p):
    A = gaussian_matrix(3, 7, seed)
    x = np.random.default_rng(seed).standard_normal(7)
    assert quotient_norm(A, x, p).value <= lp_quasinorm(x, p) * (1 + 1e-12)


def test_norm_preservation():
    fam = greedy_packing(8, 2)
    rep = norm_preservation_check(np.eye(8), fam, 1.0)
    assert rep.ok and rep.pairs == len(fam) * (len(fam) - 1) // 2
    broken = np.ones((1, 8))
    rep = norm_preservation_check(broken, fam, 1.0)
    assert rep.violations and not rep.ok
