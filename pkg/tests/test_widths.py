import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from widthlab.certify import check_nsp, rip_constant
from widthlab.core import lp_quasinorm
from widthlab.exceptions import DomainError
from widthlab.linalg import gaussian_matrix, orthonormal_rows_matrix
from widthlab.packing import greedy_packing
from widthlab.solvers import stability_constant
from widthlab.widths import (
    C1_LOG9,
    case_split_constant,
    certified_width_upper,
    contradiction_replay,
    em_recovery_error,
    empirical_width_lower,
    interpolated_upper,
    linf_kernel_bound,
    lower_bound_constants,
    min_measurements_lp,
    rate_band,
    rip_sample_complexity,
    sandwich_constants,
    stability_constants,
    stability_min_measurements,
    upper_proof_case,
    upper_proof_constants,
    weak_ball_lq_constant,
    weak_to_strong_constant,
    width_estimate,
)


def test_rate_examples():
    assert rate_band(1024, 64, 1, 2).rate == pytest.approx(((math.log(16) + 1) / 64) ** 0.5)
    assert rate_band(1024, 64, 1, 2).rate == pytest.approx(0.2428, abs=1e-4)
    assert rate_band(10, 3, 1, 2).vybiral == pytest.approx(0.5)
    assert rate_band(4, 1, 0.5, 1).rate == 1.0
    band = rate_band(100, 10, 1, 4)
    assert band.q_gt_2_upper is not None and band.q_gt_2_comparison == pytest.approx(10**-0.5)
    with pytest.raises(DomainError):
        rate_band(10, 10, 1, 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5000), st.data(), st.floats(0.05, 1.0), st.floats(1.01, 5.0))
def test_rate_band_properties(N, data, p, ratio):
    m = data.draw(st.integers(1, N - 1))
    q = min(p * ratio, 2.0) if p * ratio > p else 2.0
    if not q > p:
        q = 2.0
    b = rate_band(N, m, p, q)
    assert 0 < b.rate <= 1 and 0 < b.vybiral <= 1
    # ln(N/m) + 1 and ln(eN/m) agree
    assert b.alt_rate == pytest.approx(b.rate, rel=1e-12)


def test_lower_constants():
    c = lower_bound_constants(1, 2)
    assert c.c1 == pytest.approx(1 / math.log(9)) and abs(c.c1 - 0.455) <= 1e-3
    assert abs(c.d - 0.204) <= 1e-3
    assert c.c == pytest.approx(0.5**1.5) and c.c2 == 4
    assert c.c_pq == pytest.approx(c.c * c.d**0.5)
    assert lower_bound_constants(0.5, 2).d == pytest.approx(0.5 * 2 * C1_LOG9 / (4 + C1_LOG9))


def test_min_measurements_examples():
    assert min_measurements_lp(4, 1024, 1) == 8
    assert min_measurements_lp(16, 1024, 1) == 32
    assert min_measurements_lp(5, 1000, 1e-3) == 10
    with pytest.raises(DomainError):
        min_measurements_lp(8, 16, 1)


def test_stability_examples():
    c, cp = stability_constants(1)
    assert c == pytest.approx(1 / (2 * math.log(5)))
    assert c == pytest.approx(0.3107, abs=1e-4)
    assert cp == pytest.approx(2 * c / (2 + c * math.log(4 * math.e)))
    # ceil(C' p s ln(eN/s)) with ln(e 1024 / 4) = ln(256 e)
    assert stability_min_measurements(4, 1024, 1, 1) == math.ceil(cp * 4 * math.log(256 * math.e)) == 6
    assert stability_constants(1e12)[1] < 0.03


def test_rip_sample_complexity():
    assert rip_sample_complexity(4, 256, 2) == 42
    assert rip_sample_complexity(10, 10, 2) == 20
    prev = 0
    for s in range(1, 30):
        v = rip_sample_complexity(s, 100, 2)
        assert v >= prev
        prev = v


def test_case_split_constant():
    for C1 in (0.5, 1, 2, 5):
        D = case_split_constant(C1)
        u = D / 2
        assert u > math.e and u / (1 + math.log(u)) > C1
        # minimality up to the tiny margin
        v = u * (1 - 1e-9)
        assert v <= math.e or v / (1 + math.log(v)) <= C1 + 1e-9
    assert upper_proof_case(10_000, 4000, C1=1).case == 1
    assert upper_proof_case(1000, 20, C1=2).case == 2
    case = upper_proof_case(10_000, 4000, C1=1)
    L = case.D * math.log(math.e * 10_000 / 4000)
    assert case.s < 4000 / L <= case.s + 1


def test_upper_constants():
    k = upper_proof_constants(0.5, 2)
    assert k["r"] == 1 and k["C_double_prime"] == pytest.approx(
        k["C_stable"] * weak_to_strong_constant(0.5, 1) * 2 ** (1 + 0.5 + 2 - 0.5))
    assert k["C_triple_prime"] == pytest.approx(weak_ball_lq_constant(0.5, 2))
    assert math.isinf(upper_proof_constants(1, 2)["C_double_prime"])
    N = 4000
    assert weak_ball_lq_constant(0.5, 2, N) <= weak_ball_lq_constant(0.5, 2)


def test_empirical_examples():
    e = empirical_width_lower([[1.0, 1.0]], 1, 2)
    assert e.empirical_lower == pytest.approx(1 / math.sqrt(2))
    assert lp_quasinorm(e.witness, 1) == pytest.approx(1)
    e = empirical_width_lower(np.zeros((2, 5)), 0.5, 2)
    assert e.empirical_lower == pytest.approx(1)
    with pytest.raises(DomainError):
        empirical_width_lower(np.eye(3), 1, 2)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(12, 4), (16, 6), (20, 5)]), st.sampled_from([0.5, 1.0]))
def test_lower_upper_and_floor(seed, dims, p):
    N, m = dims
    A = gaussian_matrix(m, N, seed)
    est = width_estimate(A, p, 2, budget=8, seed=seed)
    assert est.empirical_lower <= 1 + 1e-12
    assert est.empirical_lower <= est.certified_upper * (1 + 1e-9)
    assert est.empirical_lower >= rate_band(N, m, p, 2).vybiral - 1e-6
    v = est.witness
    assert np.linalg.norm(A @ v) <= 1e-8
    assert lp_quasinorm(v, 2) / lp_quasinorm(v, p) == pytest.approx(est.empirical_lower)


def test_linf_bound_against_scipy():
    A = gaussian_matrix(4, 10, 3)
    rho, _ = linf_kernel_bound(A)
    best = 0.0
    for i in range(10):
        # max v_i s.t. Av = 0, ||v||_1 <= 1 with v = a - b
        c = np.zeros(20)
        c[i], c[10 + i] = -1, 1
        res = linprog(c, A_ub=np.ones((1, 20)), b_ub=[1], A_eq=np.hstack([A, -A]),
                      b_eq=np.zeros(4), bounds=(0, None), method="highs")
        best = max(best, -res.fun)
    assert rho == pytest.approx(best, rel=1e-8)


def test_interpolated_upper():
    assert interpolated_upper(1.0, 1.0, 2.0, 10) == pytest.approx(1)
    # flat vector with k = 1/rho entries of size rho
    assert interpolated_upper(0.25, 1.0, 2.0, 10) == pytest.approx(0.5)
    assert interpolated_upper(0.25, 1.0, 2.0, 2) == pytest.approx(math.sqrt(2) * 0.25)
    assert interpolated_upper(0.3, 0.5, math.inf, 10) == pytest.approx(0.3)


def _certified_matrix():
    for k in range(300):
        A = orthonormal_rows_matrix(11, 12, k)
        d = rip_constant(A, 2).delta
        if d < math.sqrt(2) - 1:
            return A, d
    pytest.fail("no qualifying matrix")


def test_chain_assembly():
    A, d = _certified_matrix()
    est = certified_width_upper(A, 1.0, 2.0, 1)
    # 2^(1/r) sqrt((1+d)/(1-d)) s^-(1/r-1/q) C(d)^(1/r) s^-(1/p-1/r) at p = r = 1, q = 2, s = 1
    expected = 2 * math.sqrt((1 + d) / (1 - d)) * stability_constant(d)
    assert est.certified_upper == pytest.approx(expected)
    assert est.diagnostics["delta_2s"] == pytest.approx(d)
    lower = empirical_width_lower(A, 1.0, 2.0, budget=8)
    assert lower.empirical_lower <= est.certified_upper
    with pytest.raises(DomainError):
        certified_width_upper(np.eye(4), 1, 2, 1)
    with pytest.raises(DomainError):
        certified_width_upper(gaussian_matrix(3, 10, 0), 1, 2, 1)
    with pytest.raises(DomainError):
        certified_width_upper(A, 1, 3, 1)


def test_em_examples():
    A = np.eye(6)
    for sampler in ("ball-lp", "weak-ball"):
        assert em_recovery_error(A, "l1", sampler, 2, trials=5).value == pytest.approx(0, abs=1e-9)
    Z = np.zeros((2, 8))
    em = em_recovery_error(Z, "l1", "weak-ball", 2, trials=5, p=0.5, method_p=None)
    assert em.value <= weak_ball_lq_constant(0.5, 2) + 1e-12
    assert em.value == pytest.approx(lp_quasinorm(em.worst, 2))
    fam = greedy_packing(12, 1)
    A = gaussian_matrix(6, 12, 0)
    assert check_nsp(A, 1).holds
    em = em_recovery_error(A, "l1", "packing-vectors", 2, family=fam)
    assert em.value <= 1e-9 and em.samples == len(fam)
    assert sandwich_constants("weak-ball", 0.5, 2) == (2**3, 1.0)
    assert sandwich_constants("ball-lp", 1, 0.5) == (2, 2.0)


def test_sandwich_consistency():
    for seed in range(4):
        A = gaussian_matrix(5, 12, seed)
        for p in (0.5, 1.0):
            method, mp = ("l1", None) if p == 1 else ("exact", p)
            est = width_estimate(A, p, 2, budget=8, seed=seed)
            em = em_recovery_error(A, method, "ball-lp", 2, trials=10, seed=seed, p=p, method_p=mp,
                                   extra_samples=[est.witness])
            assert em.value <= em.C1 * est.certified_upper * (1 + 1e-9)
            # the witness v has v and 0 sharing measurements, so E_m sees ||v||_q / 2^(1/p) at least
            assert est.empirical_lower <= em.C2 * em.C1 * em.value * (1 + 1e-9)


def test_min_measurements_consistency():
    for seed in range(8):
        A = gaussian_matrix(6, 12, seed)
        for s in (1, 2):
            if check_nsp(A, 2 * s, 1.0, "oracle-equivalence").holds if 2 * s < 12 else False:
                assert 6 >= min_measurements_lp(s, 12, 1.0)


def test_contradiction_replay():
    A = gaussian_matrix(6, 12, 1)
    est = empirical_width_lower(A, 1.0, 2.0, budget=8)
    out = contradiction_replay(A, 1.0, 2.0, [est.empirical_lower])
    assert not out["review"]
    out = contradiction_replay(A, 1.0, 2.0, [0.0])
    assert out["all_below"] and out["order"] == 2 * math.floor(1 / out["mu"])
    assert not out["review"]
