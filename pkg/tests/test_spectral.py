import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import subsets
from regtower.errors import CapacityError, InputError, NumericalError
from regtower.spectral import (
    blow_up,
    format_matrix,
    mixing_report,
    mixing_violations,
    parse_matrix,
    top_singular_value,
    trace_m2_bound,
)


def charpoly_top_eigenvalue(S):
    """Largest eigenvalue of a symmetric matrix via Faddeev-LeVerrier coefficients."""
    n = S.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(S)
    for k in range(1, n + 1):
        M = S @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(S @ M) / k)
    return max(r.real for r in np.roots(coeffs))


def test_diagonal():
    assert top_singular_value(np.diag([3.0, 4.0])) == pytest.approx(4.0, abs=1e-10)


@pytest.mark.parametrize("n,c", [(1, 2.0), (5, 0.3), (7, -1.5)])
def test_constant_matrix(n, c):
    assert top_singular_value(np.full((n, n), c)) == pytest.approx(n * abs(c), rel=1e-10)


def test_zero_matrix():
    assert top_singular_value(np.zeros((3, 5))) == 0.0


def test_random_4x4_against_characteristic_polynomial(rng):
    for _ in range(50):
        A = rng.uniform(-1, 1, (4, 4))
        expected = math.sqrt(charpoly_top_eigenvalue(A.T @ A))
        assert abs(top_singular_value(A) - expected) <= 1e-8


def test_transpose_invariance(rng):
    for shape in [(3, 7), (10, 4), (6, 6)]:
        A = rng.standard_normal(shape)
        assert top_singular_value(A.T) == pytest.approx(top_singular_value(A), rel=1e-9)


def test_power_iteration_on_larger_matrix(rng):
    A = rng.standard_normal((120, 90))
    assert top_singular_value(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-9)


def test_non_convergence_reports_bracket(rng):
    A = np.diag(np.linspace(1.0, 1.0 + 1e-6, 80))
    A[0, 0] = 1.0 + 1e-6 - 1e-12
    with pytest.raises(NumericalError) as info:
        top_singular_value(A, tol=1e-15, max_iter=3)
    lo, hi = info.value.bracket
    assert lo <= hi


def test_deterministic(rng):
    A = rng.standard_normal((30, 30))
    assert top_singular_value(A) == top_singular_value(A.copy())


def test_bad_input():
    with pytest.raises(InputError):
        top_singular_value([[np.inf]])
    with pytest.raises(InputError):
        top_singular_value([[1.0]], tol=0)


def test_mixing_identity_equality():
    rep = mixing_report(np.eye(2), [0, 1], [0])
    assert rep.lhs1 == pytest.approx(1.0) and rep.rhs1 == pytest.approx(1.0)


def test_mixing_constant_matrix():
    n, a = 5, 0.4
    C = [0, 2, 3]
    rep = mixing_report(np.full((n, n), a), [1, 2], C)
    assert rep.lhs1 == pytest.approx(n * a * a * len(C) ** 2)
    assert rep.lhs1 <= rep.rhs1 + 1e-12
    assert rep.lhs2 == pytest.approx(2 * 3 * a)


def test_mixing_report_against_loops(rng):
    A = rng.uniform(-1, 1, (5, 6))
    B, C = [0, 3], [1, 2, 5]
    lam = np.linalg.norm(A, 2)
    rep = mixing_report(A, B, C)
    dC = [sum(A[v, w] for w in C) for v in range(5)]
    assert rep.lhs1 == pytest.approx(sum(d * d for d in dC))
    assert rep.rhs1 == pytest.approx(lam * lam * 3)
    assert rep.lhs2 == pytest.approx(abs(sum(A[v, w] for v in B for w in C)))
    assert rep.rhs2 == pytest.approx(lam * math.sqrt(6))


def test_mixing_violations_match_loop_oracle(rng):
    for _ in range(5):
        A = rng.uniform(-1, 1, (4, 5))
        lam = top_singular_value(A)
        bad1 = bad2 = 0
        for C in subsets(range(5)):
            d = A[:, list(C)].sum(axis=1) if C else np.zeros(4)
            bad1 += float(d @ d) > lam * lam * len(C) + 1e-8
            for B in subsets(range(4)):
                e = abs(d[list(B)].sum()) if B else 0.0
                bad2 += e > lam * math.sqrt(len(B) * len(C)) + 1e-8
        assert mixing_violations(A, lam=lam) == (bad1, bad2) == (0, 0)
        # a deliberately small lambda must be caught by both counts
        v1, v2 = mixing_violations(A, lam=lam / 2)
        assert v1 > 0 and v2 > 0


def test_mixing_violations_cap():
    with pytest.raises(CapacityError):
        mixing_violations(np.ones((15, 2)))


def test_blow_up_examples():
    assert np.array_equal(blow_up([[1.0]], 2), np.ones((2, 2)))
    A = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(blow_up(A, 1), A)
    s = np.linalg.svd(blow_up(np.eye(2), 2), compute_uv=False)
    assert np.allclose(np.sort(s), [0, 0, 2, 2])


def test_blow_up_guards():
    with pytest.raises(InputError):
        blow_up(np.eye(2), 0)
    with pytest.raises(CapacityError):
        blow_up(np.eye(4), 10, max_entries=100)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.integers(1, 6), c=st.integers(1, 6), k=st.integers(1, 4))
def test_blow_up_law(seed, r, c, k):
    A = np.random.default_rng(seed).uniform(-1, 1, (r, c))
    lam = top_singular_value(A)
    assert abs(top_singular_value(blow_up(A, k)) - k * lam) <= 1e-8 * k * max(lam, 1.0)


def test_trace_bound_examples():
    tr, l4 = trace_m2_bound(np.diag([2.0, 1.0]))
    assert tr == pytest.approx(17.0) and l4 == pytest.approx(16.0)
    assert trace_m2_bound(np.zeros((3, 3))) == (0.0, 0.0)
    with pytest.raises(InputError):
        trace_m2_bound(np.ones((2, 3)))


def test_trace_bound_random(rng):
    for _ in range(200):
        tr, l4 = trace_m2_bound(rng.uniform(-1, 1, (6, 6)))
        assert tr >= l4 - 1e-8


def test_matrix_text_round_trip(rng):
    A = rng.standard_normal((3, 4))
    text = format_matrix(A)
    assert text.startswith("mat 3 4\n")
    assert np.array_equal(parse_matrix(text), A)
    with pytest.raises(InputError):
        parse_matrix("mat 2 2\n1 2\n")
