import numpy as np
import pytest

from conftest import random_unitary
from bounds import caratheodory_product, gamma_lower, lower_simple, thm1_upper
from errors import DomainError, InadmissibleOperatorError
from estimator import (
    check_admissible,
    complete_ratio,
    extremal_derivative,
    jordan_witness,
    maximize_ratio,
    random_admissible,
    random_laurent,
    random_matrix_function,
    ratio,
)
from linalg import spectral_norm
from ratfun import MatrixRationalFunction, RationalFunction, eval_scalar, sup_norm_annulus


@pytest.mark.parametrize("R", [1.01, 2.0, 10.0, 100.0])
def test_jordan_witness_norms(R):
    a = jordan_witness(R)
    assert a.shape == (2, 2)
    assert spectral_norm(a) == pytest.approx(R, rel=1e-12)
    assert spectral_norm(np.linalg.inv(a)) == pytest.approx(R, rel=1e-12)
    assert np.allclose(np.linalg.eigvals(a), [1.0, 1.0])


def test_jordan_witness_example(witness_2):
    assert np.allclose(witness_2, [[1.0, 1.5], [0.0, 1.0]])


def test_jordan_witness_domain():
    with pytest.raises(DomainError):
        jordan_witness(1.0)


def test_random_admissible_is_seeded():
    a = random_admissible(3, 2.0, 7)
    assert np.array_equal(a, random_admissible(3, 2.0, 7))
    assert not np.allclose(a, random_admissible(3, 2.0, 8))


@pytest.mark.parametrize("n,R", [(1, 1.5), (2, 1.2), (5, 3.0), (8, 10.0)])
def test_random_admissible_norms(n, R):
    for seed in range(5):
        a = random_admissible(n, R, seed)
        assert spectral_norm(a) <= (1.0 - 1e-3) * R * (1 + 1e-12)
        assert spectral_norm(np.linalg.inv(a)) <= R / (1.0 + 1e-3) * (1 + 1e-12)
        check_admissible(a, R)


def test_random_admissible_domain():
    with pytest.raises(DomainError):
        random_admissible(0, 2.0, 0)
    with pytest.raises(DomainError):
        random_admissible(2, 0.9, 0)


def test_check_admissible_rejects():
    with pytest.raises(InadmissibleOperatorError):
        check_admissible(3.0 * np.eye(2), 2.0)
    with pytest.raises(InadmissibleOperatorError):
        check_admissible(np.diag([1.0, 0.0]), 2.0)


def test_ratio_of_constant_and_identity_function(admissible):
    a, R = admissible
    result = ratio(a, R, RationalFunction.constant(2.5 - 1j), samples=256)
    assert result.ratio == pytest.approx(1.0, rel=1e-12)
    z = ratio(a, R, RationalFunction.polynomial([0.0, 1.0]), samples=256)
    assert z.ratio == pytest.approx(spectral_norm(a) / R, rel=1e-9)
    assert z.sampling_slack < 1e-6


def test_ratio_scale_invariance(admissible, rng):
    a, R = admissible
    f = random_laurent(3, R, rng)
    base = ratio(a, R, f, samples=256).ratio
    assert ratio(a, R, f.scale(-3.0 + 4.0j), samples=256).ratio == pytest.approx(base, rel=1e-9)


def test_ratio_of_zero_function():
    with pytest.raises(DomainError):
        ratio(np.eye(2), 2.0, RationalFunction.constant(0.0), samples=256)


def test_ratio_invariant_under_unitary_similarity(admissible, rng):
    a, R = admissible
    v = random_unitary(a.shape[0], rng)
    f = random_laurent(3, R, rng)
    base = ratio(a, R, f, samples=256).ratio
    assert ratio(v @ a @ v.conj().T, R, f, samples=256).ratio == pytest.approx(base, rel=1e-10)


def test_extremal_derivative_degree_one_matches_scan():
    R = 2.0
    result = extremal_derivative(R, 1, samples=256)
    # f = (z - 1) + t(1/z - 1) has f'(1) = 1 - t; scan the real parameter t
    best = 0.0
    for t in np.linspace(-3.0, 0.5, 351):
        f = RationalFunction.laurent([t, -1.0 - t, 1.0], -1)
        best = max(best, abs(1.0 - t) / sup_norm_annulus(f, R, 256))
    assert best == pytest.approx(2.0 / (R + 1.0 / R), rel=1e-9)
    assert 0.0 < result.value <= 2.0 / (R + 1.0 / R) + 1e-8
    assert result.value == pytest.approx(best, abs=1e-3)


def test_complete_ratio_on_diagonal_function(admissible, rng):
    a, R = admissible
    f = random_laurent(2, R, rng)
    zero = RationalFunction.constant(0.0)
    F = MatrixRationalFunction(((f, zero), (zero, f)))
    assert complete_ratio(a, R, F, samples=256) == pytest.approx(ratio(a, R, f, samples=256).ratio, rel=1e-9)


def test_complete_ratio_bounded_by_envelope(rng):
    R = 2.0
    for seed in range(3):
        a = random_admissible(2, R, seed)
        F = random_matrix_function(2, 3, R, rng)
        value = complete_ratio(a, R, F, samples=256)
        assert 0.0 < value <= thm1_upper(R)


def test_extremal_derivative_small_degree():
    result = extremal_derivative(2.0, 6, samples=256)
    assert 1.1 < result.value <= caratheodory_product(2.0) + 1e-3
    assert abs(eval_scalar(result.f, 1.0)) <= 1e-9
    assert sup_norm_annulus(result.f, 2.0, 4096) == pytest.approx(1.0, rel=1e-6)
    assert result.rounds >= 1


def test_extremal_derivative_domain():
    with pytest.raises(DomainError):
        extremal_derivative(2.0, 0)
    with pytest.raises(DomainError):
        extremal_derivative(2.0, 4, z0=3.0)
    with pytest.raises(DomainError):
        extremal_derivative(1.0, 4)


def test_maximize_ratio_identity():
    result = maximize_ratio(np.eye(2), 2.0, degree=3, budget=500)
    assert 0.999 <= result.ratio <= 1.0 + 1e-9
    assert result.evaluations <= 500


def test_maximize_ratio_witness_beats_simple_bound(witness_2):
    result = maximize_ratio(witness_2, 2.0, degree=6, budget=2000)
    assert result.ratio >= 1.6
    assert result.ratio <= thm1_upper(2.0)


def test_maximize_ratio_is_deterministic():
    a = random_admissible(2, 1.5, 3)
    first = maximize_ratio(a, 1.5, degree=3, budget=300, seed=5)
    second = maximize_ratio(a, 1.5, degree=3, budget=300, seed=5)
    assert first.ratio == second.ratio
    assert np.array_equal(first.f.numerator, second.f.numerator)


def test_maximize_ratio_nondecreasing_in_budget():
    a = random_admissible(3, 1.5, 21)
    values = [maximize_ratio(a, 1.5, degree=3, budget=b, seed=2).ratio for b in (300, 1200, 4800)]
    for low, high in zip(values, values[1:]):
        assert high >= low * (1.0 - 1e-4)


def test_maximize_ratio_counts_start_construction(witness_2):
    result = maximize_ratio(witness_2, 2.0, degree=4, budget=1000)
    assert result.evaluations <= 1000
    # at least t₀ times the degree-1 extremal value 2/(R + 1/R)
    assert result.ratio >= 1.19


def test_maximize_ratio_rejects_bad_arguments(witness_2):
    with pytest.raises(InadmissibleOperatorError):
        maximize_ratio(3.0 * np.eye(2), 2.0, degree=2, budget=10)
    with pytest.raises(DomainError):
        maximize_ratio(witness_2, 2.0, degree=2, budget=0)


@pytest.fixture(scope="module")
def witness_search():
    return maximize_ratio(jordan_witness(2.0), 2.0, degree=16, budget=200_000)


@pytest.fixture(scope="module")
def extremal_12():
    return extremal_derivative(2.0, 12, samples=2048)


@pytest.mark.slow
def test_witness_estimate_reaches_gamma(witness_search):
    R = 2.0
    assert witness_search.ratio >= 1.66
    assert lower_simple(R) < witness_search.ratio <= thm1_upper(R)
    assert witness_search.ratio == pytest.approx(gamma_lower(R), abs=2e-2)


@pytest.mark.slow
def test_extremal_derivative_converges_to_product(extremal_12):
    assert extremal_12.converged
    assert 1.118 <= extremal_12.value <= 1.134425


@pytest.mark.slow
def test_witness_search_dominates_scaled_extremal(witness_search, extremal_12):
    t0 = 2.0 - 1.0 / 2.0
    assert t0 * extremal_12.value <= witness_search.ratio + 5e-3
