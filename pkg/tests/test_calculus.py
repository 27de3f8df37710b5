import math

import numpy as np
import pytest

from bounds import j_closed
from calculus import (
    QuadratureConfig,
    default_battery,
    k_formula,
    kernel_M,
    kernel_mu,
    kernel_N,
    make_context,
    partition_of_unity,
    represent,
    run_checks,
)
from errors import DomainError, InadmissibleOperatorError, PoleInRegionError, QuadratureError
from estimator import random_laurent
from linalg import spectral_norm
from ratfun import RationalFunction, eval_matrix

EYE2 = np.eye(2, dtype=np.complex128)


@pytest.fixture
def identity_ctx():
    return make_context(EYE2, 2.0)


def test_kernel_examples(identity_ctx):
    assert np.allclose(kernel_mu(identity_ctx, 0.0, EYE2), 3.0 / (2.0 * math.pi) * EYE2)
    assert np.allclose(kernel_mu(identity_ctx, math.pi, EYE2), 1.0 / (6.0 * math.pi) * EYE2)
    assert np.allclose(kernel_M(identity_ctx, 0.0), 1.2 * math.pi * EYE2)
    assert np.allclose(kernel_M(identity_ctx, math.pi), 10.4719755 * EYE2, atol=1e-6)
    assert np.allclose(kernel_N(identity_ctx, 0.0), 2.9321531 * EYE2, atol=1e-6)
    assert np.allclose(kernel_N(identity_ctx, math.pi), 10.4719755 * EYE2, atol=1e-6)


def test_kernel_mu_rejects_large_argument(identity_ctx):
    with pytest.raises(InadmissibleOperatorError):
        kernel_mu(identity_ctx, 0.0, 2.0 * EYE2)


def test_kernel_mu_is_hermitian_psd(admissible):
    a, R = admissible
    ctx = make_context(a, R)
    for theta in np.linspace(0.0, 2.0 * math.pi, 17):
        for b in (ctx.a, ctx.a_inv):
            mu = kernel_mu(ctx, theta, b)
            assert np.allclose(mu, mu.conj().T, atol=1e-13)
            assert np.linalg.eigvalsh(mu).min() >= -1e-12


def test_make_context_rejects_inadmissible():
    with pytest.raises(InadmissibleOperatorError) as info:
        make_context(3.0 * EYE2, 2.0)
    assert info.value.norm == pytest.approx(3.0)
    with pytest.raises(InadmissibleOperatorError):
        make_context(np.diag([1.0, 0.25]), 2.0)
    with pytest.raises(InadmissibleOperatorError):
        make_context(np.diag([1.0, 0.0]), 2.0)
    with pytest.raises(DomainError):
        make_context(EYE2, 1.0)


def test_make_context_margin():
    with pytest.raises(InadmissibleOperatorError):
        make_context(2.0 * EYE2, 2.0)
    ctx = make_context(1.9 * EYE2, 2.0, margin=0.01)
    assert ctx.n == 2
    assert ctx.r == pytest.approx(0.5)


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(nodes=100)
    with pytest.raises(DomainError):
        QuadratureConfig(nodes=32)
    with pytest.raises(DomainError):
        QuadratureConfig(nodes=512, max_nodes=256)
    with pytest.raises(DomainError):
        QuadratureConfig(nodes=256, max_nodes=256)
    with pytest.raises(DomainError):
        QuadratureConfig(tol=0.0)
    assert QuadratureConfig(nodes=256, max_nodes=512).max_nodes == 512


def test_represent_examples(identity_ctx):
    a = np.diag([1.5, 0.8]).astype(np.complex128)
    ctx = make_context(a, 2.0)
    assert spectral_norm(represent(identity_ctx, RationalFunction.constant(1.0)) - EYE2) <= 1e-8
    assert spectral_norm(represent(ctx, RationalFunction.polynomial([0.0, 1.0])) - a) <= 1e-8
    assert spectral_norm(represent(ctx, RationalFunction.laurent([1.0], -1)) - np.linalg.inv(a)) <= 1e-8


def test_represent_matches_direct_evaluation(admissible, rng):
    a, R = admissible
    ctx = make_context(a, R)
    q = QuadratureConfig(tol=1e-9)
    for _ in range(3):
        f = random_laurent(3, R, rng)
        error = spectral_norm(represent(ctx, f, q) - eval_matrix(f, a))
        assert error <= 1e-7 * max(1.0, spectral_norm(eval_matrix(f, a)))


def test_represent_rejects_pole_in_annulus(identity_ctx):
    f = RationalFunction(np.array([1.0]), np.array([-1.5, 1.0]))
    with pytest.raises(PoleInRegionError):
        represent(identity_ctx, f)


def test_represent_reports_non_convergence(admissible):
    a, R = admissible
    ctx = make_context(a, R)
    with pytest.raises(QuadratureError) as info:
        represent(ctx, random_laurent(2, R, np.random.default_rng(0)),
                  QuadratureConfig(nodes=64, tol=1e-300, max_nodes=128))
    assert info.value.nodes == 128


def test_partition_of_unity(admissible):
    a, R = admissible
    outer, inner = partition_of_unity(make_context(a, R))
    assert outer <= 1e-10
    assert inner <= 1e-10


def test_k_formula_identity():
    assert k_formula(make_context(EYE2, 2.0)) == pytest.approx(3.0, abs=1e-8)
    rotated = np.exp(0.7j) * np.eye(3)
    assert k_formula(make_context(rotated, 2.0)) == pytest.approx(3.0, abs=1e-8)


def test_k_formula_below_envelope(admissible):
    a, R = admissible
    k = k_formula(make_context(a, R))
    assert 2.0 < k <= 2.0 + j_closed(R) + 1e-8


def test_default_battery_is_pole_free():
    R = 1.5
    names = [name for name, _ in default_battery(R)]
    assert names == ["one", "z", "inverse_z", "z2_plus_zm2", "two_pole_rational"]
    _, rational = default_battery(R)[-1]
    assert sorted(np.abs(rational.poles())) == pytest.approx([1.0 / (2.0 * R), 2.0 * R])


def test_run_checks_identity(identity_ctx):
    checks = run_checks(identity_ctx)
    names = [c.name for c in checks]
    assert names[:4] == ["partition_outer", "partition_inner", "mu_positivity", "domination"]
    assert names[-1] == "k_envelope"
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert checks[-1].residual == pytest.approx(3.0, abs=1e-8)


def test_run_checks_random(admissible):
    a, R = admissible
    checks = run_checks(make_context(a, R))
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
