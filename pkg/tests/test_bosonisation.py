import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from toplink.algebra import casimir, top_hamiltonian
from toplink.bosonisation import (
    Elliptic,
    Rational,
    Trigonometric,
    bosonise,
    case_form,
    cm_hamiltonian,
    coefficients,
    ode_residuals,
    potential,
    potential_derivative,
    pullback_coeffs,
    singular_distance,
    theta_form_spin,
)
from toplink.errors import DomainError, PoleError
from toplink.special import complete_elliptic, theta_convention_constant

mpmath.mp.dps = 30

Q_TRIG = math.asinh(1) / 2  # sh(2q) = 1, ch(2q) = sqrt(2)
SQ2 = math.sqrt(2)

CASES = [
    Rational(1, 1),
    Rational(0.8 + 0.1j, 1.3),
    Trigonometric(1, 1),
    Trigonometric(0.6, 0.9 - 0.2j),
    Elliptic(0.5, 1),
    Elliptic(0.8, 1.4),
    Elliptic(0.4 + 0.2j, 0.7),
]


def case_id(case):
    return f"{case.name}{tuple(round(abs(v), 3) for v in vars(case).values())}"


def grid(case, n=25):
    if isinstance(case, Rational):
        qs = np.linspace(0.5, 1.6, n)
    elif isinstance(case, Trigonometric):
        qs = np.linspace(0.25, 1.1, n)
    else:
        K = complete_elliptic(case.k)[0].real
        qs = np.linspace(0.2, K - 0.2, n)
    return [(complex(0.7 * math.sin(j), 0.1 * math.cos(j)), complex(q, 0.05 * math.sin(3 * j))) for j, q in enumerate(qs)]


def test_rational_sextet_example():
    assert_allclose(coefficients(Rational(1, 1), 1), (0, 1, -1, -0.5, 0, 0), atol=1e-15)


def test_trigonometric_sextet_example():
    c = coefficients(Trigonometric(1, 1), Q_TRIG)
    # f_h = -1/(gamma th(2 gamma q)) = -ch/sh
    assert_allclose([c.f_h, c.g_h, c.f_e, c.g_e], [-SQ2, -1, -1j, -1j * SQ2], atol=1e-14)


@pytest.mark.parametrize("k", [0.2, 0.5, 0.9])
def test_elliptic_sextet_at_quarter_period(k):
    K = complete_elliptic(k)[0].real
    c = coefficients(Elliptic(k, 1), K / 2)
    assert abs(c.f_h - 1 / k) <= 1e-12
    assert abs(c.g_h) <= 1e-12


def test_bosonise_examples():
    r = bosonise(Rational(1, 1), (0, 1))
    assert_allclose(r, (1, -0.5, 0), atol=1e-15)
    assert abs(casimir(r) - 1) <= 1e-15
    t = bosonise(Trigonometric(1, 1), (0, Q_TRIG))
    assert_allclose(t, (-1, -1j * SQ2, 0), atol=1e-14)
    assert abs(casimir(t) - 1) <= 1e-14


@pytest.mark.parametrize("k,nu", [(0.3, 1.0), (0.7, 2.5), (0.5, 0.4 + 0.3j)])
def test_elliptic_quarter_period_spin_state(k, nu):
    K = complete_elliptic(k)[0].real
    assert_allclose(bosonise(Elliptic(k, nu), (0, K / 2), basis="spin"), (nu, 0, 0), atol=1e-12)


def test_cm_hamiltonian_examples():
    assert abs(cm_hamiltonian(Rational(1, 1), (0, 1)) + 0.25) <= 1e-15
    assert abs(cm_hamiltonian(Trigonometric(1, 1), (0, Q_TRIG)) + 1) <= 1e-14
    for k in (0.2, 0.6, 0.9):
        K = complete_elliptic(k)[0].real
        assert abs(cm_hamiltonian(Elliptic(k, 1), (0, K / 2)) + 1) <= 1e-12


@pytest.mark.parametrize("case", CASES, ids=case_id)
def test_casimir_and_hamiltonian_identity(case):
    J = case_form(case)
    for pt in grid(case):
        S = bosonise(case, pt, basis="spin")
        assert abs(casimir(S) - case.nu**2) <= 1e-10
        assert abs(top_hamiltonian(J, S) - cm_hamiltonian(case, pt)) <= 1e-10


@pytest.mark.parametrize("k", [0.3, 0.5, 0.85])
def test_elliptic_potential_against_mpmath(k):
    case = Elliptic(k, 1.2)
    for q in (0.2, 0.45 + 0.1j, 0.9):
        sn = mpmath.ellipfun("sn", 2 * mpmath.mpc(q), k=k)
        ref = complex(-(mpmath.mpf("1.2") ** 2) / sn**2)
        assert_allclose(potential(case, q), ref, rtol=1e-12)
        assert_allclose(cm_hamiltonian(case, (0.3, q)), 0.09 + ref, rtol=1e-12)


@pytest.mark.parametrize("case", CASES, ids=case_id)
def test_potential_derivative_against_finite_difference(case):
    h = 1e-5
    for _, q in grid(case, 10):
        fd = (potential(case, q + h) - potential(case, q - h)) / (2 * h)
        assert abs(fd - potential_derivative(case, q)) <= 1e-6 * max(1, abs(fd))


def test_pullback_rational_example():
    for nu in (1.0, 2.0, 0.5j):
        assert_allclose(pullback_coeffs(Rational(1, nu), 1), (1, 0, -(nu**2) / 4), atol=1e-15)


@pytest.mark.parametrize("case", CASES, ids=case_id)
def test_pullback_law(case):
    for _, q in grid(case, 100):
        l1, l2, l3 = pullback_coeffs(case, q)
        assert abs(l1 - 1) <= 1e-10
        assert abs(l2) <= 1e-10
        assert abs(l3 - potential(case, q)) <= 1e-10 * max(1, abs(l3))


@pytest.mark.parametrize(
    "case,q,tol",
    [(Rational(1, 1), 1.0, 1e-8), (Trigonometric(1, 1), 0.4, 1e-8), (Elliptic(0.5, 1), 0.3, 1e-7)],
    ids=["rational", "trigonometric", "elliptic"],
)
def test_ode_residual_examples(case, q, tol):
    assert max(ode_residuals(case, q)) <= tol


@pytest.mark.parametrize("case", CASES, ids=case_id)
def test_ode_residuals_shrink_quadratically(case):
    q = grid(case, 5)[2][1]
    r1 = max(ode_residuals(case, q, h_fd=1e-2))
    r2 = max(ode_residuals(case, q, h_fd=5e-3))
    if r1 > 1e-11:  # above round-off the residual is pure truncation error
        assert 3.0 <= r1 / r2 <= 5.0


@pytest.mark.parametrize(
    "case,q",
    [(Rational(1, 1), 0), (Trigonometric(1, 1), 0), (Trigonometric(1, 1), 1j * math.pi / 2), (Elliptic(0.5, 1), 0)],
)
def test_poles_raise(case, q):
    with pytest.raises(PoleError):
        bosonise(case, (0.3, q))
    with pytest.raises(PoleError):
        potential(case, q)


def test_elliptic_lattice_pole_raises():
    K = complete_elliptic(0.5)[0].real
    with pytest.raises(PoleError):
        bosonise(Elliptic(0.5, 1), (0, K))


def test_degenerate_parameters_rejected():
    for make in (lambda: Rational(0, 1), lambda: Trigonometric(0, 1), lambda: Elliptic(1, 1), lambda: Elliptic(0, 1)):
        with pytest.raises(DomainError):
            make()


def test_bosonise_rejects_unknown_basis():
    with pytest.raises(ValueError):
        bosonise(Rational(1, 1), (0, 1), basis="cartan")


def test_singular_distance():
    assert singular_distance(Rational(1, 1), 0.3 + 0.4j) == pytest.approx(0.5)
    assert singular_distance(Trigonometric(1, 1), 0.2 + 1.5j) == pytest.approx(abs(0.2 + 1.5j - 1j * math.pi / 2))
    K = complete_elliptic(0.5)[0].real
    assert singular_distance(Elliptic(0.5, 1), K - 0.1) == pytest.approx(0.1)


@pytest.mark.parametrize("k", [0.3, 0.5, 0.8])
def test_theta_form_matches_jacobi_form(k):
    case = Elliptic(k, 1.3)
    for pt in grid(case, 15):
        S, meta = theta_form_spin(case.nu, pt, k, with_metadata=True)
        assert_allclose(S, bosonise(case, pt, basis="spin"), atol=1e-9)
        assert abs(casimir(S) - case.nu**2) <= 1e-9
    assert meta["convention_constant"] == theta_convention_constant(k)
    assert meta["tau"].imag > 0


def test_theta_form_quarter_period():
    k = 0.5
    K = complete_elliptic(k)[0].real
    assert_allclose(theta_form_spin(2.0, (0, K / 2), k), (2, 0, 0), atol=1e-12)
