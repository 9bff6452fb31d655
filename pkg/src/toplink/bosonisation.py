"""Bosonisation maps (p, q) -> sl(2,C) for the three canonical tops.

Each map is linear in the momentum::

    h = f_h(q) p + g_h(q),   e = f_e(q) p + g_e(q),   f = f_f(q) p + g_f(q)

and carries the canonical bracket ``{F, G} = F_p G_q - F_q G_p`` (so ``{p, q} = 1``)
onto the Chevalley relations.  The normalised top Hamiltonians are

* Rational       ``H = e^2 + beta e h``          -> ``p^2 - nu^2/(2q)^2``
* Trigonometric  ``H = e^2 + gamma^2 h^2``       -> ``p^2 - gamma^2 nu^2/sinh^2(2 gamma q)``
* Elliptic       ``H = k^2 (e-f)^2 - (e+f)^2``   -> ``p^2 - nu^2/sn^2(2q, k)``
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .algebra import ChevalleyState, QuadraticForm, SpinState, to_spin
from .errors import DomainError, PoleError
from .special import (
    _lattice_coords,
    complementary_modulus,
    elliptic_modulus,
    jacobi_elliptic,
    theta,
    theta_constants,
    theta_convention_constant,
    theta_prime0,
    weierstrass_paper,
)

# |denominator| below this is treated as a pole: about 500 ulps, so floating-point
# images of exact zeros (sh(i pi), sn(2K)) are caught instead of returning ~1e30
SINGULAR_EPS = 1e-13


class PhasePoint(NamedTuple):
    p: complex
    q: complex


@dataclass(frozen=True)
class Rational:
    beta: complex = 1.0
    nu: complex = 1.0
    name = "rational"

    def __post_init__(self):
        if self.beta == 0:
            raise DomainError("rational case needs beta != 0")


@dataclass(frozen=True)
class Trigonometric:
    gamma: complex = 1.0
    nu: complex = 1.0
    name = "trigonometric"

    def __post_init__(self):
        if self.gamma == 0:
            raise DomainError("trigonometric case needs gamma != 0")


@dataclass(frozen=True)
class Elliptic:
    k: complex = 0.5
    nu: complex = 1.0
    name = "elliptic"

    def __post_init__(self):
        if self.k == 0 or self.k * self.k == 1:
            raise DomainError("elliptic case needs k**2 not in {0, 1}")


BosonCase = Union[Rational, Trigonometric, Elliptic]


class CoefficientSextet(NamedTuple):
    f_h: complex
    g_h: complex
    f_e: complex
    g_e: complex
    f_f: complex
    g_f: complex

    def state(self, p) -> ChevalleyState:
        return ChevalleyState(self.f_h * p + self.g_h, self.f_e * p + self.g_e, self.f_f * p + self.g_f)


def _pole(msg, denominator, q):
    raise PoleError(msg, nearest_pole=q, denominator=denominator)


def coefficients(case: BosonCase, q) -> CoefficientSextet:
    """The six coefficient functions of the case at coordinate ``q``."""
    q = complex(q)
    nu = case.nu
    if isinstance(case, Rational):
        b = case.beta
        if abs(q) < SINGULAR_EPS:
            _pole("rational bosonisation is singular at q = 0", "q", 0j)
        qb2 = (q * b) ** 2
        return CoefficientSextet(
            (1 - qb2) / (q * b**2),
            nu * (qb2 + 1) / (2 * q**2 * b**2),
            -1 / (q * b),
            -nu / (2 * q**2 * b),
            (1 - qb2) ** 2 / (4 * q * b**3),
            nu * (1 - qb2) * (1 + 3 * qb2) / (8 * q**2 * b**3),
        )
    if isinstance(case, Trigonometric):
        g = case.gamma
        sh, ch = cmath.sinh(2 * g * q), cmath.cosh(2 * g * q)
        if abs(sh) < SINGULAR_EPS:
            _pole(f"sh(2*gamma*q) vanishes at q={q}", "sh(2*gamma*q)", q)
        return CoefficientSextet(
            -ch / (g * sh),
            -nu / sh**2,
            -1j / sh,
            -1j * nu * g * ch / sh**2,
            -1j * ch**2 / (4 * g**2 * sh),
            1j * nu * ch * (ch**2 - 2) / (4 * g * sh**2),
        )
    if isinstance(case, Elliptic):
        k = complex(case.k)
        sn, cn, dn = jacobi_elliptic(2 * q, k)
        if abs(sn) < SINGULAR_EPS:
            _pole(f"sn(2q, k) vanishes at q={q}", "sn(2q,k)", q)
        kp = complementary_modulus(k)
        return CoefficientSextet(
            1 / (sn * k),
            -nu * dn * cn / (sn**2 * k),
            -(k * cn - dn) / (2 * sn * k * kp),
            nu * (k * dn - cn) / (2 * sn**2 * k * kp),
            -(k * cn + dn) / (2 * sn * k * kp),
            nu * (k * dn + cn) / (2 * sn**2 * k * kp),
        )
    raise TypeError(f"unknown case {case!r}")


def bosonise(case: BosonCase, pt, basis: str = "chevalley"):
    """State of the orbit ``casimir = nu^2`` at phase point ``pt``.

    ``basis="spin"`` returns ``(S1, S2, S3) = (e + f, i(f - e), h)``.
    """
    p, q = pt
    chev = coefficients(case, q).state(complex(p))
    if basis == "chevalley":
        return chev
    if basis == "spin":
        return to_spin(chev, axis="S3")
    raise ValueError(f"basis must be 'chevalley' or 'spin', got {basis!r}")


def chevalley_hamiltonian(case: BosonCase, state) -> complex:
    """The case's normalised top Hamiltonian evaluated on a Chevalley triple."""
    h, e, f = state
    if isinstance(case, Rational):
        return e * e + case.beta * e * h
    if isinstance(case, Trigonometric):
        return e * e + case.gamma**2 * h * h
    if isinstance(case, Elliptic):
        return case.k**2 * (e - f) ** 2 - (e + f) ** 2
    raise TypeError(f"unknown case {case!r}")


def case_form(case: BosonCase) -> QuadraticForm:
    """The normalised top Hamiltonian as a quadratic form in the spin basis."""
    if isinstance(case, Rational):
        b = case.beta
        return QuadraticForm(np.array([[1, 1j, b], [1j, -1, 1j * b], [b, 1j * b, 0]]) / 4)
    if isinstance(case, Trigonometric):
        J = np.array([[1, 1j, 0], [1j, -1, 0], [0, 0, 0]], dtype=complex) / 4
        J[2, 2] = case.gamma**2
        return QuadraticForm(J)
    if isinstance(case, Elliptic):
        return QuadraticForm(np.diag([-1, -(case.k**2), 0]))
    raise TypeError(f"unknown case {case!r}")


# -- two-body side -------------------------------------------------------------------


def potential(case: BosonCase, q) -> complex:
    q = complex(q)
    nu2 = case.nu**2
    if isinstance(case, Rational):
        if abs(q) < SINGULAR_EPS:
            _pole("rational potential is singular at q = 0", "q", 0j)
        return -nu2 / (2 * q) ** 2
    if isinstance(case, Trigonometric):
        g = case.gamma
        sh = cmath.sinh(2 * g * q)
        if abs(sh) < SINGULAR_EPS:
            _pole(f"sh(2*gamma*q) vanishes at q={q}", "sh(2*gamma*q)", q)
        return -(g**2) * nu2 / sh**2
    if isinstance(case, Elliptic):
        return -nu2 * weierstrass_paper(2 * q, case.k)
    raise TypeError(f"unknown case {case!r}")


def potential_derivative(case: BosonCase, q) -> complex:
    """dU/dq in closed form."""
    q = complex(q)
    nu2 = case.nu**2
    if isinstance(case, Rational):
        if abs(q) < SINGULAR_EPS:
            _pole("rational potential is singular at q = 0", "q", 0j)
        return nu2 / (2 * q**3)
    if isinstance(case, Trigonometric):
        g = case.gamma
        sh, ch = cmath.sinh(2 * g * q), cmath.cosh(2 * g * q)
        if abs(sh) < SINGULAR_EPS:
            _pole(f"sh(2*gamma*q) vanishes at q={q}", "sh(2*gamma*q)", q)
        return 4 * g**3 * nu2 * ch / sh**3
    if isinstance(case, Elliptic):
        sn, cn, dn = jacobi_elliptic(2 * q, case.k)
        if abs(sn) < SINGULAR_EPS:
            _pole(f"sn(2q, k) vanishes at q={q}", "sn(2q,k)", q)
        return 4 * nu2 * cn * dn / sn**3
    raise TypeError(f"unknown case {case!r}")


def cm_hamiltonian(case: BosonCase, pt) -> complex:
    p, q = pt
    return complex(p) ** 2 + potential(case, q)


def singular_distance(case: BosonCase, q) -> float:
    """Distance from q to the nearest coordinate singularity of the case."""
    q = complex(q)
    if isinstance(case, Rational):
        return abs(q)
    if isinstance(case, Trigonometric):
        # sh(2 gamma q) = 0  <=>  q = i pi n / (2 gamma)
        step = 1j * math.pi / (2 * case.gamma)
        n = (q / step).real
        return min(abs(q - m * step) for m in (math.floor(n), math.ceil(n)))
    if isinstance(case, Elliptic):
        # sn(2q) = 0  <=>  q = m K + n i K'
        mod = elliptic_modulus(case.k)
        w1, w2 = mod.K, 1j * mod.Kprime
        a, b = _lattice_coords(q, w1, w2)
        return min(
            abs(q - m * w1 - n * w2)
            for m in (math.floor(a), math.ceil(a))
            for n in (math.floor(b), math.ceil(b))
        )
    raise TypeError(f"unknown case {case!r}")


# -- self-verification of the linear-in-p construction ------------------------------


def pullback_coeffs(case: BosonCase, q) -> tuple[complex, complex, complex]:
    """(L1, L2, L3) with ``H_top(bosonise(p, q)) = L1 p^2 + L2 p + L3``."""
    c = coefficients(case, q)
    fs = ChevalleyState(c.f_h, c.f_e, c.f_f)
    gs = ChevalleyState(c.g_h, c.g_e, c.g_f)
    lam1 = chevalley_hamiltonian(case, fs)
    lam3 = chevalley_hamiltonian(case, gs)
    lam2 = chevalley_hamiltonian(case, ChevalleyState(*(a + b for a, b in zip(fs, gs)))) - lam1 - lam3
    return lam1, lam2, lam3


def ode_residuals(case: BosonCase, q, h_fd: float = 1e-5) -> tuple[float, ...]:
    """Absolute residuals of the six first-order equations the sextet must solve.

    Derivatives come from central differences of step ``h_fd``.
    """
    q = complex(q)
    c = coefficients(case, q)
    cp = coefficients(case, q + h_fd)
    cm = coefficients(case, q - h_fd)
    d = CoefficientSextet(*((a - b) / (2 * h_fd) for a, b in zip(cp, cm)))
    return (
        abs(c.f_h * d.f_f - c.f_f * d.f_h + 2 * c.f_f),
        abs(c.f_h * d.g_f - c.f_f * d.g_h + 2 * c.g_f),
        abs(c.f_h * d.f_e - c.f_e * d.f_h - 2 * c.f_e),
        abs(c.f_h * d.g_e - c.f_e * d.g_h - 2 * c.g_e),
        abs(c.f_e * d.f_f - c.f_f * d.f_e - c.f_h),
        abs(c.f_e * d.g_f - c.f_f * d.g_e - c.g_h),
    )


def theta_form_spin(nu, pt, k, with_metadata: bool = False):
    """Elliptic spin state written with theta functions.

    The theta arguments are ``2 q c`` with ``c = theta_convention_constant(k)``,
    and the momentum is rescaled to ``p / c`` so that the pair stays canonical.
    The third component is taken with the sign that makes
    ``{S1, S2} = 2i S3`` hold; it then coincides with the Jacobi form.
    With ``with_metadata=True`` returns ``(state, {"convention_constant", "tau"})``.
    """
    p, q = complex(pt[0]), complex(pt[1])
    mod = elliptic_modulus(k)
    tau = mod.tau
    c = theta_convention_constant(k)
    z = 2 * q * c
    pt_ = p / c
    t00, t01, t10 = theta_constants(tau)
    d0 = theta_prime0(tau)
    v = theta("11", z, tau)
    if abs(v) < SINGULAR_EPS:
        _pole(f"theta11(2q) vanishes at q={q}", "theta11", q)
    a00, a01, a10 = theta("00", z, tau), theta("01", z, tau), theta("10", z, tau)
    s1 = -t10 * a10 / (d0 * v) * pt_ + t10**2 * a00 * a01 / (t00 * t01 * v**2) * nu
    s2 = t00 * a00 / (1j * d0 * v) * pt_ - t00**2 * a10 * a01 / (1j * t10 * t01 * v**2) * nu
    s3 = t01 * a01 / (d0 * v) * pt_ - t01**2 * a00 * a10 / (t00 * t10 * v**2) * nu
    state = SpinState(s1, s2, s3)
    if with_metadata:
        return state, {"convention_constant": c, "tau": tau}
    return state
