"""Complex elliptic special functions.

Conventions
-----------
* Theta functions use the period-1 argument and the nome ``exp(i*pi*tau)``::

      theta00(z) = 1 + 2 sum q^(n^2) cos(2 pi n z)
      theta01(z) = 1 + 2 sum (-1)^n q^(n^2) cos(2 pi n z)
      theta10(z) = 2 sum q^((n+1/2)^2) cos((2n+1) pi z)
      theta11(z) = 2 sum (-1)^n q^((n+1/2)^2) sin((2n+1) pi z)

  ``theta11`` carries Jacobi's sign, so ``theta11'(0) = pi theta00 theta01 theta10``.
* Jacobi functions for modulus ``k`` (not parameter ``m = k**2``).  With
  ``tau = i K'/K`` the dictionary is ``sn(u) = theta00(0)/theta10(0) *
  theta11(z)/theta01(z)`` at ``z = u / (pi theta00(0)**2) = u / (2K)``.
* ``weierstrass_paper(z, k) = 1/sn(z, k)**2`` (no additive constant).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError, EvaluationError, PoleError

AGM_MAX_ITER = 64
THETA_MAX_TERMS = 256
SERIES_RTOL = 1e-16
POLE_GUARD = 1e14

THETA_KINDS = ("00", "01", "10", "11")


def agm(a, b):
    """Complex arithmetic-geometric mean with the "right" square-root choice."""
    a, b = complex(a), complex(b)
    for _ in range(AGM_MAX_ITER):
        if abs(a - b) <= 1e-15 * abs(a):
            return (a + b) / 2
        a_next = (a + b) / 2
        b_next = cmath.sqrt(a * b)
        if abs(a_next - b_next) > abs(a_next + b_next):
            b_next = -b_next
        a, b = a_next, b_next
    raise EvaluationError(f"AGM did not converge for ({a}, {b})", argument=(a, b))


def complementary_modulus(k) -> complex:
    """Principal branch of sqrt(1 - k**2)."""
    return cmath.sqrt(1 - complex(k) ** 2)


def complete_elliptic(k) -> tuple[complex, complex]:
    """Complete elliptic integrals ``(K(k), K(k'))`` via the AGM.

    Raises DomainError for ``k**2`` in {0, 1} where one of them is infinite.
    """
    k = complex(k)
    if k * k == 0 or k * k == 1:
        raise DomainError(f"complete_elliptic needs k**2 not in {{0, 1}}, got k={k}")
    kp = complementary_modulus(k)
    try:
        K = math.pi / (2 * agm(1, kp))
        Kp = math.pi / (2 * agm(1, k))
    except EvaluationError as exc:
        raise EvaluationError(f"AGM failed for k={k}", argument=k) from exc
    return K, Kp


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus ``k`` together with its derived quantities (computed eagerly)."""

    k: complex
    kprime: complex
    K: complex
    Kprime: complex
    tau: complex
    nome: complex


@lru_cache(maxsize=512)
def elliptic_modulus(k) -> EllipticModulus:
    k = complex(k)
    K, Kp = complete_elliptic(k)
    tau = 1j * Kp / K
    if tau.imag <= 0:
        raise DomainError(f"modular parameter tau={tau} for k={k} is not in the upper half-plane")
    return EllipticModulus(k, complementary_modulus(k), K, Kp, tau, cmath.exp(1j * math.pi * tau))


# -- theta functions ---------------------------------------------------------


def theta(kind: str, z, tau) -> complex:
    """theta_{kind}(z | tau) by direct nome series."""
    if kind not in THETA_KINDS:
        raise ValueError(f"unknown theta kind {kind!r}; expected one of {THETA_KINDS}")
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError(f"theta needs Im(tau) > 0, got tau={tau}")
    z = complex(z)
    y = abs(z.imag)
    half = kind[0] == "1"
    alternating = kind[1] == "1"
    odd = kind == "11"

    total = 0j if half else 1 + 0j
    env_max = 0.0
    for n in range(0 if half else 1, THETA_MAX_TERMS):
        freq = (2 * n + 1) if half else 2 * n
        expo = (n + 0.5) ** 2 if half else n * n
        qpow = cmath.exp(1j * math.pi * tau * expo)
        sign = -1 if (alternating and n % 2) else 1
        arg = freq * math.pi * z
        term = 2 * sign * qpow * (cmath.sin(arg) if odd else cmath.cos(arg))
        total += term
        env = 2 * abs(qpow) * math.cosh(freq * math.pi * y)
        env_max = max(env_max, env)
        if env <= SERIES_RTOL * max(abs(total), SERIES_RTOL * env_max):
            return total
    raise EvaluationError(
        f"theta{kind} series did not converge in {THETA_MAX_TERMS} terms (z={z}, tau={tau})",
        argument=(z, tau),
    )


def theta_prime0(tau) -> complex:
    """Derivative of theta11 at the origin by term-wise differentiation."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError(f"theta needs Im(tau) > 0, got tau={tau}")
    total = 0j
    for n in range(THETA_MAX_TERMS):
        term = 2 * math.pi * (-1) ** n * (2 * n + 1) * cmath.exp(1j * math.pi * tau * (n + 0.5) ** 2)
        total += term
        if abs(term) <= SERIES_RTOL * abs(total):
            return total
    raise EvaluationError(f"theta11' series did not converge (tau={tau})", argument=tau)


@lru_cache(maxsize=512)
def theta_constants(tau) -> tuple[complex, complex, complex]:
    """(theta00(0), theta01(0), theta10(0))."""
    return theta("00", 0, tau), theta("01", 0, tau), theta("10", 0, tau)


def theta_convention_constant(k) -> complex:
    """Scale ``1/(pi theta00(0)**2)`` mapping a Jacobi argument to a theta argument."""
    t00 = theta_constants(elliptic_modulus(k).tau)[0]
    return 1 / (math.pi * t00 * t00)


# -- Jacobi elliptic functions -------------------------------------------------


@lru_cache(maxsize=512)
def _landen_ladder(kc2: float):
    # descending Gauss/Landen ladder for complementary parameter kc2 = 1 - k^2
    a, kc = 1.0, kc2
    ms, ns = [], []
    for _ in range(AGM_MAX_ITER):
        ms.append(a)
        kc = math.sqrt(kc)
        ns.append(kc)
        c = (a + kc) / 2
        # quadratic convergence: sqrt(eps) here is full double precision one step later
        if abs(a - kc) <= 1.5e-8 * a:
            return tuple(ms), tuple(ns), c
        kc *= a
        a = c
    raise EvaluationError(f"Landen ladder did not converge for k'^2={kc2}", argument=kc2)


def jacobi_elliptic_landen(u: float, k: float) -> tuple[float, float, float]:
    """sn, cn, dn for real ``u`` and real ``0 < k < 1`` by descending Landen/AGM.

    Bulirsch's form of the recursion, which carries dn along the ladder and
    stays accurate at the quarter periods.
    """
    if not 0 < k < 1:
        raise DomainError(f"Landen path needs 0 < k < 1, got {k}")
    kc2 = (1 - k) * (1 + k)
    K = math.pi / (2 * agm(1, math.sqrt(kc2)).real)
    u = math.remainder(u, 4 * K)
    ms, ns, c = _landen_ladder(kc2)
    v = u * c
    sn, cn, dn = math.sin(v), math.cos(v), 1.0
    if sn == 0.0:
        return 0.0, 1.0, 1.0
    a = cn / sn
    c *= a
    for b, en in zip(reversed(ms), reversed(ns)):
        a *= c
        c *= dn
        dn = (en + a) / (b + a)
        a = c / b
    a = 1 / math.sqrt(c * c + 1)
    sn = math.copysign(a, sn)
    cn = c * sn
    return sn, cn, dn


def _nearest_sn_pole(u: complex, mod: EllipticModulus) -> complex:
    # sn poles: iK' + 2mK + 2n iK'
    w1, w2 = 2 * mod.K, 2j * mod.Kprime
    d = u - 1j * mod.Kprime
    a, b = _lattice_coords(d, w1, w2)
    return 1j * mod.Kprime + round(a) * w1 + round(b) * w2


def _lattice_coords(u: complex, w1: complex, w2: complex) -> tuple[float, float]:
    det = w1.real * w2.imag - w2.real * w1.imag
    if det == 0:
        raise DomainError("degenerate period lattice")
    a = (u.real * w2.imag - w2.real * u.imag) / det
    b = (w1.real * u.imag - u.real * w1.imag) / det
    return a, b


def jacobi_elliptic_theta(u, k) -> tuple[complex, complex, complex]:
    """sn, cn, dn for complex ``u`` and ``k`` via theta quotients."""
    u = complex(u)
    mod = elliptic_modulus(k)
    t00, t01, t10 = theta_constants(mod.tau)
    # sn, cn, dn depend on k only through k**2
    k_tau = (t10 / t00) ** 2
    if abs(k_tau**2 - mod.k**2) > 1e-10 * max(1.0, abs(mod.k) ** 2):
        raise EvaluationError(f"theta dictionary branch mismatch for k={k} (got {k_tau})", argument=k)
    # common period lattice of sn, cn, dn
    w1, w2 = 4 * mod.K, 4j * mod.Kprime
    a, b = _lattice_coords(u, w1, w2)
    ur = u - round(a) * w1 - round(b) * w2
    z = ur / (math.pi * t00 * t00)
    d01 = theta("01", z, mod.tau)
    if d01 == 0 or abs(t00 * theta("11", z, mod.tau) / (t10 * d01)) > POLE_GUARD:
        pole = _nearest_sn_pole(u, mod)
        raise PoleError(f"sn({u}, {k}) is at a pole (nearest pole {pole})", nearest_pole=pole)
    sn = t00 / t10 * theta("11", z, mod.tau) / d01
    cn = t01 / t10 * theta("10", z, mod.tau) / d01
    dn = t01 / t00 * theta("00", z, mod.tau) / d01
    return sn, cn, dn


def jacobi_elliptic(z, k) -> tuple[complex, complex, complex]:
    """Jacobi sn, cn, dn.

    Real ``z`` with real ``0 < k < 1`` goes through the descending Landen
    recursion; everything else through theta quotients.  ``k = 0`` and
    ``k = +-1`` use the circular and hyperbolic degenerations.
    """
    z = complex(z)
    k = complex(k)
    if k == 0:
        return cmath.sin(z), cmath.cos(z), 1 + 0j
    if k * k == 1:
        sech = 1 / cmath.cosh(z)
        return cmath.tanh(z), sech, sech
    if z.imag == 0 and k.imag == 0 and 0 < abs(k.real) < 1:
        sn, cn, dn = jacobi_elliptic_landen(z.real, abs(k.real))
        return complex(sn), complex(cn), complex(dn)
    return jacobi_elliptic_theta(z, k)


def weierstrass_paper(z, k) -> complex:
    """The pairing potential function ``1/sn(z, k)**2``.

    Tends to ``1/sin(z)**2`` as ``k -> 0``.
    """
    sn = jacobi_elliptic(z, k)[0]
    if abs(sn) < 1e-154:
        raise PoleError(f"sn({z}, {k}) vanishes; 1/sn^2 has a pole", nearest_pole=complex(z), denominator="sn")
    return 1 / (sn * sn)
