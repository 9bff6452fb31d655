"""Canonical classes of complex symmetric quadratic forms on sl(2,C).

Any J is equivalent, modulo proper complex orthogonal conjugation and a shift
by a multiple of the Casimir (``J -> J + cI``), to exactly one of

* ``XYZ``       ``diag(alpha, beta, gamma)``
* ``XXZprime``  ``[[a, ia, 0], [ia, -a, 0], [0, 0, b]]``
* ``XXXprime``  ``[[a, ia, b], [ia, -a, ib], [b, ib, 0]]``

The classes are distinguished by the Jordan structure of J.  The degenerate
amplitudes are normalised by an automorphism (a complex "boost" rescaling the
isotropic vector), so the Hamiltonian itself is never rescaled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .algebra import QuadraticForm, as_form, check_automorphism
from .errors import AmbiguousClassificationError, IsotropicBreakdownError

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
ISOTROPIC = np.array([1, 1j, 0])


@dataclass(frozen=True)
class XYZ:
    alpha: complex
    beta: complex
    gamma: complex
    name = "XYZ"

    @property
    def params(self):
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class XXZprime:
    alpha: complex
    beta: complex
    name = "XXZprime"

    @property
    def params(self):
        return (self.alpha, self.beta)


@dataclass(frozen=True)
class XXXprime:
    alpha: complex
    beta: complex
    name = "XXXprime"

    @property
    def params(self):
        return (self.alpha, self.beta)


CanonicalClass = Union[XYZ, XXZprime, XXXprime]


@dataclass(frozen=True, eq=False)
class ClassificationResult:
    """Outcome of :func:`reduce`.

    When ``transform`` is present,
    ``max|T J T^t + casimir_shift I - canonical_matrix(cls)| == residual``.
    ``hamiltonian_scale`` is the factor by which H would have to be rescaled to
    reach the canonical amplitudes; it is 1 because the normalisation is
    realised by the transform.
    """

    cls: CanonicalClass
    transform: Optional[np.ndarray]
    casimir_shift: complex
    residual: float
    hamiltonian_scale: complex = 1.0
    reason: str = ""


def canonical_matrix(cls: CanonicalClass) -> QuadraticForm:
    if isinstance(cls, XYZ):
        return QuadraticForm(np.diag([cls.alpha, cls.beta, cls.gamma]))
    a, b = cls.alpha, cls.beta
    if isinstance(cls, XXZprime):
        return QuadraticForm([[a, 1j * a, 0], [1j * a, -a, 0], [0, 0, b]])
    if isinstance(cls, XXXprime):
        return QuadraticForm([[a, 1j * a, b], [1j * a, -a, 1j * b], [b, 1j * b, 0]])
    raise TypeError(f"not a canonical class: {cls!r}")


# -- Jordan structure ----------------------------------------------------------------


def _svals(M):
    return np.linalg.svd(M, compute_uv=False)


def _rank(M, threshold):
    return int(np.sum(_svals(M) > threshold))


def _sort_key(z, scale):
    # rounding keeps roundoff-level imaginary parts from flipping the order
    r = 1e-9 * max(scale, 1e-300)
    return (round(z.real / r), round(z.imag / r))


@dataclass(frozen=True)
class _Structure:
    cls: CanonicalClass
    repeated: complex  # repeated eigenvalue (or None for distinct XYZ)
    simple: complex
    eigenvalues: tuple


def _analyse(J: np.ndarray, tol: float) -> _Structure:
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = float(_svals(J)[0])
    if scale == 0.0:
        return _Structure(XYZ(0j, 0j, 0j), 0j, 0j, (0j, 0j, 0j))
    thresh = tol * scale
    lam = np.trace(J) / 3
    M = J - lam * np.eye(3)
    mnorm = float(_svals(M)[0])
    if mnorm <= thresh:
        return _Structure(XYZ(lam, lam, lam), lam, lam, (lam,) * 3)

    # triple eigenvalue <=> traceless part has vanishing tr(M^2) and det(M)
    if abs(np.trace(M @ M)) <= tol * mnorm**2 and abs(np.linalg.det(M)) <= tol * mnorm**3:
        if _rank(M, thresh) == 1:
            return _Structure(XXZprime(1 + 0j, 0j), lam, lam, (lam,) * 3)
        return _Structure(XXXprime(1 + 0j, 1 + 0j), lam, lam, (lam,) * 3)

    ev = np.linalg.eigvals(J)
    pairs = [(abs(ev[i] - ev[j]), i, j) for i in range(3) for j in range(i + 1, 3)]
    gap, i, j = min(pairs)
    if gap > np.sqrt(tol) * scale:
        ev_sorted = tuple(sorted((complex(x) for x in ev), key=lambda z: _sort_key(z, scale)))
        return _Structure(XYZ(*ev_sorted), None, None, ev_sorted)

    dbl = (ev[i] + ev[j]) / 2
    simple = complex(np.trace(J) - 2 * dbl)
    s = _svals(J - dbl * np.eye(3))
    if s[2] > thresh:
        raise AmbiguousClassificationError(
            f"eigenvalues {ev[i]:.6g} and {ev[j]:.6g} are closer than sqrt(tol) but "
            f"J - lambda I keeps full rank at tol={tol:g}",
            candidates=("XYZ", "XXZprime"),
        )
    if s[1] <= thresh:
        ev_sorted = tuple(sorted((complex(dbl), complex(dbl), simple), key=lambda z: _sort_key(z, scale)))
        return _Structure(XYZ(*ev_sorted), complex(dbl), simple, ev_sorted)
    return _Structure(XXZprime(1 + 0j, simple - dbl), complex(dbl), simple, (complex(dbl),) * 2 + (simple,))


def classify(J, tol: float = DEFAULT_TOL) -> CanonicalClass:
    """Canonical class of J, decided from eigenvalues and rank tests on ``J - lambda I``."""
    return _analyse(as_form(J).matrix, tol).cls


def nilpotency_witness(J, tol: float = DEFAULT_TOL) -> dict:
    """Norms certifying the Jordan block of a degenerate class.

    XXZprime: the nilpotent part N of the 2-block has ``|N^2| <= tol |N|^2``.
    XXXprime: ``M = J - (tr J/3) I`` has ``|M^3| <= tol |M|^3`` and ``|M^2| > tol |M|^2``.
    """
    J = as_form(J).matrix
    st = _analyse(J, tol)
    I = np.eye(3)
    norm = lambda A: float(_svals(A)[0])
    if isinstance(st.cls, XXZprime):
        lam, mu = st.repeated, st.simple
        if abs(lam - mu) > tol * norm(J):
            N = (J - lam * I) @ (J - mu * I) / (lam - mu)
        else:
            N = J - lam * I
        n1, n2 = norm(N), norm(N @ N)
        return {"class": "XXZprime", "N": n1, "N2": n2, "passed": n1 > 0 and n2 <= tol * n1**2}
    if isinstance(st.cls, XXXprime):
        M = J - np.trace(J) / 3 * I
        m1, m2, m3 = norm(M), norm(M @ M), norm(M @ M @ M)
        return {
            "class": "XXXprime",
            "M": m1,
            "M2": m2,
            "M3": m3,
            "passed": m3 <= tol * m1**3 and m2 > tol * m1**2,
        }
    return {"class": "XYZ", "passed": True}


# -- reducing transformations ---------------------------------------------------------


def _bilinear_normalize(x, tol):
    xx = x @ x
    if abs(xx) <= tol * np.vdot(x, x).real:
        raise IsotropicBreakdownError(f"vector {x} is isotropic (x.x = {xx:.3g})")
    return x / np.sqrt(xx)


def _null_space(A, dim):
    _, _, vh = np.linalg.svd(A)
    return [vh[-d - 1].conj() for d in range(dim)]


def _rank_one_factor(P):
    """u with ``P = u u^t`` for a symmetric rank-one P."""
    j = int(np.argmax(np.abs(np.diag(P))))
    return P[:, j] / np.sqrt(P[j, j])


def _complete_from_isotropic(u, w):
    """Rows (r1, r2) with ``r1 + i r2 = u``, completing w to a complex orthonormal triple."""
    basis = np.eye(3)
    cands = [b - (b @ w) * w for b in basis]
    y = max(cands, key=lambda c: abs(u @ c))
    uy = u @ y
    v = (2 / uy) * (y - (y @ y) / (2 * uy) * u)
    return (u + v) / 2, (u - v) / 2j


def _unit_orthogonal_to(u):
    # any x with x.u = 0 that is not parallel to u has x.x != 0 in three dimensions
    for b in np.eye(3):
        x = np.cross(u, b)
        if np.vdot(x, x).real > 1e-20 and abs(x @ x) > 1e-8 * np.vdot(x, x).real:
            return x / np.sqrt(x @ x)
    raise IsotropicBreakdownError(f"no non-isotropic vector orthogonal to {u}")


def _xyz_transform(J, st, tol):
    scale = float(_svals(J)[0])
    rows = []
    ev = list(st.eigenvalues)
    done = set()
    for idx, lam in enumerate(ev):
        if idx in done:
            continue
        mult = [m for m in range(len(ev)) if abs(ev[m] - lam) <= np.sqrt(tol) * max(scale, 1e-300)]
        done.update(mult)
        vecs = _null_space(J - lam * np.eye(3), len(mult))
        block = []
        for x in vecs:
            for y in block:
                x = x - (x @ y) * y
            block.append(_bilinear_normalize(x, tol))
        rows.extend(block)
    T = np.array(rows)
    if np.linalg.det(T).real < 0:
        T[0] = -T[0]
    return T


def reduce(J, tol: float = DEFAULT_TOL) -> ClassificationResult:
    """Classify J and build a proper orthogonal T bringing it to canonical form.

    The returned result satisfies ``T J T^t + casimir_shift I = canonical_matrix(cls)``
    up to ``residual``.  If complex Gram-Schmidt meets an isotropic vector the
    class is still returned, without a transform.
    """
    J = as_form(J).matrix
    st = _analyse(J, tol)
    cls = st.cls
    I = np.eye(3)
    try:
        if isinstance(cls, XYZ):
            T = _xyz_transform(J, st, tol)
            shift = 0j
        elif isinstance(cls, XXZprime):
            lam, mu = st.repeated, st.simple
            if abs(lam - mu) > tol * float(_svals(J)[0]):
                N = (J - lam * I) @ (J - mu * I) / (lam - mu)
                u = _rank_one_factor(N)
                w = _rank_one_factor((J - lam * I) @ (J - lam * I) / (mu - lam) ** 2)
            else:
                u = _rank_one_factor(J - lam * I)
                w = _unit_orthogonal_to(u)
            r1, r2 = _complete_from_isotropic(u, w)
            T = np.array([r1, r2, w])
            if np.linalg.det(T).real < 0:
                T[2] = -T[2]
            shift = -lam
        else:
            lam = st.repeated
            M = J - lam * I
            u = _rank_one_factor(M @ M)
            x = np.eye(3)[int(np.argmax(np.abs(u)))]
            ux = u @ x
            y = M @ x / ux
            R = M - np.outer(u, y) - np.outer(y, u)
            s = (x @ R @ x) / ux**2
            w = y - (1 - s) / 2 * u
            r1, r2 = _complete_from_isotropic(u, w)
            T = np.array([r1, r2, w])
            if np.linalg.det(T).real < 0:
                T = -T
            shift = -lam
    except IsotropicBreakdownError as exc:
        log.warning("reduce: %s", exc)
        return ClassificationResult(cls, None, 0j, float("nan"), reason=f"isotropic breakdown: {exc}")

    target = canonical_matrix(cls).matrix
    residual = float(np.max(np.abs(T @ J @ T.T + shift * I - target)))
    chk = check_automorphism(T, tol=max(1e-10, tol))
    reason = "" if chk.passed else (
        f"transform orthogonality residual {chk.orthogonality_residual:.3g}, det residual {chk.det_residual:.3g}"
    )
    return ClassificationResult(cls, T, complex(shift), residual, reason=reason)
