"""Verification harness: finite-difference brackets, flow equivalence, and the
singular gauge degeneration of the elliptic maps as ``k -> 0``.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .algebra import LEVI_CIVITA, ChevalleyState, SpinState, casimir, to_spin
from .bosonisation import SINGULAR_EPS, BosonCase, Elliptic, Trigonometric, bosonise, case_form, coefficients
from .dynamics import IntegratorConfig, Trajectory, integrate_cm, integrate_top
from .errors import DomainError, EvaluationError, PoleError, ToplinkError

log = logging.getLogger(__name__)

DEFAULT_H_FD = 1e-5
DEFAULT_K_LADDER = tuple(0.1 * 2.0**-j for j in range(6))
DET_K_VALUES = (1e-1, 1e-2, 1e-3, 1e-4)


# -- finite-difference Poisson brackets ------------------------------------------------


def partials(F: Callable, pt, h_fd: float = DEFAULT_H_FD):
    """Central-difference ``(dF/dp, dF/dq)`` for a function of ``(p, q)`` (may be vector valued)."""
    p, q = complex(pt[0]), complex(pt[1])
    Fp = (np.asarray(F(p + h_fd, q)) - np.asarray(F(p - h_fd, q))) / (2 * h_fd)
    Fq = (np.asarray(F(p, q + h_fd)) - np.asarray(F(p, q - h_fd))) / (2 * h_fd)
    return Fp, Fq


def poisson_bracket_fd(F: Callable, G: Callable, pt, h_fd: float = DEFAULT_H_FD):
    """``{F, G} = F_p G_q - F_q G_p`` by central differences."""
    Fp, Fq = partials(F, pt, h_fd)
    Gp, Gq = partials(G, pt, h_fd)
    return Fp * Gq - Fq * Gp


def bracket_residuals(case: BosonCase, pt, h_fd: float = DEFAULT_H_FD) -> tuple[float, float, float]:
    """``|{h,e} - 2e|, |{h,f} + 2f|, |{e,f} - h|`` for the case's Chevalley map."""
    state = lambda p, q: np.array(bosonise(case, (p, q)))
    (hp, ep, fp), (hq, eq, fq) = partials(state, pt, h_fd)
    h, e, f = bosonise(case, pt)
    return (
        float(abs(hp * eq - hq * ep - 2 * e)),
        float(abs(hp * fq - hq * fp + 2 * f)),
        float(abs(ep * fq - eq * fp - h)),
    )


def spin_bracket_residual(state_fn: Callable, pt, h_fd: float = DEFAULT_H_FD) -> float:
    """Max over i < j of ``|{S_i, S_j} - 2i eps_ijk S_k|`` for a map ``(p, q) -> S``."""
    fn = lambda p, q: np.asarray(state_fn(p, q), dtype=complex)
    Sp, Sq = partials(fn, pt, h_fd)
    S = fn(complex(pt[0]), complex(pt[1]))
    worst = 0.0
    for i, j in ((0, 1), (1, 2), (2, 0)):
        lhs = Sp[i] * Sq[j] - Sq[i] * Sp[j]
        rhs = 2j * (LEVI_CIVITA[i, j] @ S)
        worst = max(worst, float(abs(lhs - rhs)))
    return worst


# -- flow equivalence ------------------------------------------------------------------


@dataclass
class EquivalenceRun:
    cm: Trajectory
    top: Trajectory
    mapped: np.ndarray  # bosonised two-body samples, spin basis
    deviation: np.ndarray  # per-sample max-norm difference


def equivalence_run(case: BosonCase, pt0, cfg: IntegratorConfig = IntegratorConfig()) -> EquivalenceRun:
    """Integrate both sides from matching initial data and compare sample by sample."""
    cm = integrate_cm(case, pt0, cfg)
    S0 = bosonise(case, pt0, basis="spin")
    top = integrate_top(case_form(case), S0, cfg)
    if not (cm.completed and top.completed):
        raise EvaluationError(
            f"flow stopped early (two-body: {cm.status} {cm.message}; top: {top.status} {top.message})",
            argument=pt0,
        )
    mapped = np.array([bosonise(case, s, basis="spin") for s in cm.states])
    dev = np.max(np.abs(mapped - top.states), axis=1)
    return EquivalenceRun(cm, top, mapped, dev)


def trajectory_equivalence(case: BosonCase, pt0, cfg: IntegratorConfig = IntegratorConfig()) -> float:
    """Sup over samples of the max-norm gap between the bosonised two-body flow and the top flow."""
    return float(np.max(equivalence_run(case, pt0, cfg).deviation))


# -- singular gauge transformation -----------------------------------------------------

GAUGE_A = np.array([[1, 0, 0], [0, 0.5j, 0.5], [0, 0.5j, -0.5]])
GAUGE_A_INV = np.linalg.inv(GAUGE_A)


@dataclass(frozen=True)
class GaugeTransform:
    """``T(k) = A^-1 B(k) A`` with ``B(k) = diag(1, 1/k, k)``.

    ``A S = (h, f, -e)`` in the Chevalley triple along S1, so T rescales
    ``f -> f/k`` and ``e -> k e``.  The regularising direction
    (``e -> e/k``, ``f -> k f``) is ``T^-1 = T(1/k)``.
    """

    k: complex
    A: np.ndarray = field(init=False, repr=False)
    B: np.ndarray = field(init=False, repr=False)
    T: np.ndarray = field(init=False, repr=False)
    T_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = complex(self.k)
        if k == 0:
            raise DomainError("gauge transform needs k != 0")
        B = np.diag([1, 1 / k, k])
        object.__setattr__(self, "A", GAUGE_A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "T", GAUGE_A_INV @ B @ GAUGE_A)
        object.__setattr__(self, "T_inv", GAUGE_A_INV @ np.diag([1, k, 1 / k]) @ GAUGE_A)

    @property
    def det_residual(self) -> float:
        """``|det T - 1|`` through ``det(A^-1) det(B) det(A)``.

        The assembled T has O(1/k) entries whose products cancel, so its LU
        determinant loses about ``k**-2`` ulps; the factorised form does not.
        """
        d = np.linalg.det(GAUGE_A_INV) * np.prod(np.diag(self.B)) * np.linalg.det(GAUGE_A)
        return float(abs(d - 1))

    @property
    def assembled_det_residual(self) -> float:
        return float(abs(np.linalg.det(self.T) - 1))

    @property
    def orthogonality_residual(self) -> float:
        return float(np.max(np.abs(self.T @ self.T.T - np.eye(3))))

    def apply(self, S) -> SpinState:
        return SpinState(*(self.T @ np.asarray(S, dtype=complex)))

    def regularize(self, S) -> SpinState:
        return SpinState(*(self.T_inv @ np.asarray(S, dtype=complex)))


def limit_chevalley(nu, pt) -> ChevalleyState:
    """Closed-form ``k -> 0`` limit of the regularised elliptic map, Chevalley triple along S1."""
    p, q = complex(pt[0]), complex(pt[1])
    s, c = cmath.sin(2 * q), cmath.cos(2 * q)
    if abs(s) < SINGULAR_EPS:
        raise PoleError(f"sin(2q) vanishes at q={q}", nearest_pole=q, denominator="sin(2q)")
    h = -p * c / s + nu / s**2
    e = -p * c * c / (4 * s) + nu * c * (1 + s * s) / (4 * s * s)
    f = p / s - nu * c / s**2
    return ChevalleyState(h, e, f)


def limit_state(nu, pt) -> SpinState:
    """Closed-form ``k -> 0`` limit of the regularised elliptic map in spin coordinates."""
    return to_spin(limit_chevalley(nu, pt), axis="S1")


def printed_limit(nu, pt) -> SpinState:
    """Reference closed forms for the regularised limit, with suspected typos kept as-is.

    Only the third component agrees with :func:`limit_state`; these feed the
    comparison report and are never asserted.  A stray ``cos(2u)`` in the
    second component is read as ``cos(2q)``.
    """
    p, q = complex(pt[0]), complex(pt[1])
    s, c = cmath.sin(2 * q), cmath.cos(2 * q)
    s1 = -p * c / (4 * s) + nu / s**2
    s2 = (p * (4 + c) / s + nu * c * (5 + s * s) / s**2) / 4j
    s3 = (p * (4 - c * c) / s - nu * c * (3 - s * s) / s**2) / 4
    return SpinState(s1, s2, s3)


def bounded_limit_s1(nu, pt) -> complex:
    """``-p cot(2q) + nu / sin^2(2q)``, the limit of the un-conjugated S1."""
    p, q = complex(pt[0]), complex(pt[1])
    return -p * cmath.cos(2 * q) / cmath.sin(2 * q) + nu / cmath.sin(2 * q) ** 2


def richardson_k2(ks: Sequence[float], values: np.ndarray) -> np.ndarray:
    """Value at ``k = 0`` of the polynomial in ``k^2`` through the given samples (Neville)."""
    x = np.asarray(ks, dtype=float) ** 2
    P = [np.asarray(v, dtype=complex) for v in values]
    n = len(P)
    for m in range(1, n):
        P = [(x[i + m] * P[i] - x[i] * P[i + 1]) / (x[i + m] - x[i]) for i in range(n - m)]
    return P[0]


def growth_exponent(ks: Sequence[float], values: Sequence[complex]) -> float:
    """Least-squares slope of ``log|v|`` against ``log k`` (-1 means ``~1/k``)."""
    lk = np.log(np.asarray(ks, dtype=float))
    lv = np.log(np.maximum(np.abs(np.asarray(values)), 1e-300))
    return float(np.polyfit(lk, lv, 1)[0])


def _trig_triple(gamma, nu, p, q):
    return np.array(coefficients(Trigonometric(gamma, nu), q).state(p))


FIT_GRID = tuple((p, q) for p in (-0.4, 0.3, 1.1) for q in (0.3, 0.45, 0.6, 0.75))


def fit_gamma(nu, grid=FIT_GRID, reflected: bool = False) -> dict:
    """Best ``gamma`` matching the trigonometric map to the limit on a (p, q) grid.

    ``reflected=True`` compares ``(h', e', f')(p)`` with ``(h, f, e)_trig(-p)``,
    i.e. up to the momentum reflection combined with the swap ``e <-> f``.
    """
    target = np.array([limit_chevalley(nu, pt) for pt in grid])

    def residual(gamma):
        try:
            rows = []
            for p, q in grid:
                if reflected:
                    h, e, f = _trig_triple(gamma, nu, -p, q)
                    rows.append((h, f, e))
                else:
                    rows.append(_trig_triple(gamma, nu, p, q))
        except (ToplinkError, ZeroDivisionError, OverflowError):
            return math.inf
        return float(np.max(np.abs(np.array(rows) - target)))

    def objective(x):
        r = residual(complex(x[0], x[1]))
        return r if math.isfinite(r) else 1e300

    best = None
    for start in ((1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.7, 0.7), (-0.7, 0.7), (0.3, 2.0)):
        res = minimize(objective, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    gamma = complex(best.x[0], best.x[1])
    return {"gamma": gamma, "residual": residual(gamma), "reflected": reflected}


@dataclass
class DegenerationReport:
    nu: complex
    pt: tuple
    ks: np.ndarray
    raw_states: np.ndarray
    states: np.ndarray  # regularised, spin basis
    det_residuals: np.ndarray
    casimir_residuals: np.ndarray
    raw_growth: tuple  # per component
    literal_growth: tuple  # growth of T(k) S(k), the unregularised direction
    orders: np.ndarray
    order: float
    limit: np.ndarray
    closed_form: np.ndarray
    extrapolation_error: float
    limit_casimir_residual: float
    limit_bracket_residual: float
    bounded_s1_error: float
    printed_comparison: list
    gamma_fit: dict
    diverged: bool = False
    message: str = ""


def degeneration_limit(nu, pt, k_seq: Optional[Sequence[float]] = None, h_fd: float = DEFAULT_H_FD,
                       fit: bool = True) -> DegenerationReport:
    """Sweep the regularised elliptic map down a k ladder and extrapolate to ``k = 0``."""
    ks = np.asarray(DEFAULT_K_LADDER if k_seq is None else k_seq, dtype=float)
    if len(ks) < 3:
        raise DomainError("the k ladder needs at least three values")
    if np.any(ks <= 0) or np.any(ks >= 1) or np.any(np.diff(ks) >= 0):
        raise DomainError("k values must lie in (0, 1) and decrease")
    nu = complex(nu)
    pt = (complex(pt[0]), complex(pt[1]))

    raw, reg, lit, dets, cas = [], [], [], [], []
    for k in ks:
        S = np.array(bosonise(Elliptic(k, nu), pt, basis="spin"))
        g = GaugeTransform(k)
        R = g.T_inv @ S
        raw.append(S)
        reg.append(R)
        lit.append(g.T @ S)
        dets.append(g.det_residual)
        cas.append(abs(casimir(R) - nu**2))
    raw, reg, lit = np.array(raw), np.array(reg), np.array(lit)
    if not np.all(np.isfinite(reg)):
        raise EvaluationError("non-finite regularised state on the k ladder", argument=pt)

    raw_growth = tuple(growth_exponent(ks, raw[:, i]) for i in range(3))
    literal_growth = tuple(growth_exponent(ks, lit[:, i]) for i in range(3))
    reg_growth = [growth_exponent(ks, reg[:, i]) for i in range(3)]
    diverged = min(reg_growth) < -0.5
    message = ""
    if diverged:
        message = f"regularised components grow as k -> 0 (exponents {np.round(reg_growth, 3).tolist()})"
        log.warning(message)

    d = np.max(np.abs(np.diff(reg, axis=0)), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(d[:-1] / d[1:]) / np.log(ks[:-2] / ks[1:-1])
    order = float(orders[-1]) if len(orders) else math.nan

    limit = richardson_k2(ks[-3:], reg[-3:])
    closed = np.array(limit_state(nu, pt))
    s_fn = lambda p, q: limit_state(nu, (p, q))
    printed = np.array(printed_limit(nu, pt))
    comparison = [
        {
            "component": f"S{i + 1}",
            "computed": complex(limit[i]),
            "printed": complex(printed[i]),
            "abs_diff": float(abs(limit[i] - printed[i])),
            "agree": bool(abs(limit[i] - printed[i]) <= 1e-6 * max(1.0, abs(limit[i]))),
        }
        for i in range(3)
    ]
    for row in comparison:
        log.info("printed limit %s: computed %s, printed %s (%s)", row["component"], row["computed"],
                 row["printed"], "agree" if row["agree"] else "disagree")

    gamma_fit = {}
    if fit:
        gamma_fit = {"direct": fit_gamma(nu), "reflected": fit_gamma(nu, reflected=True)}

    return DegenerationReport(
        nu=nu,
        pt=pt,
        ks=ks,
        raw_states=raw,
        states=reg,
        det_residuals=np.array(dets),
        casimir_residuals=np.array(cas),
        raw_growth=raw_growth,
        literal_growth=literal_growth,
        orders=orders,
        order=order,
        limit=limit,
        closed_form=closed,
        extrapolation_error=float(np.max(np.abs(limit - closed))),
        limit_casimir_residual=float(abs(casimir(limit) - nu**2)),
        limit_bracket_residual=spin_bracket_residual(s_fn, pt, h_fd),
        bounded_s1_error=float(abs(limit[0] - bounded_limit_s1(nu, pt))),
        printed_comparison=comparison,
        gamma_fit=gamma_fit,
        diverged=diverged,
        message=message,
    )
