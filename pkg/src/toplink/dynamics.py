"""Numerical flows on both sides of the correspondence.

Top side: ``dS/dt = {H_J, S}``.  Two-body side: ``dq/dt = dH/dp = 2p``,
``dp/dt = -dH/dq = -U'(q)`` (bracket ``{p, q} = 1``).  States are complex.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import as_form, casimir
from .bosonisation import BosonCase, cm_hamiltonian, potential_derivative, singular_distance
from .errors import PoleError

log = logging.getLogger(__name__)

METHODS = ("rk4", "rk45")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    method: str = "rk4"
    singularity_eps: float = 1e-3
    drift_budget: float = 1e-8
    overflow_guard: float = 1e12
    rk45_rtol: float = 1e-10
    # a fixed step moving q by more than this fraction of its distance to the
    # singular set is treated as an unresolved approach
    resolution_ratio: float = 0.1

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0 and self.singularity_eps > 0):
            raise ValueError("dt, t_end and singularity_eps must be positive")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass
class Trajectory:
    """Samples of a flow.  Only the valid prefix is stored when a run stops early."""

    kind: str  # "top" or "cm"
    times: np.ndarray
    states: np.ndarray
    hamiltonian: np.ndarray
    casimir: Optional[np.ndarray] = None
    status: str = "ok"  # "ok" | "divergent" | "singular"
    message: str = ""
    columns: tuple = field(default=())

    @property
    def divergent(self) -> bool:
        return self.status == "divergent"

    @property
    def singular(self) -> bool:
        return self.status == "singular"

    @property
    def completed(self) -> bool:
        return self.status == "ok"


def _rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + dt / 2 * k1)
    k3 = f(y + dt / 2 * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _run(f, y0, cfg: IntegratorConfig, guard: Callable, event=None):
    """Integration sampled on the grid ``i * dt``.

    ``guard(y, y_prev)`` returns (status, message) to stop; ``event(y)`` is a
    real function whose sign change stops the adaptive integrator.
    """
    n = cfg.n_steps
    times = [0.0]
    ys = [np.asarray(y0, dtype=complex)]
    status, message = "ok", ""
    hit = guard(ys[0], None)
    if hit:
        return np.array(times), np.array(ys), hit
    if cfg.method == "rk4":
        y = ys[0]
        for i in range(1, n + 1):
            try:
                y = _rk4_step(f, y, cfg.dt)
            except (PoleError, ZeroDivisionError, OverflowError) as exc:
                status, message = "singular", f"step {i}: {exc}"
                break
            if not np.all(np.isfinite(y)):
                status, message = "divergent", f"non-finite state at t={i * cfg.dt:g}"
                break
            hit = guard(y, ys[-1])
            if hit:
                status, message = hit
                break
            times.append(i * cfg.dt)
            ys.append(y)
    else:
        grid = np.arange(n + 1) * cfg.dt
        events = None
        if event is not None:
            stop = lambda t, y: event(y)
            stop.terminal = True
            events = [stop]
        try:
            sol = solve_ivp(lambda t, y: f(y), (0.0, grid[-1]), ys[0], method="RK45", t_eval=grid,
                            rtol=cfg.rk45_rtol, atol=cfg.rk45_rtol * 1e-3, events=events)
        except (PoleError, ZeroDivisionError, OverflowError) as exc:
            return np.array(times), np.array(ys), ("singular", str(exc))
        for t, y in zip(sol.t[1:], sol.y.T[1:]):
            if np.all(np.isfinite(y)):
                hit = guard(y, ys[-1])
            else:
                hit = ("divergent", f"non-finite state at t={t:g}")
            if hit:
                status, message = hit
                break
            times.append(float(t))
            ys.append(y)
        else:
            if sol.status == 1:
                status, message = "singular", f"singularity guard triggered at t={sol.t_events[0][0]:g}"
            elif not sol.success:
                status, message = "divergent", sol.message
    return np.array(times), np.array(ys), (status, message)


def integrate_top(J, S0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate ``dS/dt = {H_J, S}``; log H and the Casimir at every sample."""
    form = as_form(J)
    V = form.field_tensor.reshape(3, 9)
    M = form.matrix

    def f(s):
        return V @ np.outer(s, s).ravel()

    def guard(s, prev):
        if np.max(np.abs(s)) > cfg.overflow_guard:
            return "divergent", f"|S| exceeded {cfg.overflow_guard:g}"
        return None

    times, states, (status, message) = _run(f, S0, cfg, guard)
    if status != "ok":
        log.warning("top flow stopped early: %s", message)
    ham = np.einsum("ni,ij,nj->n", states, M, states)
    cas = np.array([casimir(s) for s in states])
    return Trajectory("top", times, states, ham, cas, status, message, ("S1", "S2", "S3"))


def integrate_cm(case: BosonCase, pt0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the two-body flow ``(p, q)`` for the case's potential."""

    def f(y):
        p, q = y
        return np.array([-potential_derivative(case, q), 2 * p])

    def guard(y, prev):
        q = y[1]
        d = singular_distance(case, q)
        if d < cfg.singularity_eps:
            return "singular", f"q={q:.6g} within {d:.3g} of a singularity"
        if prev is not None:
            # a fixed step can hop across a pole without landing near it
            dq = abs(q - prev[1])
            d_prev = singular_distance(case, prev[1])
            if dq > cfg.resolution_ratio * d_prev:
                return "singular", f"step from q={prev[1]:.6g} to q={q:.6g} is unresolved near a singularity"
        if np.max(np.abs(y)) > cfg.overflow_guard:
            return "divergent", f"|(p, q)| exceeded {cfg.overflow_guard:g}"
        return None

    def event(y):
        return singular_distance(case, y[1]) - cfg.singularity_eps

    times, states, (status, message) = _run(f, [complex(pt0[0]), complex(pt0[1])], cfg, guard, event)
    if status != "ok":
        log.warning("two-body flow stopped early: %s", message)
    ham = np.array([cm_hamiltonian(case, s) for s in states])
    return Trajectory("cm", times, states, ham, None, status, message, ("p", "q"))


def conserved_drift(traj: Trajectory, which: str = "H") -> float:
    """Max deviation of H (or the Casimir, ``which="Omega"``) from its initial value."""
    if which == "H":
        vals = traj.hamiltonian
    elif which == "Omega":
        if traj.casimir is None:
            raise ValueError("trajectory carries no Casimir log")
        vals = traj.casimir
    else:
        raise ValueError(f"which must be 'H' or 'Omega', got {which!r}")
    if len(vals) == 0:
        raise ValueError("empty trajectory")
    return float(np.max(np.abs(vals - vals[0])))


def empirical_order(run: Callable[[float], Trajectory], dt: float) -> float:
    """Convergence order from final states at steps dt, dt/2, dt/4."""
    ends = [run(dt / 2**j).states[-1] for j in range(3)]
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    return math.log2(e1 / e2)


# -- output -------------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text: t, Re/Im pairs of the coordinates, then H (and Omega for the top)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["t"]
    for c in traj.columns:
        header += [f"{c}_re", f"{c}_im"]
    header += ["H_re", "H_im"]
    if traj.casimir is not None:
        header += ["Omega_re", "Omega_im"]
    w.writerow(header)
    for i, t in enumerate(traj.times):
        row = [_fmt(t)]
        for z in traj.states[i]:
            row += [_fmt(z.real), _fmt(z.imag)]
        row += [_fmt(traj.hamiltonian[i].real), _fmt(traj.hamiltonian[i].imag)]
        if traj.casimir is not None:
            row += [_fmt(traj.casimir[i].real), _fmt(traj.casimir[i].imag)]
        w.writerow(row)
    return buf.getvalue()


def trajectory_summary(traj: Trajectory) -> dict:
    out = {
        "kind": traj.kind,
        "status": traj.status,
        "message": traj.message,
        "samples": int(len(traj.times)),
        "t_final": float(traj.times[-1]) if len(traj.times) else 0.0,
        "H_drift": conserved_drift(traj, "H"),
    }
    if traj.casimir is not None:
        out["Omega_drift"] = conserved_drift(traj, "Omega")
    return out
