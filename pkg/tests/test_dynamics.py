import csv
import io
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from toplink.bosonisation import Elliptic, Rational, Trigonometric, potential, potential_derivative
from toplink.dynamics import (
    IntegratorConfig,
    conserved_drift,
    empirical_order,
    integrate_cm,
    integrate_top,
    trajectory_csv,
    trajectory_summary,
)
from toplink.special import complete_elliptic

J123 = np.diag([1.0, 2.0, 3.0])


def euler_field(J, S):
    """dS/dt = 2i (S x grad H) written out by components, grad H = 2 J S."""
    g = 2 * J @ S
    return 2j * np.array([S[1] * g[2] - S[2] * g[1], S[2] * g[0] - S[0] * g[2], S[0] * g[1] - S[1] * g[0]])


def reference_top(J, S0, times):
    sol = solve_ivp(lambda t, y: euler_field(J, y), (0, times[-1]), np.asarray(S0, dtype=complex),
                    method="DOP853", t_eval=times, rtol=1e-13, atol=1e-13)
    return sol.y.T


@pytest.mark.parametrize("nu", [1.0, 2.5, 0.3 + 0.4j])
def test_axis_equilibrium_is_constant(nu):
    J = np.diag([0.7, -1.2, 2.0 + 1j])
    traj = integrate_top(J, [nu, 0, 0])
    assert traj.completed
    assert np.all(traj.states == traj.states[0])
    assert conserved_drift(traj, "H") == 0 and conserved_drift(traj, "Omega") == 0


def test_casimir_shift_gives_same_trajectory():
    S0 = [1, 0.5, -0.3]
    a = integrate_top(J123, S0)
    assert a.completed
    b = integrate_top(J123 + (0.4 - 0.2j) * np.eye(3), S0)
    assert np.max(np.abs(a.states - b.states)) <= 1e-12


def test_top_casimir_drift_and_halved_step():
    cfg = IntegratorConfig(dt=1e-3, t_end=1)
    traj = integrate_top(J123, [1, 1, 1], cfg)
    assert traj.completed and len(traj.times) == 1001
    assert np.max(np.abs(traj.casimir - 3)) <= 1e-9
    assert conserved_drift(traj, "H") <= 1e-8
    half = integrate_top(J123, [1, 1, 1], IntegratorConfig(dt=5e-4, t_end=1))
    assert np.max(np.abs(half.states[::2] - traj.states)) <= 1e-9


def test_top_matches_independent_solver():
    S0 = np.array([0.4, 0.3 + 0.1j, -0.2])
    J = np.array([[1, 0.3, 0], [0.3, -0.5, 0.2j], [0, 0.2j, 0.8]])
    traj = integrate_top(J, S0, IntegratorConfig(t_end=0.5))
    assert_allclose(traj.states, reference_top(J, S0, traj.times), atol=1e-9)


def test_free_motion_when_nu_vanishes():
    p0, q0 = 0.3 - 0.1j, 1.0
    traj = integrate_cm(Rational(1, 0), (p0, q0), IntegratorConfig(t_end=0.5))
    assert_allclose(traj.states[:, 0], p0, atol=1e-15)
    assert_allclose(traj.states[:, 1], q0 + 2 * p0 * traj.times, atol=1e-13)


def test_rational_energy_and_exact_solution():
    # for p^2 - 1/(4 q^2) one has (q^2)'' = 8 H, so from (0, 1): q(t) = sqrt(1 - t^2)
    traj = integrate_cm(Rational(1, 1), (0, 1), IntegratorConfig(dt=1e-3, t_end=0.2))
    assert traj.completed
    assert np.max(np.abs(traj.hamiltonian + 0.25)) <= 1e-9
    assert_allclose(traj.states[:, 1], np.sqrt(1 - traj.times**2), atol=1e-11)


def test_rational_collapse_is_flagged():
    traj = integrate_cm(Rational(1, 1), (0, 1), IntegratorConfig(t_end=1.5))
    assert traj.singular and not traj.completed
    assert traj.times[-1] < 1.0
    # the stored prefix stays accurate up to the stop
    assert_allclose(traj.states[:, 1], np.sqrt(1 - traj.times**2), atol=1e-3)


def test_rk45_event_flags_collapse():
    traj = integrate_cm(Rational(1, 1), (0, 1), IntegratorConfig(t_end=1.5, method="rk45"))
    assert traj.singular and traj.times[-1] < 1.0


def test_start_inside_guard_is_flagged():
    traj = integrate_cm(Trigonometric(1, 1), (0, 1e-4), IntegratorConfig())
    assert traj.singular and len(traj.times) == 1


def test_elliptic_turning_point():
    k, nu = 0.5, 1.0
    case = Elliptic(k, nu)
    q0 = complete_elliptic(k)[0].real / 2
    h = 1e-5
    fd = (potential(case, q0 + h) - potential(case, q0 - h)) / (2 * h)
    assert abs(potential_derivative(case, q0) - fd) <= 1e-8
    traj = integrate_cm(case, (0, q0), IntegratorConfig(t_end=0.2))
    dq0 = (traj.states[1, 1] - traj.states[0, 1]) / traj.times[1]
    dp0 = (traj.states[1, 0] - traj.states[0, 0]) / traj.times[1]
    assert abs(dq0) <= 1e-12
    assert abs(dp0 + fd) <= 1e-8


def test_divergent_top_keeps_finite_prefix():
    traj = integrate_top(J123, [1, 1j, 0])
    assert traj.divergent
    assert 0 < traj.times[-1] < 1
    assert np.all(np.isfinite(traj.states))
    size = np.max(np.abs(traj.states), axis=1)
    assert np.all(np.diff(size[len(size) // 2:]) > 0)
    # drift is reported over the valid prefix only
    assert math.isfinite(conserved_drift(traj, "H"))


def test_drift_ratio_is_fourth_order():
    case = Elliptic(0.5, 1)
    d = [conserved_drift(integrate_cm(case, (0.1, 0.8), IntegratorConfig(dt=dt)), "H") for dt in (0.04, 0.02)]
    assert 12 <= d[0] / d[1] <= 20


@pytest.mark.parametrize(
    "run",
    [
        lambda dt: integrate_top(J123, [1, 1, 1], IntegratorConfig(dt=dt)),
        lambda dt: integrate_cm(Trigonometric(1, 1), (0.5, 0.8), IntegratorConfig(dt=dt)),
    ],
    ids=["top", "trigonometric"],
)
def test_empirical_order(run):
    assert 3.7 <= empirical_order(run, 0.02) <= 4.3


def test_rk45_agrees_with_rk4():
    a = integrate_cm(Elliptic(0.5, 1), (0.1, 0.8))
    b = integrate_cm(Elliptic(0.5, 1), (0.1, 0.8), IntegratorConfig(method="rk45"))
    assert b.completed
    assert_allclose(a.times, b.times)
    assert np.max(np.abs(a.states - b.states)) <= 1e-8


def test_config_validation():
    for bad in (dict(dt=0), dict(t_end=-1), dict(singularity_eps=0), dict(method="euler")):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)
    assert IntegratorConfig(dt=0.1, t_end=1).n_steps == 10


def test_conserved_drift_errors():
    traj = integrate_cm(Rational(1, 1), (0, 1), IntegratorConfig(t_end=0.01))
    with pytest.raises(ValueError):
        conserved_drift(traj, "Omega")
    with pytest.raises(ValueError):
        conserved_drift(traj, "E")


def test_csv_layout_and_round_trip():
    traj = integrate_top(J123, [1, 1, 1], IntegratorConfig(dt=0.1, t_end=0.3))
    text = trajectory_csv(traj)
    assert text == trajectory_csv(integrate_top(J123, [1, 1, 1], IntegratorConfig(dt=0.1, t_end=0.3)))
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "S1_re", "S1_im", "S2_re", "S2_im", "S3_re", "S3_im", "H_re", "H_im", "Omega_re", "Omega_im"]
    assert len(rows) == 5
    back = np.array([[float(x) for x in r] for r in rows[1:]])
    assert np.array_equal(back[:, 0], traj.times)
    assert np.array_equal(back[:, 1] + 1j * back[:, 2], traj.states[:, 0])
    assert np.array_equal(back[:, 9] + 1j * back[:, 10], traj.casimir)


def test_cm_csv_columns_and_summary():
    traj = integrate_cm(Rational(1, 1), (0, 1), IntegratorConfig(dt=0.05, t_end=0.1))
    assert trajectory_csv(traj).splitlines()[0] == "t,p_re,p_im,q_re,q_im,H_re,H_im"
    s = trajectory_summary(traj)
    assert s["status"] == "ok" and s["samples"] == 3 and "Omega_drift" not in s
