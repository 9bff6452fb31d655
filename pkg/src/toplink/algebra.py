"""sl(2,C) coadjoint-orbit data: spin and Chevalley coordinates, top flows, automorphisms.

Spin components obey ``{S_i, S_j} = 2i eps_ijk S_k``; the Chevalley triple obeys
``{h, e} = 2e, {h, f} = -2f, {e, f} = h``.  Everything is complex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np
import scipy.linalg

from .errors import InvalidTransformError

ORTHOGONALITY_TOL = 1e-10


class SpinState(NamedTuple):
    S1: complex
    S2: complex
    S3: complex


class ChevalleyState(NamedTuple):
    h: complex
    e: complex
    f: complex


State = Union[SpinState, ChevalleyState]


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    return eps


LEVI_CIVITA = _levi_civita()
# {S_i, S_j} = STRUCTURE_CONSTANTS[i, j, k] S_k
STRUCTURE_CONSTANTS = 2j * LEVI_CIVITA


def structure_constant_residuals(C: np.ndarray = STRUCTURE_CONSTANTS) -> tuple[float, float]:
    """Max violation of antisymmetry and of the Jacobi identity, by exhaustive index check."""
    antisym = float(np.max(np.abs(C + C.transpose(1, 0, 2))))
    worst = 0.0
    for i, j, l, m in itertools.product(range(3), repeat=4):
        # {S_i,{S_j,S_l}} + {S_j,{S_l,S_i}} + {S_l,{S_i,S_j}}, coefficient of S_m
        total = sum(C[j, l, k] * C[i, k, m] + C[l, i, k] * C[j, k, m] + C[i, j, k] * C[l, k, m] for k in range(3))
        worst = max(worst, abs(total))
    return antisym, worst


# -- Casimir and basis conversion ---------------------------------------------------


def casimir(state) -> complex:
    """``h^2 + 4ef`` for Chevalley input, ``S1^2 + S2^2 + S3^2`` otherwise."""
    if isinstance(state, ChevalleyState):
        h, e, f = state
        return h * h + 4 * e * f
    s1, s2, s3 = state
    return s1 * s1 + s2 * s2 + s3 * s3


def to_chevalley(spin, axis: str = "S3") -> ChevalleyState:
    s1, s2, s3 = spin
    if axis == "S3":
        return ChevalleyState(s3, (s1 + 1j * s2) / 2, (s1 - 1j * s2) / 2)
    if axis == "S1":
        return ChevalleyState(s1, (s3 - 1j * s2) / 2, (s3 + 1j * s2) / 2)
    raise ValueError(f"axis must be 'S3' or 'S1', got {axis!r}")


def to_spin(chev, axis: str = "S3") -> SpinState:
    h, e, f = chev
    if axis == "S3":
        return SpinState(e + f, 1j * (f - e), h)
    if axis == "S1":
        return SpinState(h, 1j * (e - f), e + f)
    raise ValueError(f"axis must be 'S3' or 'S1', got {axis!r}")


def convert_basis(state: State, direction: str | None = None, axis: str = "S3") -> State:
    """Switch between spin and Chevalley coordinates.

    ``direction`` is ``"spin->chevalley"`` or ``"chevalley->spin"``; when omitted
    it follows from the type of ``state``.
    """
    if direction is None:
        direction = "chevalley->spin" if isinstance(state, ChevalleyState) else "spin->chevalley"
    if direction == "spin->chevalley":
        return to_chevalley(state, axis)
    if direction == "chevalley->spin":
        return to_spin(state, axis)
    raise ValueError(f"unknown direction {direction!r}")


# -- quadratic forms and the top flow ---------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Symmetric complex 3x3 matrix J of ``H = J_ij S_i S_j``.

    ``field_tensor[k, i, m]`` holds the Leibniz expansion of ``{H, S_k}``, so that
    ``dS_k/dt = field_tensor[k, i, m] S_i S_m``.
    """

    matrix: np.ndarray
    field_tensor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        J = np.array(self.matrix, dtype=complex)
        if J.shape != (3, 3):
            raise ValueError(f"quadratic form must be 3x3, got shape {J.shape}")
        J = (J + J.T) / 2
        J.setflags(write=False)
        object.__setattr__(self, "matrix", J)
        # {S_i S_j, S_k} = S_i C_jkm S_m + S_j C_ikm S_m  and J symmetric
        V = 2 * np.einsum("ij,jkm->kim", J, STRUCTURE_CONSTANTS)
        V.setflags(write=False)
        object.__setattr__(self, "field_tensor", V)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def as_form(J) -> QuadraticForm:
    return J if isinstance(J, QuadraticForm) else QuadraticForm(J)


def top_hamiltonian(J, S) -> complex:
    M = as_form(J).matrix
    s = np.asarray(S, dtype=complex)
    return complex(s @ M @ s)


def top_vector_field(J, S) -> np.ndarray:
    """dS/dt = {H_J, S} as a length-3 complex array."""
    V = as_form(J).field_tensor
    s = np.asarray(S, dtype=complex)
    return V.reshape(3, 9) @ np.outer(s, s).ravel()


# -- automorphisms -----------------------------------------------------------------


class AutomorphismCheck(NamedTuple):
    passed: bool
    orthogonality_residual: float
    det_residual: float


def check_automorphism(T, tol: float = ORTHOGONALITY_TOL) -> AutomorphismCheck:
    T = np.asarray(T, dtype=complex)
    orth = float(np.max(np.abs(T @ T.T - np.eye(3))))
    det = float(abs(np.linalg.det(T) - 1))
    return AutomorphismCheck(orth <= tol and det <= tol, orth, det)


def conjugate(T, x, tol: float = ORTHOGONALITY_TOL):
    """Act with a proper complex orthogonal T: ``S -> T S`` or ``J -> T J T^t``."""
    check = check_automorphism(T, tol)
    if not check.passed:
        raise InvalidTransformError(
            f"not a proper orthogonal transform (|TT^t - I| = {check.orthogonality_residual:.3g}, "
            f"|det T - 1| = {check.det_residual:.3g})"
        )
    if isinstance(x, ChevalleyState):
        raise TypeError("conjugate acts in the spin basis; convert the Chevalley state first")
    T = np.asarray(T, dtype=complex)
    if isinstance(x, QuadraticForm) or np.ndim(x) == 2:
        return QuadraticForm(T @ as_form(x).matrix @ T.T)
    return SpinState(*(T @ np.asarray(x, dtype=complex)))


def plane_rotation(i: int, j: int, angle: complex) -> np.ndarray:
    """Rotation by a (possibly complex) angle in the (i, j) coordinate plane."""
    R = np.eye(3, dtype=complex)
    c, s = np.cos(complex(angle)), np.sin(complex(angle))
    R[i, i] = R[j, j] = c
    R[i, j], R[j, i] = -s, s
    return R


def random_rotation(rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Proper complex orthogonal matrix ``expm(A)`` for a random complex antisymmetric A."""
    a = scale * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    A = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return scipy.linalg.expm(A)
