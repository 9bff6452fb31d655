import numpy as np
import pytest
from numpy.testing import assert_allclose

from toplink.algebra import random_rotation
from toplink.canonical import (
    XXXprime,
    XXZprime,
    XYZ,
    canonical_matrix,
    classify,
    nilpotency_witness,
    reduce,
)
from toplink.errors import AmbiguousClassificationError

XXZ_EXAMPLE = np.array([[1, 1j, 0], [1j, -1, 0], [0, 0, 2]])
XXX_EXAMPLE = np.array([[1, 1j, 1], [1j, -1, 1j], [1, 1j, 0]])

SEEDS = [
    XYZ(1, 2, 3),
    XYZ(0.5 + 1j, -1, 2 - 0.3j),
    XXZprime(1, 2),
    XXZprime(0.3 + 0.2j, -1.2),
    XXZprime(1, 0),
    XXXprime(1, 1),
    XXXprime(0.25, 0.3 + 0.1j),
]


def test_canonical_patterns():
    a, b, c = 0.5, 2j, -1
    assert_allclose(canonical_matrix(XYZ(a, b, c)).matrix, np.diag([a, b, c]))
    assert_allclose(canonical_matrix(XXZprime(a, b)).matrix, [[a, 1j * a, 0], [1j * a, -a, 0], [0, 0, b]])
    assert_allclose(canonical_matrix(XXXprime(a, b)).matrix, [[a, 1j * a, b], [1j * a, -a, 1j * b], [b, 1j * b, 0]])


def test_classify_examples():
    assert classify(np.diag([1, 2, 3])) == XYZ(1, 2, 3)
    assert classify(XXZ_EXAMPLE) == XXZprime(1, 2)
    assert classify(XXX_EXAMPLE) == XXXprime(1, 1)


def test_xxx_example_chain():
    # Jordan chain of the XXX' block: M m = n + e3, M^2 m = n, M^3 = 0 with n = (1, i, 0)
    M = XXX_EXAMPLE
    n = np.array([1, 1j, 0])
    m = np.array([1, 0, 0])
    assert_allclose(M @ m, n + np.array([0, 0, 1]))
    assert_allclose(M @ (M @ m), n)
    assert_allclose(M @ M @ M, 0, atol=1e-15)


def test_reduce_trivial():
    res = reduce(np.diag([1, 2, 3]))
    assert_allclose(res.transform, np.eye(3))
    assert res.casimir_shift == 0 and res.residual == 0 and res.hamiltonian_scale == 1


def _eig_match(a, b):
    b = list(b)
    out = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        out = max(out, abs(x - b.pop(j)))
    return out


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: f"{s.name}{s.params}")
def test_conjugation_invariance_and_reduction(rng, seed):
    J0 = canonical_matrix(seed).matrix
    ref = classify(J0)
    for _ in range(100):
        T = random_rotation(rng)
        J = T @ J0 @ T.T
        got = classify(J)
        assert got.name == ref.name
        assert_allclose(got.params, ref.params, atol=1e-6)
        res = reduce(J)
        assert res.residual <= 1e-8
        target = canonical_matrix(res.cls).matrix
        assert_allclose(res.transform @ J @ res.transform.T + res.casimir_shift * np.eye(3), target, atol=1e-8)
        if seed.name == "XYZ":
            assert _eig_match(got.params, np.linalg.eigvals(J0)) <= 1e-8
        else:
            assert nilpotency_witness(J)["passed"]


def test_shift_invariance(rng):
    c = 0.7 - 0.4j
    for seed in SEEDS:
        J0 = canonical_matrix(seed).matrix
        got, shifted = classify(J0), classify(J0 + c * np.eye(3))
        assert got.name == shifted.name
        if got.name == "XYZ":
            assert _eig_match(shifted.params, np.array(got.params) + c) <= 1e-10
        else:
            assert_allclose(shifted.params, got.params, atol=1e-8)


def test_xyz_sorted_lexicographically():
    assert classify(np.diag([3, 1j, -1, ][::-1])).params == (-1 + 0j, 1j, 3 + 0j)


def test_nilpotency_witness_fields():
    w = nilpotency_witness(XXX_EXAMPLE)
    assert w["class"] == "XXXprime" and w["passed"]
    assert w["M3"] <= 1e-8 * w["M"] ** 3 < w["M2"]
    assert nilpotency_witness(XXZ_EXAMPLE)["passed"]


def test_ambiguous_pair_raises():
    # eigenvalues 0 and 1e-6 sit inside the sqrt(tol) band but stay diagonalisable
    with pytest.raises(AmbiguousClassificationError) as info:
        classify(np.diag([1.0, 0.0, 1e-6]))
    assert set(info.value.candidates) == {"XYZ", "XXZprime"}


def test_exact_repeated_eigenvalue_is_xyz():
    assert classify(np.diag([2.0, 2.0, 5.0])).name == "XYZ"
