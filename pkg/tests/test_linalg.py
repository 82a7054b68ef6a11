import numpy as np
import pytest

from altphase import (
    AdjointPairError,
    align_global_phase,
    cgnr_least_squares,
    dist,
    phase,
    power_iteration,
)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_phase_basic_values():
    assert phase(3 + 4j) == pytest.approx(0.6 + 0.8j)
    assert phase(-2) == pytest.approx(-1.0)
    assert phase(0) == 1.0 + 0.0j


def test_phase_rejects_non_finite():
    with pytest.raises(ValueError):
        phase(complex(np.inf, 0.0))
    with pytest.raises(ValueError):
        phase(complex(0.0, np.nan))


def test_phase_unit_modulus_and_scale_invariance():
    rng = np.random.default_rng(7)
    for z in crandn(rng, 500):
        p = phase(z)
        assert abs(abs(p) - 1.0) <= 1e-12
        assert phase(3.7 * z) == pytest.approx(p, abs=1e-12)


def test_phase_perturbation_inequality_fuzz():
    # |Ph(1+w) - 1| <= 2|w| across ten decades of |w|
    rng = np.random.default_rng(11)
    mags = 10.0 ** rng.uniform(-6, 3, 10**5)
    w = mags * np.exp(1j * rng.uniform(-np.pi, np.pi, 10**5))
    for wi, mi in zip(w[:: 97], mags[:: 97]):
        assert abs(phase(1 + wi) - 1) <= 2 * mi


def unit(n, i):
    e = np.zeros(n, dtype=complex)
    e[i] = 1.0
    return e


def test_dist_reference_points():
    e1, e2 = unit(4, 0), unit(4, 1)
    assert dist(e1, e1) == 0.0
    assert dist(e1, e2) == 1.0
    assert dist(e1, (e1 + e2) / np.sqrt(2)) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_dist_phase_and_scale_invariant_and_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = crandn(rng, 6)
        y = crandn(rng, 6)
        phi = rng.uniform(-np.pi, np.pi)
        c = rng.uniform(0.1, 10.0)
        assert dist(x, np.exp(1j * phi) * c * x) <= 1e-10
        d = dist(x, y)
        assert d == pytest.approx(dist(y, x), abs=1e-12)
        assert 0.0 <= d <= 1.0


def test_dist_rejects_bad_inputs():
    e1 = unit(3, 0)
    with pytest.raises(ValueError):
        dist(e1, np.zeros(3, dtype=complex))
    with pytest.raises(ValueError):
        dist(e1, unit(4, 0))


def test_align_global_phase_reference_cases():
    e1 = unit(2, 0)
    aligned, ok = align_global_phase(1j * e1, e1)
    assert ok
    np.testing.assert_allclose(aligned, e1, atol=1e-12)
    aligned, ok = align_global_phase(e1, e1)
    assert ok
    np.testing.assert_allclose(aligned, e1, atol=1e-12)
    rng = np.random.default_rng(5)
    x = crandn(rng, 8)
    aligned, ok = align_global_phase(-x, x)
    assert ok
    np.testing.assert_allclose(aligned, x, atol=1e-12)


def test_align_global_phase_properties():
    rng = np.random.default_rng(9)
    for _ in range(25):
        x = crandn(rng, 5)
        ref = crandn(rng, 5)
        aligned, ok = align_global_phase(x, ref)
        assert ok
        assert dist(aligned, x) <= 1e-10
        ip = np.vdot(ref, aligned)
        assert abs(ip.imag) <= 1e-10 * np.linalg.norm(ref) * np.linalg.norm(x)
        assert ip.real >= 0
        assert np.linalg.norm(aligned) == pytest.approx(np.linalg.norm(x))


def test_align_global_phase_orthogonal_flagged():
    e1, e2 = unit(2, 0), unit(2, 1)
    aligned, ok = align_global_phase(e2, e1)
    assert not ok
    np.testing.assert_array_equal(aligned, e2)


def test_power_iteration_dominant_diagonal():
    d = np.array([3.0, 1.0, 1.0])
    result = power_iteration(lambda v: d * v, 3, max_iters=500, tol=1e-10)
    assert result.converged
    assert result.eigenvalue == pytest.approx(3.0, rel=1e-8)
    assert dist(result.vector, unit(3, 0)) <= 1e-6
    assert np.linalg.norm(result.vector) == pytest.approx(1.0)


def test_power_iteration_identity():
    result = power_iteration(lambda v: v, 4, max_iters=100, tol=1e-8)
    assert result.converged
    assert result.eigenvalue == pytest.approx(1.0)
    assert np.linalg.norm(result.vector) == pytest.approx(1.0)


def test_power_iteration_agrees_with_dense_eigensolver():
    # weighted covariance of a seeded ensemble vs numpy's eigh
    rng = np.random.default_rng(21)
    n, m = 8, 800
    A = crandn(rng, n, m)
    y = np.abs(A.conj().T @ unit(n, 0))
    S = (A * (y * y)) @ A.conj().T / m
    result = power_iteration(lambda v: S @ v, n, max_iters=2000, tol=1e-10)
    assert result.converged
    evals, evecs = np.linalg.eigh(S)
    assert abs(result.eigenvalue - evals[-1]) <= 1e-6 * evals[-1]
    assert dist(result.vector, evecs[:, -1]) <= 1e-6
    assert dist(result.vector, unit(n, 0)) < 0.3


def test_power_iteration_max_iters_flag():
    d = np.array([1.0, 1.0 - 1e-9])
    result = power_iteration(lambda v: d * v, 2, max_iters=5, tol=1e-300)
    assert not result.converged
    assert result.iterations == 5


def test_cgnr_identity():
    rng = np.random.default_rng(2)
    b = crandn(rng, 6)
    result = cgnr_least_squares(lambda x: x, lambda r: r, b)
    assert result.converged
    np.testing.assert_allclose(result.x, b, atol=1e-12)


def test_cgnr_consistent_system_matches_direct_solve():
    rng = np.random.default_rng(4)
    n, m = 16, 64
    A = crandn(rng, n, m)
    rows = np.ascontiguousarray(A.conj().T)
    x_true = crandn(rng, n)
    b = rows @ x_true
    result = cgnr_least_squares(lambda x: rows @ x, lambda r: A @ r, b, tol=1e-13)
    assert result.converged
    assert np.linalg.norm(result.x - x_true) <= 1e-10 * np.linalg.norm(x_true)
    direct = np.linalg.solve(rows.conj().T @ rows, rows.conj().T @ b)
    assert np.linalg.norm(result.x - direct) <= 1e-10 * np.linalg.norm(direct)


def test_cgnr_orthogonal_rhs_gives_zero():
    # forward embeds C^1 into the first coordinate of C^2; b lives in the other
    forward = lambda x: np.array([x[0], 0.0 + 0.0j])
    adjoint = lambda r: np.array([r[0]])
    b = np.array([0.0 + 0.0j, 1.0 + 0.0j])
    result = cgnr_least_squares(forward, adjoint, b)
    assert result.converged
    np.testing.assert_allclose(result.x, [0.0 + 0.0j], atol=1e-15)


def test_cgnr_random_instances_match_normal_equations():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 33))
        m = int(rng.integers(n, 129))
        A = crandn(rng, n, m)
        rows = np.ascontiguousarray(A.conj().T)
        b = crandn(rng, m)
        result = cgnr_least_squares(lambda x: rows @ x, lambda r: A @ r, b,
                                    tol=1e-13, max_iters=8 * n)
        direct = np.linalg.solve(rows.conj().T @ rows, rows.conj().T @ b)
        assert np.linalg.norm(result.x - direct) <= 1e-8 * np.linalg.norm(direct)


def test_cgnr_detects_inconsistent_adjoint():
    rng = np.random.default_rng(8)
    A = crandn(rng, 4, 9)
    rows = np.ascontiguousarray(A.conj().T)
    wrong = crandn(rng, 4, 9)
    with pytest.raises(AdjointPairError):
        cgnr_least_squares(lambda x: rows @ x, lambda r: wrong @ r,
                           crandn(rng, 9), check_adjoint=True)
