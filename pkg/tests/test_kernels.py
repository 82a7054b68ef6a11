"""The compiled and pure kernel twins must agree on identical inputs."""

import numpy as np
import pytest

from altphase import _kernels_py, backend, cgnr_least_squares

try:
    from altphase import _kernels as _compiled
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None,
                                    reason="compiled extension not built")


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _dense_pair(rng, n, m):
    A = crandn(rng, n, m)
    return np.ascontiguousarray(A.conj().T), np.ascontiguousarray(A)


def test_pure_apply_phases_zero_convention():
    z = np.array([0.0 + 0.0j, 2.0 + 0.0j, -3j])
    y = np.array([5.0, 4.0, 2.0])
    out = _kernels_py.apply_phases(z, y)
    np.testing.assert_allclose(out, [5.0, 4.0, -2j], atol=1e-15)


@needs_compiled
def test_apply_phases_backends_agree():
    rng = np.random.default_rng(0)
    z = crandn(rng, 257)
    z[[0, 100]] = 0.0
    y = np.abs(rng.standard_normal(257))
    a = _compiled.apply_phases(z, y)
    b = _kernels_py.apply_phases(z, y)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)
    assert np.max(np.abs(np.abs(a[y > 0] / y[y > 0]) - 1.0)) <= 1e-12


@needs_compiled
def test_cgnr_dense_backends_agree():
    rng = np.random.default_rng(1)
    for n, m in [(4, 16), (16, 64), (32, 200)]:
        rows, cols = _dense_pair(rng, n, m)
        b = crandn(rng, m)
        x0 = np.zeros(n, dtype=complex)
        xc, ic, cc = _compiled.cgnr_dense(rows, cols, b, x0, 1e-12, 8 * n)
        xp, ip_, cp = _kernels_py.cgnr_dense(rows, cols, b, x0, 1e-12, 8 * n)
        assert cc and cp
        assert np.linalg.norm(xc - xp) <= 1e-10 * np.linalg.norm(xp)


def test_cgnr_dense_matches_generic_solver():
    rng = np.random.default_rng(2)
    rows, cols = _dense_pair(rng, 12, 60)
    b = crandn(rng, 60)
    x0 = np.zeros(12, dtype=complex)
    x, _, converged = backend.cgnr_dense(rows, cols, b, x0, 1e-12, 96)
    assert converged
    generic = cgnr_least_squares(lambda v: rows @ v, lambda r: cols @ r, b,
                                 tol=1e-12, max_iters=96)
    assert np.linalg.norm(x - generic.x) <= 1e-9 * np.linalg.norm(generic.x)


def test_cgnr_dense_warm_start_at_solution():
    rng = np.random.default_rng(3)
    rows, cols = _dense_pair(rng, 8, 40)
    x_true = crandn(rng, 8)
    b = rows @ x_true
    x, iters, converged = backend.cgnr_dense(rows, cols, b, x_true, 1e-10, 32)
    assert converged
    assert iters == 0
    np.testing.assert_allclose(x, x_true, atol=1e-12)


def test_backend_switching():
    assert backend.active_backend() in backend.available_backends()
    with backend.temporary_backend("pure"):
        assert backend.active_backend() == "pure"
        rng = np.random.default_rng(4)
        z = crandn(rng, 9)
        y = np.abs(rng.standard_normal(9))
        np.testing.assert_array_equal(backend.apply_phases(z, y),
                                      _kernels_py.apply_phases(z, y))
    with pytest.raises(ValueError):
        backend.set_backend("bogus")


@needs_compiled
def test_compiled_kernel_validates_shapes():
    rng = np.random.default_rng(5)
    rows, cols = _dense_pair(rng, 4, 10)
    with pytest.raises(ValueError):
        _compiled.apply_phases(crandn(rng, 5), np.ones(4))
    with pytest.raises(ValueError):
        _compiled.cgnr_dense(rows, rows, crandn(rng, 10),
                             np.zeros(4, complex), 1e-10, 10)
