"""Pure-numpy twin of the compiled kernels in ``altphase._kernels``.

``altphase.backend`` selects between the two at import time; both expose the
same two functions with identical semantics.
"""

import numpy as np


def apply_phases(z, y):
    """Elementwise ``(z_i / |z_i|) * y_i`` with the convention 0/|0| == 1."""
    z = np.asarray(z, dtype=np.complex128)
    y = np.asarray(y, dtype=np.float64)
    if z.shape != y.shape:
        raise ValueError("z and y must have the same length")
    mag = np.abs(z)
    safe = np.where(mag == 0.0, 1.0, mag)
    c = z / safe
    c = np.where(mag == 0.0, np.complex128(1.0), c)
    return c * y


def cgnr_dense(rows, cols, b, x0, tol, max_iters):
    """Conjugate gradient on the normal equations of ``min ||rows @ x - b||``.

    ``rows`` is the (m, n) forward matrix and ``cols`` its conjugate
    transpose, both precomputed so no transposes happen in the loop.
    Returns ``(x, iterations, converged)``; converged means the
    normal-equation residual fell below ``tol * ||cols @ b||``.
    """
    x = np.array(x0, dtype=np.complex128, copy=True)
    ref = np.linalg.norm(cols @ b)
    r = b - rows @ x
    s = cols @ r
    gamma = np.vdot(s, s).real
    p = s.copy()
    threshold = tol * ref
    it = 0
    while it < max_iters and np.sqrt(gamma) > threshold:
        q = rows @ p
        qq = np.vdot(q, q).real
        if qq == 0.0:
            break
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        s = cols @ r
        gamma_next = np.vdot(s, s).real
        p = s + (gamma_next / gamma) * p
        gamma = gamma_next
        it += 1
    return x, it, bool(np.sqrt(gamma) <= threshold)
