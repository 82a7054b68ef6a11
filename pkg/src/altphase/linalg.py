"""Complex linear-algebra primitives underlying the recovery algorithms.

Conventions used throughout the package: signals are 1-D ``complex128``
arrays; a dense measurement ensemble is an (n, m) ``complex128`` array whose
columns are the individual measurement vectors; inner products conjugate the
first argument (``np.vdot``).
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np


class NumericalError(RuntimeError):
    """A solver produced non-finite values."""


class AdjointPairError(ValueError):
    """forward/adjoint callables failed the adjoint-consistency probe."""


def phase(z) -> complex:
    """Unit-modulus direction z/|z| of a complex scalar, with phase(0) == 1.

    The zero convention keeps downstream phase assignments deterministic
    when a measurement lands exactly on zero.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("phase() requires a finite complex number")
    mag = abs(z)
    if mag == 0.0:
        return 1.0 + 0.0j
    return z / mag


def phase_vector(z: np.ndarray) -> np.ndarray:
    """Elementwise ``phase`` of a complex array (plain numpy, no kernels)."""
    z = np.asarray(z, dtype=np.complex128)
    mag = np.abs(z)
    safe = np.where(mag == 0.0, 1.0, mag)
    return np.where(mag == 0.0, np.complex128(1.0), z / safe)


def _as_signal(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D vector")
    return x


def dist(x1, x2) -> float:
    """Sine of the principal angle between two complex directions.

    Invariant under global phase and positive rescaling of either argument;
    0 for parallel directions, 1 for orthogonal ones.  Roundoff that pushes
    the cosine marginally past 1 is clamped.
    """
    x1 = _as_signal(x1, "x1")
    x2 = _as_signal(x2, "x2")
    if x1.shape != x2.shape:
        raise ValueError("dist() requires vectors of equal length")
    n1 = np.linalg.norm(x1)
    n2 = np.linalg.norm(x2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("dist() is undefined for zero vectors")
    # ||v - u <u, v>|| equals sqrt(1 - |<u, v>|^2) for unit u, v but stays
    # accurate near parallel vectors, where the radicand would cancel
    u = x1 / n1
    v = x2 / n2
    return min(1.0, float(np.linalg.norm(v - u * np.vdot(u, v))))


def align_global_phase(x, reference) -> tuple[np.ndarray, bool]:
    """Rotate ``x`` by a global phase so ``<reference, x>`` is real nonnegative.

    Returns ``(aligned, ok)``.  When the inner product is exactly zero no
    phase is preferable; ``x`` is returned unchanged with ``ok=False``.
    """
    x = _as_signal(x, "x")
    reference = _as_signal(reference, "reference")
    if x.shape != reference.shape:
        raise ValueError("align_global_phase() requires vectors of equal length")
    ip = np.vdot(reference, x)
    if ip == 0:
        return x.copy(), False
    return x * np.exp(-1j * np.angle(ip)), True


class PowerIterationResult(NamedTuple):
    vector: np.ndarray
    eigenvalue: float
    converged: bool
    iterations: int


def power_iteration(
    apply: Callable[[np.ndarray], np.ndarray],
    n: int,
    max_iters: int = 500,
    tol: float = 1e-6,
    rng: np.random.Generator | None = None,
) -> PowerIterationResult:
    """Dominant eigenpair of a Hermitian PSD operator given as a callable.

    The start vector is drawn from ``rng`` (a fixed default generator when
    omitted, so results are reproducible).  At least ``2 n`` iterations run
    before the residual test ``||apply(v) - lam v|| <= tol * lam`` is
    consulted; hitting ``max_iters`` first returns ``converged=False``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    min_iters = min(2 * n, max_iters)
    lam = 0.0
    for it in range(1, max_iters + 1):
        w = apply(v)
        if not np.all(np.isfinite(w)):
            raise NumericalError("operator returned non-finite values")
        lam = float(np.vdot(v, w).real)
        if it >= min_iters:
            residual = np.linalg.norm(w - lam * v)
            if residual <= tol * max(lam, np.finfo(float).tiny):
                return PowerIterationResult(v, lam, True, it)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # operator annihilates v: it is an exact eigenvector for 0
            return PowerIterationResult(v, 0.0, True, it)
        v = w / norm_w
    return PowerIterationResult(v, lam, False, max_iters)


class CgnrResult(NamedTuple):
    x: np.ndarray
    iterations: int
    converged: bool


def _probe_adjoint(forward, adjoint, n: int, m: int) -> None:
    rng = np.random.default_rng(162543)
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    lhs = np.vdot(forward(u), v)
    rhs = np.vdot(u, adjoint(v))
    scale = abs(lhs) + abs(rhs) + np.finfo(float).tiny
    if abs(lhs - rhs) > 1e-8 * scale:
        raise AdjointPairError(
            f"<forward(u), v> = {lhs!r} but <u, adjoint(v)> = {rhs!r}"
        )


def cgnr_least_squares(
    forward: Callable[[np.ndarray], np.ndarray],
    adjoint: Callable[[np.ndarray], np.ndarray],
    b,
    tol: float = 1e-10,
    max_iters: int | None = None,
    x0: np.ndarray | None = None,
    check_adjoint: bool = False,
) -> CgnrResult:
    """Solve ``min_x ||forward(x) - b||_2`` by CG on the normal equations.

    ``forward``/``adjoint`` must be an adjoint pair (probed on a random pair
    of vectors when ``check_adjoint`` is set).  Converged means the
    normal-equation residual ``||adjoint(forward(x) - b)||`` dropped below
    ``tol * ||adjoint(b)||``; otherwise the flag is False after
    ``max_iters`` steps (default ``4 n``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=np.complex128)
    s0 = adjoint(b)
    n = s0.shape[0]
    m = b.shape[0]
    if check_adjoint:
        _probe_adjoint(forward, adjoint, n, m)
    if max_iters is None:
        max_iters = 4 * n
    if x0 is None:
        x = np.zeros(n, dtype=np.complex128)
        r = b.copy()
        s = s0.copy()
    else:
        x = np.array(x0, dtype=np.complex128, copy=True)
        r = b - forward(x)
        s = adjoint(r)
    ref = np.linalg.norm(s0)
    threshold = tol * ref
    gamma = float(np.vdot(s, s).real)
    p = s.copy()
    it = 0
    while it < max_iters and math.sqrt(gamma) > threshold:
        q = forward(p)
        qq = float(np.vdot(q, q).real)
        if qq == 0.0:
            break
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        s = adjoint(r)
        gamma_next = float(np.vdot(s, s).real)
        p = s + (gamma_next / gamma) * p
        gamma = gamma_next
        it += 1
    if not np.all(np.isfinite(x)):
        raise NumericalError("CGNR produced non-finite iterates")
    return CgnrResult(x, it, math.sqrt(gamma) <= threshold)
