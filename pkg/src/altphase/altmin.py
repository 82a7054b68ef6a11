"""Recovery algorithms: alternating minimization between measurement phases
and a least-squares signal estimate, in three flavors.

``altmin_phase`` reuses all measurements every iteration and starts from the
spectral initializer.  ``altmin_phase_resampled`` partitions the measurements
into disjoint blocks and consumes a fresh block per iteration.
``sparse_altmin_phase`` first estimates the support of a k-sparse signal from
a correlation statistic, then runs the resampled variant on the restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .linalg import (
    NumericalError,
    cgnr_least_squares,
    dist,
    power_iteration,
)
from .measurements import DenseOperator, MeasurementOperator


@dataclass
class AltMinConfig:
    """Knobs shared by the recovery variants.

    ``epsilon`` and ``partition_c`` only affect the resampled variant, where
    the iteration count is ``ceil(partition_c * ln(1/epsilon))``.  When
    ``adaptive_ls_tol`` is set the inner solver tolerance loosens to track
    the current relative residual instead of always using ``ls_tol``.
    """

    max_iters: int = 100
    conv_tol: float = 1e-10
    ls_tol: float = 1e-10
    ls_max_iters: int | None = None
    epsilon: float = 1e-3
    partition_c: float = 1.5
    adaptive_ls_tol: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("conv_tol", "ls_tol", "epsilon", "partition_c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def num_blocks(self) -> int:
        """Resampling block count t0 + 1 (t0 iterations plus one init block)."""
        if self.epsilon > 1:
            raise ValueError("epsilon must be in (0, 1]")
        return int(math.ceil(self.partition_c * math.log(1.0 / self.epsilon))) + 1


@dataclass
class RecoveryTrace:
    """Per-iteration record of a recovery run.

    Entry t of ``residuals`` is || |forward(x^t)| - y ||_2 including the
    initial iterate; ``iterates_dist`` mirrors it with dist(x^t, truth) and
    is None when no ground truth was supplied.  ``support`` is set by the
    sparse variant only.
    """

    residuals: list[float]
    final_estimate: np.ndarray
    iterations_used: int
    converged: bool
    iterates_dist: list[float] | None = None
    support: np.ndarray | None = None

    def to_json(self) -> dict:
        doc = {
            "residuals": [float(r) for r in self.residuals],
            "final_estimate": _interleave(self.final_estimate),
            "iterations_used": int(self.iterations_used),
            "converged": bool(self.converged),
        }
        if self.iterates_dist is not None:
            doc["iterates_dist"] = [float(d) for d in self.iterates_dist]
        if self.support is not None:
            doc["support"] = [int(j) for j in self.support]
        return doc


def _interleave(x: np.ndarray) -> list[float]:
    out = np.empty(2 * x.size, dtype=np.float64)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out.tolist()


def _check_measurements(y, m: int) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (m,):
        raise ValueError(f"expected {m} measurements, got {y.shape}")
    if np.any(y < 0):
        raise ValueError("measured magnitudes must be nonnegative")
    return y


def spectral_init(
    op: MeasurementOperator,
    y,
    power_tol: float = 1e-9,
    power_iters: int = 1000,
) -> np.ndarray:
    """Unit-norm top eigenvector of the magnitude-weighted covariance.

    The operator v -> (1/m) adjoint(y^2 * forward(v)) is applied matrix-free
    through power iteration, so the n x n covariance is never formed.
    """
    y = _check_measurements(y, op.m)
    if not np.any(y):
        raise ValueError("spectral_init needs at least one nonzero measurement")
    weights = y * y
    inv_m = 1.0 / op.m

    def apply(v):
        return inv_m * op.adjoint(weights * op.forward(v))

    return power_iteration(apply, op.n, max_iters=power_iters, tol=power_tol).vector


def _solve_ls(op: MeasurementOperator, b, x0, tol: float, max_iters: int):
    """Least-squares step, routed to the dense kernel when available."""
    if op.rows is not None:
        x, iters, converged = backend.cgnr_dense(op.rows, op.matrix, b, x0, tol, max_iters)
        return x, iters, converged
    result = cgnr_least_squares(op.forward, op.adjoint, b, tol=tol,
                                max_iters=max_iters, x0=x0)
    return result.x, result.iterations, result.converged


def _ls_iter_budget(config: AltMinConfig, n: int) -> int:
    return config.ls_max_iters if config.ls_max_iters is not None else 4 * n


def altmin_phase(
    op: MeasurementOperator,
    y,
    config: AltMinConfig | None = None,
    ground_truth=None,
    x0=None,
) -> RecoveryTrace:
    """Alternate between phase estimates and least-squares signal updates.

    Each iteration assigns phases c = Ph(forward(x)) to the magnitudes and
    solves ``min_x ||forward(x) - c * y||`` with CGNR warm-started at the
    current iterate.  Stops when the measurement residual stagnates (relative
    change below ``conv_tol``) or drops below ``conv_tol * ||y||``, else at
    ``max_iters`` with ``converged=False``.
    """
    config = config or AltMinConfig()
    y = _check_measurements(y, op.m)
    if x0 is None:
        x = spectral_init(op, y)
    else:
        x = np.array(x0, dtype=np.complex128, copy=True)
    norm_y = np.linalg.norm(y)
    ls_iters = _ls_iter_budget(config, op.n)

    z = op.forward(x)
    residuals = [float(np.linalg.norm(np.abs(z) - y))]
    dists = None if ground_truth is None else [dist(x, ground_truth)]
    converged = False
    iterations = 0
    for t in range(1, config.max_iters + 1):
        b = backend.apply_phases(z, y)
        tol_t = config.ls_tol
        if config.adaptive_ls_tol and norm_y > 0:
            tol_t = max(config.ls_tol, 0.1 * residuals[-1] / norm_y)
        x, _, _ = _solve_ls(op, b, x, tol_t, ls_iters)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"non-finite iterate at iteration {t}")
        z = op.forward(x)
        res = float(np.linalg.norm(np.abs(z) - y))
        residuals.append(res)
        if dists is not None:
            dists.append(dist(x, ground_truth))
        iterations = t
        prev = residuals[-2]
        if res <= config.conv_tol * norm_y or abs(prev - res) <= config.conv_tol * prev:
            converged = True
            break
    return RecoveryTrace(residuals=residuals, final_estimate=x,
                         iterations_used=iterations, converged=converged,
                         iterates_dist=dists)


def partition_blocks(m: int, num_blocks: int) -> list[slice]:
    """Split column indices 0..m-1 into ``num_blocks`` disjoint slices.

    All blocks get ``m // num_blocks`` columns; any remainder goes to block
    0, which feeds the initializer.
    """
    base = m // num_blocks
    if base < 1:
        raise ValueError(f"cannot split {m} measurements into {num_blocks} nonempty blocks")
    first = base + (m - base * num_blocks)
    bounds = [0, first] + [first + base * i for i in range(1, num_blocks)]
    return [slice(bounds[i], bounds[i + 1]) for i in range(num_blocks)]


def altmin_phase_resampled(
    matrix,
    y,
    config: AltMinConfig | None = None,
    ground_truth=None,
) -> RecoveryTrace:
    """Resampled alternating minimization over a dense measurement matrix.

    The measurements are partitioned into ``t0 + 1`` disjoint blocks with
    ``t0 = ceil(partition_c * ln(1/epsilon))``; block 0 feeds the spectral
    initializer and iteration t consumes block t+1 exclusively, so every
    iterate is independent of the measurements it is fitted to.  Residuals
    in the trace are measured against the full data.
    """
    config = config or AltMinConfig()
    full = matrix if isinstance(matrix, DenseOperator) else DenseOperator(matrix)
    A = full.matrix
    y = _check_measurements(y, full.m)
    blocks = partition_blocks(full.m, config.num_blocks())
    t0 = len(blocks) - 1

    init_op = DenseOperator(A[:, blocks[0]])
    x = spectral_init(init_op, y[blocks[0]])
    ls_iters = _ls_iter_budget(config, full.n)
    norm_y = np.linalg.norm(y)

    z = full.forward(x)
    residuals = [float(np.linalg.norm(np.abs(z) - y))]
    dists = None if ground_truth is None else [dist(x, ground_truth)]
    iterations = 0
    for t in range(t0):
        block_op = DenseOperator(A[:, blocks[t + 1]])
        yb = y[blocks[t + 1]]
        b = backend.apply_phases(block_op.forward(x), yb)
        tol_t = config.ls_tol
        if config.adaptive_ls_tol and norm_y > 0:
            tol_t = max(config.ls_tol, 0.1 * residuals[-1] / norm_y)
        x, _, _ = _solve_ls(block_op, b, x, tol_t, ls_iters)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"non-finite iterate at iteration {t + 1}")
        res = float(np.linalg.norm(np.abs(full.forward(x)) - y))
        residuals.append(res)
        if dists is not None:
            dists.append(dist(x, ground_truth))
        iterations = t + 1
        prev = residuals[-2]
        if res <= config.conv_tol * norm_y or abs(prev - res) <= config.conv_tol * prev:
            break
    # the schedule is the stopping rule here: completing it, or stopping
    # early on residual stagnation, both count as a regular finish
    return RecoveryTrace(residuals=residuals, final_estimate=x,
                         iterations_used=iterations, converged=True,
                         iterates_dist=dists)


def support_statistic(matrix, y) -> np.ndarray:
    """Per-coordinate correlation statistic sum_i |a_ij| * y_i.

    Accumulated measurement by measurement in index order, matching the
    naive double loop exactly in floating point.
    """
    A = np.asarray(matrix, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError("matrix must be 2-D")
    n, m = A.shape
    y = _check_measurements(y, m)
    mags = np.abs(A)
    out = np.zeros(n, dtype=np.float64)
    for i in range(m):
        out += mags[:, i] * y[i]
    return out


def top_k_support(statistic: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries, ties broken toward lower index."""
    order = np.argsort(-statistic, kind="stable")
    return np.sort(order[:k])


def sparse_altmin_phase(
    matrix,
    y,
    k: int,
    config: AltMinConfig | None = None,
    ground_truth=None,
) -> RecoveryTrace:
    """Recover a k-sparse signal: estimate the support, then solve on it.

    The support is the k largest entries of ``support_statistic``; the
    resampled variant runs on the row restriction and the estimate is
    embedded back with zeros off the support.  ``trace.support`` records the
    selected indices.
    """
    A = np.asarray(matrix, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError("matrix must be 2-D")
    n, m = A.shape
    if not 1 <= k <= n:
        raise ValueError(f"sparsity k={k} must be in [1, {n}]")
    y = _check_measurements(y, m)

    support = top_k_support(support_statistic(A, y), k)
    restricted_truth = None
    truth_ratio = None
    if ground_truth is not None:
        ground_truth = np.asarray(ground_truth, dtype=np.complex128)
        restricted = ground_truth[support]
        norm_full = np.linalg.norm(ground_truth)
        norm_restricted = np.linalg.norm(restricted)
        if norm_restricted > 0:
            restricted_truth = restricted
            truth_ratio = norm_restricted / norm_full

    inner = altmin_phase_resampled(A[support, :], y, config, ground_truth=restricted_truth)

    estimate = np.zeros(n, dtype=np.complex128)
    estimate[support] = inner.final_estimate
    dists = None
    if ground_truth is not None:
        if restricted_truth is None:
            # selected support is orthogonal to the truth: every iterate is too
            dists = [1.0] * len(inner.residuals)
        else:
            # dist against the restricted truth understates the error by the
            # mass the support missed; rescale the cosine accordingly
            dists = [
                math.sqrt(max(0.0, 1.0 - (1.0 - d * d) * truth_ratio * truth_ratio))
                for d in inner.iterates_dist
            ]
    return RecoveryTrace(residuals=inner.residuals, final_estimate=estimate,
                         iterations_used=inner.iterations_used,
                         converged=inner.converged, iterates_dist=dists,
                         support=support)
