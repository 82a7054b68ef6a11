"""Measurement models: dense Gaussian operators, masked-DFT operators,
additive noise, and problem-instance bundling with JSON round-tripping.

A measurement operator maps a signal x in C^n to the m complex measurements
A^H x; the recorded data are the elementwise magnitudes.  "Standard complex
Gaussian" means real and imaginary parts are independent N(0, 1), so each
entry has E|a|^2 = 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def sample_standard_complex(rng: np.random.Generator, shape) -> np.ndarray:
    """Array of i.i.d. standard complex Gaussians (per-entry variance 2)."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class MeasurementOperator:
    """Abstract linear map x -> A^H x with its adjoint r -> A r.

    ``matrix`` is the dense (n, m) array A when the model materializes one
    (column i is the i-th measurement vector) and None otherwise; ``rows``
    is the precomputed conjugate transpose A^H used by the dense kernels.
    """

    n: int
    m: int
    matrix: np.ndarray | None = None
    rows: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DenseOperator(MeasurementOperator):
    """Measurement operator backed by an explicit (n, m) matrix."""

    def __init__(self, matrix):
        matrix = np.ascontiguousarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError("matrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(matrix.view(np.float64))):
            raise ValueError("matrix entries must be finite")
        self.matrix = matrix
        self.n, self.m = matrix.shape
        self.rows = np.ascontiguousarray(matrix.conj().T)

    def forward(self, x):
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n,):
            raise ValueError(f"expected a signal of length {self.n}, got {x.shape}")
        return self.rows @ x

    def adjoint(self, r):
        r = np.asarray(r, dtype=np.complex128)
        if r.shape != (self.m,):
            raise ValueError(f"expected a residual of length {self.m}, got {r.shape}")
        return self.matrix @ r


class MaskedDFTOperator(MeasurementOperator):
    """Concatenated unnormalized DFTs of the signal under J elementwise masks.

    forward(x) stacks DFT(x * mask_u) for u = 1..J, so m = J * n.  The
    adjoint applies the exact conjugate transpose (n-scaled inverse DFT,
    then conjugate masks).  No dense matrix is materialized.
    """

    def __init__(self, masks):
        masks = np.ascontiguousarray(masks, dtype=np.complex128)
        if masks.ndim != 2 or masks.shape[0] < 1 or masks.shape[1] < 1:
            raise ValueError("masks must be a (J, n) array")
        self.masks = masks
        self.J, self.n = masks.shape
        self.m = self.J * self.n
        self.matrix = None
        self.rows = None

    def forward(self, x):
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n,):
            raise ValueError(f"expected a signal of length {self.n}, got {x.shape}")
        return np.fft.fft(self.masks * x, axis=1).ravel()

    def adjoint(self, r):
        r = np.asarray(r, dtype=np.complex128)
        if r.shape != (self.m,):
            raise ValueError(f"expected a residual of length {self.m}, got {r.shape}")
        blocks = r.reshape(self.J, self.n)
        return (self.masks.conj() * (self.n * np.fft.ifft(blocks, axis=1))).sum(axis=0)


def sample_gaussian_operator(n: int, m: int, rng: np.random.Generator) -> DenseOperator:
    """Dense operator with i.i.d. standard complex Gaussian entries."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    return DenseOperator(sample_standard_complex(rng, (n, m)))


def build_masked_dft_operator(n: int, J: int, rng: np.random.Generator) -> MaskedDFTOperator:
    """Masked-DFT operator with J i.i.d. standard complex Gaussian masks."""
    if n < 1 or J < 1:
        raise ValueError("n and J must be >= 1")
    return MaskedDFTOperator(sample_standard_complex(rng, (J, n)))


def measure(op: MeasurementOperator, x_star) -> np.ndarray:
    """Noiseless magnitude measurements |forward(x_star)|."""
    return np.abs(op.forward(np.asarray(x_star, dtype=np.complex128)))


def measure_noisy(op: MeasurementOperator, x_star, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Magnitudes of forward(x_star) plus per-measurement complex noise.

    The noise is complex Gaussian with total variance sigma^2 (real and
    imaginary parts each N(0, sigma^2 / 2)); sigma = 0 reduces exactly to
    ``measure`` without consuming random state.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    z = op.forward(np.asarray(x_star, dtype=np.complex128))
    if sigma == 0.0:
        return np.abs(z)
    noise = (sigma / np.sqrt(2.0)) * sample_standard_complex(rng, z.shape)
    return np.abs(z + noise)


def adjoint_pair_mismatch(op: MeasurementOperator, rng: np.random.Generator, probes: int = 10) -> float:
    """Largest relative violation of <forward(u), v> == <u, adjoint(v)>."""
    worst = 0.0
    for _ in range(probes):
        u = sample_standard_complex(rng, op.n)
        v = sample_standard_complex(rng, op.m)
        lhs = np.vdot(op.forward(u), v)
        rhs = np.vdot(u, op.adjoint(v))
        scale = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


GAUSSIAN = "gaussian"
MASKED_DFT = "masked-dft"


@dataclass
class ProblemInstance:
    """A ground-truth signal, its measurement operator, and the recorded data.

    ``seed`` is the integer entropy list the instance was derived from, kept
    so the operator can be rebuilt for replay.
    """

    x_star: np.ndarray
    operator: MeasurementOperator
    y: np.ndarray
    sigma: float
    seed: list[int]
    model: str

    def __post_init__(self):
        self.x_star = np.asarray(self.x_star, dtype=np.complex128)
        self.y = np.asarray(self.y, dtype=np.float64)
        if np.any(self.y < 0):
            raise ValueError("measured magnitudes must be nonnegative")
        if self.y.shape != (self.operator.m,):
            raise ValueError("y length must match the operator")
        if self.x_star.shape != (self.operator.n,):
            raise ValueError("x_star length must match the operator")

    def to_json(self) -> dict:
        return {
            "n": int(self.operator.n),
            "m": int(self.operator.m),
            "model": self.model,
            "seed": [int(s) for s in self.seed],
            "sigma": float(self.sigma),
            "x_star": _interleave(self.x_star),
            "y": [float(v) for v in self.y],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, doc: dict) -> "ProblemInstance":
        op = _rebuild_operator(doc["model"], int(doc["n"]), int(doc["m"]), list(doc["seed"]))
        return cls(
            x_star=_deinterleave(doc["x_star"]),
            operator=op,
            y=np.asarray(doc["y"], dtype=np.float64),
            sigma=float(doc["sigma"]),
            seed=list(doc["seed"]),
            model=doc["model"],
        )


def _interleave(x: np.ndarray) -> list[float]:
    out = np.empty(2 * x.size, dtype=np.float64)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out.tolist()


def _deinterleave(values) -> np.ndarray:
    flat = np.asarray(values, dtype=np.float64)
    return flat[0::2] + 1j * flat[1::2]


def _instance_rng(seed: list[int]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _sample_instance_parts(model, n, m, seed):
    """Shared draw order for building and replaying instances:
    ground truth first, then the operator, then (separately) noise."""
    rng = _instance_rng(seed)
    x_star = sample_standard_complex(rng, n)
    x_star /= np.linalg.norm(x_star)
    if model == GAUSSIAN:
        op = sample_gaussian_operator(n, m, rng)
    elif model == MASKED_DFT:
        if m % n != 0:
            raise ValueError("masked-dft needs m to be a multiple of n")
        op = build_masked_dft_operator(n, m // n, rng)
    else:
        raise ValueError(f"unknown model {model!r}")
    return x_star, op, rng


def _rebuild_operator(model, n, m, seed) -> MeasurementOperator:
    _, op, _ = _sample_instance_parts(model, n, m, seed)
    return op


def build_instance(model: str, n: int, m: int, sigma: float, seed: list[int]) -> ProblemInstance:
    """Sample a problem instance deterministically from an entropy list.

    The ground truth is uniform on the complex unit sphere; the operator is
    drawn per ``model``; measurements use ``measure_noisy``.
    """
    x_star, op, rng = _sample_instance_parts(model, n, m, seed)
    y = measure_noisy(op, x_star, sigma, rng)
    return ProblemInstance(x_star=x_star, operator=op, y=y, sigma=sigma,
                           seed=list(seed), model=model)
