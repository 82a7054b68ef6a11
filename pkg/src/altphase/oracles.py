"""Independent numerical validators for the quantities the contraction and
support-recovery analyses rest on.

Everything here is deliberately decoupled from the solver code paths: the
integrals use plain quadrature, the expectations plain Monte Carlo, so they
can serve as oracles in property tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import phase, phase_vector
from .measurements import sample_standard_complex


@dataclass
class QuadratureSpec:
    """Periodic trapezoid rule on [-pi, pi] with ``node_count`` nodes."""

    node_count: int = 4096

    def __post_init__(self):
        if self.node_count < 16 or self.node_count % 2 != 0:
            raise ValueError("node_count must be even and >= 16")

    def nodes(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.node_count) / self.node_count


@dataclass
class MonteCarloSpec:
    samples: int
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1): the integrand is singular at 1")
    return beta


def f_beta(beta: float, quad: QuadratureSpec | None = None) -> float:
    """Mean over theta of (cos(theta) + beta) / sqrt(1 + beta^2 + 2 beta cos(theta)).

    This is the real part of E[e^{i theta} Ph(1 + beta e^{-i theta})] for
    uniform theta; it vanishes at beta = 0 and has slope 1/2 there.
    """
    beta = _check_beta(beta)
    quad = quad or QuadratureSpec()
    theta = quad.nodes()
    c = np.cos(theta)
    return float(np.mean((c + beta) / np.sqrt(1.0 + beta * beta + 2.0 * beta * c)))


def f_beta_derivative(beta: float, quad: QuadratureSpec | None = None) -> float:
    """Mean over theta of sin^2(theta) / (1 + beta^2 + 2 beta cos(theta))^{3/2}."""
    beta = _check_beta(beta)
    quad = quad or QuadratureSpec()
    theta = quad.nodes()
    c = np.cos(theta)
    s = np.sin(theta)
    return float(np.mean(s * s / (1.0 + beta * beta + 2.0 * beta * c) ** 1.5))


def expected_U_monte_carlo(alpha: float, mc: MonteCarloSpec) -> complex:
    """Sample mean of |w1| w2 (Ph(1 + sqrt(1-a^2) conj(w2) / (a |w1|)) - 1).

    w1, w2 are i.i.d. standard complex Gaussians.  The mean's magnitude
    stays within a small factor of sqrt(1 - alpha^2) once alpha is close to
    1, and its imaginary part is zero by symmetry.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    rng = mc.rng()
    w1 = sample_standard_complex(rng, mc.samples)
    w2 = sample_standard_complex(rng, mc.samples)
    s = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    mag1 = np.abs(w1)
    safe = np.where(mag1 == 0.0, 1.0, mag1)
    arg = 1.0 + s * np.conj(w2) / (alpha * safe)
    u = mag1 * w2 * (phase_vector(arg) - 1.0)
    u = np.where(mag1 == 0.0, np.complex128(0.0), u)
    return complex(u.mean())


def phase_perturbation_check(w) -> bool:
    """Whether |Ph(1 + w) - 1| <= 2 |w| holds for this w (it always does)."""
    w = complex(w)
    return abs(phase(1.0 + w) - 1.0) <= 2.0 * abs(w)


def phase_perturbation_fuzz_max(seed: int = 0, samples: int = 10**5) -> float:
    """Worst ratio |Ph(1+w) - 1| / (2|w|) over random w.

    Magnitudes are log-uniform in [1e-6, 1e3] to exercise both the linearized
    regime and the far field; the inequality means the result never exceeds 1.
    """
    rng = np.random.default_rng(seed)
    mags = 10.0 ** rng.uniform(-6.0, 3.0, samples)
    angles = rng.uniform(-np.pi, np.pi, samples)
    w = mags * np.exp(1j * angles)
    gaps = np.abs(phase_vector(1.0 + w) - 1.0)
    return float(np.max(gaps / (2.0 * mags)))


def support_expectation(xj: float) -> float:
    """Closed-form mean of |a| |b| for unit real Gaussians with correlation xj.

    Equals the per-measurement mean of the support statistic at a coordinate
    carrying weight xj (real-Gaussian sensing convention): 2/pi off the
    support (xj = 0), increasing to 1 at xj = 1.
    """
    xj = float(xj)
    if not 0.0 <= xj <= 1.0:
        raise ValueError("xj must lie in [0, 1]")
    return (2.0 / math.pi) * (math.sqrt(1.0 - xj * xj) + xj * math.asin(xj))


def support_expectation_monte_carlo(xj: float, mc: MonteCarloSpec) -> float:
    """Monte-Carlo estimate of the quantity ``support_expectation`` computes."""
    xj = float(xj)
    if not 0.0 <= xj <= 1.0:
        raise ValueError("xj must lie in [0, 1]")
    rng = mc.rng()
    a = rng.standard_normal(mc.samples)
    g = rng.standard_normal(mc.samples)
    b = xj * a + math.sqrt(1.0 - xj * xj) * g
    return float(np.mean(np.abs(a) * np.abs(b)))


def spectral_weight_moments(mc: MonteCarloSpec) -> tuple[float, float]:
    """Monte-Carlo (E|a|^4, E|a|^2 |b|^2) for standard complex Gaussians.

    These are the aligned and cross diagonal weights of the expected
    magnitude-weighted covariance; their ratio exceeding 1 is what makes the
    spectral initializer point toward the signal.
    """
    rng = mc.rng()
    a2 = np.abs(sample_standard_complex(rng, mc.samples)) ** 2
    b2 = np.abs(sample_standard_complex(rng, mc.samples)) ** 2
    return float(np.mean(a2 * a2)), float(np.mean(a2 * b2))
