"""Interferometric figures of merit computed from a two-mode state."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .hilbert import JX, JY, JZ, SpinState, expectation, second_moment, variance

VISIBILITY_FLOOR = 1e-12


class UndefinedResolutionError(ArithmeticError):
    """Raised when ``<Jx>`` vanishes so the phase resolution diverges."""


@dataclass(frozen=True)
class PhaseDistribution:
    theta_values: np.ndarray
    amplitudes: np.ndarray
    theta0: float = 0.0

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class SqueezingReport:
    visibility: float
    phase_variance: float
    xi_y: float
    var_jy: float
    var_jz: float
    jx_mean: float
    rotated_phase_variance: float = float("nan")


def visibility(state: SpinState) -> float:
    """Fringe contrast ``|<Jx>| / (N/2)``."""
    if state.n_particles == 0:
        return 0.0
    return abs(expectation(state, JX)) / (state.n_particles / 2.0)


def _jx_checked(state: SpinState) -> float:
    jx = expectation(state, JX)
    if abs(jx) < VISIBILITY_FLOOR * max(state.n_particles, 1):
        raise UndefinedResolutionError(
            f"<Jx> = {jx:.3e}: visibility vanished, phase resolution undefined"
        )
    return jx


def phase_resolution(state: SpinState) -> float:
    """Phase variance ``<Jy^2> / <Jx>^2`` at fixed particle number."""
    jx = _jx_checked(state)
    return second_moment(state, JY) / jx**2


def phase_resolution_with_number_noise(
    mixture: Iterable[tuple[SpinState, float]],
) -> float:
    """Phase variance for a classical mixture over particle-number sectors.

    Adds ``(<N^2> - <N>^2) / (4 <Jx>^2)`` to the fixed-number term, with all
    moments averaged over the supplied weights.
    """
    items = list(mixture)
    if not items:
        raise ValueError("empty mixture")
    weights = np.array([w for _, w in items], dtype=float)
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if not math.isclose(weights.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"weights sum to {weights.sum()}, expected 1")
    jx = sum(w * expectation(s, JX) for s, w in items)
    jy2 = sum(w * second_moment(s, JY) for s, w in items)
    n = np.array([s.n_particles for s, _ in items], dtype=float)
    var_n = float(weights @ n**2 - (weights @ n) ** 2)
    if abs(jx) < VISIBILITY_FLOOR * max(weights @ n, 1.0):
        raise UndefinedResolutionError("mixture has vanishing <Jx>")
    return jy2 / jx**2 + max(var_n, 0.0) / (4.0 * jx**2)


def squeezing_xi(state: SpinState) -> float:
    """``sqrt(N <Jy^2>) / |<Jx>|``; 1 at the standard quantum limit."""
    return math.sqrt(state.n_particles * phase_resolution(state))


def predicted_rotated_resolution(state: SpinState) -> float:
    """``<Jz^2> / <Jx>^2``: phase variance after an ideal pi/2 turn about x."""
    jx = _jx_checked(state)
    return second_moment(state, JZ) / jx**2


def uncertainty_report(state: SpinState) -> tuple[float, float, float, float]:
    """``(dJy, dJz, dJy*dJz, |<Jx>|/2)``; the product never undercuts the bound."""
    djy = math.sqrt(variance(state, JY))
    djz = math.sqrt(variance(state, JZ))
    bound = 0.5 * abs(expectation(state, JX))
    product = djy * djz
    if product < bound - 1e-10 * max(1.0, bound):
        raise ArithmeticError(f"Robertson bound violated: {product} < {bound}")
    return djy, djz, product, bound


def squeezing_report(state: SpinState) -> SqueezingReport:
    """All figures at once; undefined ratios come back as ``nan``."""
    jx = expectation(state, JX)
    var_jy = variance(state, JY)
    var_jz = variance(state, JZ)
    n = state.n_particles
    vis = abs(jx) / (n / 2.0) if n else 0.0
    if abs(jx) < VISIBILITY_FLOOR * max(n, 1):
        dth = xi = rot = float("nan")
    else:
        dth = second_moment(state, JY) / jx**2
        xi = math.sqrt(n * dth)
        rot = second_moment(state, JZ) / jx**2
    return SqueezingReport(vis, dth, xi, var_jy, var_jz, jx, rot)


# --- relative-phase basis -----------------------------------------------------

def phase_angles(n_particles: int, theta0: float = 0.0) -> np.ndarray:
    """``theta_m = theta0 + 2 pi m / (2J + 1)`` for ``m = -J .. J``."""
    dim = n_particles + 1
    m = np.arange(dim) - n_particles / 2.0
    return theta0 + 2.0 * np.pi * m / dim


def phase_state_decomposition(state: SpinState, theta0: float = 0.0) -> PhaseDistribution:
    """Amplitudes ``<theta_m|psi>`` on the relative-phase basis (unitary DFT)."""
    n = state.n_particles
    dim = n + 1
    j = n / 2.0
    k = np.arange(dim)
    # <theta_m|psi> = dim^-1/2 sum_k exp(-i (k-J) theta_m) c_k, theta_m index a = m + J
    pre = state.amplitudes * np.exp(-1j * k * theta0) * np.exp(2j * np.pi * k * j / dim)
    spec = np.fft.fft(pre)
    a = k
    post = np.exp(1j * j * theta0) * np.exp(2j * np.pi * a * j / dim) * np.exp(-2j * np.pi * j * j / dim)
    amps = post * spec / np.sqrt(dim)
    return PhaseDistribution(phase_angles(n, theta0), amps, theta0)


def phase_basis_matrix(n_particles: int, theta0: float = 0.0) -> np.ndarray:
    """Dense ``<theta_m | J, m'>`` matrix (rows: phase index, columns: Dicke index)."""
    m = np.arange(n_particles + 1) - n_particles / 2.0
    theta = phase_angles(n_particles, theta0)
    return np.exp(-1j * np.outer(theta, m)) / np.sqrt(n_particles + 1)


def from_phase_distribution(dist: PhaseDistribution) -> SpinState:
    """Inverse of :func:`phase_state_decomposition`."""
    n = dist.amplitudes.shape[0] - 1
    mat = phase_basis_matrix(n, dist.theta0)
    return SpinState(n, mat.conj().T @ dist.amplitudes)


def summarize_number_distribution(state: SpinState) -> dict[str, float]:
    """Compact description of ``|c_m|`` for tabular output."""
    p = np.abs(state.amplitudes) ** 2
    m = np.arange(state.n_particles + 1) - state.j
    return {
        "cm_peak_abs_m": float(abs(m[np.argmax(p)])),
        "cm_ipr": float(np.sum(p**2)),
        "cm_mean_abs_m": float(p @ np.abs(m)),
    }


def summarize_phase_distribution(dist: PhaseDistribution) -> dict[str, float]:
    p = dist.probabilities
    nonzero = p[p > 0]
    return {
        "phase_peak_theta": float(abs(dist.theta_values[np.argmax(p)])),
        "phase_ipr": float(np.sum(p**2)),
        "phase_entropy": float(-(nonzero @ np.log(nonzero))),
    }

