"""Fringe pattern after ballistic expansion of the two released modes.

Units: lengths in the oscillator width ``delta_y``, times in ``1/omega``.

Mode convention: the left mode is the Gaussian centred at ``y = -d`` (the
``(y + d)`` exponent) and the right mode the one at ``y = +d``.  With the
field ``aL phiL e^{i Theta/2} + aR phiR e^{-i Theta/2}`` this reproduces the
``N cosh`` envelope and the ``<Jx> cos(k y + Theta)`` fringe term of the
closed-form density.  The ``<Jy>`` term then carries ``+sin``, while
:func:`g1_closed_form` carries ``-sin`` and has no ``<Jz>`` term, so the two
agree exactly when ``<Jy> = <Jz> = 0``, which holds for every
exchange-symmetric state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import JX, JY, JZ, CollectiveOperator, SpinState, expectation, variance

DEFAULT_GRID_POINTS = 2048


@dataclass(frozen=True)
class ExpansionGeometry:
    d: float = 8.0
    t: float = 10.0
    theta: float = 0.0
    delta_y: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d must be positive")
        if self.t < 0:
            raise ValueError("t must be non-negative")
        if not (self.delta_y > 0 and self.omega > 0):
            raise ValueError("delta_y and omega must be positive")

    @property
    def spread(self) -> float:
        """``1 + (omega t)^2``."""
        return 1.0 + (self.omega * self.t) ** 2

    @property
    def width(self) -> float:
        """Standard deviation of each mode density at time ``t``."""
        return self.delta_y * np.sqrt(self.spread)

    def with_theta(self, theta: float) -> ExpansionGeometry:
        return ExpansionGeometry(self.d, self.t, theta, self.delta_y, self.omega)


@dataclass(frozen=True)
class DensityProfile:
    y_grid: np.ndarray
    mean_density: np.ndarray
    noise: np.ndarray

    def integral(self) -> float:
        return float(np.trapezoid(self.mean_density, self.y_grid))


def mode_function(y, geom: ExpansionGeometry, side: str):
    """Freely expanding Gaussian mode, normalised to one for every ``t``.

    The spreading factor enters the prefactor as ``(1 + i omega t)^(-1/2)``;
    a ``-1/4`` power there would leave ``int |phi|^2 dy = (1 + omega^2 t^2)^(1/4)``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    shift = geom.d if side == "left" else -geom.d
    s = 1.0 + 1j * geom.omega * geom.t
    y = np.asarray(y, dtype=float)
    return (2.0 * np.pi * geom.delta_y**2) ** -0.25 / np.sqrt(s) * np.exp(
        -((y + shift) ** 2) / (4.0 * geom.delta_y**2 * s)
    )


def g1_coefficients(y, geom: ExpansionGeometry):
    """``(c_n, c_z, c_x, c_y)`` with ``Psi^dag Psi = c_n N + c_z Jz + c_x Jx + c_y Jy``."""
    phl = mode_function(y, geom, "left")
    phr = mode_function(y, geom, "right")
    al = np.abs(phl) ** 2
    ar = np.abs(phr) ** 2
    z = np.conj(phl) * phr * np.exp(-1j * geom.theta)
    # z aL^dag aR + c.c. with aL^dag aR = Jx + i Jy
    return 0.5 * (al + ar), al - ar, 2.0 * z.real, -2.0 * z.imag


def g1_operator(y: float, geom: ExpansionGeometry) -> CollectiveOperator:
    cn, cz, cx, cy = (float(v) for v in g1_coefficients(y, geom))
    return CollectiveOperator(coef_n=cn, coef_z=cz, coef_x=cx, coef_y=cy)


def g1_closed_form(y, geom: ExpansionGeometry, n_particles: float, jx: float, jy: float):
    """Closed-form mean density in terms of ``<Jx>`` and ``<Jy>`` (``-2 <Jy> sin`` convention)."""
    y = np.asarray(y, dtype=float)
    sp = geom.spread
    dy2 = geom.delta_y**2
    env = np.exp(-(y**2 + geom.d**2) / (2.0 * dy2 * sp)) / np.sqrt(2.0 * np.pi * dy2 * sp)
    arg = y * geom.d / (dy2 * sp)
    phase = arg * geom.omega * geom.t + geom.theta
    return env * (n_particles * np.cosh(arg) + 2.0 * jx * np.cos(phase) - 2.0 * jy * np.sin(phase))


def density(state: SpinState, y, geom: ExpansionGeometry):
    """``<G1(y, t, Theta)>`` from the operator decomposition (vectorised in ``y``)."""
    cn, cz, cx, cy = g1_coefficients(y, geom)
    jx, jy, jz = (expectation(state, op) for op in (JX, JY, JZ))
    out = cn * state.n_particles + cz * jz + cx * jx + cy * jy
    return np.maximum(out, 0.0) if np.ndim(out) else max(float(out), 0.0)


def density_noise(state: SpinState, y, geom: ExpansionGeometry):
    """``sqrt(<G1^2> - <G1>^2)`` of the local density operator."""
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.array([np.sqrt(variance(state, g1_operator(float(v), geom))) for v in ys])
    return out if np.ndim(y) else float(out[0])


def default_grid(geom: ExpansionGeometry, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    w = np.sqrt(geom.d**2 + geom.width**2)
    half = max(4.0 * w, geom.d + 10.0 * geom.width)
    return np.linspace(-half, half, points)


def fringe_profile(state: SpinState, y_grid, geom: ExpansionGeometry) -> DensityProfile:
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y_grid must be a non-empty 1-D array")
    if y.size > 1 and np.any(np.diff(y) <= 0):
        raise ValueError("y_grid must be strictly increasing")
    return DensityProfile(y, np.atleast_1d(density(state, y, geom)), np.atleast_1d(density_noise(state, y, geom)))


def profile_visibility(state: SpinState, geom: ExpansionGeometry) -> float:
    """Contrast between the centre densities with imprinted phase 0 and pi."""
    a = density(state, 0.0, geom.with_theta(0.0))
    b = density(state, 0.0, geom.with_theta(np.pi))
    return abs(a - b) / (a + b)


def mode_reference_density(y, geom: ExpansionGeometry, n_particles: int):
    """Incoherent mode densities ``N (|phiL|^2 + |phiR|^2) / 2``."""
    return 0.5 * n_particles * (
        np.abs(mode_function(y, geom, "left")) ** 2 + np.abs(mode_function(y, geom, "right")) ** 2
    )


def fringe_spacing(geom: ExpansionGeometry) -> float:
    """Spatial period of the ``cos`` fringe term."""
    k = geom.d * geom.omega * geom.t / (geom.delta_y**2 * geom.spread)
    return 2.0 * np.pi / k if k else float("inf")
