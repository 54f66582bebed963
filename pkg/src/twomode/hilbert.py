"""Symmetric (J = N/2) two-mode states in the Dicke basis and collective operators.

Amplitude index ``k`` holds ``c_m`` with ``m = k - N/2``, so odd ``N`` needs
no half-integer bookkeeping.  The Schwinger mapping used throughout is::

    Jz = (nL - nR) / 2,   Jx + i Jy = J+ = aL^dag aR
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITICITY_ATOL = 1e-10


class DimensionError(ValueError):
    """State vector length does not match ``N + 1``."""


@lru_cache(maxsize=256)
def _ladder(n_particles: int) -> np.ndarray:
    # <m+1| J+ |m> for m = -J .. J-1
    j = n_particles / 2.0
    m = np.arange(n_particles) - j
    out = np.sqrt(np.maximum(j * (j + 1.0) - m * (m + 1.0), 0.0))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def _mvals(n_particles: int) -> np.ndarray:
    out = np.arange(n_particles + 1) - n_particles / 2.0
    out.setflags(write=False)
    return out


def m_values(n_particles: int) -> np.ndarray:
    """Azimuthal quantum numbers ``-N/2 .. N/2`` in storage order."""
    return _mvals(n_particles)


def ladder_elements(n_particles: int) -> np.ndarray:
    """Raising-operator matrix elements ``sqrt(J(J+1) - m(m+1))``."""
    return _ladder(n_particles)


@dataclass(frozen=True)
class SpinState:
    """Pure state of ``n_particles`` bosons in two modes.

    The amplitude array is copied and frozen on construction, so instances
    can be shared freely.
    """

    n_particles: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_particles < 0:
            raise ValueError("n_particles must be non-negative")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.n_particles + 1:
            raise DimensionError(
                f"expected {self.n_particles + 1} amplitudes, got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def j(self) -> float:
        return self.n_particles / 2.0

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def normalized(self) -> SpinState:
        nrm = self.norm
        if nrm == 0.0:
            raise ValueError("cannot normalise the zero vector")
        return SpinState(self.n_particles, self.amplitudes / nrm)

    def overlap(self, other: SpinState) -> complex:
        _check_same(self, other.amplitudes)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    @classmethod
    def basis(cls, n_particles: int, m: float) -> SpinState:
        """Dicke state ``|J, m>``."""
        k = m + n_particles / 2.0
        if abs(k - round(k)) > 1e-12 or not 0 <= round(k) <= n_particles:
            raise ValueError(f"m={m} is not a valid projection for N={n_particles}")
        amps = np.zeros(n_particles + 1, dtype=np.complex128)
        amps[int(round(k))] = 1.0
        return cls(n_particles, amps)

    @classmethod
    def cat(cls, n_particles: int, sign: int = 1) -> SpinState:
        """``(|J,J> + sign |J,-J>) / sqrt(2)``."""
        amps = np.zeros(n_particles + 1, dtype=np.complex128)
        amps[-1] += 1.0
        amps[0] += sign
        return cls(n_particles, amps).normalized()

    @classmethod
    def coherent(cls, n_particles: int, theta: float, phi: float) -> SpinState:
        """Spin coherent state pointing along polar angle ``theta``, azimuth ``phi``."""
        from math import comb

        k = np.arange(n_particles + 1)
        binom = np.array([comb(n_particles, int(i)) for i in k], dtype=float)
        # amplitude of m = k - J is sqrt(C(N,k)) cos^k(theta/2) sin^(N-k)(theta/2) e^{-i m phi}
        c = np.cos(theta / 2.0)
        s = np.sin(theta / 2.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            mag = np.sqrt(binom) * np.power(c, k) * np.power(s, n_particles - k)
        phase = np.exp(-1j * (k - n_particles / 2.0) * phi)
        return cls(n_particles, mag * phase).normalized()


@dataclass(frozen=True)
class CollectiveOperator:
    """``coef_one + coef_n N + coef_x Jx + coef_y Jy + coef_z Jz + coef_zz Jz^2``.

    Hermitian and tridiagonal in the Dicke basis for any real coefficients.
    """

    coef_n: float = 0.0
    coef_x: float = 0.0
    coef_y: float = 0.0
    coef_z: float = 0.0
    coef_zz: float = 0.0
    coef_one: float = 0.0

    def __post_init__(self):
        for name in ("coef_n", "coef_x", "coef_y", "coef_z", "coef_zz", "coef_one"):
            val = getattr(self, name)
            if not np.isfinite(val) or np.iscomplexobj(val):
                raise ValueError(f"{name} must be a finite real number, got {val!r}")
            object.__setattr__(self, name, float(val))

    def __add__(self, other: CollectiveOperator) -> CollectiveOperator:
        return CollectiveOperator(
            self.coef_n + other.coef_n,
            self.coef_x + other.coef_x,
            self.coef_y + other.coef_y,
            self.coef_z + other.coef_z,
            self.coef_zz + other.coef_zz,
            self.coef_one + other.coef_one,
        )

    def __mul__(self, scalar: float) -> CollectiveOperator:
        return CollectiveOperator(
            scalar * self.coef_n,
            scalar * self.coef_x,
            scalar * self.coef_y,
            scalar * self.coef_z,
            scalar * self.coef_zz,
            scalar * self.coef_one,
        )

    __rmul__ = __mul__

    def matrix(self, n_particles: int) -> np.ndarray:
        """Dense matrix; meant for tests and small ``N`` only."""
        eye = np.eye(n_particles + 1, dtype=np.complex128)
        cols = [apply_operator(SpinState(n_particles, col), self) for col in eye]
        return np.array(cols).T


IDENTITY = CollectiveOperator(coef_one=1.0)
NUMBER = CollectiveOperator(coef_n=1.0)
JX = CollectiveOperator(coef_x=1.0)
JY = CollectiveOperator(coef_y=1.0)
JZ = CollectiveOperator(coef_z=1.0)
JZ2 = CollectiveOperator(coef_zz=1.0)


def _check_same(state: SpinState, vec: np.ndarray):
    if vec.shape[0] != state.n_particles + 1:
        raise DimensionError(
            f"vector of length {vec.shape[0]} does not match N={state.n_particles}"
        )


def _apply_raw(n_particles: int, c: np.ndarray, op: CollectiveOperator) -> np.ndarray:
    m = _mvals(n_particles)
    out = (op.coef_one + op.coef_n * n_particles + op.coef_z * m + op.coef_zz * m * m) * c
    if n_particles == 0 or (op.coef_x == 0.0 and op.coef_y == 0.0):
        return out
    u = _ladder(n_particles)
    up = np.zeros_like(c)  # J+ c
    dn = np.zeros_like(c)  # J- c
    up[1:] = u * c[:-1]
    dn[:-1] = u * c[1:]
    # Jx = (J+ + J-)/2, Jy = (J+ - J-)/(2i)
    out = out + 0.5 * op.coef_x * (up + dn) - 0.5j * op.coef_y * (up - dn)
    return out


def apply_operator(state: SpinState, op: CollectiveOperator) -> np.ndarray:
    """``op |state>`` as an unnormalised complex vector."""
    return _apply_raw(state.n_particles, state.amplitudes, op)


def expectation(state: SpinState, op: CollectiveOperator) -> float:
    """``Re <state| op |state>``; the imaginary part must vanish."""
    val = np.vdot(state.amplitudes, apply_operator(state, op))
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > HERMITICITY_ATOL * scale:
        raise ArithmeticError(f"non-Hermitian residual {val.imag:.3e}")
    return float(val.real)


def second_moment(state: SpinState, op: CollectiveOperator) -> float:
    """``<op^2>`` as the squared norm of ``op |state>``."""
    v = apply_operator(state, op)
    return float(np.vdot(v, v).real)


def variance(state: SpinState, op: CollectiveOperator) -> float:
    var = second_moment(state, op) - expectation(state, op) ** 2
    if var < 0.0:
        if var < -1e-14 * max(1.0, second_moment(state, op)):
            raise ArithmeticError(f"negative variance {var:.3e}")
        var = 0.0
    return var


def commutator_expectation(state: SpinState, a: CollectiveOperator, b: CollectiveOperator) -> complex:
    """``<[a, b]>``."""
    ab = _apply_raw(state.n_particles, apply_operator(state, b), a)
    ba = _apply_raw(state.n_particles, apply_operator(state, a), b)
    return complex(np.vdot(state.amplitudes, ab - ba))


def exchange(state: SpinState) -> SpinState:
    """Swap the two modes: ``|J, m> -> |J, -m>``."""
    return SpinState(state.n_particles, state.amplitudes[::-1])
