"""Two-mode spin Hamiltonian ``H = 2 g Jz^2 + dE Jx`` and its low spectrum.

Energies are in units of the trap quantum; the constant ``f(J)`` and the
``hbar*omega*N`` offset are dropped.

The matrix is persymmetric (invariant under the mode exchange ``m -> -m``),
so it is folded into an even and an odd exchange sector before solving.
Each sector is an unreduced tridiagonal matrix with a simple spectrum, which
keeps the nearly degenerate doublets of the attractive regime well separated
numerically and makes the returned ground state an exact parity eigenstate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .hilbert import SpinState, ladder_elements, m_values

DEGENERACY_RTOL = 1e-13
# sectors up to this size use full QL; larger ones use bisection + inverse iteration
QL_MAX_SIZE = 160


class DegeneracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TwoModeParams:
    """Particle number, pair interaction ``g`` and tunnelling energy ``delta_e``."""

    n_particles: int
    g: float
    delta_e: float

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError("n_particles must be an integer >= 1")
        if not (np.isfinite(self.g) and np.isfinite(self.delta_e)):
            raise ValueError("g and delta_e must be finite")
        if self.delta_e < 0:
            raise ValueError("delta_e must be non-negative")
        object.__setattr__(self, "n_particles", int(self.n_particles))

    @property
    def g_param(self) -> float:
        """``G = 2 g N / dE``, the mean-field to tunnelling ratio."""
        if self.delta_e == 0.0:
            return float(np.copysign(np.inf, self.g)) if self.g != 0 else float("nan")
        return 2.0 * self.g * self.n_particles / self.delta_e

    @classmethod
    def from_g_param(cls, n_particles: int, g_param: float, delta_e: float = 1.0) -> TwoModeParams:
        return cls(n_particles, g_param * delta_e / (2.0 * n_particles), delta_e)


@dataclass(frozen=True)
class TridiagonalMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        o = np.asarray(self.offdiag, dtype=float)
        if o.shape[0] != max(d.shape[0] - 1, 0):
            raise ValueError("offdiag must have length len(diag) - 1")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o))):
            raise ValueError("non-finite matrix entries")
        d.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", o)

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def spectral_bounds(self) -> tuple[float, float]:
        return kernels.gershgorin(self.diag, self.offdiag)


@dataclass(frozen=True)
class GroundState:
    """Lowest eigenpair.  When the ground level is degenerate within
    ``DEGENERACY_RTOL`` of the spectral width, ``partner`` holds the other
    member of the doublet (of opposite exchange parity)."""

    energy: float
    state: SpinState
    parity: int
    degenerate: bool = False
    partner: Optional[SpinState] = None
    partner_energy: Optional[float] = None

    def __iter__(self):
        yield self.energy
        yield self.state


def build_hamiltonian(params: TwoModeParams) -> TridiagonalMatrix:
    n = params.n_particles
    m = m_values(n)
    return TridiagonalMatrix(2.0 * params.g * m * m, 0.5 * params.delta_e * ladder_elements(n))


# --- exchange-parity folding -------------------------------------------------

def _fold(h: TridiagonalMatrix, parity: int) -> TridiagonalMatrix:
    """Restrict to states with ``c_{N-k} = parity * c_k``.

    Basis: ``(|k> + parity |N-k>)/sqrt 2`` for ``k < N/2`` and, for even
    ``N`` and ``parity = +1``, the central state ``|N/2>``.
    """
    n = h.size - 1
    d, o = h.diag, h.offdiag
    if n % 2 == 0:
        c = n // 2
        if parity > 0:
            diag = d[: c + 1].copy()
            off = o[:c].copy()
            if c > 0:
                off[c - 1] *= np.sqrt(2.0)
        else:
            diag = d[:c].copy()
            off = o[: max(c - 1, 0)].copy()
    else:
        c = (n - 1) // 2
        diag = d[: c + 1].copy()
        off = o[:c].copy()
        diag[c] += parity * o[c]
    return TridiagonalMatrix(diag, off)


def _unfold(vec: np.ndarray, n: int, parity: int) -> np.ndarray:
    out = np.zeros(n + 1)
    r = 1.0 / np.sqrt(2.0)
    if n % 2 == 0 and parity > 0:
        c = n // 2
        out[:c] = r * vec[:c]
        out[n - c + 1:] = r * vec[:c][::-1]
        out[c] = vec[c]
    else:
        half = vec.shape[0]
        out[:half] = r * vec
        out[n + 1 - half:] = parity * r * vec[::-1]
    return out


def _sector_eigh(t: TridiagonalMatrix, k: int, vectors: bool):
    """``k`` lowest eigenvalues (and vectors) of one folded sector."""
    if t.size == 0:
        return np.empty(0), np.empty((0, 0))
    k = min(k, t.size)
    if t.size <= QL_MAX_SIZE:
        w, z, info = kernels.tql_implicit(t.diag, t.offdiag, vectors)
        if info:
            raise ArithmeticError(f"QL iteration failed to converge (index {info - 1})")
        order = np.argsort(w, kind="stable")[:k]
        return w[order], (z[:, order] if vectors else None)
    w = kernels.bisect_eigenvalues(t.diag, t.offdiag, k)
    if not vectors:
        return w, None
    z = np.empty((t.size, k))
    for i, lam in enumerate(w):
        z[:, i] = kernels.inverse_iteration(t.diag, t.offdiag, lam)
    if k > 1:
        # clustered eigenvalues can share an inverse-iteration direction
        z, _ = np.linalg.qr(z)
    return w, z


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    mag = np.abs(vec)
    top = mag.max()
    # ties (mirror-image amplitudes) resolve to the largest m
    idx = int(np.nonzero(mag >= top * (1.0 - 1e-9))[0][-1])
    return vec * (np.conj(vec[idx]) / abs(vec[idx]))


def _width(h: TridiagonalMatrix) -> float:
    lo, hi = h.spectral_bounds()
    return max(hi - lo, np.finfo(float).tiny)


def _sectors(params: TwoModeParams):
    h = build_hamiltonian(params)
    n = params.n_particles
    # the delta_e > 0 ground state has parity (-1)^N, list that sector first
    natural = 1 if n % 2 == 0 else -1
    return h, [natural, -natural]


def ground_state(params: TwoModeParams, warn: bool = True) -> GroundState:
    """Ground state with the largest amplitude made real and positive."""
    h, parities = _sectors(params)
    n = params.n_particles
    found = []
    for p in parities:
        t = _fold(h, p)
        if t.size == 0:
            continue
        w, z = _sector_eigh(t, 1, True)
        vec = _unfold(z[:, 0], n, p)
        vec /= np.linalg.norm(vec)
        found.append((float(w[0]), p, _fix_phase(vec)))
    found.sort(key=lambda item: item[0])  # stable: natural parity wins exact ties
    e0, p0, v0 = found[0]
    width = _width(h)
    degenerate = len(found) > 1 and (found[1][0] - e0) < DEGENERACY_RTOL * width
    if degenerate:
        # prefer the parity continuously connected to delta_e > 0
        found.sort(key=lambda item: (0 if item[1] == parities[0] else 1))
        e0, p0, v0 = found[0]
        e1, _, v1 = found[1]
        if warn:
            warnings.warn(
                f"degenerate ground level for N={n}, g={params.g}, dE={params.delta_e}",
                DegeneracyWarning,
                stacklevel=2,
            )
        return GroundState(e0, SpinState(n, v0), p0, True, SpinState(n, v1), e1)
    return GroundState(e0, SpinState(n, v0), p0)


def _parity_spectra(params: TwoModeParams, k: int):
    h, parities = _sectors(params)
    out = {}
    for p in parities:
        t = _fold(h, p)
        w, _ = _sector_eigh(t, k, False)
        out[p] = w
    return out


def low_spectrum(params: TwoModeParams, k: int) -> np.ndarray:
    """The ``k`` lowest eigenvalues, ascending."""
    n = params.n_particles
    if not 1 <= k <= n + 1:
        raise ValueError(f"k must lie in [1, {n + 1}], got {k}")
    spectra = _parity_spectra(params, k)
    return np.sort(np.concatenate(list(spectra.values())))[:k]


def spectral_gap(params: TwoModeParams, same_parity: bool = False) -> float:
    """``E1 - E0``.

    With ``same_parity=True`` the first excitation is taken inside the
    exchange sector of the ground state, i.e. the gap relevant for dynamics
    generated by the (exchange-symmetric) Hamiltonian itself.
    """
    if not same_parity:
        w = low_spectrum(params, 2)
        return float(max(w[1] - w[0], 0.0))
    spectra = _parity_spectra(params, 2)
    p0 = min(spectra, key=lambda p: spectra[p][0])
    w = spectra[p0]
    if w.shape[0] < 2:
        return float("inf")
    return float(w[1] - w[0])


def residual_norm(params: TwoModeParams, energy: float, state: SpinState) -> float:
    """``|| H psi - E psi ||``."""
    h = build_hamiltonian(params)
    a = state.amplitudes
    hv = h.matvec(a.real.copy()) + 1j * h.matvec(a.imag.copy())
    return float(np.linalg.norm(hv - energy * a))


def dense_ground_state(params: TwoModeParams) -> tuple[float, np.ndarray, float]:
    """Reference ground state from a dense symmetric eigensolver.

    Returns ``(E0, |c_m|, E1 - E0)``; independent of the tridiagonal path.
    """
    from .hilbert import JX, JZ2

    n = params.n_particles
    mat = (2.0 * params.g * JZ2.matrix(n) + params.delta_e * JX.matrix(n)).real
    w, v = np.linalg.eigh(mat)
    return float(w[0]), np.abs(v[:, 0]), float(w[1] - w[0]) if n > 0 else np.inf
