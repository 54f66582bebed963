"""Brute-force reference ground states used by ``selftest`` and the test-suite.

The dense matrix is built directly from the angular-momentum matrix elements,
independently of the tridiagonal assembly.  Dense double-precision eigenvectors
lose accuracy like ``eps * ||H|| / gap``, so nearly degenerate cases are
re-solved in extended precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .hamiltonian import TwoModeParams, ground_state

# below this gap (relative to the spectral width) switch to extended precision
ILL_CONDITIONED_GAP = 1e-4
MP_DIGITS = 40


def _dense_elements(n: int, g: float, delta_e: float):
    j = n / 2.0
    diag = [2.0 * g * (k - j) ** 2 for k in range(n + 1)]
    # <m+1|Jx|m> = sqrt(J(J+1) - m(m+1)) / 2
    off = [(j * (j + 1) - (k - j) * (k - j + 1), delta_e / 2.0) for k in range(n)]
    return diag, off


def dense_reference(n: int, g: float, delta_e: float) -> tuple[float, np.ndarray]:
    """``(E0, |c_m|)`` from a dense solver, in extended precision when needed."""
    diag, off = _dense_elements(n, g, delta_e)
    mat = np.diag(diag)
    for k, (rad, scale) in enumerate(off):
        mat[k, k + 1] = mat[k + 1, k] = scale * np.sqrt(rad)
    w, v = np.linalg.eigh(mat)
    width = max(w[-1] - w[0], np.finfo(float).tiny)
    if n == 0 or (w[1] - w[0]) > ILL_CONDITIONED_GAP * width:
        return float(w[0]), np.abs(v[:, 0])
    with mpmath.workdps(MP_DIGITS):
        a = mpmath.matrix(n + 1)
        j = mpmath.mpf(n) / 2
        for k in range(n + 1):
            a[k, k] = 2 * mpmath.mpf(g) * (k - j) ** 2
        for k in range(n):
            m = k - j
            a[k, k + 1] = a[k + 1, k] = mpmath.mpf(delta_e) / 2 * mpmath.sqrt(j * (j + 1) - m * (m + 1))
        e, q = mpmath.eigsy(a)
        i0 = min(range(n + 1), key=lambda i: e[i])
        return float(e[i0]), np.array([abs(float(q[i, i0])) for i in range(n + 1)])


@dataclass(frozen=True)
class EquivalenceReport:
    cases: int
    max_energy_error: float
    max_amplitude_error: float
    worst_case: tuple

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_energy_error <= tol and self.max_amplitude_error <= tol


def random_draws(n_max: int, draws: int, seed: int):
    """``(N, g, dE)`` with ``g`` in [-1, 1] and ``dE`` in [0.05, 2] for each ``N <= n_max``."""
    rng = np.random.default_rng(seed)
    for n in range(1, n_max + 1):
        for _ in range(draws):
            yield n, float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.05, 2.0))


def oracle_equivalence(n_max: int = 12, draws: int = 20, seed: int = 20240601) -> EquivalenceReport:
    worst_e = worst_c = 0.0
    worst = ()
    cases = 0
    for n, g, de in random_draws(n_max, draws, seed):
        gs = ground_state(TwoModeParams(n, g, de), warn=False)
        e_ref, c_ref = dense_reference(n, g, de)
        de_err = abs(gs.energy - e_ref)
        dc_err = float(np.max(np.abs(np.abs(gs.state.amplitudes) - c_ref)))
        if max(de_err, dc_err) > max(worst_e, worst_c):
            worst = (n, g, de)
        worst_e = max(worst_e, de_err)
        worst_c = max(worst_c, dc_err)
        cases += 1
    return EquivalenceReport(cases, worst_e, worst_c, worst)
