"""Tridiagonal kernels: eigenvalues, eigenvectors and Crank-Nicolson steps.

Every function here operates on plain arrays and is compiled with numba when
available (see :mod:`twomode._jit`).  Matrices are symmetric tridiagonal and
stored as ``(diag, off)`` with ``len(off) == len(diag) - 1``.
"""

import numpy as np

from ._jit import njit

_EPS = np.finfo(np.float64).eps
_TINY = np.finfo(np.float64).tiny


@njit
def gershgorin(diag, off):
    n = diag.shape[0]
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(off[i - 1])
        if i < n - 1:
            r += abs(off[i])
        lo = min(lo, diag[i] - r)
        hi = max(hi, diag[i] + r)
    return lo, hi


@njit
def sturm_count(diag, off2, x, pivmin):
    """Number of eigenvalues strictly below ``x``."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = diag[i] - x - off2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit
def bisect_eigenvalues(diag, off, k):
    """The ``k`` smallest eigenvalues, ascending, by Sturm bisection."""
    n = diag.shape[0]
    off2 = off * off
    lo0, hi0 = gershgorin(diag, off)
    width = max(hi0 - lo0, 1.0)
    lo0 -= 2.0 * _EPS * width
    hi0 += 2.0 * _EPS * width
    pivmin = _TINY * max(1.0, np.max(off2) if n > 1 else 1.0)
    out = np.empty(k)
    lower = lo0
    for j in range(k):
        lo = lower
        hi = hi0
        # invariant: count(lo) <= j < count(hi)
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if sturm_count(diag, off2, mid, pivmin) > j:
                hi = mid
            else:
                lo = mid
        out[j] = 0.5 * (lo + hi)
        lower = lo
    return out


@njit
def tridiag_lu(dl, d, du):
    """LU factorisation with partial pivoting, in place (LAPACK ``gttrf``).

    Returns ``(du2, ipiv, info)``; ``info > 0`` flags an exactly zero pivot.
    Works for real and complex dtypes.
    """
    n = d.shape[0]
    du2 = np.zeros_like(d)
    ipiv = np.arange(n)
    info = 0
    for i in range(n - 2):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] != 0.0:
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] = d[i + 1] - fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            du2[i] = du[i + 1]
            du[i + 1] = -fact * du[i + 1]
            ipiv[i] = i + 1
    if n > 1:
        i = n - 2
        if abs(d[i]) >= abs(dl[i]):
            if d[i] != 0.0:
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] = d[i + 1] - fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            ipiv[i] = i + 1
    for i in range(n):
        if d[i] == 0.0:
            info = i + 1
            break
    return du2, ipiv, info


@njit
def tridiag_lu_solve(dl, d, du, du2, ipiv, b):
    """Solve in place using the factors from :func:`tridiag_lu`."""
    n = d.shape[0]
    for i in range(n - 1):
        ip = ipiv[i]
        temp = b[2 * i + 1 - ip] - dl[i] * b[ip]
        b[i] = b[ip]
        b[i + 1] = temp
    b[n - 1] = b[n - 1] / d[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i]
    return b


@njit
def inverse_iteration(diag, off, lam, iterations=4):
    """Normalised eigenvector of ``(diag, off)`` for the eigenvalue ``lam``."""
    n = diag.shape[0]
    lo, hi = gershgorin(diag, off)
    scale = max(hi - lo, abs(lam), 1.0)
    d = diag - lam
    dl = off.copy()
    du = off.copy()
    du2, ipiv, info = tridiag_lu(dl, d, du)
    for i in range(n):
        if abs(d[i]) < _EPS * scale:
            d[i] = _EPS * scale
    x = np.empty(n)
    for i in range(n):
        x[i] = 1.0 + 0.25 * np.sin(1.7 * i + 0.3)
    x /= np.sqrt(np.sum(x * x))
    for _ in range(iterations):
        tridiag_lu_solve(dl, d, du, du2, ipiv, x)
        x /= np.sqrt(np.sum(x * x))
    return x


@njit
def tql_implicit(diag, off, want_vectors):
    """All eigenpairs by implicit-shift QL.

    Returns ``(w, z, info)`` with eigenvalues ``w`` unsorted and eigenvectors
    in the columns of ``z`` (identity-shaped placeholder when not wanted).
    ``info`` is the index of a non-converged eigenvalue plus one, else 0.
    """
    n = diag.shape[0]
    d = diag.copy()
    e = np.zeros(n)
    e[: n - 1] = off
    if want_vectors:
        z = np.eye(n)
    else:
        z = np.eye(1)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return d, z, l + 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(n):
                        f = z[k, i + 1]
                        z[k, i + 1] = s * z[k, i] + c * f
                        z[k, i] = c * z[k, i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z, 0


@njit
def cn_evolve(psi, zdiag, xoff, g, amp, rate, base, t_rel, h, nsteps):
    """Advance ``psi`` by ``nsteps`` Crank-Nicolson steps of size ``h``.

    The Hamiltonian is ``g * diag(zdiag) + de(t) * offdiag(xoff)`` with
    ``de(t) = amp * exp(-rate * t) + base`` and ``t`` measured from the
    segment start; ``t_rel`` is the start time of the first step.  Each step
    evaluates ``de`` at the interval midpoint.  ``psi`` is modified in place.
    """
    n = psi.shape[0]
    d = np.empty(n, dtype=np.complex128)
    dl = np.empty(n - 1, dtype=np.complex128)
    du = np.empty(n - 1, dtype=np.complex128)
    rhs = np.empty(n, dtype=np.complex128)
    half = 0.5j * h
    for s in range(nsteps):
        de = amp * np.exp(-rate * (t_rel + (s + 0.5) * h)) + base
        for i in range(n):
            hd = g * zdiag[i]
            acc = (1.0 - half * hd) * psi[i]
            if i > 0:
                acc -= half * de * xoff[i - 1] * psi[i - 1]
            if i < n - 1:
                acc -= half * de * xoff[i] * psi[i + 1]
            rhs[i] = acc
            d[i] = 1.0 + half * hd
        for i in range(n - 1):
            dl[i] = half * de * xoff[i]
            du[i] = dl[i]
        du2, ipiv, info = tridiag_lu(dl, d, du)
        tridiag_lu_solve(dl, d, du, du2, ipiv, rhs)
        for i in range(n):
            psi[i] = rhs[i]
    return psi
