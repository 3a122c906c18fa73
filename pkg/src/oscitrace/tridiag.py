"""Symmetric tridiagonal eigenvalue kernel: Sturm counts and certified bisection.

The LDL^T pivot recursion at a shift mu yields the number of eigenvalues
below mu; bisecting on that count inside the Gershgorin interval gives each
eigenvalue with a certified bracket.  ``lowest`` delegates the bulk solve to
LAPACK's stebz driver, which runs the same bisection compiled; the pure
Python ``sturm_count``/``bisect_kth`` remain the reference implementation and
are cross-checked against it.
"""
from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

__all__ = ["SymTridiagonal", "sturm_count", "bisect_kth", "lowest"]

_TINY = sys.float_info.min  # smallest normal positive double


@dataclass(frozen=True)
class SymTridiagonal:
    """Real symmetric tridiagonal matrix stored as diagonal + off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __init__(self, diag, offdiag):
        d = np.asarray(diag, dtype=float)
        e = np.asarray(offdiag, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("diag must be a nonempty 1-d array")
        if e.ndim != 1 or e.size != d.size - 1:
            raise ValueError("offdiag must have length len(diag) - 1")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("matrix entries must be finite")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def gershgorin(self) -> tuple[float, float]:
        """Closed interval guaranteed to contain the whole spectrum."""
        radius = np.zeros(self.n)
        if self.n > 1:
            ae = np.abs(self.offdiag)
            radius[:-1] += ae
            radius[1:] += ae
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))


def sturm_count(T: SymTridiagonal, mu: float) -> int:
    """Number of eigenvalues of T strictly less than mu.

    Counts negative pivots of the shifted LDL^T recursion with the standard
    tiny-value guard on vanishing pivots; the guard is signed positive so an
    eigenvalue sitting exactly at the shift is not counted (strict count).
    """
    d = T.diag
    e = T.offdiag
    count = 0
    q = d[0] - mu
    if abs(q) < _TINY:
        q = _TINY
    if q < 0.0:
        count += 1
    for i in range(1, T.n):
        q = (d[i] - mu) - e[i - 1] * e[i - 1] / q
        if abs(q) < _TINY:
            q = _TINY
        if q < 0.0:
            count += 1
    return count


def bisect_kth(T: SymTridiagonal, k: int, tol: float = 1e-10) -> float:
    """k-th smallest eigenvalue (k from 0), certified to |error| <= tol.

    Bisection on the Sturm count inside the Gershgorin bounds; stops when the
    bracket is narrower than tol or after 200 iterations (warns with the
    achieved width in that case).
    """
    if not 0 <= k < T.n:
        raise ValueError(f"eigenvalue index {k} out of range for n={T.n}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = T.gershgorin()
    # widen marginally so the strict count brackets are valid at the ends
    pad = max(1e-300, 1e-15 * max(abs(lo), abs(hi)))
    lo -= pad
    hi += pad
    for _ in range(200):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        if sturm_count(T, mid) <= k:
            lo = mid
        else:
            hi = mid
    else:
        warnings.warn(
            f"bisect_kth stopped after 200 iterations; achieved width {hi - lo:.3e}"
        )
    return 0.5 * (lo + hi)


def _enforce_increasing(vals: np.ndarray) -> np.ndarray:
    out = np.array(vals, dtype=float)
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return out


def eigen_range(T: SymTridiagonal, lo: int, hi: int, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues with indices lo..hi (ascending order), LAPACK bisection."""
    if not 0 <= lo <= hi < T.n:
        raise ValueError(f"index range [{lo}, {hi}] out of bounds for n={T.n}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if T.n == 1:
        return np.array([T.diag[0]], dtype=float)
    vals = eigvalsh_tridiagonal(
        T.diag,
        T.offdiag,
        select="i",
        select_range=(lo, hi),
        lapack_driver="stebz",
        tol=min(tol, 1e-8),
    )
    return np.sort(vals)


def lowest(T: SymTridiagonal, m: int, tol: float = 1e-10) -> np.ndarray:
    """First m eigenvalues in ascending order, each within tol.

    Backed by LAPACK bisection (stebz) for speed; ordering is enforced to be
    strictly increasing afterwards.
    """
    if not 1 <= m <= T.n:
        raise ValueError(f"m={m} out of range for n={T.n}")
    return _enforce_increasing(eigen_range(T, 0, m - 1, tol=tol))
