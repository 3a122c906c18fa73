"""Finite Hermitian pencils A + tB: trace of the exponential, commuting-case
atomic measures, support-slope diagnostics, and complete-monotonicity tests.

Complex Hermitian matrices are handled through the real symmetric embedding
[[re, -im], [im, re]], whose spectrum is that of the complex matrix doubled;
a cyclic Jacobi sweep diagonalizes the embedding and the duplicate pairs are
collapsed (their gaps double as a Hermiticity check).  Desk-scale sizes only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .absmono import CMReport, SampledFunction, am_test

__all__ = [
    "HermitianMatrix",
    "MatrixPencil",
    "SlopeReport",
    "jacobi_symmetric",
    "hermitian_eigenvalues",
    "pencil_trace_exp",
    "commuting_measure",
    "support_slope_check",
    "bmv_cm_test",
]

_PAIR_GAP_FACTOR = 1e3 * 2.0 ** -53


@dataclass(frozen=True)
class HermitianMatrix:
    """n x n Hermitian matrix stored as real part (symmetric) + imaginary part
    (antisymmetric); inputs are validated and then symmetrized exactly."""

    re: np.ndarray
    im: np.ndarray

    def __init__(self, re, im=None):
        re = np.asarray(re, dtype=float)
        if re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise ValueError("re must be square")
        n = re.shape[0]
        im = np.zeros((n, n)) if im is None else np.asarray(im, dtype=float)
        if im.shape != re.shape:
            raise ValueError("im must match re in shape")
        if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
            raise ValueError("entries must be finite")
        scale = max(float(np.max(np.abs(re))), float(np.max(np.abs(im))), 1e-300)
        if float(np.max(np.abs(re - re.T))) > 1e-12 * scale:
            raise ValueError("re is not symmetric")
        if float(np.max(np.abs(im + im.T))) > 1e-12 * scale:
            raise ValueError("im is not antisymmetric")
        re = 0.5 * (re + re.T)
        im = 0.5 * (im - im.T)
        re.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_complex(cls, m) -> "HermitianMatrix":
        m = np.asarray(m, dtype=complex)
        return cls(m.real, m.imag)

    @property
    def n(self) -> int:
        return self.re.shape[0]

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    def embedding(self) -> np.ndarray:
        """Real symmetric 2n x 2n matrix [[re, -im], [im, re]]."""
        return np.block([[self.re, -self.im], [self.im, self.re]])

    def frobenius(self) -> float:
        return math.sqrt(float(np.sum(self.re ** 2) + np.sum(self.im ** 2)))

    def add_scaled(self, other: "HermitianMatrix", factor: float) -> "HermitianMatrix":
        return HermitianMatrix(self.re + factor * other.re, self.im + factor * other.im)


def jacobi_symmetric(
    sym, tol: float = 1e-15, max_sweeps: int = 60, want_vectors: bool = False
):
    """Cyclic Jacobi on a real symmetric matrix.

    Returns ascending eigenvalues (and the orthogonal matrix of column
    eigenvectors when requested).  Sweeps stop when the off-diagonal
    Frobenius norm drops below tol * ||M||_F.
    """
    arr = np.asarray(sym, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix must be square")
    n = arr.shape[0]
    a = [[float(arr[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)] if want_vectors else None
    fro = math.sqrt(sum(x * x for row in a for x in row))
    if fro == 0.0:
        vals = np.zeros(n)
        return (vals, np.eye(n)) if want_vectors else vals
    for _ in range(max_sweeps):
        off2 = 0.0
        for p in range(n - 1):
            row = a[p]
            off2 += sum(row[q] * row[q] for q in range(p + 1, n))
        if math.sqrt(2.0 * off2) <= tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                tt = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    tt = -tt
                c = 1.0 / math.sqrt(tt * tt + 1.0)
                s = tt * c
                tau = s / (1.0 + c)
                a[p][p] -= tt * apq
                a[q][q] += tt * apq
                a[p][q] = a[q][p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp = a[r][p]
                    arq = a[r][q]
                    a[r][p] = a[p][r] = arp - s * (arq + arp * tau)
                    a[r][q] = a[q][r] = arq + s * (arp - arq * tau)
                if v is not None:
                    for r in range(n):
                        vrp = v[r][p]
                        vrq = v[r][q]
                        v[r][p] = vrp - s * (vrq + vrp * tau)
                        v[r][q] = vrq + s * (vrp - vrq * tau)
    vals = np.array([a[i][i] for i in range(n)])
    order = np.argsort(vals, kind="stable")
    if v is None:
        return vals[order]
    vec = np.array(v)[:, order]
    return vals[order], vec


def hermitian_eigenvalues(m: HermitianMatrix, tol: float = 1e-15) -> np.ndarray:
    """Ascending eigenvalues via Jacobi on the real embedding.

    The 2n embedded eigenvalues arrive in duplicate pairs; adjacent sorted
    values are paired and a pair gap above 1e3 roundoffs of the norm signals
    a non-Hermitian input that slipped through.
    """
    vals = jacobi_symmetric(m.embedding(), tol=tol)
    scale = max(m.frobenius(), 1e-300)
    pairs = vals.reshape(-1, 2)
    gaps = pairs[:, 1] - pairs[:, 0]
    if float(np.max(gaps)) > _PAIR_GAP_FACTOR * scale:
        raise ValueError(
            f"embedded eigenvalues failed to pair (worst gap {float(np.max(gaps)):.3e}); "
            "input is not Hermitian"
        )
    return 0.5 * (pairs[:, 0] + pairs[:, 1])


@dataclass
class MatrixPencil:
    """Pencil A + tB with B positive semidefinite (within tolerance).

    ``project_psd=True`` clips tiny negative eigenvalues of B onto the PSD
    cone instead of rejecting the input.
    """

    a: HermitianMatrix
    b: HermitianMatrix
    project_psd: bool = False
    b_eigen_bounds: tuple[float, float] = field(init=False)

    def __post_init__(self):
        if self.a.n != self.b.n:
            raise ValueError("A and B must have matching sizes")
        if self.b.frobenius() == 0.0:
            raise ValueError("B must be nonzero")
        b_eigs = hermitian_eigenvalues(self.b)
        floor = -1e-10 * max(self.b.frobenius(), 1e-300)
        if b_eigs[0] < floor:
            if not self.project_psd:
                raise ValueError(
                    f"B is not positive semidefinite (lambda_min = {b_eigs[0]:.3e})"
                )
            vals, vecs = jacobi_symmetric(self.b.embedding(), want_vectors=True)
            clipped = np.maximum(vals, 0.0)
            emb = vecs @ np.diag(clipped) @ vecs.T
            n = self.b.n
            re = 0.5 * (emb[:n, :n] + emb[n:, n:])
            im = 0.5 * (emb[n:, :n] - emb[:n, n:])
            self.b = HermitianMatrix(re, im)
            b_eigs = hermitian_eigenvalues(self.b)
        self.b_eigen_bounds = (float(b_eigs[0]), float(b_eigs[-1]))

    def matrix_at(self, t: float) -> HermitianMatrix:
        return self.a.add_scaled(self.b, t)


def pencil_trace_exp(p: MatrixPencil, t: float) -> float:
    """trace exp(-(A + tB)) = sum_i exp(-mu_i) over the pencil eigenvalues."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    mu = hermitian_eigenvalues(p.matrix_at(t))
    return float(np.sum(np.exp(-mu)))


def commuting_measure(
    p: MatrixPencil, comm_tol: float = 1e-10, seed: int = 0
) -> list[tuple[float, float]]:
    """Atoms (location, weight) of the commuting-case measure.

    Requires ||AB - BA||_max <= comm_tol * ||A|| ||B||.  Simultaneous
    diagonalization runs through A + gamma*B for a random generic gamma,
    retrying on near-degeneracy; atoms sit at B's joint eigenvalues with
    weights exp(-joint eigenvalue of A).  The reconstruction
    sum w_i exp(-b_i t) is verified against pencil_trace_exp at t = 0, 1, 2
    to 1e-10 before returning.
    """
    ac = p.a.to_complex()
    bc = p.b.to_complex()
    comm = float(np.max(np.abs(ac @ bc - bc @ ac)))
    norm_scale = max(p.a.frobenius() * p.b.frobenius(), 1e-300)
    if comm > comm_tol * norm_scale:
        raise ValueError(
            f"pencil does not commute (||[A,B]||_max = {comm:.3e} "
            f"> {comm_tol:g} * ||A|| ||B||)"
        )
    rng = np.random.default_rng(seed)
    n = p.a.n
    last_fail = "no attempt"
    for _ in range(5):
        gamma = rng.uniform(0.3, 3.0)
        m = p.a.add_scaled(p.b, gamma)
        vals, vecs = jacobi_symmetric(m.embedding(), want_vectors=True)
        scale = max(m.frobenius(), 1e-300)
        # one complex eigenvector per duplicate pair
        order = np.argsort(vals, kind="stable")
        vals = vals[order]
        vecs = vecs[:, order]
        pair_vals = 0.5 * (vals[0::2] + vals[1::2])
        if np.any(np.diff(pair_vals) < 1e-8 * scale):
            last_fail = "near-degenerate joint spectrum"
            continue
        atoms: dict[float, float] = {}
        ok = True
        for i in range(n):
            z = vecs[:n, 2 * i] + 1j * vecs[n:, 2 * i]
            nrm = float(np.vdot(z, z).real)
            if nrm < 1e-12:
                ok = False
                last_fail = "degenerate embedded eigenvector"
                break
            a_val = float(np.vdot(z, ac @ z).real) / nrm
            b_val = float(np.vdot(z, bc @ z).real) / nrm
            for loc in atoms:
                if abs(loc - b_val) <= 1e-8 * (1.0 + abs(loc)):
                    atoms[loc] += math.exp(-a_val)
                    break
            else:
                atoms[b_val] = math.exp(-a_val)
        if not ok:
            continue
        result = sorted(atoms.items())
        recon_ok = True
        for t in (0.0, 1.0, 2.0):
            rec = sum(w * math.exp(-loc * t) for loc, w in result)
            ref = pencil_trace_exp(p, t)
            if abs(rec - ref) > 1e-10 * max(1.0, abs(ref)):
                recon_ok = False
                last_fail = f"reconstruction mismatch {abs(rec - ref):.3e} at t={t}"
                break
        if recon_ok:
            return result
    raise RuntimeError(f"commuting measure failed after 5 retries ({last_fail})")


@dataclass(frozen=True)
class SlopeReport:
    """Support check: chord slopes of -log phi against B's eigenvalue range."""

    ok: bool
    slopes: tuple[float, ...]
    lower: float
    upper: float
    delta: float
    violations: tuple[int, ...]


def support_slope_check(p: MatrixPencil, t_grid) -> SlopeReport:
    """Verify lambda_min - d <= -(log phi)'(t) <= lambda_max + d on the grid.

    Interior slopes are chords of log phi, which by the mean value theorem
    lie inside the derivative range exactly; d only absorbs rounding.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.size < 3 or np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
        raise ValueError("need an ascending positive grid with at least 3 points")
    log_phi = np.log([pencil_trace_exp(p, t) for t in ts])
    lo, hi = p.b_eigen_bounds
    delta = 1e-8 * (1.0 + abs(lo) + abs(hi))
    slopes = []
    violations = []
    for j in range(1, ts.size - 1):
        slope = -(log_phi[j + 1] - log_phi[j - 1]) / (ts[j + 1] - ts[j - 1])
        slopes.append(float(slope))
        if not (lo - delta <= slope <= hi + delta):
            violations.append(j)
    return SlopeReport(
        ok=not violations,
        slopes=tuple(slopes),
        lower=lo,
        upper=hi,
        delta=delta,
        violations=tuple(violations),
    )


def bmv_cm_test(
    p: MatrixPencil, orders: int, t_grid, h_set=None
) -> CMReport:
    """Complete-monotonicity sweep of t -> trace exp(-(A+tB))."""
    f = SampledFunction(
        f=lambda t: pencil_trace_exp(p, t),
        domain=(0.0, math.inf),
    )
    return am_test(f, orders, t_grid, h_set=h_set, mode="cm")
