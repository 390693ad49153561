"""Dense linear algebra kernels and seeded random generation.

Everything here works on plain ``numpy`` arrays. Matrices are 2-D float
arrays, vectors are 1-D float arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import linalg as sla

__all__ = [
    "NumericalBreakdownError",
    "FactorizationError",
    "SvdFactorization",
    "CholeskyFactor",
    "gaussian_matrix",
    "rng_from_seed",
    "svd",
    "spectral_norm_sq",
    "solve_spd",
]

JACOBI_MAX_SWEEPS = 30
JACOBI_TOL = 1e-12
POWER_MAX_ITERS = 10_000


class NumericalBreakdownError(RuntimeError):
    """An iterative kernel ran out of budget before converging."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class FactorizationError(ValueError):
    """Cholesky factorization hit a nonpositive pivot."""


class SvdFactorization(NamedTuple):
    """``m = u @ np.diag(s) @ vt``, singular values sorted nonincreasing."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.vt


def rng_from_seed(seed: int) -> np.random.Generator:
    """Return a Philox (counter-based) generator keyed by a 64-bit seed.

    Philox output depends only on the key and counter, so a given seed gives
    the same stream on every platform.
    """
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def gaussian_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """Matrix of i.i.d. standard normal entries, a pure function of ``seed``.

    Normals come from the Box-Muller transform applied to Philox uniforms
    (rather than numpy's ziggurat) so the bit pattern is pinned by this code.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"dimensions must be positive, got ({rows}, {cols})")
    n = rows * cols
    m = (n + 1) // 2
    gen = rng_from_seed(seed)
    # uniforms in (0, 1]: keeps log away from zero
    u1 = 1.0 - gen.random(m)
    u2 = gen.random(m)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.empty(2 * m)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:n].reshape(rows, cols)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering all (p, q), p < q, in n-1 rounds of disjoint pairs."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    k = len(players)
    rounds = []
    for _ in range(k - 1):
        ps, qs = [], []
        for i in range(k // 2):
            a, b = players[i], players[k - 1 - i]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _complete_basis(q: np.ndarray, k: int) -> np.ndarray:
    """Extend the first ``k`` orthonormal columns of ``q`` to a full basis."""
    m = q.shape[0]
    out = q.copy()
    j = k
    for e in np.eye(m):
        if j >= out.shape[1]:
            break
        v = e - out[:, :j] @ (out[:, :j].T @ e)
        v -= out[:, :j] @ (out[:, :j].T @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            out[:, j] = v / nv
            j += 1
    return out


def _jacobi_svd(a: np.ndarray) -> SvdFactorization:
    # one-sided (Hestenes) Jacobi on the columns of a, m >= n
    m, n = a.shape
    w = a.astype(float, copy=True)
    v = np.eye(n)
    scale = np.linalg.norm(w)
    if scale == 0.0:
        return SvdFactorization(np.eye(m, n), np.zeros(n), np.eye(n))
    rounds = _round_robin(n) if n > 1 else []
    off = 0.0
    for _ in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p, q in rounds:
            wp, wq = w[:, p], w[:, q]
            alpha = np.einsum("ij,ij->j", wp, wp)
            beta = np.einsum("ij,ij->j", wq, wq)
            gamma = np.einsum("ij,ij->j", wp, wq)
            denom = np.sqrt(alpha * beta)
            with np.errstate(divide="ignore", invalid="ignore"):
                rel = np.where(denom > 0, np.abs(gamma) / denom, 0.0)
            off = max(off, float(rel.max(initial=0.0)))
            active = rel > JACOBI_TOL
            if not active.any():
                continue
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta**2))
            c = 1.0 / np.sqrt(1.0 + t**2)
            s = c * t
            wp, wq = w[:, p], w[:, q]
            w[:, p], w[:, q] = c * wp - s * wq, s * wp + c * wq
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
        if off <= JACOBI_TOL:
            break
    else:
        raise NumericalBreakdownError("Jacobi SVD did not converge", off)

    sigma = np.linalg.norm(w, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, w, v = sigma[order], w[:, order], v[:, order]
    nonzero = sigma > sigma[0] * 1e-14 * max(m, n)
    k = int(nonzero.sum())
    u = np.zeros((m, n))
    u[:, :k] = w[:, :k] / sigma[:k]
    if k < n:
        u = _complete_basis(u, k)
        sigma[k:] = 0.0
    return SvdFactorization(u, sigma, v.T)


def svd(m: np.ndarray, method: str = "jacobi") -> SvdFactorization:
    """Singular value decomposition ``m = U diag(s) V^T``.

    Parameters
    ----------
    m : ndarray, shape (r, c)
        Input matrix. Square inputs give square orthogonal factors; for
        rectangular inputs the factors are thin (``min(r, c)`` columns).
    method : {"jacobi", "lapack"}
        ``"jacobi"`` is the one-sided Jacobi implementation in this module
        (30 sweeps, off-diagonal tolerance 1e-12). ``"lapack"`` delegates to
        ``numpy.linalg.svd`` and is what the hot solver loops use.

    Raises
    ------
    NumericalBreakdownError
        If Jacobi sweeps fail to drive the column coherence below tolerance.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("svd expects a 2-D array")
    if not np.all(np.isfinite(m)):
        raise ValueError("svd input has non-finite entries")
    if method == "lapack":
        u, s, vt = np.linalg.svd(m, full_matrices=False)
        return SvdFactorization(u, s, vt)
    if method != "jacobi":
        raise ValueError(f"unknown svd method {method!r}")
    if m.shape[0] < m.shape[1]:
        f = _jacobi_svd(m.T)
        return SvdFactorization(f.vt.T, f.s, f.u.T)
    return _jacobi_svd(m)


def spectral_norm_sq(m: np.ndarray, tol: float = 1e-12) -> float:
    """Largest eigenvalue of ``m.T @ m`` by power iteration.

    Starts from the normalized all-ones vector and stops when the relative
    change of the Rayleigh quotient drops below ``tol`` (at most 10 000
    iterations). A zero matrix returns 0.
    """
    m = np.asarray(m, dtype=float)
    if not np.any(m):
        return 0.0
    n = m.shape[1]
    x = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(POWER_MAX_ITERS):
        y = m.T @ (m @ x)
        new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # all-ones may sit in the kernel of a nonzero matrix
            x = np.cos(np.arange(1, n + 1))
            x /= np.linalg.norm(x)
            continue
        x = y / ny
        if abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    return lam


class CholeskyFactor:
    """Cholesky factor of an SPD matrix, reusable across many solves."""

    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if not np.allclose(a, a.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(a).max())):
            raise FactorizationError("matrix is not symmetric")
        try:
            self._cf = sla.cho_factor(a, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(f"nonpositive pivot: {exc}") from None

    def solve(self, b: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self._cf, b, check_finite=False)


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a``."""
    return CholeskyFactor(a).solve(np.asarray(b, dtype=float))
