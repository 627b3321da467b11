"""Small dense complex linear algebra: products, adjoints and an SVD.

Everything here operates on plain ``numpy`` arrays of dtype ``complex128``
and is sized for the tiny matrices (at most 8x8) the rest of the package
needs.  The SVD is a one-sided Jacobi iteration with a fixed phase
convention so that repeated calls on the same input return bit-identical
factors.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-14


def as_cmatrix(a) -> np.ndarray:
    """Validate and return `a` as a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    return m


def cmatmul(a, b) -> np.ndarray:
    """Complex matrix product a @ b with an explicit shape check."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch for product: {a.shape} x {b.shape}")
    return a @ b


def conj_transpose(a) -> np.ndarray:
    """Conjugate transpose (Hermitian adjoint) of `a`."""
    return as_cmatrix(a).conj().T.copy()


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_cmatrix(a)))


@dataclass(frozen=True)
class SvdResult:
    """Full SVD a = u @ diag(sigma) @ v*, with u, v unitary and sigma descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        r = self.sigma.size
        return (self.u[:, :r] * self.sigma) @ self.v[:, :r].conj().T


def _fingerprint(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()[:12]


def _complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend a set of orthonormal columns to a full orthonormal basis of C^dim.

    Candidate vectors are the identity columns in index order, so the result
    is deterministic.
    """
    basis = [cols[:, i] for i in range(cols.shape[1])]
    for k in range(dim):
        if len(basis) == dim:
            break
        e = np.zeros(dim, dtype=np.complex128)
        e[k] = 1.0
        for b in basis:
            e = e - np.vdot(b, e) * b
        nrm = np.linalg.norm(e)
        if nrm > 0.5:  # identity column mostly outside current span
            basis.append(e / nrm)
    out = np.column_stack(basis)
    if out.shape[1] != dim:
        raise NumericError("failed to complete orthonormal basis")
    return out


def _fix_phases(u: np.ndarray, v: np.ndarray, rank: int) -> tuple[np.ndarray, np.ndarray]:
    """Rotate column pairs so the largest-magnitude entry of each V column is real positive."""
    n = v.shape[1]
    for i in range(n):
        r = int(np.argmax(np.abs(v[:, i])))
        pivot = v[r, i]
        if abs(pivot) > 0:
            w = np.conj(pivot) / abs(pivot)
            v[:, i] *= w
            if i < rank:
                u[:, i] *= w
    # unpaired U columns (beyond the V-paired ones) get the same convention
    for i in range(rank, u.shape[1]):
        r = int(np.argmax(np.abs(u[:, i])))
        pivot = u[r, i]
        if abs(pivot) > 0:
            u[:, i] *= np.conj(pivot) / abs(pivot)
    return u, v


def _jacobi_tall(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Core one-sided Jacobi for m >= n; returns (u, sigma, v, rank) without phase fixing."""
    m, n = a.shape
    work = a.copy()
    v = np.eye(n, dtype=np.complex128)

    converged = False
    for sweep in range(MAX_SWEEPS + 1):
        gram = work.conj().T @ work
        total = np.linalg.norm(gram)
        off = np.linalg.norm(gram - np.diag(np.diag(gram)))
        if total == 0.0 or off <= OFFDIAG_TOL * total:
            converged = True
            break
        if sweep == MAX_SWEEPS:
            break
        for i in range(n - 1):
            for j in range(i + 1, n):
                gamma = np.vdot(work[:, i], work[:, j])
                g = abs(gamma)
                if g == 0.0:
                    continue
                # phase-align column j so the cross term becomes real
                phase = gamma / g
                work[:, j] *= np.conj(phase)
                v[:, j] *= np.conj(phase)
                alpha = float(np.real(np.vdot(work[:, i], work[:, i])))
                beta = float(np.real(np.vdot(work[:, j], work[:, j])))
                tau = (beta - alpha) / (2.0 * g)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                col_i = work[:, i].copy()
                work[:, i] = c * col_i - s * work[:, j]
                work[:, j] = s * col_i + c * work[:, j]
                vcol_i = v[:, i].copy()
                v[:, i] = c * vcol_i - s * v[:, j]
                v[:, j] = s * vcol_i + c * v[:, j]
    if not converged:
        raise NumericError(
            f"jacobi svd did not converge in {MAX_SWEEPS} sweeps "
            f"(shape {a.shape}, input {_fingerprint(a)})"
        )

    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    v = v[:, order]

    null_tol = sigma.max() * 1e-13
    rank = int(np.sum(sigma > null_tol))
    u_cols = work[:, :rank] / sigma[:rank] if rank else np.zeros((m, 0), dtype=np.complex128)
    u = _complete_basis(u_cols, m)
    sigma = np.where(sigma > null_tol, sigma, 0.0)
    return u, sigma, v, rank


def svd(a) -> SvdResult:
    """One-sided Jacobi SVD of a small complex matrix.

    Column pairs of a working copy are repeatedly rotated until the Gram
    matrix is diagonal to within ``OFFDIAG_TOL`` of its Frobenius norm.
    Singular values are sorted descending with a stable tie-break, and the
    factors carry the phase convention from :func:`_fix_phases`.

    Raises
    ------
    NumericError
        If the sweep cap is hit before convergence; the message carries a
        fingerprint of the input.
    """
    a = as_cmatrix(a)
    m, n = a.shape
    if m < n:
        u_t, sigma, v_t, rank = _jacobi_tall(a.conj().T)
        u, v = v_t, u_t  # a = (a*)* = V' sigma U'*
    else:
        u, sigma, v, rank = _jacobi_tall(a)
    u, v = _fix_phases(u, v, rank)
    return SvdResult(u=u, sigma=sigma, v=v)
