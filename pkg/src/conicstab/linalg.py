"""Small dense linear algebra used by every criterion.

Everything here works on plain numpy arrays.  Symmetric and Hermitian
inputs are symmetrized on entry, so callers may pass matrices that are
symmetric only up to rounding.

The eigensolver is a cyclic Jacobi iteration.  It is slower than LAPACK
but has no failure modes on symmetric input, and it is deliberately kept
separate from the interior-point solver so that certificates produced by
the solver are checked by independent code.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegreeDropError, DimensionError, NoConvergence, SignatureError


class EigenDecomp(NamedTuple):
    values: np.ndarray   # ascending
    vectors: np.ndarray  # orthonormal columns


def as_symmetric(A) -> np.ndarray:
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


def as_hermitian(A) -> np.ndarray:
    a = np.asarray(A, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.conj().T)


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def sym_eigen(A, tol: float = 1e-15, max_sweeps: int = 60) -> EigenDecomp:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Raises NoConvergence if the off-diagonal mass has not dropped below
    ``tol * ||A||_F`` after ``max_sweeps`` sweeps.
    """
    a = as_symmetric(A).copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        values = np.diag(a).copy()
        order = np.argsort(values, kind="stable")
        return EigenDecomp(values[order], v[:, order])
    threshold = tol * scale
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = _off_norm(a)
        if off > threshold:
            raise NoConvergence(f"Jacobi: off-diagonal norm {off:.3e} after {max_sweeps} sweeps")
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomp(values[order], v[:, order])


def herm_to_real_embed(Z) -> np.ndarray:
    """Real symmetric matrix [[X, -Y], [Y, X]] for Z = X + iY.

    Z is psd iff the embedding is psd; every eigenvalue of Z appears twice.
    """
    z = as_hermitian(Z)
    x, y = z.real, z.imag
    return np.block([[x, -y], [y, x]])


def herm_eigvals(Z) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian (or real symmetric) matrix."""
    z = np.asarray(Z)
    if np.iscomplexobj(z) and np.any(z.imag != 0):
        doubled = sym_eigen(herm_to_real_embed(z)).values
        return doubled[::2]
    return sym_eigen(np.real(z)).values


def min_eigenvalue(Z) -> float:
    return float(herm_eigvals(Z)[0])


def inertia(A, tol: float | None = None) -> tuple[int, int, int]:
    """Counts (positive, negative, zero) with zero threshold 1e-9*(1+||A||)."""
    vals = sym_eigen(A).values
    if tol is None:
        tol = 1e-9 * (1.0 + np.max(np.abs(vals)))
    n_plus = int(np.sum(vals > tol))
    n_minus = int(np.sum(vals < -tol))
    return n_plus, n_minus, len(vals) - n_plus - n_minus


def congruence_to_lorentz(A) -> np.ndarray:
    """Invertible T with T^T diag(1,...,1,-1) T = A.

    Built from the eigendecomposition rather than an LDL^T factorization so
    that zero diagonal entries need no pivoting.
    """
    a = as_symmetric(A)
    n = a.shape[0]
    n_plus, n_minus, n_zero = inertia(a)
    if (n_plus, n_minus, n_zero) != (n - 1, 1, 0):
        raise SignatureError(
            f"need inertia ({n - 1}, 1, 0), got ({n_plus}, {n_minus}, {n_zero})")
    vals, vecs = sym_eigen(a)
    # ascending order puts the single negative eigenvalue first; move it last
    order = list(range(1, n)) + [0]
    vals = vals[order]
    vecs = vecs[:, order]
    return np.sqrt(np.abs(vals))[:, None] * vecs.T


def split_blocks(C, block_size: int) -> np.ndarray:
    """View an (l*d)x(l*d) matrix as an (l, l, d, d) grid of blocks."""
    c = np.asarray(C)
    size = c.shape[0]
    if c.ndim != 2 or c.shape[1] != size or size % block_size:
        raise DimensionError(f"cannot split shape {c.shape} into {block_size}x{block_size} blocks")
    l = size // block_size
    return c.reshape(l, block_size, l, block_size).transpose(0, 2, 1, 3)


def join_blocks(grid) -> np.ndarray:
    g = np.asarray(grid)
    l, l2, d, d2 = g.shape
    if l != l2 or d != d2:
        raise DimensionError(f"block grid must be square, got {g.shape}")
    return g.transpose(0, 2, 1, 3).reshape(l * d, l * d)


def khatri_rao(M, C, block_size: int) -> np.ndarray:
    """Block (i, j) of the result is M[i, j] * C_ij."""
    m = np.asarray(M)
    grid = split_blocks(C, block_size)
    if m.shape != grid.shape[:2]:
        raise DimensionError(f"scalar grid {m.shape} does not match block grid {grid.shape[:2]}")
    return join_blocks(m[:, :, None, None] * grid)


def compress_blocks(M, C, block_size: int) -> np.ndarray:
    """sum_ij M[i, j] * C_ij, i.e. (I ... I) (M * C) (I ... I)^T."""
    m = np.asarray(M)
    grid = split_blocks(C, block_size)
    if m.shape != grid.shape[:2]:
        raise DimensionError(f"scalar grid {m.shape} does not match block grid {grid.shape[:2]}")
    return np.einsum("ij,ijab->ab", m, grid)


def _expand(roots: np.ndarray, lead: complex) -> np.ndarray:
    """Ascending coefficients of lead * prod(t - r)."""
    coeffs = np.array([1.0 + 0j])
    for r in roots:
        coeffs = np.concatenate([[0.0], coeffs]) - r * np.concatenate([coeffs, [0.0]])
    return lead * coeffs


def poly_roots(coeffs, tol: float = 1e-14, max_iter: int = 500) -> np.ndarray:
    """Roots of sum_k coeffs[k] t**k by Durand-Kerner iteration.

    Raises DegreeDropError when the leading coefficient is below
    1e-12 * max|coeff|, and NoConvergence when the iteration stalls without
    reproducing the coefficients to 1e-7 relative accuracy.
    """
    c = np.asarray(coeffs, dtype=complex).ravel()
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        raise DegreeDropError("zero polynomial")
    if abs(c[-1]) <= 1e-12 * scale:
        raise DegreeDropError(
            f"leading coefficient {abs(c[-1]):.3e} is negligible against {scale:.3e}")
    deg = c.size - 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    monic = c / c[-1]
    radius = 1.0 + np.max(np.abs(monic[:-1]))
    z = radius * (0.4 + 0.9j) ** np.arange(deg)
    horner = monic[::-1]
    for _ in range(max_iter):
        num = np.polyval(horner, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = num / np.prod(diff, axis=1)
        z = z - step
        if np.all(np.abs(step) <= tol * (1.0 + np.abs(z))):
            break
    else:
        recon = _expand(z, 1.0)
        if np.max(np.abs(recon - monic)) > 1e-7 * np.max(np.abs(monic)):
            raise NoConvergence(f"Durand-Kerner did not converge in {max_iter} iterations")
    return z
