"""Quadrics: affine normal forms, imaginary projections and the Lorentz pencil.

Every real quadric is affinely equivalent to one of

    (I)   sum_{j<=p} w_j^2 - sum_{p<j<=r} w_j^2
    (II)  sum_{j<=p} w_j^2 - sum_{p<j<=r} w_j^2 + 1
    (III) sum_{j<=p} w_j^2 - sum_{p<j<=r} w_j^2 + w_{r+1}

``classify`` returns the transform (S, t) and a nonzero factor ``kappa``
with ``f(S w + t) = kappa * normal_form(w)``.  Real translations leave the
imaginary projection unchanged, and ``Im(S w + t) = S Im(w)``, so membership
questions for f reduce to the normal form through ``S^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (NormalizationError, SignatureError, UnsupportedQuadricError,
                     ZeroPolynomialError)
from .linalg import congruence_to_lorentz, inertia, sym_eigen
from .model import MatrixPencil, QuadPoly, lorentz_matrices


@dataclass(frozen=True)
class QuadClassification:
    q_type: str          # "I", "II" or "III"
    p: int
    r: int
    negated: bool        # the normal form describes -f (up to positive scale)
    S: np.ndarray
    t: np.ndarray
    kappa: float
    scalings: np.ndarray  # |eigenvalue|^(-1/2) applied to the first r columns

    def normal_form(self, w) -> complex:
        w = np.asarray(w)
        val = np.sum(w[:self.p] ** 2) - np.sum(w[self.p:self.r] ** 2)
        if self.q_type == "II":
            val = val + 1.0
        elif self.q_type == "III":
            val = val + w[self.r]
        return complex(val)


def _rank_tol(vals: np.ndarray) -> float:
    return 1e-9 * (1.0 + np.max(np.abs(vals)))


def classify(f: QuadPoly) -> QuadClassification:
    n = f.n
    A, b, c = f.A, f.b, f.c
    scale = max(np.max(np.abs(A)), np.max(np.abs(b)), abs(c))
    if scale == 0.0:
        raise ZeroPolynomialError("the zero polynomial has no normal form")
    vals, vecs = sym_eigen(A)
    tol = _rank_tol(vals) * max(1.0, scale)
    nonzero = np.abs(vals) > tol
    r = int(np.sum(nonzero))
    Vr = vecs[:, nonzero]
    lam = vals[nonzero]
    b_range = Vr @ (Vr.T @ b)
    b_perp = b - b_range
    # shift that removes the in-range linear part: z = w + t0 with 2 A t0 = -b_range
    t0 = -0.5 * Vr @ ((Vr.T @ b) / lam) if r else np.zeros(n)
    c_shift = c + 0.5 * b_range @ t0

    if np.linalg.norm(b_perp) > 1e-9 * (1.0 + np.linalg.norm(b)):
        q_type = "III"
    elif abs(c_shift) > 1e-9 * scale:
        q_type = "II"
    else:
        q_type = "I"
    if r == 0 and q_type != "III":
        raise ZeroPolynomialError("constant polynomial")

    if q_type == "II":
        sign = 1.0 if c_shift > 0 else -1.0
        lam_n = lam / c_shift
        kappa = c_shift
    else:
        n_pos = int(np.sum(lam > 0))
        sign = 1.0 if 2 * n_pos >= r else -1.0
        lam_n = sign * lam
        kappa = sign
    negated = sign < 0
    order = np.concatenate([np.flatnonzero(lam_n > 0), np.flatnonzero(lam_n < 0)])
    p = int(np.sum(lam_n > 0))
    scalings = 1.0 / np.sqrt(np.abs(lam_n[order]))
    cols = [Vr[:, order] * scalings]
    t = t0
    if q_type == "III":
        u = b_perp / (b_perp @ b_perp)
        # kappa * w_{r+1} must equal b_perp^T z, so the column is u * kappa
        cols.append((kappa * u)[:, None])
        t = t0 - c_shift * u
        rest = _complement(np.hstack([Vr, b_perp[:, None]]))
    else:
        rest = _complement(Vr)
    S = np.hstack(cols + [rest])
    return QuadClassification(q_type=q_type, p=p, r=r, negated=negated, S=S, t=t,
                              kappa=float(kappa), scalings=scalings)


def _complement(V: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(V)."""
    n = V.shape[0]
    if V.shape[1] == 0:
        return np.eye(n)
    Q, _ = np.linalg.qr(V, mode="complete")
    rank = np.linalg.matrix_rank(V)
    return Q[:, rank:]


def _real_linear_factors(A: np.ndarray):
    """Linear forms u, v with z^T A z = +-(u^T z)(v^T z), if they exist."""
    vals, vecs = sym_eigen(A)
    tol = _rank_tol(vals)
    idx = np.flatnonzero(np.abs(vals) > tol)
    if idx.size == 1:
        k = idx[0]
        u = np.sqrt(abs(vals[k])) * vecs[:, k]
        return [u]
    if idx.size == 2 and vals[idx[0]] * vals[idx[1]] < 0:
        neg, pos = idx[0], idx[1]
        a = np.sqrt(vals[pos]) * vecs[:, pos]
        b = np.sqrt(-vals[neg]) * vecs[:, neg]
        return [a - b, a + b]
    return None


def improj_contains(f: QuadPoly, y, tol: float = 1e-9) -> bool:
    """Whether y lies in the imaginary projection of f.

    Supported: (a) type I of full rank n >= 3 with Lorentzian signature,
    (b) type II of full rank n >= 3 with p in {1, n-1},
    (c) type I of rank <= 2 splitting into real linear factors.
    """
    y = np.asarray(y, dtype=float)
    n = f.n
    cls = classify(f)
    if cls.q_type == "I" and cls.r <= 2:
        factors = _real_linear_factors(f.A)
        if factors is not None:
            # each real linear factor u^T (z - t) vanishes iff u^T x = u^T t and u^T y = 0
            ny = np.linalg.norm(y)
            return any(abs(u @ y) <= tol * (1 + np.linalg.norm(u) * ny) for u in factors)
    w = np.linalg.solve(cls.S, y)
    if cls.q_type == "I" and cls.r == n and n >= 3 and cls.p == n - 1:
        return bool(np.sum(w[:-1] ** 2) - w[-1] ** 2 >= -tol * (1 + w @ w))
    if cls.q_type == "II" and cls.r == n and n >= 3:
        if cls.p == 1:
            return bool(w[0] ** 2 - np.sum(w[1:] ** 2) <= 1 + tol)
        if cls.p == n - 1:
            if np.linalg.norm(w) <= tol:
                return True
            return bool(np.sum(w[:-1] ** 2) > w[-1] ** 2)
    raise UnsupportedQuadricError(
        f"no membership formula for type {cls.q_type} with p={cls.p}, r={cls.r}, n={n}")


@dataclass(frozen=True)
class FPencil:
    T: np.ndarray
    F: MatrixPencil
    ell: np.ndarray      # ell(z) = ell @ z = (T z)_n


def f_pencil(A) -> FPencil:
    """Lorentz pencil in the coordinates T z, where T^T diag(1..1,-1) T = A.

    det F(z) = -ell(z)^(n-2) * z^T A z.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n < 3:
        raise SignatureError("the Lorentz pencil construction needs n >= 3")
    T = congruence_to_lorentz(A)
    L = lorentz_matrices(n)
    coeffs = np.tensordot(T.T, L, axes=1)
    return FPencil(T=T, F=MatrixPencil(coeffs), ell=T[-1].copy())


def lorentzian_form(f: QuadPoly) -> tuple[np.ndarray, float]:
    """(s * A, s) with s = +-1 chosen so that s * A has inertia (n-1, 1, 0).

    Raises SignatureError when neither sign works.
    """
    n = f.n
    pos, neg, zero = inertia(f.A)
    if (pos, neg, zero) == (n - 1, 1, 0):
        return f.A, 1.0
    if (pos, neg, zero) == (1, n - 1, 0):
        return -f.A, -1.0
    raise SignatureError(f"quadratic part has inertia ({pos}, {neg}, {zero}), not Lorentzian")


def real_zero_check(f: QuadPoly, tol: float = 1e-9) -> bool:
    """Real-zero test: A - b b^T / 4 negative semidefinite, after making f(0) = 1."""
    if f.c <= 0:
        raise NormalizationError(f"need f(0) > 0 to normalize, got {f.c}")
    A = f.A / f.c
    b = f.b / f.c
    schur = A - 0.25 * np.outer(b, b)
    return bool(sym_eigen(schur).values[-1] <= tol)
