"""Polynomials, matrix pencils and cones.

A determinantal polynomial is carried by its pencil ``A_0 + sum_j A_j z_j``
(Hermitian coefficients); a quadratic by ``(A, b, c)``.  Cones are given by
homogeneous real symmetric pencils together with a known interior point.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, PrecisionError, SingularMatrixError
from .linalg import as_hermitian, as_symmetric, min_eigenvalue


@dataclass(frozen=True, eq=False)
class MatrixPencil:
    """The matrix family ``constant + sum_j coeffs[j] * z_j``.

    ``coeffs`` has shape (n, d, d).  Coefficients are made exactly Hermitian
    on construction; a pencil whose coefficients all have zero imaginary part
    is stored with a real dtype.
    """

    coeffs: np.ndarray
    constant: np.ndarray | None = None

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs)
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2]:
            raise DimensionError(f"pencil coefficients must have shape (n, d, d), got {coeffs.shape}")
        mats = [as_hermitian(a) for a in coeffs]
        const = None
        if self.constant is not None:
            const = as_hermitian(self.constant)
            if const.shape != coeffs.shape[1:]:
                raise DimensionError(
                    f"constant term has shape {const.shape}, coefficients {coeffs.shape[1:]}")
        parts = mats + ([const] if const is not None else [])
        real = all(not np.any(m.imag) for m in parts)
        dtype = float if real else complex
        stacked = np.array([m.real if real else m for m in mats], dtype=dtype).reshape(coeffs.shape)
        object.__setattr__(self, "coeffs", stacked)
        if const is not None:
            object.__setattr__(self, "constant", const.real if real else const)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def d(self) -> int:
        return self.coeffs.shape[1]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs) and (
            self.constant is None or not np.iscomplexobj(self.constant))

    @property
    def is_homogeneous(self) -> bool:
        return self.constant is None or not np.any(self.constant)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z)
        if z.shape != (self.n,):
            raise DimensionError(f"point has shape {z.shape}, pencil has {self.n} variables")
        out = np.tensordot(z, self.coeffs, axes=1)
        if self.constant is not None:
            out = out + self.constant
        return out

    def homogeneous(self) -> "MatrixPencil":
        return MatrixPencil(self.coeffs)

    def coefficient_scale(self) -> float:
        total = sum(np.linalg.norm(a, 2) for a in self.coeffs)
        if self.constant is not None:
            total += np.linalg.norm(self.constant, 2)
        return float(total)


@dataclass(frozen=True, eq=False)
class DetPoly:
    """f(z) = det(pencil(z))."""

    pencil: MatrixPencil

    @property
    def n(self) -> int:
        return self.pencil.n

    @property
    def degree(self) -> int:
        return self.pencil.d

    @property
    def is_homogeneous(self) -> bool:
        return self.pencil.is_homogeneous

    def __call__(self, z) -> complex:
        return pencil_eval_det(self.pencil, z)

    def initial(self, y) -> complex:
        """Value of det(sum_j A_j y_j), the degree-d part of f."""
        return pencil_eval_det(self.pencil.homogeneous(), y)

    @cached_property
    def _norms(self):
        norms = np.array([np.linalg.norm(a, 2) for a in self.pencil.coeffs])
        const = 0.0 if self.pencil.constant is None else np.linalg.norm(self.pencil.constant, 2)
        return norms, float(const)

    def value_scale(self, z) -> float:
        """Magnitude bound for |f(z)|, used to make tolerances relative."""
        norms, const = self._norms
        base = float(norms @ np.abs(np.asarray(z))) + const
        return base ** self.degree


@dataclass(frozen=True, eq=False)
class QuadPoly:
    """f(z) = z^T A z + b^T z + c with real data."""

    A: np.ndarray
    b: np.ndarray = None
    c: float = 0.0

    def __post_init__(self):
        A = as_symmetric(self.A)
        n = A.shape[0]
        b = np.zeros(n) if self.b is None else np.asarray(self.b, dtype=float).ravel()
        if b.shape != (n,):
            raise DimensionError(f"linear part has length {b.size}, expected {n}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def degree(self) -> int:
        return 2

    @property
    def is_homogeneous(self) -> bool:
        return not np.any(self.b) and self.c == 0.0

    def __call__(self, z) -> complex:
        z = np.asarray(z)
        if z.shape != (self.n,):
            raise DimensionError(f"point has shape {z.shape}, polynomial has {self.n} variables")
        return complex(z @ self.A @ z + self.b @ z + self.c)

    def initial(self, y) -> complex:
        y = np.asarray(y)
        return complex(y @ self.A @ y)

    @cached_property
    def _norm_a(self) -> float:
        return float(np.linalg.norm(self.A, 2))

    def value_scale(self, z) -> float:
        r = float(np.linalg.norm(z))
        return self._norm_a * r * r + float(np.linalg.norm(self.b)) * r + abs(self.c)


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """Proper cone {x : pencil(x) psd} with a point where the pencil is definite."""

    kind: str
    pencil: MatrixPencil
    interior_direction: np.ndarray
    variable_labels: tuple | None = None
    size: int | None = None

    def __post_init__(self):
        if not self.pencil.is_homogeneous:
            raise DimensionError("cone pencil must not have a constant term")
        if not self.pencil.is_real:
            raise DimensionError("cone pencil must be real symmetric")
        e = np.asarray(self.interior_direction, dtype=float).ravel()
        if e.shape != (self.pencil.n,):
            raise DimensionError(f"interior direction has length {e.size}, cone has {self.pencil.n} variables")
        object.__setattr__(self, "interior_direction", e)
        if min_eigenvalue(self.pencil(e)) <= 0.0:
            raise PrecisionError("interior direction is not strictly inside the cone")

    @property
    def n(self) -> int:
        return self.pencil.n

    @property
    def l(self) -> int:
        return self.pencil.d

    def margin(self, x) -> float:
        return min_eigenvalue(self.pencil(np.asarray(x, dtype=float)))

    def selector(self) -> str:
        return f"{self.kind}:{self.size}" if self.size is not None else self.kind


def _unit(l: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((l, l))
    e[i, j] = 1.0
    return e


def orthant_pencil(n: int) -> ConeSpec:
    if n < 1:
        raise DimensionError("orthant needs n >= 1")
    coeffs = np.array([_unit(n, j, j) for j in range(n)])
    return ConeSpec("orthant", MatrixPencil(coeffs), np.ones(n), size=n)


def psd_labels(m: int) -> tuple:
    return tuple((i, j) for i in range(m) for j in range(i, m))


def psd_pencil(m: int) -> ConeSpec:
    """Cone of psd m x m matrices in the variables x_ij, i <= j (row-major).

    Off-diagonal coefficients are E_ij + E_ji, so that the pencil evaluated at
    the upper-triangle entries of a symmetric X is X itself.
    """
    if m < 1:
        raise DimensionError("psd cone needs m >= 1")
    labels = psd_labels(m)
    coeffs = np.array([_unit(m, i, j) + (_unit(m, j, i) if i != j else 0.0) for i, j in labels])
    interior = np.array([1.0 if i == j else 0.0 for i, j in labels])
    return ConeSpec("psd", MatrixPencil(coeffs), interior, variable_labels=labels, size=m)


def lorentz_matrices(n: int) -> np.ndarray:
    """Coefficients of [[z_n I, z'], [z'^T, z_n]] with z' = (z_1..z_{n-1})."""
    if n < 2:
        raise DimensionError("Lorentz cone needs n >= 2")
    coeffs = np.zeros((n, n, n))
    for j in range(n - 1):
        coeffs[j, j, n - 1] = coeffs[j, n - 1, j] = 1.0
    coeffs[n - 1] = np.eye(n)
    return coeffs


def lorentz_pencil(n: int) -> ConeSpec:
    interior = np.zeros(n)
    interior[-1] = 1.0
    return ConeSpec("lorentz", MatrixPencil(lorentz_matrices(n)), interior, size=n)


def custom_cone(coeffs, interior) -> ConeSpec:
    return ConeSpec("custom", MatrixPencil(np.asarray(coeffs, dtype=float)), interior)


def pencil_eval_det(p: MatrixPencil, z) -> complex:
    """det(A_0 + sum_j A_j z_j) by LU with partial pivoting (LAPACK)."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (p.n,):
        raise DimensionError(f"point has shape {z.shape}, pencil has {p.n} variables")
    return complex(np.linalg.det(p(z)))


def init_form(f: DetPoly, e, tol: float | None = None) -> MatrixPencil:
    """Constant-free pencil of f, after checking sum_j A_j e_j is definite.

    Definiteness at e guarantees deg f = d, so the initial form of f is
    det(sum_j A_j z_j).
    """
    h = f.pencil.homogeneous()
    at_e = h(np.asarray(e, dtype=float))
    lam = min_eigenvalue(at_e)
    if tol is None:
        tol = 1e-9 * (1.0 + np.linalg.norm(at_e, 2))
    if lam <= tol:
        raise PrecisionError(f"sum_j A_j e_j has smallest eigenvalue {lam:.3e}, not definite")
    return h


def change_of_variables(p: MatrixPencil, T) -> MatrixPencil:
    """Pencil q with q(z) = p(T z)."""
    T = np.asarray(T, dtype=float)
    if T.shape != (p.n, p.n):
        raise DimensionError(f"transform has shape {T.shape}, pencil has {p.n} variables")
    if np.linalg.matrix_rank(T) < p.n:
        raise SingularMatrixError("change of variables must be invertible")
    coeffs = np.tensordot(T.T, p.coeffs, axes=1)
    return MatrixPencil(coeffs, p.constant)


def change_cone_variables(K: ConeSpec, T) -> ConeSpec:
    """The cone T^{-1} K, described by the pencil x -> M(T x)."""
    T = np.asarray(T, dtype=float)
    pencil = change_of_variables(K.pencil, T)
    return ConeSpec("custom", pencil, np.linalg.solve(T, K.interior_direction))


def chebyshev_nodes(count: int) -> np.ndarray:
    k = np.arange(count)
    return np.cos(np.pi * (k + 0.5) / count)


def univariate_restriction(f, x, y) -> np.ndarray:
    """Ascending coefficients of t -> f(x + t y), by interpolation.

    The degree bound is f.degree; nodes are Chebyshev points on
    [-R, R] with R = 1 + |x| + |y|.  x may be complex.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != (f.n,) or y.shape != (f.n,):
        raise DimensionError(f"restriction points must have length {f.n}")
    deg = f.degree
    radius = 1.0 + np.linalg.norm(x) + np.linalg.norm(y)
    s = chebyshev_nodes(deg + 1)
    values = np.array([f(x + radius * sk * y) for sk in s])
    vander = np.vander(s, deg + 1, increasing=True)
    scaled = np.linalg.solve(vander, values)
    return scaled / radius ** np.arange(deg + 1)
