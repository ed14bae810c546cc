"""Negative evidence for K-stability.

A point z with f(z) = 0 and Im z in int K is a witness of instability.
Witnesses come from the user, from hyperbolicity sampling (for y in int K
every root of t -> f(x + t y) must be real when f is K-stable) or from a
local search on |f(x + iy)|.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConicStabError, DegreeDropError, DimensionError
from .linalg import poly_roots
from .model import ConeSpec, chebyshev_nodes, univariate_restriction
from .verdict import NoCounterexample, Refuted

VALUE_TOL = 1e-9
MARGIN_TOL = 1e-7
IMAG_TOL = 1e-6


@dataclass
class Witness:
    z: np.ndarray
    kind: str                 # "user", "sampled" or "minimized"
    f_residual: float
    interior_margin: float


@dataclass
class Rejection:
    reason: str
    f_residual: float
    interior_margin: float
    value_tol: float

    def __bool__(self):
        return False


def check_witness(f, K: ConeSpec, z, kind: str = "user") -> Witness | Rejection:
    """Accept z iff |f(z)| is negligible and the pencil at Im z is definite."""
    z = np.asarray(z, dtype=complex).ravel()
    if z.shape != (f.n,) or f.n != K.n:
        raise DimensionError(f"witness has length {z.size}, polynomial {f.n}, cone {K.n}")
    residual = abs(f(z))
    tol = VALUE_TOL * (1.0 + f.value_scale(z))
    margin = K.margin(z.imag)
    reasons = []
    if not residual <= tol:
        reasons.append(f"|f(z)| = {residual:.3e} exceeds {tol:.3e}")
    if not margin > MARGIN_TOL:
        reasons.append(f"Im z has interior margin {margin:.3e}, need > {MARGIN_TOL:g}")
    if reasons:
        return Rejection("; ".join(reasons), residual, margin, tol)
    return Witness(z=z, kind=kind, f_residual=residual, interior_margin=margin)


def _interior_point(K: ConeSpec, rng, e, margin) -> np.ndarray:
    """e plus a perturbation of spectral size 0.3 * margin."""
    u = rng.standard_normal(K.n)
    spread = np.linalg.norm(K.pencil(u), 2)
    if spread == 0.0:
        return e.copy()
    return e + u * (0.3 * margin / spread)


def _polish(coeffs: np.ndarray, t: complex, steps: int = 2) -> complex:
    horner = coeffs[::-1]
    deriv = np.polyder(horner)
    for _ in range(steps):
        d = np.polyval(deriv, t)
        if d == 0:
            break
        t = t - np.polyval(horner, t) / d
    return t


def _scale(f, z) -> float:
    return 1.0 + f.value_scale(z)


def _initial_value(f, y) -> float:
    return abs(f.initial(y)) / _scale(f, y) if hasattr(f, "initial") else np.inf


def _search_degree_drop(f, K: ConeSpec, starts, rng, e, margin):
    """Minimize |init(f)(y)| over interior y on the sphere |y| = |e|.

    Returns the best (relative value, y) found.
    """
    n = f.n
    norm_e = np.linalg.norm(e)

    def objective(y):
        y = y / max(np.linalg.norm(y), 1e-300) * norm_e
        val = _initial_value(f, y)
        mu = np.linalg.eigvalsh(K.pencil(y))[0]
        pen = max(0.0, 0.05 * margin - mu)
        return val * val + 1e3 * pen * pen

    best = (np.inf, None)
    for y0 in starts:
        res = minimize(objective, y0, method="L-BFGS-B")
        y = res.x / np.linalg.norm(res.x) * norm_e
        y = _polish_real_zero(f.initial, y, rng, f.degree)
        val = _initial_value(f, y)
        if val < best[0] and K.margin(y) > MARGIN_TOL:
            best = (val, y)
    return best


def _polish_real_zero(g, y, rng, degree: int, tries: int = 4):
    """Move y to a nearby real zero of the real valued form g, if one is close."""
    n = y.size
    best, best_val = y, abs(g(y))
    radius = 1.0 + np.linalg.norm(y)
    s = chebyshev_nodes(degree + 1)
    vander = np.vander(s, degree + 1, increasing=True)
    for _ in range(tries):
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        vals = np.array([np.real(g(y + radius * sk * w)) for sk in s])
        coeffs = np.linalg.solve(vander, vals) / radius ** np.arange(degree + 1)
        try:
            roots = _roots(coeffs)
        except ConicStabError:
            continue
        roots = roots[np.abs(roots.imag) <= 1e-9 * (1 + np.abs(roots))].real
        if roots.size == 0:
            continue
        cand = y + roots[np.argmin(np.abs(roots))] * w
        val = abs(g(cand))
        if val < best_val:
            best, best_val = cand, val
    return best


def hyperbolicity_sample(f, K: ConeSpec, samples: int = 1000, seed: int = 0,
                         search: bool = True) -> Refuted | NoCounterexample:
    """Look for a non-real root of t -> f(x + t y) with y in int K.

    A non-real root t gives the witness x + t y (with t in the upper half
    plane).  When the leading coefficient init(f)(y) vanishes the restriction
    drops degree; after the loop a local search for such y is run, since
    exact drops are never hit by random sampling.
    """
    if f.n != K.n:
        raise DimensionError(f"polynomial has {f.n} variables, cone {K.n}")
    rng = np.random.default_rng(seed)
    e = K.interior_direction
    margin = K.margin(e)
    spread = 1.0 + np.linalg.norm(e)
    drops = []
    max_ratio = 0.0
    scored = []
    for _ in range(samples):
        y = _interior_point(K, rng, e, margin)
        x = rng.standard_normal(f.n) * spread
        coeffs = univariate_restriction(f, x, y)
        try:
            roots = _roots(coeffs)
        except DegreeDropError:
            drops.append(y)
            continue
        if search:
            scored.append((abs(coeffs[-1]) / max(np.max(np.abs(coeffs)), 1e-300), y))
        for t in roots:
            t = _polish(coeffs, complex(t))
            ratio = abs(t.imag) / (1.0 + abs(t))
            max_ratio = max(max_ratio, ratio)
            if ratio > IMAG_TOL:
                if t.imag < 0:
                    t = np.conj(t)
                w = check_witness(f, K, x + t * y, kind="sampled")
                if w:
                    return Refuted(w, {"samples_used": len(scored) + len(drops), "root": complex(t)})
    runs = 0
    if search:
        scored.sort(key=lambda s: s[0])
        starts = drops[:3] + [s[1] for s in scored[:3]]
        starts += [_interior_point(K, rng, e, margin) for _ in range(4)]
        runs = len(starts)
        val, y = _search_degree_drop(f, K, starts, rng, e, margin)
        if y is not None and val <= 1e-10:
            if f.is_homogeneous:
                w = check_witness(f, K, 1j * y, kind="sampled")
                if w:
                    return Refuted(w, {"route": "degree drop", "direction": y})
            else:
                w = minimize_interior_zero(f, K, multistarts=5, seed=seed, starts=[y])
                if w is not None:
                    return Refuted(w, {"route": "degree drop", "direction": y})
    return NoCounterexample(samples=samples, degree_drops=len(drops), max_imag_ratio=max_ratio,
                            search_runs=runs)


def _roots(coeffs: np.ndarray) -> np.ndarray:
    return poly_roots(coeffs)


def minimize_interior_zero(f, K: ConeSpec, multistarts: int = 20, seed: int = 0, starts=None,
                           box: float | None = None) -> Witness | None:
    """Multi-start local search for z = x + iy with f(z) = 0 and y in int K.

    The objective is |f(x + iy)|^2 relative to the value scale, plus a
    penalty keeping y away from the boundary of K.  Minima below 1e-10 are
    polished by a root step along a random real direction and then passed
    to check_witness.
    """
    n = f.n
    rng = np.random.default_rng(seed)
    e = K.interior_direction
    margin = K.margin(e)
    if box is None:
        box = 10.0 * (1.0 + np.linalg.norm(e))
    eta = 1e-3 * margin / (1.0 + np.linalg.norm(e))

    def objective(v):
        x, y = v[:n], v[n:]
        z = x + 1j * y
        val = abs(f(z)) / _scale(f, z)
        mu = np.linalg.eigvalsh(K.pencil(y))[0]
        pen = max(0.0, eta * np.linalg.norm(y) + 1e-6 - mu)
        return val * val + 1e2 * pen * pen

    seeds = [np.concatenate([np.zeros(n), np.asarray(s, dtype=float)]) for s in (starts or [])]
    while len(seeds) < multistarts + len(starts or []):
        y = _interior_point(K, rng, e, margin) * rng.uniform(0.2, 2.0)
        x = rng.standard_normal(n) * (1.0 + np.linalg.norm(e)) if len(seeds) % 2 else np.zeros(n)
        seeds.append(np.concatenate([x, y]))
    bounds = [(-box, box)] * (2 * n)
    for v0 in seeds:
        res = minimize(objective, v0, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 200, "ftol": 1e-22, "gtol": 1e-12})
        if res.fun > 1e-10:
            continue
        z = res.x[:n] + 1j * res.x[n:]
        accepted = [w for w in (check_witness(f, K, c, kind="minimized") for c in _root_steps(f, z, rng)) if w]
        if accepted:
            return min(accepted, key=lambda w: w.f_residual)
    return None


def _root_steps(f, z, rng, tries: int = 4):
    """Candidates z + t w where t is the root of t -> f(z + t w) nearest 0."""
    yield z
    for _ in range(tries):
        w = rng.standard_normal(f.n)
        w /= np.linalg.norm(w)
        try:
            coeffs = univariate_restriction(f, z, w)
            roots = _roots(coeffs)
        except ConicStabError:
            continue
        if roots.size == 0:
            continue
        t = _polish(coeffs, complex(roots[np.argmin(np.abs(roots))]))
        yield z + t * w
