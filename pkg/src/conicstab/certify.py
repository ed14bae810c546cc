"""Containment certificates for K-stability.

K is {x : M(x) psd} with M(x) = sum_p M_p x_p (l x l).  A target pencil
sum_p T_p x_p (d x d) contains K in its psd region when there is a psd
block matrix C = (C_ij) with d x d blocks and

    sigma * T_p = sum_ij (M_p)_ij C_ij        for every p.

For x in K, sum_p T_p x_p = sigma * (I..I) (M(x) * C) (I..I)^T where * is
the Khatri-Rao product, which is psd.  For a determinantal polynomial the
targets are its pencil coefficients (the constant term plays no role); for
a Lorentzian quadratic they are the coefficients of the Lorentz pencil in
the coordinates T z.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import refute
from .errors import (ConicStabError, DimensionError, IdentityCheckError, PrecisionError,
                     ScalingPreconditionError, SignatureError, UnboundedSliceError,
                     UnsupportedQuadricError)
from .linalg import compress_blocks, herm_eigvals, khatri_rao, min_eigenvalue, split_blocks
from .model import (ConeSpec, DetPoly, MatrixPencil, QuadPoly, custom_cone, init_form,
                    pencil_eval_det)
from .quadratic import classify, f_pencil, lorentzian_form
from .verdict import Certified, Refuted, Unknown, Verdict
from .sdp import (FEASIBLE, INFEASIBLE, SdpProblem, SolverOptions, feasibility,
                  find_interior_direction, lmi_maximize, solve)

logger = logging.getLogger(__name__)


@dataclass
class ChoiCertificate:
    sigma: int
    nu: float
    C: np.ndarray            # (l*d) x (l*d), real symmetric or complex Hermitian
    block_size: int
    scaled: bool = False
    min_eig: float = float("nan")
    residual: float = float("nan")
    verified: bool = False

    @property
    def l(self) -> int:
        return self.C.shape[0] // self.block_size

    @property
    def blocks(self) -> np.ndarray:
        return split_blocks(self.C, self.block_size)

    def target_scale(self, p: int) -> float:
        """Factor multiplying target p on the constraint's right-hand side."""
        if self.scaled:
            return 1.0 if p == 0 else self.nu
        return float(self.sigma)


@dataclass
class VerificationReport:
    passed: bool
    min_eig: float
    residual: float
    worst: tuple | None           # (p, a, b) of the largest constraint violation
    spot_min_khatri_rao: float
    spot_min_compressed: float
    failures: list = field(default_factory=list)


@dataclass
class DeterminantalRep:
    """det(sum_p z_p D_p) = factor * ell(z)^(n-2) * (z^T A z)."""

    ell: np.ndarray
    pencil: MatrixPencil
    factor: float
    diagonal_blocks_psd: bool


# --------------------------------------------------------------------------
# system construction
# --------------------------------------------------------------------------

def _cone_matrices(M) -> np.ndarray:
    if isinstance(M, ConeSpec):
        M = M.pencil
    if isinstance(M, MatrixPencil):
        return M.coeffs
    return np.asarray(M, dtype=float)


def _constraint_patterns(Mp: np.ndarray, d: int, a: int, b: int) -> np.ndarray:
    """Matrix G with <G, C> = sum_ij (M_p)_ij C[i*d + a, j*d + b]."""
    l = Mp.shape[0]
    G = np.zeros((l * d, l * d))
    G[a::d, b::d][:l, :l] = Mp
    return G


def build_containment_system(M, targets, sigma: int = 1, scaled: bool = False) -> SdpProblem:
    """SDP whose feasible points are Choi matrices for the containment.

    Hermitian targets are handled with a real symmetric variable W of size
    2*l*d; the Hermitian Choi matrix is C = X + iY with
    X = (W11 + W22) / 2 and Y = (W21 - W12) / 2.
    """
    Ms = _cone_matrices(M)
    Ts = np.asarray(targets)
    if Ts.ndim != 3 or Ts.shape[1] != Ts.shape[2]:
        raise DimensionError(f"targets must have shape (n, d, d), got {Ts.shape}")
    n, l, d = Ms.shape[0], Ms.shape[1], Ts.shape[1]
    if Ts.shape[0] != n:
        raise DimensionError(f"cone has {n} variables, targets {Ts.shape[0]}")
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    if scaled:
        if not np.allclose(Ms[0], np.eye(l), atol=1e-12) or not np.allclose(Ts[0], np.eye(d), atol=1e-12):
            raise ScalingPreconditionError("scaled system needs M_1 = I and target_1 = I")
    hermitian = np.iscomplexobj(Ts) and np.any(Ts.imag)
    size = l * d
    rows, rhs, gs = [], [], []

    def add(G, value, p):
        if scaled and p > 0:
            rows.append(G)
            rhs.append(0.0)
            gs.append(-value)
        else:
            rows.append(G)
            rhs.append((1.0 if scaled else sigma) * value)
            gs.append(0.0)

    for p in range(n):
        for a in range(d):
            for b in range(a, d):
                G = _constraint_patterns(Ms[p], d, a, b)
                if hermitian:
                    W = np.zeros((2 * size, 2 * size))
                    W[:size, :size] = 0.5 * G
                    W[size:, size:] = 0.5 * G
                    add(W, float(np.real(Ts[p, a, b])), p)
                    if a != b:
                        W = np.zeros((2 * size, 2 * size))
                        W[size:, :size] = 0.5 * G
                        W[:size, size:] = -0.5 * G
                        add(W, float(np.imag(Ts[p, a, b])), p)
                else:
                    add(G, float(np.real(Ts[p, a, b])), p)
    g = np.array(gs) if scaled else None
    return SdpProblem(A=np.array(rows), b=np.array(rhs), g=g,
                      objective="nu" if scaled else "margin")


def _recover_choi(W: np.ndarray, hermitian: bool) -> np.ndarray:
    if not hermitian:
        return W
    size = W.shape[0] // 2
    X = 0.5 * (W[:size, :size] + W[size:, size:])
    Y = 0.5 * (W[size:, :size] - W[:size, size:])
    return X + 1j * Y


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

def _sample_cone_points(K: ConeSpec, count: int, rng) -> list:
    e = K.interior_direction
    margin = K.margin(e)
    points = [e]
    while len(points) < count:
        u = rng.standard_normal(K.n)
        spread = np.linalg.norm(K.pencil(u), 2)
        if spread == 0:
            continue
        points.append(e + u * (0.9 * margin * rng.uniform() / spread))
    return points


def verify_certificate(cert: ChoiCertificate, K: ConeSpec, targets, spot_checks: int = 20,
                       seed: int = 0) -> VerificationReport:
    """Recompute eigenvalues and residuals of a certificate independently."""
    Ts = np.asarray(targets)
    Ms = K.pencil.coeffs
    d = cert.block_size
    failures = []
    if cert.C.shape != (Ms.shape[1] * d, Ms.shape[1] * d) or Ts.shape[0] != Ms.shape[0]:
        return VerificationReport(False, float("nan"), float("inf"), None, float("nan"),
                                  float("nan"), ["shape mismatch"])
    C = cert.C
    min_eig = min_eigenvalue(C)
    trace = float(np.real(np.trace(C)))
    if min_eig < -1e-7 * (1 + abs(trace)):
        failures.append(f"C has eigenvalue {min_eig:.3e}")
    residual, worst = 0.0, None
    for p in range(Ms.shape[0]):
        lhs = compress_blocks(Ms[p], C, d)
        diff = np.abs(lhs - cert.target_scale(p) * Ts[p])
        k = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[k] > residual:
            residual, worst = float(diff[k]), (p, int(k[0]), int(k[1]))
    target_norm = max(np.linalg.norm(t, 2) for t in Ts)
    if residual > 1e-7 * (1 + target_norm):
        failures.append(f"constraint {worst[0]} entry {worst[1:]} violated by {residual:.3e}")
    rng = np.random.default_rng(seed)
    spot_kr, spot_cmp = np.inf, np.inf
    normC = np.linalg.norm(C, 2)
    for x in _sample_cone_points(K, spot_checks, rng):
        Mx = K.pencil(x)
        kr = min_eigenvalue(khatri_rao(Mx, C, d))
        cmp_ = min_eigenvalue(compress_blocks(Mx, C, d))
        bound = 1e-8 * (1 + normC * np.linalg.norm(Mx, 2) * Ms.shape[1])
        spot_kr, spot_cmp = min(spot_kr, kr), min(spot_cmp, cmp_)
        if kr < -bound or cmp_ < -bound:
            failures.append(f"spot check at x={np.round(x, 6).tolist()} has eigenvalue {min(kr, cmp_):.3e}")
            break
    return VerificationReport(passed=not failures, min_eig=min_eig, residual=residual, worst=worst,
                              spot_min_khatri_rao=float(spot_kr), spot_min_compressed=float(spot_cmp),
                              failures=failures)


def _finish(cert: ChoiCertificate, K: ConeSpec, targets) -> VerificationReport:
    report = verify_certificate(cert, K, targets)
    cert.min_eig, cert.residual, cert.verified = report.min_eig, report.residual, report.passed
    return report


# --------------------------------------------------------------------------
# pipelines
# --------------------------------------------------------------------------

def solve_containment(K: ConeSpec, targets, sigmas=(1, -1), trace_cap: float | None = None,
                      options: SolverOptions | None = None):
    """Try each sign in turn; return (certificate or None, diagnostics)."""
    Ts = np.asarray(targets)
    hermitian = np.iscomplexobj(Ts) and bool(np.any(Ts.imag))
    diagnostics = {}
    for sigma in sigmas:
        problem = build_containment_system(K, Ts, sigma)
        sol = feasibility(problem, trace_cap=trace_cap, options=options)
        entry = {"status": sol.status, "margin": sol.margin, "residual": sol.residual,
                 "iterations": sol.iterations}
        if sol.ray is not None:
            entry["ray_tau"] = sol.ray.tau
            entry["ray_b_dot_y"] = sol.ray.b_dot_y
        diagnostics[f"sigma={sigma:+d}"] = entry
        if sol.status != FEASIBLE:
            continue
        cert = ChoiCertificate(sigma=sigma, nu=1.0, C=_recover_choi(sol.X, hermitian),
                               block_size=Ts.shape[1])
        report = _finish(cert, K, Ts)
        entry["verified"] = report.passed
        if report.passed:
            return cert, diagnostics
        entry["failures"] = report.failures
    return None, diagnostics


def certify_determinantal(f: DetPoly, K: ConeSpec, sigmas=(1, -1), trace_cap: float | None = None,
                          options: SolverOptions | None = None) -> Verdict:
    if f.n != K.n:
        raise DimensionError(f"polynomial has {f.n} variables, cone {K.n}")
    H = f.pencil.homogeneous()
    diagnostics = {}
    try:
        e, margin = find_interior_direction(H.coeffs, options=options)
        diagnostics["interior_margin"] = margin
        if margin <= 1e-7:
            diagnostics["reason"] = "no direction with positive definite homogeneous pencil found"
            return Unknown(diagnostics)
        init_form(f, e)
        cert, sols = solve_containment(K, H.coeffs, sigmas, trace_cap, options)
    except ConicStabError as exc:
        diagnostics["error"] = f"{type(exc).__name__}: {exc}"
        return Unknown(diagnostics)
    diagnostics.update(sols)
    if cert is not None:
        return Certified(cert, targets=H.coeffs)
    diagnostics["reason"] = "containment system infeasible or unverified for both signs"
    return Unknown(diagnostics)


def stability_shortcuts(f: DetPoly, K: ConeSpec, tol: float = 1e-9) -> Verdict | None:
    """Direct certificates when the coefficients are already psd.

    Orthant: every A_p psd gives the block-diagonal Choi matrix C_pp = A_p.
    Psd cone: the block grid with A_ii = coefficient of x_ii and
    A_ij = A_ji = half the coefficient of x_ij gives C = (A_ij) if psd.
    """
    mats = f.pencil.coeffs
    d = f.pencil.d
    if K.kind == "orthant":
        if any(herm_eigvals(a)[0] < -tol * (1 + np.linalg.norm(a, 2)) for a in mats):
            return None
        l = K.l
        C = np.zeros((l * d, l * d), dtype=mats.dtype)
        for p in range(l):
            C[p * d:(p + 1) * d, p * d:(p + 1) * d] = mats[p]
    elif K.kind == "psd":
        m = K.size
        grid = np.zeros((m, m, d, d), dtype=mats.dtype)
        for (i, j), a in zip(K.variable_labels, mats):
            if i == j:
                grid[i, i] = a
            else:
                grid[i, j] = grid[j, i] = 0.5 * a
        C = grid.transpose(0, 2, 1, 3).reshape(m * d, m * d)
        if min_eigenvalue(C) < -tol * (1 + np.linalg.norm(C, 2)):
            return None
    else:
        return None
    cert = ChoiCertificate(sigma=1, nu=1.0, C=C, block_size=d)
    if not _finish(cert, K, mats).passed:
        return None
    return Certified(cert, route="shortcut", targets=mats)


def _quadratic_target(f: QuadPoly):
    """Oriented quadratic form and its Lorentz pencil data."""
    A_used, sign = lorentzian_form(f)
    return A_used, sign, f_pencil(A_used)


def certify_quadratic(f: QuadPoly, K: ConeSpec, sigmas=(1, -1), trace_cap: float | None = None,
                      options: SolverOptions | None = None, search_witness: bool = True) -> Verdict:
    if f.n != K.n:
        raise DimensionError(f"polynomial has {f.n} variables, cone {K.n}")
    n = f.n
    diagnostics = {}
    if n < 3:
        diagnostics["reason"] = "quadratic criterion needs n >= 3"
        return Unknown(diagnostics)
    try:
        cls = classify(f)
    except ConicStabError as exc:
        diagnostics["error"] = f"{type(exc).__name__}: {exc}"
        return Unknown(diagnostics)
    diagnostics["classification"] = {"type": cls.q_type, "p": cls.p, "r": cls.r, "negated": cls.negated}
    no_cone = cls.q_type == "III" or (cls.q_type == "II" and (cls.p == 1 or cls.r < n))
    if no_cone and not (cls.q_type == "II" and cls.p == n - 1 and cls.r == n):
        diagnostics["reason"] = "no full-dimensional conic complement component"
        if search_witness:
            witness = refute.minimize_interior_zero(f, K, multistarts=20, seed=0)
            if witness is not None:
                return Refuted(witness, diagnostics)
        return Unknown(diagnostics)
    try:
        A_used, sign, fp = _quadratic_target(f)
    except SignatureError as exc:
        diagnostics["error"] = f"SignatureError: {exc}"
        return Unknown(diagnostics)
    cert, sols = solve_containment(K, fp.F.coeffs, sigmas, trace_cap, options)
    diagnostics.update(sols)
    if cert is None:
        diagnostics["reason"] = "containment system infeasible or unverified for both signs"
        return Unknown(diagnostics)
    rep = None
    try:
        rep = extract_determinantal_rep(cert, f, K)
    except IdentityCheckError as exc:
        diagnostics["representation_error"] = str(exc)
    return Certified(cert, representation=rep, targets=fp.F.coeffs)


def extract_determinantal_rep(cert: ChoiCertificate, f: QuadPoly, K: ConeSpec, points: int = 7,
                              seed: int = 1) -> DeterminantalRep:
    """Pencil D_p = sum_ij (M_p)_ij C_ij and the linear form ell = (T z)_n.

    Since D = sigma * F, det D(z) = sigma^n det F(z) = -sigma^n ell^(n-2) z^T A' z
    where A' = s A is the Lorentzian orientation of the quadratic part.  The
    identity is checked at random real points.
    """
    A_used, sign, fp = _quadratic_target(f)
    n = f.n
    Ms = K.pencil.coeffs
    D = MatrixPencil(np.array([compress_blocks(Ms[p], cert.C, cert.block_size) for p in range(n)]))
    factor = -(cert.sigma ** n) * sign
    rng = np.random.default_rng(seed)
    for _ in range(points):
        z = rng.standard_normal(n)
        lhs = np.real(pencil_eval_det(D, z))
        rhs = factor * (fp.ell @ z) ** (n - 2) * (z @ f.A @ z)
        if abs(lhs - rhs) > 1e-6 * max(abs(lhs), abs(rhs), 1e-12):
            raise IdentityCheckError(f"det D(z) = {lhs:.10g} but expected {rhs:.10g} at z = {z}")
    grid = split_blocks(cert.C, cert.block_size)
    diag_ok = all(herm_eigvals(grid[i, i])[0] >= -1e-8 * (1 + np.linalg.norm(grid[i, i], 2))
                  for i in range(grid.shape[0]))
    return DeterminantalRep(ell=fp.ell, pencil=D, factor=float(factor), diagonal_blocks_psd=diag_ok)


def lorentz_representation(f: QuadPoly, points: int = 7, seed: int = 1) -> DeterminantalRep:
    """det F(z) = -s * ell(z)^(n-2) * z^T A z from the Lorentz pencil alone (no cone needed)."""
    A_used, sign, fp = _quadratic_target(f)
    factor = -sign
    rng = np.random.default_rng(seed)
    for _ in range(points):
        z = rng.standard_normal(f.n)
        lhs = np.real(pencil_eval_det(fp.F, z))
        rhs = factor * (fp.ell @ z) ** (f.n - 2) * (z @ f.A @ z)
        if abs(lhs - rhs) > 1e-6 * max(abs(lhs), abs(rhs), 1e-12):
            raise IdentityCheckError(f"det F(z) = {lhs:.10g} but expected {rhs:.10g} at z = {z}")
    return DeterminantalRep(ell=fp.ell, pencil=fp.F, factor=float(factor), diagonal_blocks_psd=True)


def certify(f, K: ConeSpec, **kwargs) -> Verdict:
    """Shortcut criteria first, then the containment pipeline."""
    if isinstance(f, QuadPoly):
        return certify_quadratic(f, K, **kwargs)
    if K.kind in ("orthant", "psd") and 1 in kwargs.get("sigmas", (1, -1)):
        verdict = stability_shortcuts(f, K)
        if verdict is not None:
            return verdict
    return certify_determinantal(f, K, **kwargs)


# --------------------------------------------------------------------------
# scaling
# --------------------------------------------------------------------------

def _normalize_first(coeffs: np.ndarray, what: str) -> np.ndarray:
    """Congruence making the first coefficient the identity (needs it definite)."""
    first = np.asarray(coeffs[0])
    if min_eigenvalue(first) <= 1e-12 * (1 + np.linalg.norm(first, 2)):
        raise ScalingPreconditionError(f"first coefficient of the {what} pencil is not positive definite")
    R = np.linalg.cholesky(first)
    Ri = np.linalg.inv(R)
    return np.array([Ri @ a @ Ri.conj().T for a in coeffs])


def check_slice_bounded(K: ConeSpec, bound: float = 1e4, options: SolverOptions | None = None) -> float:
    """Largest |x_j| (j >= 2) over {x : x_1 = 1, M(x) psd}; raises if it reaches ``bound``."""
    Ms = _cone_matrices(K)
    n, l = Ms.shape[0], Ms.shape[1]
    if n == 1:
        return 0.0
    worst = 0.0
    for j in range(1, n):
        for direction in (1.0, -1.0):
            c = np.zeros(n - 1)
            c[j - 1] = direction
            box = np.zeros((2 * (n - 1), 2 * (n - 1)))
            F0 = np.zeros((l + 2 * (n - 1),) * 2)
            F0[:l, :l] = Ms[0]
            F0[l:, l:] = bound * np.eye(2 * (n - 1))
            Fs = []
            for k in range(1, n):
                F = np.zeros_like(F0)
                F[:l, :l] = Ms[k]
                F[l + 2 * (k - 1), l + 2 * (k - 1)] = -1.0
                F[l + 2 * (k - 1) + 1, l + 2 * (k - 1) + 1] = 1.0
                Fs.append(F)
            res = lmi_maximize(c, F0, np.array(Fs), options)
            worst = max(worst, abs(res.objective))
    if worst >= 0.99 * bound:
        raise UnboundedSliceError(f"cone slice x_1 = 1 reaches the box bound {bound:g}")
    return worst


@dataclass
class ScaleResult:
    nu_star: float
    certificate: ChoiCertificate
    cone: ConeSpec                 # normalized cone (M_1 = I)
    targets: np.ndarray            # normalized targets (N_1 = I)
    slice_radius: float


def scale_certify(N, K: ConeSpec, options: SolverOptions | None = None) -> ScaleResult:
    """Largest nu for which nu-scaled containment of K is certified.

    First coefficients of both pencils must be positive definite; they are
    brought to the identity by congruence, which leaves the spectrahedra
    unchanged.
    """
    targets = N.coeffs if isinstance(N, MatrixPencil) else np.asarray(N)
    if targets.shape[0] != K.n:
        raise DimensionError(f"target pencil has {targets.shape[0]} variables, cone {K.n}")
    Mn = _normalize_first(K.pencil.coeffs.astype(float), "cone")
    Kn = custom_cone(Mn, K.interior_direction)
    Tn = _normalize_first(targets, "target")
    radius = check_slice_bounded(Kn, options=options)
    problem = build_containment_system(Kn, Tn, 1, scaled=True)
    sol = solve(problem, options)
    if sol.status != FEASIBLE or sol.nu is None or sol.nu <= 0:
        raise PrecisionError(f"scaled system not solved: {sol.status} {sol.message}")
    hermitian = np.iscomplexobj(Tn) and bool(np.any(Tn.imag))
    cert = ChoiCertificate(sigma=1, nu=float(sol.nu), C=_recover_choi(sol.X, hermitian),
                           block_size=Tn.shape[1], scaled=True)
    _finish(cert, Kn, Tn)
    return ScaleResult(nu_star=float(sol.nu), certificate=cert, cone=Kn, targets=Tn, slice_radius=radius)


def scaled_feasible(K: ConeSpec, targets, nu: float, options: SolverOptions | None = None) -> bool:
    """Whether the system with fixed nu (targets N_1, nu * N_p) is feasible."""
    Ts = np.array(targets, dtype=np.result_type(targets, float))
    Ts[1:] = nu * Ts[1:]
    problem = build_containment_system(K, Ts, 1)
    return feasibility(problem, options=options).status == FEASIBLE
