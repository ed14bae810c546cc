"""Dense semidefinite programming for containment certificates.

Problems arrive as a matrix variable X with linear equality constraints
``<A_k, X> + g_k * nu = b_k``.  The equality system is reduced by an SVD to
an explicit affine parametrization ``(X, nu) = p0 + N t`` (this also removes
linearly dependent constraints), which turns every problem solved here into
the linear-matrix-inequality form

    maximize  c^T y   subject to   F0 + sum_i y_i F_i  psd.

That form is handled by one primal-dual path-following method (HKM search
direction, Mehrotra predictor-corrector) in ``lmi_maximize``.

Infeasibility of a feasibility problem is reported only together with a
Farkas ray: multipliers y with ``sum_k y_k A_k >= tau I`` for some tau > 0
and ``b^T y < 0``.  Both certificates are re-checked with the Jacobi
eigensolver from ``linalg`` before a status is assigned.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .linalg import as_symmetric, herm_to_real_embed, min_eigenvalue

logger = logging.getLogger(__name__)

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
INCONCLUSIVE = "Inconclusive"


@dataclass
class SolverOptions:
    max_iter: int = 200
    gap_tol: float = 1e-11
    feas_tol: float = 1e-8
    step: float = 0.95


@dataclass
class SdpProblem:
    """Constraints <A[k], X> + g[k] * nu = b[k] on a symmetric block_dim x block_dim X.

    ``objective`` is "margin" (maximize the smallest eigenvalue of X, i.e.
    a strict feasibility test) or "nu" (maximize the scalar nu, X psd).
    """

    A: np.ndarray
    b: np.ndarray
    g: np.ndarray | None = None
    objective: str = "margin"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] == 0:
            raise DimensionError(f"constraint matrices must have shape (m, N, N), got {A.shape}")
        self.A = 0.5 * (A + A.transpose(0, 2, 1))
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.b.shape != (A.shape[0],):
            raise DimensionError("one right-hand side per constraint required")
        if self.g is not None:
            self.g = np.asarray(self.g, dtype=float).ravel()
            if self.g.shape != (A.shape[0],):
                raise DimensionError("one scalar coefficient per constraint required")
        if self.objective not in ("margin", "nu"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.objective == "nu" and self.g is None:
            raise ValueError("objective 'nu' needs scalar coefficients g")

    @property
    def block_dim(self) -> int:
        return self.A.shape[1]

    @property
    def has_scalar(self) -> bool:
        return self.g is not None

    def residual(self, X, nu: float = 0.0) -> float:
        lhs = np.einsum("kij,ij->k", self.A, X)
        if self.g is not None:
            lhs = lhs + self.g * nu
        return float(np.max(np.abs(lhs - self.b)))


@dataclass
class FarkasRay:
    y: np.ndarray        # one multiplier per original constraint
    tau: float           # verified smallest eigenvalue of sum_k y_k A_k
    b_dot_y: float


@dataclass
class SdpSolution:
    status: str
    X: np.ndarray | None = None
    nu: float | None = None
    margin: float = float("nan")
    residual: float = float("nan")
    iterations: int = 0
    objective: float = float("nan")
    ray: FarkasRay | None = None
    message: str = ""


@dataclass
class LmiResult:
    y: np.ndarray
    S: np.ndarray           # F0 + sum_i y_i F_i
    dual: np.ndarray        # multiplier matrix (psd)
    objective: float
    iterations: int
    converged: bool
    message: str = ""


# --------------------------------------------------------------------------
# LMI interior point method
# --------------------------------------------------------------------------

def _block_diag(blocks) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    k = 0
    for b in blocks:
        s = b.shape[0]
        out[k:k + s, k:k + s] = b
        k += s
    return out


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest alpha with X + alpha dX psd (X positive definite)."""
    L = np.linalg.cholesky(X)
    Li = np.linalg.solve(L, np.eye(X.shape[0]))
    lam = np.linalg.eigvalsh(Li @ dX @ Li.T)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def lmi_maximize(c, F0, Fs, options: SolverOptions | None = None) -> LmiResult:
    """Maximize c^T y subject to F0 + sum_i y_i Fs[i] psd.

    Solved as the dual of the standard-form pair
        (P) min <F0, W>  s.t.  -<F_i, W> = c_i,  W psd,
        (D) max c^T y    s.t.  Z = F0 + sum_i y_i F_i psd,
    with an infeasible-start HKM predictor-corrector method.
    """
    opts = options or SolverOptions()
    c = np.asarray(c, dtype=float)
    C = as_symmetric(F0)
    Amat = -np.asarray(Fs, dtype=float)
    m, N = Amat.shape[0], C.shape[0]
    Aflat = Amat.reshape(m, N * N)

    def A_op(X):
        return Aflat @ X.ravel()

    def At_op(y):
        return (Aflat.T @ y).reshape(N, N)

    normA = max(np.linalg.norm(Aflat, axis=1).max(), 1e-300)
    zeta = max(10.0, np.sqrt(N), N * np.max((1 + np.abs(c)) / (1 + np.linalg.norm(Aflat, axis=1))))
    eta = max(10.0, np.sqrt(N), normA, np.linalg.norm(C))
    X = zeta * np.eye(N)
    Z = eta * np.eye(N)
    y = np.zeros(m)
    I = np.eye(N)
    normb, normC = np.linalg.norm(c), np.linalg.norm(C)
    message = "iteration limit"
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        rp = c - A_op(X)
        Rd = C - Z - At_op(y)
        mu = np.sum(X * Z) / N
        pobj, dobj = np.sum(C * X), c @ y
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1 + normb)
        dinf = np.linalg.norm(Rd) / (1 + normC)
        if gap < opts.gap_tol and pinf < opts.gap_tol and dinf < opts.gap_tol:
            converged, message = True, "optimal"
            break
        try:
            Zi = np.linalg.inv(Z)
            Zi = 0.5 * (Zi + Zi.T)
            XAZ = np.einsum("ij,kjl,lm->kim", X, Amat, Zi)
            M = Aflat @ XAZ.reshape(m, N * N).T
            M = 0.5 * (M + M.T)
            XRZ = X @ Rd @ Zi

            def direction(G):
                rhs = rp - A_op(G) + A_op(XRZ)
                try:
                    dy = np.linalg.solve(M, rhs)
                except np.linalg.LinAlgError:
                    dy = np.linalg.lstsq(M, rhs, rcond=None)[0]
                dZ = Rd - At_op(dy)
                dX = G - X @ dZ @ Zi
                return 0.5 * (dX + dX.T), dy, dZ

            dXa, dya, dZa = direction(-X)
            ap = min(1.0, opts.step * _max_step(X, dXa))
            ad = min(1.0, opts.step * _max_step(Z, dZa))
            mu_aff = np.sum((X + ap * dXa) * (Z + ad * dZa)) / N
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))
            G = sigma * mu * Zi - X - dXa @ dZa @ Zi
            dX, dy, dZ = direction(G)
            ap = min(1.0, opts.step * _max_step(X, dX))
            ad = min(1.0, opts.step * _max_step(Z, dZ))
        except np.linalg.LinAlgError as exc:
            message = f"numerical breakdown: {exc}"
            break
        if ap < 1e-12 and ad < 1e-12:
            message = "stalled"
            break
        X = X + ap * dX
        X = 0.5 * (X + X.T)
        y = y + ad * dy
        Z = Z + ad * dZ
        Z = 0.5 * (Z + Z.T)
        if mu < 1e-15 * (1 + abs(pobj) + abs(dobj)) and pinf < 1e-9 and dinf < 1e-9:
            converged, message = True, "optimal (mu floor)"
            break
    S = C + np.tensordot(y, -Amat, axes=1)
    return LmiResult(y=y, S=S, dual=X, objective=float(c @ y), iterations=it,
                     converged=converged, message=message)


# --------------------------------------------------------------------------
# Affine parametrization of the equality constraints
# --------------------------------------------------------------------------

def _svec_index(N: int):
    iu = np.triu_indices(N)
    return iu


def _sym_from_svec(x: np.ndarray, N: int) -> np.ndarray:
    iu = _svec_index(N)
    X = np.zeros((N, N))
    X[iu] = x
    return X + np.triu(X, 1).T


@dataclass
class _Reduction:
    """Solutions of B v = b are v0 + null @ t; v = (svec X, [nu])."""

    B: np.ndarray
    v0: np.ndarray
    null: np.ndarray
    U: np.ndarray
    s: np.ndarray
    Vt: np.ndarray
    consistent: bool
    inconsistency: np.ndarray   # component of b outside range(B)


def _reduce(problem: SdpProblem) -> _Reduction:
    N = problem.block_dim
    iu = _svec_index(N)
    offdiag = (iu[0] != iu[1]).astype(float)
    B = problem.A[:, iu[0], iu[1]] * (1.0 + offdiag)
    if problem.g is not None:
        B = np.hstack([B, problem.g[:, None]])
    U, s, Vt = np.linalg.svd(B, full_matrices=True)
    tol = max(B.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0) * 10
    r = int(np.sum(s > tol))
    Ur, sr, Vr = U[:, :r], s[:r], Vt[:r]
    b = problem.b
    v0 = Vr.T @ ((Ur.T @ b) / sr)
    outside = b - Ur @ (Ur.T @ b)
    consistent = np.linalg.norm(outside) <= 1e-10 * (1 + np.linalg.norm(b))
    return _Reduction(B=B, v0=v0, null=Vt[r:].T, U=Ur, s=sr, Vt=Vr,
                      consistent=bool(consistent), inconsistency=outside)


def _split(v: np.ndarray, N: int, has_scalar: bool):
    if has_scalar:
        return _sym_from_svec(v[:-1], N), float(v[-1])
    return _sym_from_svec(v, N), None


# --------------------------------------------------------------------------
# Public entry points
# --------------------------------------------------------------------------

def default_trace_cap(block_dim: int) -> float:
    return 1e3 * block_dim


def solve(problem: SdpProblem, options: SolverOptions | None = None,
          trace_cap: float | None = None) -> SdpSolution:
    if problem.objective == "nu":
        return _maximize_nu(problem, options)
    return feasibility(problem, trace_cap=trace_cap, options=options)


def feasibility(problem: SdpProblem, trace_cap: float | None = None,
                options: SolverOptions | None = None) -> SdpSolution:
    """Maximize lam subject to the constraints, X >= lam I, trace X <= trace_cap.

    Feasible when the optimal lam is >= -feas_tol; Infeasible when a Farkas
    ray with verified positive margin is found; Inconclusive otherwise.
    """
    opts = options or SolverOptions()
    N = problem.block_dim
    cap = default_trace_cap(N) if trace_cap is None else float(trace_cap)
    if cap <= 0:
        raise ValueError("trace cap must be positive")
    red = _reduce(problem)
    if not red.consistent:
        ray = _inconsistent_ray(problem, red, opts)
        status = INFEASIBLE if ray is not None else INCONCLUSIVE
        return SdpSolution(status=status, ray=ray, message="equality constraints are inconsistent")

    q = red.null.shape[1]
    X0, nu0 = _split(red.v0, N, problem.has_scalar)
    Ns = [_split(red.null[:, j], N, problem.has_scalar)[0] for j in range(q)]
    tr_dir = np.array([np.trace(Nj) for Nj in Ns])
    blocks0 = [X0]
    blocksF = [[Nj] for Nj in Ns] + [[-np.eye(N)]]
    trace_free = np.any(np.abs(tr_dir) > 1e-12)
    if trace_free:
        blocks0.append(np.array([[cap - np.trace(X0)]]))
        for j in range(q):
            blocksF[j].append(np.array([[-tr_dir[j]]]))
        blocksF[q].append(np.zeros((1, 1)))
    elif np.trace(X0) > cap:
        # trace is fixed by the constraints and exceeds the cap
        return SdpSolution(status=INCONCLUSIVE,
                           message=f"constraints force trace {np.trace(X0):.6g} above cap {cap:.6g}")
    F0 = _block_diag(blocks0)
    Fs = np.array([_block_diag(bl) for bl in blocksF])
    c = np.zeros(q + 1)
    c[-1] = 1.0
    res = lmi_maximize(c, F0, Fs, opts)
    t, lam = res.y[:q], res.y[q]
    v = red.v0 + red.null @ t
    X, nu = _split(v, N, problem.has_scalar)
    margin = min_eigenvalue(X)
    residual = problem.residual(X, nu or 0.0)
    res_tol = opts.feas_tol * (1 + np.max(np.abs(problem.b)))
    sol = SdpSolution(status=INCONCLUSIVE, X=X, nu=nu, margin=margin, residual=residual,
                      iterations=res.iterations, objective=lam, message=res.message)
    logger.debug("feasibility: lam=%.3e margin=%.3e residual=%.3e (%s, %d it)",
                 lam, margin, residual, res.message, res.iterations)
    if margin >= -opts.feas_tol and residual <= res_tol:
        sol.status = FEASIBLE
        return sol
    if res.converged and lam < -opts.feas_tol and not problem.has_scalar:
        ray = farkas_ray(problem, red, opts)
        if ray is not None:
            sol.status = INFEASIBLE
            sol.ray = ray
    return sol


def _ray_from_reduced(red: _Reduction, yr: np.ndarray) -> np.ndarray:
    return red.U @ (yr / red.s)


def verify_ray(problem: SdpProblem, y: np.ndarray) -> tuple[float, float]:
    """Smallest eigenvalue of sum_k y_k A_k and the value b^T y."""
    W = np.tensordot(y, problem.A, axes=1)
    return min_eigenvalue(W), float(problem.b @ y)


def farkas_ray(problem: SdpProblem, red: _Reduction | None = None,
               options: SolverOptions | None = None) -> FarkasRay | None:
    """Search multipliers y with sum_k y_k A_k >= tau I, b^T y <= -tau, tau > 0.

    Solved in the orthonormalized constraint basis with the normalization
    trace(sum_k y_k A_k) <= 1, then mapped back to the original constraints
    and verified.
    """
    opts = options or SolverOptions()
    red = red or _reduce(problem)
    if problem.has_scalar:
        return None
    N = problem.block_dim
    r = red.s.size
    # functional of the i-th orthonormal row, as a symmetric matrix
    Ws = []
    for i in range(r):
        row = red.Vt[i]
        W = _sym_from_svec(row, N)
        W = W - 0.5 * np.triu(W, 1) - 0.5 * np.tril(W, -1)
        Ws.append(W)
    h = (red.U.T @ problem.b) / red.s
    # variables (y_1..y_r, tau); blocks: sum y_i W_i - tau I, -h^T y - tau, 1 - tr(sum y_i W_i)
    F0 = _block_diag([np.zeros((N, N)), np.zeros((1, 1)), np.ones((1, 1))])
    Fs = [_block_diag([Ws[i], np.array([[-h[i]]]), np.array([[-np.trace(Ws[i])]])]) for i in range(r)]
    Fs.append(_block_diag([-np.eye(N), np.array([[-1.0]]), np.zeros((1, 1))]))
    c = np.zeros(r + 1)
    c[-1] = 1.0
    res = lmi_maximize(c, F0, np.array(Fs), opts)
    if res.y[-1] <= 0:
        return None
    y = _ray_from_reduced(red, res.y[:r])
    tau, bty = verify_ray(problem, y)
    if tau > 0 and bty < 0:
        return FarkasRay(y=y, tau=tau, b_dot_y=bty)
    return None


def _inconsistent_ray(problem: SdpProblem, red: _Reduction, opts: SolverOptions) -> FarkasRay | None:
    """Ray for a linearly inconsistent system, made strict when possible."""
    y_lin = -red.inconsistency
    base = float(problem.b @ y_lin)          # = -||outside||^2 < 0
    # a direction w with sum_k w_k A_k positive definite, if any
    if problem.has_scalar:
        return None
    direction, margin = find_interior_direction(problem.A, options=opts)
    tau, bty = verify_ray(problem, y_lin)
    if margin <= 0:
        return FarkasRay(y=y_lin, tau=tau, b_dot_y=bty) if bty < 0 else None
    bw = float(problem.b @ direction)
    kappa = 1.0 if bw < 0 else 2.0 * (bw + 1.0) / abs(base)
    y = kappa * y_lin + direction
    tau, bty = verify_ray(problem, y)
    if bty < 0:
        return FarkasRay(y=y, tau=tau, b_dot_y=bty)
    return None


def _maximize_nu(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    opts = options or SolverOptions()
    N = problem.block_dim
    red = _reduce(problem)
    if not red.consistent:
        return SdpSolution(status=INFEASIBLE, message="equality constraints are inconsistent")
    q = red.null.shape[1]
    X0, nu0 = _split(red.v0, N, True)
    Ns, gs = zip(*[_split(red.null[:, j], N, True) for j in range(q)]) if q else ((), ())
    res = lmi_maximize(np.array(gs), X0, np.array(Ns), opts)
    v = red.v0 + red.null @ res.y
    X, nu = _split(v, N, True)
    margin = min_eigenvalue(X)
    residual = problem.residual(X, nu)
    res_tol = opts.feas_tol * (1 + np.max(np.abs(problem.b)))
    ok = margin >= -opts.feas_tol and residual <= res_tol
    return SdpSolution(status=FEASIBLE if ok else INCONCLUSIVE, X=X, nu=nu, margin=margin,
                       residual=residual, iterations=res.iterations, objective=nu,
                       message=res.message)


def find_interior_direction(coeffs, box: float = 1.0, options: SolverOptions | None = None):
    """Maximize the smallest eigenvalue of sum_j A_j e_j over |e_j| <= box.

    Hermitian coefficients are handled through the real embedding.  Returns
    (e, margin) with the margin recomputed by the Jacobi eigensolver.
    """
    mats = np.asarray(coeffs)
    if np.iscomplexobj(mats):
        mats = np.array([herm_to_real_embed(a) for a in mats])
    n, d = mats.shape[0], mats.shape[1]
    F0 = _block_diag([np.zeros((d, d)), box * np.eye(2 * n)])
    Fs = []
    for j in range(n):
        lp = np.zeros(2 * n)
        lp[2 * j], lp[2 * j + 1] = -1.0, 1.0
        Fs.append(_block_diag([mats[j], np.diag(lp)]))
    Fs.append(_block_diag([-np.eye(d), np.zeros((2 * n, 2 * n))]))
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = lmi_maximize(c, F0, np.array(Fs), options)
    e = np.clip(res.y[:n], -box, box)
    margin = min_eigenvalue(np.tensordot(e, mats, axes=1))
    return e, margin
