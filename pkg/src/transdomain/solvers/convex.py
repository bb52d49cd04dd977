"""Constrained convex programs.

Every program here has the form

    minimize  ||F x - a||_p   subject to   ||G x - b||_2 <= eps

with ``p`` in {1, 2}:

* ``l1_bpdn``                   F = I,     a = 0,     G = A, b = y
* ``analysis_l1``               F = Omega, a = 0,     G = M, b = y
* ``constrained_transform_fit`` F = Omega, a = w_hat, G = B, b = y2

Two backends share that form. ``lp`` rewrites the ``p = 1, eps = 0`` case as
a linear program for HiGHS, which gives vertex-exact solutions. ``admm`` is
an over-relaxed ADMM on the splitting ``z = F x - a``, ``w = G x - b`` with
residual-balancing penalty updates; since both splits share one penalty, the
x-update matrix ``F^T F + G^T G`` is factored once.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.optimize import linprog

from .._validation import check_matrix, check_vector
from .report import RecoveryReport, support_of

ADMM_TOL = 1e-8
ADMM_MAX_ITER = 50_000
ADMM_RHO = 1.0
ADMM_RELAX = 1.6


@dataclass(eq=False)
class ConvexSolution:
    x: np.ndarray
    objective: float
    constraint_residual: float
    iterations: int
    converged: bool
    method: str
    wall_time: float = 0.0


def _norm_p(v, p):
    return float(np.sum(np.abs(v))) if p == 1 else float(np.linalg.norm(v))


def _prox(v, t, p):
    if p == 1:
        return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
    nv = np.linalg.norm(v)
    return v * max(0.0, 1.0 - t / nv) if nv > 0 else v


def _ball(v, radius):
    nv = np.linalg.norm(v)
    return v if nv <= radius else v * (radius / nv)


class _Normal:
    """Factorization of ``K = F^T F + G^T G`` with a pseudo-inverse fallback."""

    def __init__(self, K):
        try:
            self._cho = sla.cho_factor(K, check_finite=False)
            self._pinv = None
            if not np.all(np.isfinite(self._cho[0])):
                raise np.linalg.LinAlgError
        except (np.linalg.LinAlgError, ValueError):
            w, V = np.linalg.eigh(K)
            keep = w > 1e-12 * max(w.max(), 1e-300)
            self._cho = None
            self._pinv = (V[:, keep] / w[keep]) @ V[:, keep].T

    def solve(self, rhs):
        if self._cho is not None:
            return sla.cho_solve(self._cho, rhs, check_finite=False)
        return self._pinv @ rhs


def admm_solve(F, a, G, b, eps, p=1, rho=ADMM_RHO, relax=ADMM_RELAX, tol=ADMM_TOL,
               max_iter=ADMM_MAX_ITER, adaptive=True):
    """ADMM for ``min ||F x - a||_p  s.t.  ||G x - b||_2 <= eps``."""
    t0 = time.perf_counter()
    d = F.shape[1]
    normal = _Normal(F.T @ F + G.T @ G)
    x = normal.solve(F.T @ a + G.T @ b)
    z = F @ x - a
    w = _ball(G @ x - b, eps)
    u1 = np.zeros_like(z)
    u2 = np.zeros_like(w)
    sqrt_p = np.sqrt(z.size + w.size)
    scale_ab = np.hypot(np.linalg.norm(a), np.linalg.norm(b))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        x = normal.solve(F.T @ (z + a - u1) + G.T @ (w + b - u2))
        Fx = F @ x - a
        Gx = G @ x - b
        Fr = relax * Fx + (1.0 - relax) * z
        Gr = relax * Gx + (1.0 - relax) * w
        z_old, w_old = z, w
        z = _prox(Fr + u1, 1.0 / rho, p)
        w = _ball(Gr + u2, eps)
        u1 += Fr - z
        u2 += Gr - w

        r_pri = np.hypot(np.linalg.norm(Fx - z), np.linalg.norm(Gx - w))
        r_dual = rho * np.linalg.norm(F.T @ (z - z_old) + G.T @ (w - w_old))
        eps_pri = sqrt_p * tol + tol * max(
            np.hypot(np.linalg.norm(Fx + a), np.linalg.norm(Gx + b)),
            np.hypot(np.linalg.norm(z), np.linalg.norm(w)),
            scale_ab,
        )
        eps_dual = np.sqrt(d) * tol + tol * rho * np.linalg.norm(F.T @ u1 + G.T @ u2)
        if r_pri <= eps_pri and r_dual <= eps_dual:
            converged = True
            break
        if adaptive:
            if r_pri > 10.0 * r_dual:
                rho *= 2.0
                u1 /= 2.0
                u2 /= 2.0
            elif r_dual > 10.0 * r_pri:
                rho /= 2.0
                u1 *= 2.0
                u2 *= 2.0
    return ConvexSolution(
        x,
        _norm_p(F @ x - a, p),
        float(np.linalg.norm(G @ x - b)),
        it,
        converged,
        "admm",
        time.perf_counter() - t0,
    )


def lp_solve(F, a, G, b):
    """Exact ``min ||F x - a||_1  s.t.  G x = b`` as an LP over ``(x, t)``."""
    t0 = time.perf_counter()
    nF, d = F.shape
    I = sparse.identity(nF, format="csr")
    Fs = sparse.csr_matrix(F)
    A_ub = sparse.vstack([sparse.hstack([Fs, -I]), sparse.hstack([-Fs, -I])], format="csr")
    b_ub = np.concatenate([a, -a])
    c = np.concatenate([np.zeros(d), np.ones(nF)])
    kwargs = {}
    if G.shape[0]:
        kwargs = dict(A_eq=sparse.hstack([sparse.csr_matrix(G), sparse.csr_matrix((G.shape[0], nF))], format="csr"),
                      b_eq=b)
    bounds = [(None, None)] * d + [(0, None)] * nF
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs", **kwargs)
    if res.status != 0:
        # dual simplex occasionally stalls on degenerate instances; interior point rarely does
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs-ipm", **kwargs)
    if res.x is not None:
        x = res.x[:d]
    else:
        x = np.zeros(d)
    return ConvexSolution(
        x,
        _norm_p(F @ x - a, 1),
        float(np.linalg.norm(G @ x - b)),
        int(getattr(res, "nit", 0)),
        res.status == 0,
        "lp",
        time.perf_counter() - t0,
    )


def _dispatch(F, a, G, b, eps, p, method, **admm_kw):
    if method not in ("auto", "lp", "admm"):
        raise ValueError(f"unknown method {method!r}")
    if eps < 0:
        raise ValueError("the constraint radius must be non-negative")
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if method == "lp" and (p != 1 or eps != 0):
        raise ValueError("the LP backend handles only p = 1 with an equality constraint")
    if method == "lp" or (method == "auto" and p == 1 and eps == 0):
        return lp_solve(F, a, G, b)
    return admm_solve(F, a, G, b, eps, p=p, **admm_kw)


def l1_bpdn(y, A, epsilon=0.0, method="auto", **admm_kw):
    """Basis pursuit (denoising): ``min ||alpha||_1  s.t.  ||y - A alpha||_2 <= epsilon``."""
    A = check_matrix(A, "A")
    y = check_vector(y, "y", length=A.shape[0])
    n = A.shape[1]
    if epsilon >= np.linalg.norm(y):
        alpha = np.zeros(n)
        sol = ConvexSolution(alpha, 0.0, float(np.linalg.norm(y)), 0, True, "trivial")
    else:
        sol = _dispatch(np.eye(n), np.zeros(n), A, y, float(epsilon), 1, method, **admm_kw)
    return RecoveryReport(
        estimate=sol.x,
        support=support_of(sol.x),
        residual_norm=float(np.linalg.norm(y - A @ sol.x)),
        iterations=sol.iterations,
        converged=sol.converged,
        wall_time=sol.wall_time,
        algorithm="l1_bpdn",
        flags={"method": sol.method, "objective": sol.objective},
    )


def analysis_l1(y, M, omega, epsilon=0.0, method="auto", **admm_kw):
    """Analysis l1 (anisotropic TV for 2-D differences):
    ``min ||Omega x||_1  s.t.  ||y - M x||_2 <= epsilon``."""
    M = check_matrix(M, "M")
    y = check_vector(y, "y", length=M.shape[0])
    Om = np.asarray(getattr(omega, "matrix", omega), dtype=np.float64)
    if Om.shape[1] != M.shape[1]:
        raise ValueError(f"operator acts on R^{Om.shape[1]} but M has {M.shape[1]} columns")
    return _dispatch(Om, np.zeros(Om.shape[0]), M, y, float(epsilon), 1, method, **admm_kw)


def constrained_transform_fit(omega, w_hat, B, y2, epsilon2=0.0, p=1, method="auto", **admm_kw):
    """Map a transform-domain proxy back to the signal domain:
    ``min ||Omega x - w_hat||_p  s.t.  ||B x - y2||_2 <= epsilon2``."""
    Om = np.asarray(getattr(omega, "matrix", omega), dtype=np.float64)
    w_hat = check_vector(w_hat, "w_hat", length=Om.shape[0])
    B = check_matrix(B, "B", allow_empty_rows=True)
    y2 = check_vector(y2, "y2", length=B.shape[0])
    if B.shape[1] != Om.shape[1]:
        raise ValueError(f"B has {B.shape[1]} columns, operator acts on R^{Om.shape[1]}")
    return _dispatch(Om, w_hat, B, y2, float(epsilon2), p, method, **admm_kw)
