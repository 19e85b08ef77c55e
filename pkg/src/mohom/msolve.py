"""Nonlinear Galerkin solver for div A(x/eps, grad u) = div F on Dirichlet
meshes, and the 1D dual-flux solver that finds the constant flux T with
B(. , T + F) integrating to a zero-boundary gradient.

The nonlinear systems are solved by damped Newton with a backtracking line
search on the discrete residual norm; a relaxed Picard (secant-weight)
iteration is the fallback.  Strict monotonicity makes the discrete solution
unique, so restarts must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize, sparse
from scipy.sparse.linalg import spsolve

from . import opcat
from .fem import DiscreteField, Mesh, gradient_at_quadrature
from .nfunc import NFunction

__all__ = [
    "SolverSettings",
    "SolveResult",
    "SolveError",
    "assemble_residual",
    "assemble_jacobian",
    "solve_dirichlet",
    "solve_dual_1d",
    "newton_solve",
]


class SolveError(RuntimeError):
    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = history or []


@dataclass
class SolverSettings:
    residual_tol: float = 1e-10
    max_newton: int = 50
    max_backtracks: int = 40
    max_picard: int = 400
    jacobian_mode: str = "analytic"   # analytic | finite_difference
    quad_order: int = 3

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if self.max_newton < 1 or self.max_backtracks < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.jacobian_mode not in ("analytic", "finite_difference"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass
class SolveResult:
    u: DiscreteField
    iterations: int
    final_residual: float
    energy_identity_gap: float = np.nan
    modular_bounds: tuple = (np.nan, np.nan)


def _cell_data(op, mesh, u_free, eps, order, xi_shift=None):
    pts, w = mesh.quadrature(order)
    nc, nq, d = pts.shape
    grad = gradient_at_quadrature(DiscreteField(mesh, u_free))
    if xi_shift is not None:
        grad = grad + np.asarray(xi_shift)[None, :]
    y = pts.reshape(-1, d)
    if eps is not None:
        y = y / eps
    grad_q = np.repeat(grad, nq, axis=0)
    return pts, w, y, grad, grad_q


def assemble_residual(op, mesh: Mesh, u_free, F=None, eps=None,
                      order=3, xi_shift=None):
    """Free-dof residual r_i = int (A(x/eps, grad u) - F) . grad phi_i.

    ``eps=None`` evaluates A at y = x directly (cell problems); ``xi_shift``
    adds a constant macroscopic gradient inside A.
    """
    pts, w, y, grad, grad_q = _cell_data(op, mesh, u_free, eps, order, xi_shift)
    nc, nq, d = pts.shape
    flux = op(y, grad_q).reshape(nc, nq, d)
    if F is not None:
        fv = np.asarray(F(pts.reshape(-1, d)))
        if fv.ndim == 1:
            fv = fv[:, None]
        flux = flux - fv.reshape(nc, nq, d)
    # (nc, d): quadrature-averaged flux, then pair with basis gradients;
    # overflowing trial iterates yield non-finite residuals that the
    # line search rejects, so the arithmetic warnings are suppressed
    with np.errstate(invalid="ignore", over="ignore"):
        avg = np.einsum("q,cqd->cd", w, flux)
        cellwise = np.einsum("c,cd,ckd->ck", mesh.volumes, avg,
                             mesh.basis_grads)
        full = np.zeros(mesh.n_vertices)
        np.add.at(full, mesh.cells.ravel(), cellwise.ravel())
    return mesh.restrict(full)


def assemble_jacobian(op, mesh: Mesh, u_free, eps=None, order=3,
                      xi_shift=None, finite_difference=False):
    """Sparse tangent matrix on the free dofs."""
    pts, w, y, grad, grad_q = _cell_data(op, mesh, u_free, eps, order, xi_shift)
    nc, nq, d = pts.shape
    if finite_difference:
        DA = _fd_jacobian(op, y, grad_q)
    else:
        DA = op.jac(y, grad_q)
    DA = DA.reshape(nc, nq, d, d)
    DAbar = np.einsum("q,cqde->cde", w, DA)
    Kcell = np.einsum("c,ckd,cde,cle->ckl", mesh.volumes, mesh.basis_grads,
                      DAbar, mesh.basis_grads)
    idx = mesh.free_of_node[mesh.rep[mesh.cells]]  # (nc, k)
    k = idx.shape[1]
    rows = np.repeat(idx, k, axis=1).ravel()
    cols = np.tile(idx, (1, k)).ravel()
    vals = Kcell.ravel()
    keep = (rows >= 0) & (cols >= 0)
    J = sparse.coo_matrix(
        (vals[keep], (rows[keep], cols[keep])),
        shape=(mesh.n_free, mesh.n_free),
    )
    return J.tocsr()


def _fd_jacobian(op, y, grad_q):
    m, d = grad_q.shape
    J = np.empty((m, d, d))
    h = 1e-6 * (1.0 + np.linalg.norm(grad_q, axis=-1))
    for kk in range(d):
        e = np.zeros(d)
        e[kk] = 1.0
        step = h[:, None] * e
        J[:, :, kk] = (op(y, grad_q + step) - op(y, grad_q - step)) / (2 * h[:, None])
    return J


def newton_solve(residual_fn, jacobian_fn, u0, settings: SolverSettings):
    """Damped Newton with residual-norm backtracking.

    Returns (u, iterations, final_norm); raises SolveError with the iterate
    history on stagnation.
    """
    u = np.asarray(u0, dtype=float).copy()
    history = []
    r = residual_fn(u)
    for it in range(settings.max_newton):
        nr = float(np.linalg.norm(r))
        history.append(nr)
        if nr <= settings.residual_tol:
            return u, it, nr
        J = jacobian_fn(u)
        step = spsolve(J.tocsc(), -r) if sparse.issparse(J) else np.linalg.solve(J, -r)
        t = 1.0
        for _ in range(settings.max_backtracks):
            cand = u + t * step
            rc = residual_fn(cand)
            if np.linalg.norm(rc) < nr:
                u, r = cand, rc
                break
            t /= 2.0
        else:
            raise SolveError("Newton line search stagnated", history=history)
    nr = float(np.linalg.norm(r))
    if nr <= settings.residual_tol:
        return u, settings.max_newton, nr
    raise SolveError("Newton did not converge", history=history)


def _picard_solve(op, mesh, u0, F, eps, settings, xi_shift=None,
                  relaxation=0.5):
    """Relaxed secant-weight (Kachanov) fallback for radial operators."""
    u = np.asarray(u0, dtype=float).copy()

    class _SecantOp:
        dim = op.dim

        def __call__(self, y, xi):
            return self.weight[:, None] * xi

        def jac(self, y, xi):
            return self.weight[:, None, None] * np.eye(op.dim)[None]

    lin = _SecantOp()
    history = []
    for it in range(settings.max_picard):
        r = assemble_residual(op, mesh, u, F, eps, settings.quad_order, xi_shift)
        nr = float(np.linalg.norm(r))
        history.append(nr)
        if nr <= settings.residual_tol:
            return u, it, nr
        pts, w, y, grad, grad_q = _cell_data(op, mesh, u, eps,
                                             settings.quad_order, xi_shift)
        flux = op(y, grad_q)
        t = np.linalg.norm(grad_q, axis=-1)
        lin.weight = np.linalg.norm(flux, axis=-1) / np.maximum(t, 1e-10)
        lin.weight = np.maximum(lin.weight, 1e-12)
        K = assemble_jacobian(lin, mesh, u, eps, settings.quad_order, xi_shift)
        # right-hand side of the frozen-weight linear problem
        rhs = K @ u - r
        u_star = spsolve(K.tocsc(), rhs)
        u = u + relaxation * (u_star - u)
    raise SolveError("Picard fallback did not converge", history=history)


def _nonlinear_solve(op, mesh, F, eps, settings, u0=None, xi_shift=None):
    if u0 is None:
        u0 = np.zeros(mesh.n_free)
    fd = settings.jacobian_mode == "finite_difference"
    residual = lambda u: assemble_residual(op, mesh, u, F, eps,
                                           settings.quad_order, xi_shift)
    jacobian = lambda u: assemble_jacobian(op, mesh, u, eps,
                                           settings.quad_order, xi_shift,
                                           finite_difference=fd)
    try:
        return newton_solve(residual, jacobian, u0, settings)
    except SolveError:
        return _picard_solve(op, mesh, u0, F, eps, settings, xi_shift)


def solve_dirichlet(op, nf: Optional[NFunction], mesh: Mesh, F=None,
                    eps=None, settings: SolverSettings = None,
                    u0=None) -> SolveResult:
    """Galerkin solution of int A(x/eps, grad u).grad phi = int F.grad phi
    over the P1 Dirichlet space."""
    if mesh.boundary_kind != "dirichlet_zero":
        raise ValueError("solve_dirichlet needs a Dirichlet mesh")
    settings = settings or SolverSettings()
    u, iters, nr = _nonlinear_solve(op, mesh, F, eps, settings, u0=u0)
    fld = DiscreteField(mesh, u)

    pts, w = mesh.quadrature(settings.quad_order)
    nc, nq, d = pts.shape
    grad = gradient_at_quadrature(fld)
    y = pts.reshape(-1, d) / eps if eps is not None else pts.reshape(-1, d)
    grad_q = np.repeat(grad, nq, axis=0)
    flux = op(y, grad_q)
    wq = np.repeat(mesh.volumes, nq) * np.tile(w, nc)
    e_a = float(np.dot(wq, np.einsum("ij,ij->i", flux, grad_q)))
    if F is not None:
        fv = np.asarray(F(pts.reshape(-1, d)))
        if fv.ndim == 1:
            fv = fv[:, None]
        e_f = float(np.dot(wq, np.einsum("ij,ij->i", fv, grad_q)))
    else:
        e_f = 0.0
    gap = abs(e_a - e_f)

    modulars = (np.nan, np.nan)
    if nf is not None:
        m_grad = float(np.dot(wq, nf(y, grad_q)))
        m_flux = float(np.dot(wq, nf.conjugate(y, flux)))
        modulars = (m_grad, m_flux)

    return SolveResult(u=fld, iterations=iters, final_residual=nr,
                       energy_identity_gap=gap, modular_bounds=modulars)


def solve_dual_1d(op, mesh: Mesh, F=None, settings: SolverSettings = None):
    """1D dual-flux solve: divergence-free fields are constants, so a single
    scalar T with sum_K |K| B(y_K, T + F_K) = 0 determines the flux.

    F is projected onto per-cell quadrature averages first, matching the
    Galerkin treatment of the right-hand side, and u is reconstructed by
    integrating grad u = B(x, T + F) from x = 0; it returns to 0 at x = 1
    by construction of T.
    """
    if mesh.dim != 1 or mesh.boundary_kind != "dirichlet_zero":
        raise ValueError("solve_dual_1d needs a 1D Dirichlet mesh")
    settings = settings or SolverSettings()
    pts, w = mesh.quadrature(settings.quad_order)
    nc, nq, _ = pts.shape
    if F is not None:
        fv = np.asarray(F(pts.reshape(-1, 1))).reshape(nc, nq)
        F_K = fv @ w  # per-cell quadrature averages
    else:
        F_K = np.zeros(nc)
    x_K = pts[:, :, 0] @ w

    def grad_of(T):
        return np.array([
            opcat.invert_A(op, [x_K[k]], [T + F_K[k]],
                           tol_rel=min(1e-12, settings.residual_tol))[0]
            for k in range(nc)
        ])

    def G(T):
        return float(np.dot(mesh.volumes, grad_of(T)))

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if G(lo) < 0:
            break
        lo *= 2.0
    else:
        raise SolveError("dual bracket failure (coercivity violated?)")
    for _ in range(200):
        if G(hi) > 0:
            break
        hi *= 2.0
    else:
        raise SolveError("dual bracket failure (coercivity violated?)")
    T = optimize.brentq(G, lo, hi, xtol=1e-14, rtol=8.9e-16)

    grads = grad_of(T)
    nodal = np.concatenate([[0.0], np.cumsum(mesh.volumes * grads)])
    closure = abs(nodal[-1])
    if closure > 1e4 * settings.residual_tol * (1.0 + abs(T)):
        raise SolveError(f"dual reconstruction misses zero boundary by {closure}")
    coeffs = nodal[mesh.free_of_node >= 0]
    u = DiscreteField(mesh, coeffs)
    return {"T": float(T), "u_from_dual": u, "gradients": grads,
            "boundary_closure": float(closure)}
