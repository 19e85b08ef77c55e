"""Periodic cell problem, the effective operator obtained by averaging the
converged flux over the unit cell, the effective energy density f, its 1D
dual counterpart h*, and the structural checks on the tabulated operator
(monotonicity, coercivity against f/f*, continuity in the loading)."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.interpolate import RegularGridInterpolator

from .fem import DiscreteField, Mesh, gradient_at_quadrature
from .msolve import (SolveError, SolverSettings, assemble_jacobian,
                     assemble_residual, newton_solve)
from .nfunc import NFunction, scalar_conjugate

__all__ = [
    "CellSolution",
    "HomogTable",
    "solve_cell",
    "tabulate_Ahat",
    "interp_Ahat",
    "eval_f",
    "eval_hstar",
    "check_Ahat_structure",
    "save_table",
    "load_table",
    "TableOperator1D",
]


@dataclass
class CellSolution:
    xi: np.ndarray
    w: DiscreteField                 # corrector, zero mean via reconstruction
    flux_cells: np.ndarray           # (nc, nq, d) values A(y, xi + grad w)
    Ahat: np.ndarray                 # cell average of the flux
    modulars: tuple                  # (int M(y, xi+grad w), int M*(y, flux))
    orthogonality: float             # |int A(y, xi+grad w) . grad w|
    iterations: int = 0
    final_residual: float = np.nan


def solve_cell(op, cell_mesh: Mesh, xi, settings: SolverSettings = None,
               w0=None) -> CellSolution:
    """Discrete corrector: periodic P1 function annihilating the residual
    of div A(y, xi + grad w) = 0, with the loading applied inside A."""
    if cell_mesh.boundary_kind != "periodic":
        raise ValueError("cell problems need a periodic mesh")
    settings = settings or SolverSettings()
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (cell_mesh.dim,):
        raise ValueError(f"xi must have shape ({cell_mesh.dim},)")
    fd = settings.jacobian_mode == "finite_difference"
    residual = lambda w: assemble_residual(op, cell_mesh, w, None, None,
                                           settings.quad_order, xi_shift=xi)
    jacobian = lambda w: assemble_jacobian(op, cell_mesh, w, None,
                                           settings.quad_order, xi_shift=xi,
                                           finite_difference=fd)
    if w0 is None:
        w0 = np.zeros(cell_mesh.n_free)
    w, iters, nr = newton_solve(residual, jacobian, w0, settings)
    fld = DiscreteField(cell_mesh, w)

    pts, wq = cell_mesh.quadrature(settings.quad_order)
    nc, nq, d = pts.shape
    grad = gradient_at_quadrature(fld) + xi[None, :]
    grad_q = np.repeat(grad, nq, axis=0)
    y = pts.reshape(-1, d)
    flux = op(y, grad_q)
    weights = np.repeat(cell_mesh.volumes, nq) * np.tile(wq, nc)
    Ahat = weights @ flux  # |Y| = 1
    orth = abs(float(np.dot(weights,
                            np.einsum("ij,ij->i", flux, grad_q - xi[None, :]))))
    nf = op.nfunction
    modulars = (np.nan, np.nan)
    if nf is not None:
        modulars = (float(np.dot(weights, nf(y, grad_q))),
                    float(np.dot(weights, nf.conjugate(y, flux))))
    return CellSolution(xi=xi, w=fld, flux_cells=flux.reshape(nc, nq, d),
                        Ahat=Ahat, modulars=modulars, orthogonality=orth,
                        iterations=iters, final_residual=nr)


@dataclass
class HomogTable:
    dim: int
    axes: tuple                      # per-axis strictly increasing 1D grids
    values: np.ndarray               # (*grid_shape, dim)
    cell_mesh_h: float
    failures: list = field(default_factory=list)

    @property
    def partial(self):
        return len(self.failures) > 0

    def grid_points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def tabulate_Ahat(op, cell_mesh: Mesh, xi_axes, settings=None,
                  workers=None) -> HomogTable:
    """Cell solve per grid point, warm-started from the nearest previously
    computed corrector (flux continuity in the loading makes neighbors good
    initializers)."""
    settings = settings or SolverSettings()
    if cell_mesh.dim == 1:
        axes = (np.asarray(xi_axes, dtype=float).ravel(),)
    else:
        axes = tuple(np.asarray(a, dtype=float).ravel() for a in xi_axes)
    if len(axes) != cell_mesh.dim:
        raise ValueError("one grid axis per spatial dimension required")
    for a in axes:
        if len(a) > 1 and np.any(np.diff(a) <= 0):
            raise ValueError("grid axes must be strictly increasing")
    shape = tuple(len(a) for a in axes)
    pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
    values = np.full((len(pts), cell_mesh.dim), np.nan)
    failures = []
    done = {}
    for i, xi in enumerate(pts):
        w0 = None
        if done:
            j = min(done, key=lambda j: np.linalg.norm(pts[j] - xi))
            w0 = done[j]
        try:
            sol = solve_cell(op, cell_mesh, xi, settings, w0=w0)
            values[i] = sol.Ahat
            done[i] = sol.w.coeffs
        except SolveError as exc:
            failures.append((xi.tolist(), str(exc)))
    return HomogTable(dim=cell_mesh.dim, axes=axes,
                      values=values.reshape(*shape, cell_mesh.dim),
                      cell_mesh_h=cell_mesh.h, failures=failures)


def interp_Ahat(table: HomogTable, xi):
    """Multilinear interpolation of the tabulated operator; queries outside
    the grid hull raise."""
    xi_arr = np.asarray(xi, dtype=float)
    single = xi_arr.ndim <= 1
    xi_arr = np.atleast_2d(xi_arr)
    interp = RegularGridInterpolator(table.axes, table.values,
                                     method="linear", bounds_error=True)
    out = interp(xi_arr)
    return out[0] if single else out


def eval_f(op, cell_mesh: Mesh, xi, settings: SolverSettings = None,
           nf: Optional[NFunction] = None):
    """Effective energy density: min over periodic P1 gradients W of
    int_Y M(y, xi + W), by Newton on the energy with an Armijo-style
    halving line search.

    Defaults to the potential N-function carried by ``op``; when M is that
    potential the minimizer gradient coincides with the corrector.
    """
    settings = settings or SolverSettings()
    nf = nf or op.nfunction
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    pts, wq = cell_mesh.quadrature(settings.quad_order)
    nc, nq, d = pts.shape
    weights = np.repeat(cell_mesh.volumes, nq) * np.tile(wq, nc)
    y = pts.reshape(-1, d)

    def energy(w):
        grad = gradient_at_quadrature(DiscreteField(cell_mesh, w)) + xi[None, :]
        return float(np.dot(weights, nf(y, np.repeat(grad, nq, axis=0))))

    w = np.zeros(cell_mesh.n_free)
    e = energy(w)
    for _ in range(settings.max_newton):
        r = assemble_residual(op, cell_mesh, w, None, None,
                              settings.quad_order, xi_shift=xi)
        if np.linalg.norm(r) <= settings.residual_tol:
            break
        J = assemble_jacobian(op, cell_mesh, w, None, settings.quad_order,
                              xi_shift=xi)
        from scipy.sparse.linalg import spsolve
        step = spsolve(J.tocsc(), -r)
        t = 1.0
        for _ in range(settings.max_backtracks):
            cand = w + t * step
            ec = energy(cand)
            if ec <= e + 1e-14 * (1 + abs(e)):
                w, e = cand, ec
                break
            t /= 2.0
        else:
            raise SolveError("energy line search stagnated")
    return e


def eval_hstar(nf: NFunction, xi, cell_mesh: Mesh, order=3):
    """Dual effective density in 1D, where the zero-mean divergence-free
    periodic fields reduce to {0}: the plain cell average of M*(y, xi)."""
    if cell_mesh.dim != 1 or nf.dim != 1:
        raise NotImplementedError("the dual density is restricted to 1D")
    xi = float(np.atleast_1d(np.asarray(xi, dtype=float))[0])
    pts, wq = cell_mesh.quadrature(order)
    nc, nq, _ = pts.shape
    y = pts.reshape(-1, 1)
    vals = nf.conjugate(y, np.full((len(y), 1), xi))
    weights = np.repeat(cell_mesh.volumes, nq) * np.tile(wq, nc)
    return float(np.dot(weights, vals))


def legendre_1d(fun, s, t_hi0=1.0):
    """Numeric Legendre transform of an even scalar convex profile."""
    return scalar_conjugate(lambda t: np.asarray(fun(float(t))), s, t0=t_hi0)


@dataclass
class StructureReport:
    monotone: bool
    min_pairing: float
    coercive: bool
    min_coercivity_margin: float
    continuity_moduli: np.ndarray
    details: dict = field(default_factory=dict)

    @property
    def all_ok(self):
        return self.monotone and self.coercive


def check_Ahat_structure(table: HomogTable, op, nf: NFunction,
                         sample_pairs=50, rng_seed=0, coercivity_c=None,
                         slack=0.01, cell_mesh=None,
                         settings: SolverSettings = None) -> StructureReport:
    """Sampled structural checks on the tabulated effective operator:
    strict monotonicity on grid-point pairs, the coercivity bound against
    the effective energy f and its numeric conjugate f* (1D), and a
    continuity modulus from grid finite differences."""
    if table.partial:
        raise ValueError("table is partial; recompute failures first")
    rng = np.random.default_rng(rng_seed)
    pts = table.grid_points()
    vals = table.values.reshape(len(pts), table.dim)

    idx = rng.integers(0, len(pts), size=(sample_pairs, 2))
    idx = idx[idx[:, 0] != idx[:, 1]]
    pair = np.einsum(
        "ij,ij->i", vals[idx[:, 0]] - vals[idx[:, 1]],
        pts[idx[:, 0]] - pts[idx[:, 1]],
    )
    min_pairing = float(pair.min()) if len(pair) else np.inf
    monotone = bool(np.all(pair > 0))

    coercive = True
    min_margin = np.inf
    if table.dim == 1 and cell_mesh is not None:
        settings = settings or SolverSettings()
        c = coercivity_c if coercivity_c is not None else (op.coercivity_c or 1.0)
        sample = rng.choice(len(pts), size=min(20, len(pts)), replace=False)
        f_of = lambda t: eval_f(op, cell_mesh, [t], settings, nf=nf)
        for i in sample:
            xi = float(pts[i, 0])
            if xi == 0.0:
                continue
            ahat = float(vals[i, 0])
            fv = f_of(xi)
            fstar = legendre_1d(f_of, ahat, t_hi0=max(1.0, abs(xi)))
            lhs = ahat * xi
            rhs = c * (fv + fstar)
            margin = lhs - (1.0 - slack) * rhs
            min_margin = min(min_margin, margin)
            if margin < 0:
                coercive = False

    diffs = np.linalg.norm(np.diff(vals.reshape(*table.values.shape), axis=0),
                           axis=-1)
    return StructureReport(monotone=monotone, min_pairing=min_pairing,
                           coercive=coercive,
                           min_coercivity_margin=float(min_margin),
                           continuity_moduli=diffs)


def save_table(table: HomogTable, path):
    """CSV persistence, 17 significant digits for a bit-exact round trip."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dim"] + [f"xi{k}" for k in range(table.dim)]
                        + [f"Ahat{k}" for k in range(table.dim)] + ["cell_h"])
        pts = table.grid_points()
        vals = table.values.reshape(len(pts), table.dim)
        for p, v in zip(pts, vals):
            writer.writerow(
                [table.dim]
                + [f"{x:.17g}" for x in p]
                + [f"{x:.17g}" for x in v]
                + [f"{table.cell_mesh_h:.17g}"]
            )


def load_table(path) -> HomogTable:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    dim = int(rows[1][0])
    pts = np.array([[float(x) for x in r[1:1 + dim]] for r in rows[1:]])
    vals = np.array([[float(x) for x in r[1 + dim:1 + 2 * dim]] for r in rows[1:]])
    cell_h = float(rows[1][-1])
    axes = tuple(np.unique(pts[:, k]) for k in range(dim))
    shape = tuple(len(a) for a in axes)
    return HomogTable(dim=dim, axes=axes,
                      values=vals.reshape(*shape, dim), cell_mesh_h=cell_h)


class TableOperator1D:
    """Effective operator backed by a 1D table; duck-types the operator
    interface the solver needs (eval + jac), position-independent."""

    dim = 1
    nfunction = None
    periodic = True
    name = "table"

    def __init__(self, table: HomogTable):
        if table.dim != 1:
            raise ValueError("TableOperator1D needs a 1D table")
        self.xs = np.asarray(table.axes[0])
        self.ys = table.values.reshape(-1)
        self.slopes = np.diff(self.ys) / np.diff(self.xs)

    def __call__(self, y, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.interp(xi[:, 0], self.xs, self.ys)[:, None]

    eval = __call__

    def jac(self, y, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        k = np.clip(np.searchsorted(self.xs, xi[:, 0]) - 1, 0,
                    len(self.slopes) - 1)
        return self.slopes[k][:, None, None]
