"""Two-scale decomposition and periodic unfolding at finite scale:
the lattice floor/remainder split, the composition map, the exact
unfolding integral identity on aligned quadrature meshes, weak two-scale
pairings, and the corrector-identification diagnostic for 1D laminates.

All convergence statements are realized as finite-sequence diagnostics
(gap decrease along a scale sequence), never as limit claims.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import DiscreteField, build_mesh, gradient_at_quadrature
from .msolve import SolverSettings
from .cell import solve_cell

__all__ = [
    "TwoScalePoint",
    "floor_decompose",
    "compose",
    "check_unfolding_identity",
    "weak_two_scale_pairing",
    "corrector_identification",
]


def floor_decompose(x, eps):
    """Lattice split x = eps (N + R) with componentwise floor semantics,
    R in [0, 1)^d (exact for negative inputs too)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    t = x / eps
    N = np.floor(t)
    R = t - N
    # tiny negative t can round R up to exactly 1.0; push into [0, 1)
    bump = R >= 1.0
    N = N + bump
    R = np.where(bump, 0.0, R)
    return N.astype(np.int64), R


def compose(x, y, eps):
    """Two-scale composition eps (N(x/eps) + y); reproduces x when
    y = R(x/eps), and stays within eps * sqrt(d) of x always."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y >= 1):
        raise ValueError("cell coordinate must lie in [0,1)^d")
    N, _ = floor_decompose(x, eps)
    return eps * (N + y)


@dataclass
class TwoScalePoint:
    """Macroscopic coordinate, cell coordinate in [0,1)^d, and scale."""

    x: np.ndarray
    y: np.ndarray
    eps: float

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if np.any(self.y < 0) or np.any(self.y >= 1):
            raise ValueError("cell coordinate must lie in [0,1)^d")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @classmethod
    def decompose(cls, x, eps):
        _, R = floor_decompose(x, eps)
        return cls(x=x, y=R, eps=eps)

    def composed(self):
        """eps (N(x/eps) + y); within eps * sqrt(d) of x."""
        return compose(self.x, self.y, self.eps)


@dataclass
class UnfoldingReport:
    lhs: float
    rhs: float
    gap: float
    aligned: bool


def check_unfolding_identity(g, eps, quad_order=3, n_per_cell=32, n_y=32,
                             y_interfaces=()):
    """Both sides of the unfolding identity on Omega = (0, 1):

        int g(x, x/eps mod 1) dx   vs   int int g(S_eps(x, y), y) dy dx,

    on quadrature meshes aligned to the eps-lattice.  The identity is exact
    in the continuum; the reported gap is pure quadrature error.
    """
    k = 1.0 / eps
    aligned = abs(k - round(k)) < 1e-12
    k = int(round(k))

    n_x = k * n_per_cell
    mesh_x = build_mesh(1, n_x, "dirichlet_zero")
    pts, w = mesh_x.quadrature(quad_order)
    nc, nq, _ = pts.shape
    x = pts.reshape(-1)
    _, r = floor_decompose(x, eps)
    lhs_vals = np.asarray(g(x, r)).reshape(nc, nq)
    lhs = float(np.einsum("c,q,cq->", mesh_x.volumes, w, lhs_vals))

    mesh_y = build_mesh(1, n_y, "dirichlet_zero",
                        interfaces=tuple(y_interfaces))
    pts_y, w_y = mesh_y.quadrature(quad_order)
    ys = pts_y.reshape(-1)
    wy = np.repeat(mesh_y.volumes, pts_y.shape[1]) * np.tile(w_y, mesh_y.n_cells)
    rhs = 0.0
    for j in range(k):
        # S_eps is constant in x within a lattice cell: eps (j + y)
        s = eps * (j + ys)
        rhs += eps * float(np.dot(wy, np.asarray(g(s, ys))))
    return UnfoldingReport(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs),
                           aligned=aligned)


def weak_two_scale_pairing(v, psi, eps, quad_order=3, n_per_cell=8):
    """int_Omega v(x) psi(x, x/eps) dx on (0, 1), with psi given as a
    separable pair (phi, chi), chi 1-periodic.

    Evaluated along decreasing eps these pairings approximate the limiting
    product-domain pairing.
    """
    phi, chi = psi
    k = max(int(round(1.0 / eps)), 1)
    n_x = max(k * n_per_cell, 64)
    mesh = build_mesh(1, n_x, "dirichlet_zero")
    pts, w = mesh.quadrature(quad_order)
    nc, nq, _ = pts.shape
    x = pts.reshape(-1)
    if isinstance(v, DiscreteField):
        vals = v(x)
    else:
        vals = np.asarray(v(x))
    _, r = floor_decompose(x, eps)
    integrand = (vals * np.asarray(phi(x)) * np.asarray(chi(r))).reshape(nc, nq)
    return float(np.einsum("c,q,cq->", mesh.volumes, w, integrand))


@dataclass
class CorrectorProbe:
    x: float
    xi: float
    mismatch: float


def corrector_identification(u_eps: DiscreteField, u_hom: DiscreteField,
                             op, eps, probe_points,
                             settings: SolverSettings = None):
    """Per-probe comparison of the unfolded fine-scale gradient over one
    lattice cell against xi + grad w_xi with xi taken from the homogenized
    solution (1D laminates, eps commensurate with the fine mesh).

    The relative L1(Y) mismatch must decrease with eps.
    """
    settings = settings or SolverSettings()
    mesh = u_eps.mesh
    if mesh.dim != 1:
        raise NotImplementedError("corrector identification is 1D")
    k = int(round(1.0 / eps))
    r = mesh.n_cells // k
    if mesh.n_cells != k * r:
        raise ValueError("eps not commensurate with the fine mesh")

    grads_eps = gradient_at_quadrature(u_eps)[:, 0]
    grads_hom = gradient_at_quadrature(u_hom)[:, 0]
    xs_hom = u_hom.mesh.vertices[u_hom.mesh.cells[:, 0], 0]

    cell_mesh = build_mesh(1, r, "periodic", interfaces=op.interfaces)
    y_cells = cell_mesh.vertices[cell_mesh.cells[:, 0], 0]
    report = []
    for x in probe_points:
        if not 0.0 < x < 1.0:
            raise ValueError(f"probe {x} outside the domain")
        j = min(int(x / eps), k - 1)
        fine = grads_eps[j * r:(j + 1) * r]
        # macroscopic gradient at the probe from the homogenized solve
        cidx = min(np.searchsorted(xs_hom, x, side="right"), len(xs_hom)) - 1
        xi = float(grads_hom[max(cidx, 0)])
        sol = solve_cell(op, cell_mesh, [xi], settings)
        grads_w = gradient_at_quadrature(sol.w)[:, 0]
        order = np.argsort(y_cells)
        predicted = xi + grads_w[order]
        vols = cell_mesh.volumes[order]
        num = float(np.dot(vols, np.abs(fine - predicted)))
        den = max(float(np.dot(vols, np.abs(predicted))), 1e-14)
        report.append(CorrectorProbe(x=float(x), xi=xi, mismatch=num / den))
    return report
