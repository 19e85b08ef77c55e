"""Simplicial P1 meshes on the unit interval/square with Dirichlet or
periodic + zero-mean constraints, plus composite Gauss quadrature.

Meshes are uniform grids whose lines are snapped onto declared interface
coordinates so that piecewise-constant coefficients stay cellwise smooth
and quadrature keeps its full order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mesh",
    "DiscreteField",
    "MeshError",
    "build_mesh",
    "integrate",
    "gradient_at_quadrature",
    "dump_mesh",
    "load_mesh",
]


class MeshError(ValueError):
    pass


# Quadrature on the reference triangle: (points in barycentric-free coords,
# weights as area fractions summing to 1).  Keyed by the highest polynomial
# degree integrated exactly.
_TRI_RULES = {
    1: (np.array([[1 / 3, 1 / 3]]), np.array([1.0])),
    2: (
        np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]]),
        np.array([1 / 3, 1 / 3, 1 / 3]),
    ),
    3: (
        np.array([[1 / 3, 1 / 3], [0.6, 0.2], [0.2, 0.6], [0.2, 0.2]]),
        np.array([-27 / 48, 25 / 48, 25 / 48, 25 / 48]),
    ),
    4: (
        np.array(
            [
                [0.445948490915965, 0.445948490915965],
                [0.108103018168070, 0.445948490915965],
                [0.445948490915965, 0.108103018168070],
                [0.091576213509771, 0.091576213509771],
                [0.816847572980459, 0.091576213509771],
                [0.091576213509771, 0.816847572980459],
            ]
        ),
        np.array(
            [
                0.223381589678011,
                0.223381589678011,
                0.223381589678011,
                0.109951743655322,
                0.109951743655322,
                0.109951743655322,
            ]
        ),
    ),
    5: (
        np.array(
            [
                [1 / 3, 1 / 3],
                [0.470142064105115, 0.470142064105115],
                [0.059715871789770, 0.470142064105115],
                [0.470142064105115, 0.059715871789770],
                [0.101286507323456, 0.101286507323456],
                [0.797426985353087, 0.101286507323456],
                [0.101286507323456, 0.797426985353087],
            ]
        ),
        np.array(
            [
                0.225,
                0.132394152788506,
                0.132394152788506,
                0.132394152788506,
                0.125939180544827,
                0.125939180544827,
                0.125939180544827,
            ]
        ),
    ),
}


def _gauss_1d(order):
    npts = max(1, (order + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(npts)
    # map from [-1, 1] to [0, 1], weights as length fractions
    return (x + 1.0) / 2.0, w / 2.0


@dataclass
class Mesh:
    dim: int
    vertices: np.ndarray        # (nv, dim)
    cells: np.ndarray           # (nc, dim+1) vertex indices, positive orientation
    boundary_kind: str          # "dirichlet_zero" | "periodic"
    rep: np.ndarray             # (nv,) representative node (periodic identification)
    free_of_node: np.ndarray    # (nv,) free-dof index or -1
    n_free: int
    interfaces: tuple = ()
    h: float = 0.0
    volumes: np.ndarray = field(default=None, repr=False)
    basis_grads: np.ndarray = field(default=None, repr=False)  # (nc, dim+1, dim)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    def full_values(self, free_vec):
        """Nodal values on all vertices, constrained nodes reconstructed."""
        full = np.zeros(self.n_vertices)
        idx = self.free_of_node[self.rep]
        mask = idx >= 0
        full[mask] = np.asarray(free_vec)[idx[mask]]
        return full

    def restrict(self, full_vec):
        """Accumulate a full nodal vector onto the free dofs (transpose of
        the reconstruction map)."""
        out = np.zeros(self.n_free)
        idx = self.free_of_node[self.rep]
        mask = idx >= 0
        np.add.at(out, idx[mask], np.asarray(full_vec)[mask])
        return out

    def mean_value(self, full_nodal):
        """Mean of the P1 interpolant (exact)."""
        cell_avg = full_nodal[self.cells].mean(axis=1)
        return float(np.dot(self.volumes, cell_avg))

    def quadrature(self, order):
        """Quadrature points per cell, (nc, nq, dim), and weights (nq,)
        given as volume fractions."""
        if not 1 <= order <= 5:
            raise MeshError(f"quadrature order {order} not in 1..5")
        verts = self.vertices[self.cells]  # (nc, dim+1, dim)
        if self.dim == 1:
            ref, w = _gauss_1d(order)
            a = verts[:, 0, :]
            b = verts[:, 1, :]
            pts = a[:, None, :] + ref[None, :, None] * (b - a)[:, None, :]
            return pts, w
        ref, w = _TRI_RULES[order]
        a = verts[:, 0, :]
        e1 = verts[:, 1, :] - a
        e2 = verts[:, 2, :] - a
        pts = (
            a[:, None, :]
            + ref[None, :, 0, None] * e1[:, None, :]
            + ref[None, :, 1, None] * e2[:, None, :]
        )
        return pts, w


@dataclass
class DiscreteField:
    """P1 function given by its free-dof coefficient vector."""

    mesh: Mesh
    coeffs: np.ndarray
    n_components: int = 1

    def __post_init__(self):
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if len(self.coeffs) != self.mesh.n_free * self.n_components:
            raise MeshError(
                f"coefficient count {len(self.coeffs)} != free nodes "
                f"{self.mesh.n_free} x {self.n_components}"
            )

    def nodal_values(self, zero_mean=None):
        """Full nodal vector.  For periodic meshes the zero-mean constraint
        is applied by subtracting the exact P1 mean (the pinned node only
        fixes the constant mode)."""
        full = self.mesh.full_values(self.coeffs)
        if zero_mean is None:
            zero_mean = self.mesh.boundary_kind == "periodic"
        if zero_mean:
            full -= self.mesh.mean_value(full)
        return full

    def cell_gradients(self):
        return gradient_at_quadrature(self)

    def __call__(self, x):
        """Evaluate the P1 interpolant at points x, 1D meshes only."""
        if self.mesh.dim != 1:
            raise MeshError("point evaluation implemented for 1D meshes")
        xs = self.mesh.vertices[:, 0]
        order = np.argsort(xs)
        return np.interp(np.asarray(x), xs[order], self.nodal_values()[order])


def _snap_points(pts, interfaces, n):
    pts = pts.copy()
    taken = set()
    for c in interfaces:
        if not 0.0 < c < 1.0:
            raise MeshError(f"interface {c} outside (0,1)")
        i = int(round(c * n))
        i = min(max(i, 1), n - 1)
        if i in taken:
            raise MeshError(f"interfaces too close to resolve at n={n}")
        taken.add(i)
        pts[i] = c
    if np.any(np.diff(pts) <= 0):
        raise MeshError(f"interfaces too close to resolve at n={n}")
    return pts


def _geometry_1d(vertices, cells):
    a = vertices[cells[:, 0], 0]
    b = vertices[cells[:, 1], 0]
    hs = b - a
    vols = hs
    grads = np.stack([-1.0 / hs, 1.0 / hs], axis=1)[:, :, None]
    return vols, grads


def _geometry_2d(vertices, cells):
    verts = vertices[cells]
    e1 = verts[:, 1] - verts[:, 0]
    e2 = verts[:, 2] - verts[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    if np.any(det <= 0):
        raise MeshError("negatively oriented or degenerate cell")
    vols = det / 2.0
    inv = np.empty((len(cells), 2, 2))
    inv[:, 0, 0] = e2[:, 1] / det
    inv[:, 0, 1] = -e2[:, 0] / det
    inv[:, 1, 0] = -e1[:, 1] / det
    inv[:, 1, 1] = e1[:, 0] / det
    grads = np.empty((len(cells), 3, 2))
    grads[:, 1, :] = inv[:, 0, :]
    grads[:, 2, :] = inv[:, 1, :]
    grads[:, 0, :] = -grads[:, 1, :] - grads[:, 2, :]
    return vols, grads


def build_mesh(dim, n, boundary_kind="dirichlet_zero", interfaces=()):
    """Uniform mesh of the unit interval/square with grid lines snapped to
    the declared interface coordinates."""
    if dim not in (1, 2):
        raise MeshError(f"dim must be 1 or 2, got {dim}")
    if n < 2:
        raise MeshError("need n >= 2 subdivisions")
    if boundary_kind not in ("dirichlet_zero", "periodic"):
        raise MeshError(f"unknown boundary kind {boundary_kind!r}")
    interfaces = tuple(sorted(set(float(c) for c in interfaces)))
    pts = _snap_points(np.linspace(0.0, 1.0, n + 1), interfaces, n)

    if dim == 1:
        vertices = pts[:, None]
        cells = np.stack([np.arange(n), np.arange(1, n + 1)], axis=1)
        boundary = np.zeros(n + 1, bool)
        boundary[[0, n]] = True
        rep = np.arange(n + 1)
        if boundary_kind == "periodic":
            rep[n] = 0
    else:
        nv = (n + 1) ** 2
        ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        # node id = i + j*(n+1), i along x1, j along x2
        vertices = np.stack(
            [pts[ii.ravel(order="F")], pts[jj.ravel(order="F")]], axis=1
        )
        def vid(i, j):
            return i + j * (n + 1)
        cells = []
        for j in range(n):
            for i in range(n):
                v00, v10 = vid(i, j), vid(i + 1, j)
                v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
                cells.append((v00, v10, v11))
                cells.append((v00, v11, v01))
        cells = np.array(cells)
        i_of = np.arange(nv) % (n + 1)
        j_of = np.arange(nv) // (n + 1)
        boundary = (i_of == 0) | (i_of == n) | (j_of == 0) | (j_of == n)
        rep = np.arange(nv)
        if boundary_kind == "periodic":
            ri = np.where(i_of == n, 0, i_of)
            rj = np.where(j_of == n, 0, j_of)
            rep = ri + rj * (n + 1)

    nv = len(vertices)
    free_of_node = np.full(nv, -1, dtype=int)
    if boundary_kind == "dirichlet_zero":
        interior = ~boundary
        free_of_node[interior] = np.arange(interior.sum())
        n_free = int(interior.sum())
    else:
        reps = np.unique(rep)
        pinned = rep[0]
        free = reps[reps != pinned]
        free_of_node[free] = np.arange(len(free))
        n_free = len(free)

    geom = _geometry_1d if dim == 1 else _geometry_2d
    vols, grads = geom(vertices, cells)
    if dim == 1:
        h = float(np.max(vols))
    else:
        verts = vertices[cells]
        edges = np.linalg.norm(
            verts - np.roll(verts, 1, axis=1), axis=2
        )
        h = float(edges.max())

    return Mesh(
        dim=dim,
        vertices=vertices,
        cells=cells,
        boundary_kind=boundary_kind,
        rep=rep,
        free_of_node=free_of_node,
        n_free=n_free,
        interfaces=interfaces,
        h=h,
        volumes=vols,
        basis_grads=grads,
    )


def gradient_at_quadrature(fld: DiscreteField):
    """Cellwise-constant gradients of the P1 interpolant, (nc, dim)."""
    mesh = fld.mesh
    full = mesh.full_values(fld.coeffs)
    nodal = full[mesh.cells]  # (nc, dim+1)
    return np.einsum("ck,ckd->cd", nodal, mesh.basis_grads)


def integrate(mesh: Mesh, integrand, order=3):
    """Composite Gauss quadrature of a position-dependent integrand.

    ``integrand`` maps an (m, dim) point array to (m,) values.
    """
    pts, w = mesh.quadrature(order)
    nc, nq, d = pts.shape
    vals = np.asarray(integrand(pts.reshape(-1, d))).reshape(nc, nq)
    return float(np.einsum("c,q,cq->", mesh.volumes, w, vals))


def dump_mesh(mesh: Mesh, path):
    """Plain-text dump: header, vertex lines, cell lines, constraint lines."""
    with open(path, "w") as f:
        f.write(f"{mesh.dim} {mesh.n_vertices} {mesh.n_cells}\n")
        f.write(f"# kind {mesh.boundary_kind} interfaces "
                + ",".join(f"{c:.17g}" for c in mesh.interfaces) + "\n")
        for v in mesh.vertices:
            f.write("v " + " ".join(f"{x:.17g}" for x in v) + "\n")
        for c in mesh.cells:
            f.write("c " + " ".join(str(i) for i in c) + "\n")
        for node in range(mesh.n_vertices):
            f.write(f"n {node} {mesh.rep[node]} {mesh.free_of_node[node]}\n")


def load_mesh(path):
    with open(path) as f:
        dim, nv, nc = map(int, f.readline().split())
        meta = f.readline().split()
        kind = meta[2]
        interfaces = tuple(
            float(x) for x in meta[4].split(",") if x
        ) if len(meta) > 4 else ()
        vertices, cells, rep, free = [], [], [], []
        for line in f:
            tok = line.split()
            if tok[0] == "v":
                vertices.append([float(x) for x in tok[1:]])
            elif tok[0] == "c":
                cells.append([int(x) for x in tok[1:]])
            elif tok[0] == "n":
                rep.append(int(tok[2]))
                free.append(int(tok[3]))
    vertices = np.array(vertices)
    cells = np.array(cells)
    rep = np.array(rep)
    free_of_node = np.array(free)
    geom = _geometry_1d if dim == 1 else _geometry_2d
    vols, grads = geom(vertices, cells)
    h = float(vols.max()) if dim == 1 else float(
        np.linalg.norm(
            vertices[cells] - np.roll(vertices[cells], 1, axis=1), axis=2
        ).max()
    )
    return Mesh(
        dim=dim,
        vertices=vertices,
        cells=cells,
        boundary_kind=kind,
        rep=rep,
        free_of_node=free_of_node,
        n_free=int(free_of_node.max()) + 1,
        interfaces=interfaces,
        h=h,
        volumes=vols,
        basis_grads=grads,
    )
