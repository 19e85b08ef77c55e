"""Musielak-Orlicz N-function toolkit.

Evaluation of spatially dependent N-functions M(y, xi), numeric convex
conjugation, modulars, Luxemburg norms and the sampling-based structural
checks (Young inequality, doubling ratios).  Positions ``y`` are arrays of
shape (m, d) and arguments ``xi`` arrays of shape (m, d); evaluation returns
(m,).  All catalog entries are vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .fem import DiscreteField, Mesh

__all__ = [
    "NFunction",
    "RadialNFunction",
    "ConjugationError",
    "conjugate_eval",
    "scalar_conjugate",
    "modular",
    "modular_product",
    "luxemburg_norm",
    "check_young",
    "check_delta2",
    "make_nfunction",
    "catalog_nfunctions",
]

# Coarse conjugation grid (log-spaced radii x directions) with local
# ternary refinement; covers the superlinear regime at bounded cost.
_CONJ_RADII = np.logspace(-6, 6, 64)
_CONJ_DIRECTIONS_2D = 32
_CONJ_REFINE_STEPS = 20
_FD_STEP = 1e-6


class ConjugationError(RuntimeError):
    pass


@dataclass
class RadialNFunction:
    """Scalar N-function of a nonnegative radius, e.g. the (M2) envelopes."""

    eval: Callable[[np.ndarray], np.ndarray]
    conjugate_closed_form: Optional[Callable] = None

    def __call__(self, t):
        return self.eval(np.abs(np.asarray(t, dtype=float)))

    def conjugate(self, s):
        if self.conjugate_closed_form is not None:
            return self.conjugate_closed_form(np.abs(np.asarray(s, dtype=float)))
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.array([scalar_conjugate(self.eval, si) for si in np.abs(s)])
        return out if out.size > 1 else float(out[0])


@dataclass
class NFunction:
    """N-function M(y, xi) with metadata guiding conjugation and meshing."""

    name: str
    eval: Callable          # (y (m,d), xi (m,d)) -> (m,)
    dim: int
    m1: RadialNFunction     # radial lower envelope
    m2: RadialNFunction     # radial upper envelope
    codim: int = 1
    periodic: bool = True
    delta2_claim: str = "unknown"            # tri-state: yes / no / unknown
    delta2_conjugate_claim: str = "unknown"
    smoothness: str = "smooth"               # smooth | piecewise
    interfaces: tuple = ()
    conjugate_closed_form: Optional[Callable] = None   # (y, eta) -> (m,)

    def __call__(self, y, xi):
        y, xi = _as_points(y, xi, self.dim)
        vals = np.asarray(self.eval(y, xi))
        if np.any(np.isnan(vals)):
            raise ValueError(f"NaN from N-function {self.name}")
        return vals

    def conjugate(self, y, eta):
        """M*(y, eta), closed form when available, numeric sup otherwise."""
        if self.conjugate_closed_form is not None:
            y, eta = _as_points(y, eta, self.dim)
            return np.asarray(self.conjugate_closed_form(y, eta))
        y, eta = _as_points(y, eta, self.dim)
        return np.array(
            [conjugate_eval(self, y[i], eta[i]) for i in range(len(y))]
        )

    def grad(self, y, xi):
        """Central finite-difference gradient in xi, step 1e-6 (1+|xi|)."""
        y, xi = _as_points(y, xi, self.dim)
        h = _FD_STEP * (1.0 + np.linalg.norm(xi, axis=-1, keepdims=True))
        g = np.empty_like(xi)
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            g[:, k] = (self(y, xi + h * e) - self(y, xi - h * e)) / (2 * h[:, 0])
        return g


def _as_points(y, xi, d):
    y = np.atleast_2d(np.asarray(y, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if y.shape[-1] != d or xi.shape[-1] != d:
        raise ValueError(f"expected trailing dimension {d}")
    if len(y) == 1 and len(xi) > 1:
        y = np.broadcast_to(y, xi.shape)
    if len(xi) == 1 and len(y) > 1:
        xi = np.broadcast_to(xi, y.shape)
    return y, xi


def scalar_conjugate(fun, s, t0=1.0, max_expand=80):
    """Legendre transform sup_{t>=0} (s t - fun(t)) of a convex scalar
    N-function, by bracket expansion and bounded minimization."""
    s = abs(float(s))
    if s == 0.0:
        return 0.0
    t_hi = t0
    for _ in range(max_expand):
        # past the sup, the slope of fun exceeds s
        with np.errstate(over="ignore"):
            if fun(np.asarray(2 * t_hi)) - fun(np.asarray(t_hi)) > s * t_hi:
                break
        t_hi *= 2.0
    else:
        raise ConjugationError(f"conjugate bracket expansion failed at s={s}")
    res = optimize.minimize_scalar(
        lambda t: float(fun(np.asarray(t)) - s * t),
        bounds=(0.0, 2 * t_hi),
        method="bounded",
        options={"xatol": 1e-13 * (1 + t_hi)},
    )
    return float(-res.fun)


def conjugate_eval(nf: NFunction, y, eta):
    """Numeric sup over xi of (xi . eta - M(y, xi)).

    Coarse search over a log-spaced radial/directional grid followed by
    ternary refinement in the log-radius (and the angle, in 2D).
    """
    y = np.asarray(y, dtype=float).reshape(1, nf.dim)
    eta = np.asarray(eta, dtype=float).reshape(nf.dim)
    if np.linalg.norm(eta) == 0.0:
        # sup at xi = 0 since M >= 0 = M(y, 0)
        return 0.0
    if nf.dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        ang = np.linspace(0.0, 2 * np.pi, _CONJ_DIRECTIONS_2D, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)

    def value(r, d):
        xi = (r * d).reshape(1, nf.dim)
        with np.errstate(over="ignore"):
            m = float(np.asarray(nf.eval(y, xi)).ravel()[0])
        if np.isnan(m):
            raise ConjugationError(f"NaN from {nf.name} during conjugation")
        return float(np.dot(xi.ravel(), np.asarray(eta).ravel())) - m

    best = (-np.inf, None, None)
    for d in dirs:
        vals = [value(r, d) for r in _CONJ_RADII]
        k = int(np.argmax(vals))
        if vals[k] > best[0]:
            best = (vals[k], k, d)
    _, k, d = best
    lo = np.log(_CONJ_RADII[max(k - 1, 0)])
    hi = np.log(_CONJ_RADII[min(k + 1, len(_CONJ_RADII) - 1)])

    def refine_radius(lo, hi, d, steps=60):
        for _ in range(steps):
            m1_, m2_ = lo + (hi - lo) / 3, hi - (hi - lo) / 3
            if value(np.exp(m1_), d) < value(np.exp(m2_), d):
                lo = m1_
            else:
                hi = m2_
        return (lo + hi) / 2

    if nf.dim == 1:
        r = np.exp(refine_radius(lo, hi, d))
        return max(value(r, d), 0.0)

    theta = float(np.arctan2(d[1], d[0]))
    dtheta = 2 * np.pi / _CONJ_DIRECTIONS_2D
    logr = (lo + hi) / 2
    for _ in range(_CONJ_REFINE_STEPS):
        d = np.array([np.cos(theta), np.sin(theta)])
        logr = refine_radius(logr - 1.0, logr + 1.0, d, steps=40)
        r = np.exp(logr)
        a, b = theta - dtheta, theta + dtheta
        for _ in range(40):
            t1, t2 = a + (b - a) / 3, b - (b - a) / 3
            v1 = value(r, np.array([np.cos(t1), np.sin(t1)]))
            v2 = value(r, np.array([np.cos(t2), np.sin(t2)]))
            if v1 < v2:
                a = t1
            else:
                b = t2
        theta = (a + b) / 2
        dtheta /= 2
    d = np.array([np.cos(theta), np.sin(theta)])
    return max(value(np.exp(logr), d), 0.0)


def _field_values(v, mesh, order):
    """Quadrature values of a field: DiscreteField (P1 nodal) or callable."""
    pts, w = mesh.quadrature(order)
    nc, nq, d = pts.shape
    flat = pts.reshape(-1, d)
    if isinstance(v, DiscreteField):
        full = v.nodal_values(zero_mean=False)
        nodal = full[mesh.cells]  # (nc, k)
        if mesh.dim == 1:
            a = mesh.vertices[mesh.cells[:, 0], 0][:, None]
            b = mesh.vertices[mesh.cells[:, 1], 0][:, None]
            lam = (pts[:, :, 0] - a) / (b - a)
            vals = nodal[:, 0][:, None] * (1 - lam) + nodal[:, 1][:, None] * lam
        else:
            verts = mesh.vertices[mesh.cells]
            e1 = verts[:, 1] - verts[:, 0]
            e2 = verts[:, 2] - verts[:, 0]
            det = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])[:, None]
            rel = pts - verts[:, None, 0, :]
            l1 = (rel[:, :, 0] * e2[:, None, 1] - rel[:, :, 1] * e2[:, None, 0]) / det
            l2 = (-rel[:, :, 0] * e1[:, None, 1] + rel[:, :, 1] * e1[:, None, 0]) / det
            vals = (
                nodal[:, 0][:, None] * (1 - l1 - l2)
                + nodal[:, 1][:, None] * l1
                + nodal[:, 2][:, None] * l2
            )
        return pts, w, vals.reshape(-1, 1)
    vals = np.asarray(v(flat))
    if vals.ndim == 1:
        vals = vals[:, None]
    return pts, w, vals


def modular(nf: NFunction, v, mesh: Mesh = None, order: int = 3):
    """Quadrature approximation of the modular integral of M(x, v(x)).

    ``v`` is a DiscreteField (its mesh is used) or a callable on (m, d)
    points returning scalar or vector values.
    """
    if isinstance(v, DiscreteField):
        mesh = v.mesh
    elif mesh is None:
        raise ValueError("a mesh is required for callable fields")
    if mesh.dim != nf.dim:
        raise ValueError(
            f"mesh dimension {mesh.dim} != N-function dimension {nf.dim}"
        )
    pts, w, vals = _field_values(v, mesh, order)
    nc, nq, d = pts.shape
    k = vals.shape[-1]
    if k == 1 and nf.dim > 1:
        vals = np.concatenate([vals, np.zeros((len(vals), nf.dim - 1))], axis=1)
    elif k != nf.dim:
        raise ValueError(
            f"field dimension {k} incompatible with N-function dim {nf.dim}"
        )
    mv = nf(pts.reshape(-1, d), vals).reshape(nc, nq)
    return float(np.einsum("c,q,cq->", mesh.volumes, w, mv))


def modular_product(nf: NFunction, mesh_x: Mesh, mesh_y: Mesh, v, order=3):
    """Modular of a two-variable field over the product domain:
    integral over Omega x Y of M(y, v(x, y))."""
    pts_x, w_x = mesh_x.quadrature(order)
    pts_y, w_y = mesh_y.quadrature(order)
    xs = pts_x.reshape(-1, mesh_x.dim)
    ys = pts_y.reshape(-1, mesh_y.dim)
    total = 0.0
    wx_flat = np.repeat(mesh_x.volumes, pts_x.shape[1]) * np.tile(
        w_x, mesh_x.n_cells
    )
    wy_flat = np.repeat(mesh_y.volumes, pts_y.shape[1]) * np.tile(
        w_y, mesh_y.n_cells
    )
    for j, yj in enumerate(ys):
        yrep = np.broadcast_to(yj, (len(xs), mesh_y.dim))
        vals = np.asarray(v(xs, yrep))
        if vals.ndim == 1:
            vals = vals[:, None]
        total += wy_flat[j] * float(np.dot(wx_flat, nf(yrep, vals)))
    return total


def luxemburg_norm(nf: NFunction, v, mesh: Mesh = None, order: int = 3,
                   rel_tol: float = 1e-10, max_expand: int = 200):
    """inf{ lam > 0 : modular(v / lam) <= 1 } by geometric bracketing and
    bisection; the modular is monotone in lam, so this always converges."""
    if isinstance(v, DiscreteField):
        mesh = v.mesh
        scaled = lambda lam: DiscreteField(v.mesh, v.coeffs / lam, v.n_components)
    else:
        if mesh is None:
            raise ValueError("a mesh is required for callable fields")
        scaled = lambda lam: (lambda x: np.asarray(v(x)) / lam)

    if modular(nf, v, mesh, order) == 0.0:
        return 0.0

    def rho(lam):
        with np.errstate(over="ignore"):
            return modular(nf, scaled(lam), mesh, order)

    lo = hi = 1.0
    for _ in range(max_expand):
        if rho(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise OverflowError("Luxemburg bracket expansion exceeded cap")
    for _ in range(max_expand):
        if rho(lo) > 1.0 or rho(lo) == 0.0:
            break
        lo /= 2.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class YoungReport:
    violations: list
    max_gap_at_conjugate_pair: float
    samples: int = 0


def _sample_points(rng, n, d, r_lo=1e-2, r_hi=10.0):
    radii = np.exp(rng.uniform(np.log(r_lo), np.log(r_hi), size=n))
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return radii[:, None] * dirs

def check_young(nf: NFunction, sample_count=10_000, rng_seed=0, tol=1e-12):
    """Sampled generalized Young inequality xi.eta <= M(y,xi) + M*(y,eta),
    plus the equality gap at eta = grad_xi M(y, xi) for smooth entries."""
    rng = np.random.default_rng(rng_seed)
    y = rng.uniform(0.0, 1.0, size=(sample_count, nf.dim))
    xi = _sample_points(rng, sample_count, nf.dim)
    eta = _sample_points(rng, sample_count, nf.dim)
    lhs = np.einsum("ij,ij->i", xi, eta)
    rhs = nf(y, xi) + nf.conjugate(y, eta)
    bad = np.where(lhs > rhs + tol)[0]
    violations = [
        (y[i].tolist(), xi[i].tolist(), eta[i].tolist(), float(lhs[i] - rhs[i]))
        for i in bad
    ]
    max_gap = 0.0
    if nf.smoothness == "smooth":
        m = min(sample_count, 200)
        yg, xig = y[:m], xi[:m]
        etag = nf.grad(yg, xig)
        gap = np.abs(
            nf(yg, xig) + nf.conjugate(yg, etag)
            - np.einsum("ij,ij->i", xig, etag)
        )
        max_gap = float(gap.max())
    return YoungReport(violations=violations, max_gap_at_conjugate_pair=max_gap,
                       samples=sample_count)


@dataclass
class Delta2Verdict:
    satisfied_on_samples: bool
    max_ratio: float
    ratios: np.ndarray = field(default=None, repr=False)


def check_delta2(nf: NFunction, radius_grid, rng_seed=0, n_dirs=16, n_y=16):
    """Sampled doubling ratio M(y, 2 xi) / (M(y, xi) + 1).

    A heuristic only -- the doubling condition is asymptotic and not
    decidable from finitely many samples.  ``satisfied_on_samples`` requires
    the ratio to stay bounded and stop growing along the largest radii.
    """
    radius_grid = np.asarray(radius_grid, dtype=float)
    if np.any(np.diff(radius_grid) <= 0):
        raise ValueError("radius grid must be strictly increasing")
    rng = np.random.default_rng(rng_seed)
    y = rng.uniform(0.0, 1.0, size=(n_y, nf.dim))
    if nf.dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        ang = np.linspace(0, 2 * np.pi, n_dirs, endpoint=False)
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ratios = np.empty(len(radius_grid))
    with np.errstate(over="ignore"):
        for i, r in enumerate(radius_grid):
            worst = 0.0
            for d in dirs:
                xi = np.broadcast_to(r * d, (n_y, nf.dim))
                num, den = nf(y, 2 * xi), nf(y, xi) + 1.0
                if not np.all(np.isfinite(num)):
                    worst = np.inf
                    break
                worst = max(worst, float(np.max(num / den)))
            ratios[i] = worst
    plateaued = bool(ratios[-1] <= ratios[-2] * 1.01)
    bounded = bool(np.isfinite(ratios[-1]) and ratios[-1] < 1e6)
    return Delta2Verdict(satisfied_on_samples=plateaued and bounded,
                         max_ratio=float(ratios.max()), ratios=ratios)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _norm(xi):
    return np.linalg.norm(xi, axis=-1)


def _power_radial(p):
    q = p / (p - 1.0)
    return RadialNFunction(
        eval=lambda t, p=p: np.abs(t) ** p / p,
        conjugate_closed_form=lambda s, q=q: np.abs(s) ** q / q,
    )


def _glued_envelopes(p_lo, p_hi):
    """Radial N-function sandwich for |xi|^{p(y)}/p(y) with p in [p_lo, p_hi].

    m1 is a scaled C^1 glue of t^{p_hi} (t<=1) and t^{p_lo} (t>1); m2 glues
    the opposite way (convex kink at t=1).
    """
    c1 = p_lo / p_hi ** 2

    def g_lower(t):
        t = np.abs(t)
        return np.where(t <= 1.0, t ** p_hi,
                        1.0 + (p_hi / p_lo) * (t ** p_lo - 1.0))

    def g_upper(t):
        t = np.abs(t)
        return np.where(t <= 1.0, t ** p_lo, t ** p_hi) / p_lo

    return (RadialNFunction(eval=lambda t: c1 * g_lower(t)),
            RadialNFunction(eval=g_upper))


def _laminate_coeff(a1, a2):
    """Piecewise coefficient a(y) = a1 on [0, 1/2), a2 on [1/2, 1), periodic
    in the first coordinate."""
    def a(y):
        y1 = np.mod(np.asarray(y)[..., 0], 1.0)
        return np.where(y1 < 0.5, a1, a2)
    return a


def make_nfunction(spec: str, dim: int = 1) -> NFunction:
    """Catalog entries addressable by name string, e.g. ``power:3``,
    ``varexp:2,3``, ``aniso:2,0.5,1``, ``exp:1``, ``checkerboard:2,3``,
    ``quad:a1,a2`` (laminate quadratic), ``plaplace:p,a1,a2``."""
    name, _, args = spec.partition(":")
    params = [float(x) for x in args.split(",")] if args else []

    if name == "power":
        p = params[0] if params else 2.0
        q = p / (p - 1.0)
        rad = _power_radial(p)
        return NFunction(
            name=spec, dim=dim,
            eval=lambda y, xi, p=p: _norm(xi) ** p / p,
            conjugate_closed_form=lambda y, eta, q=q: _norm(eta) ** q / q,
            m1=rad, m2=rad,
            delta2_claim="yes", delta2_conjugate_claim="yes",
            smoothness="smooth",
        )

    if name == "quad":
        a1, a2 = (params + [1.0, 3.0])[:2]
        a = _laminate_coeff(a1, a2)
        lo, hi = min(a1, a2), max(a1, a2)
        return NFunction(
            name=spec, dim=dim,
            eval=lambda y, xi, a=a: a(y) * _norm(xi) ** 2 / 2.0,
            conjugate_closed_form=lambda y, eta, a=a: _norm(eta) ** 2 / (2.0 * a(y)),
            m1=RadialNFunction(lambda t, lo=lo: lo * t ** 2 / 2,
                               lambda s, lo=lo: s ** 2 / (2 * lo)),
            m2=RadialNFunction(lambda t, hi=hi: hi * t ** 2 / 2,
                               lambda s, hi=hi: s ** 2 / (2 * hi)),
            delta2_claim="yes", delta2_conjugate_claim="yes",
            smoothness="piecewise", interfaces=(0.5,),
        )

    if name == "plaplace":
        p, a1, a2 = (params + [3.0, 1.0, 1.0])[:3]
        q = p / (p - 1.0)
        a = _laminate_coeff(a1, a2)
        lo, hi = min(a1, a2), max(a1, a2)
        return NFunction(
            name=spec, dim=dim,
            eval=lambda y, xi, a=a, p=p: a(y) * _norm(xi) ** p / p,
            conjugate_closed_form=lambda y, eta, a=a, q=q, p=p:
                a(y) ** (1.0 - q) * _norm(eta) ** q / q,
            m1=RadialNFunction(lambda t, lo=lo, p=p: lo * np.abs(t) ** p / p,
                               lambda s, lo=lo, p=p, q=q: lo ** (1 - q) * np.abs(s) ** q / q),
            m2=RadialNFunction(lambda t, hi=hi, p=p: hi * np.abs(t) ** p / p,
                               lambda s, hi=hi, p=p, q=q: hi ** (1 - q) * np.abs(s) ** q / q),
            delta2_claim="yes", delta2_conjugate_claim="yes",
            smoothness="piecewise" if a1 != a2 else "smooth",
            interfaces=(0.5,) if a1 != a2 else (),
        )

    if name == "varexp":
        p1, p2 = (params + [2.0, 3.0])[:2]
        pmid, pamp = (p1 + p2) / 2.0, (p2 - p1) / 2.0

        def pexp(y):
            return pmid + pamp * np.sin(2 * np.pi * np.asarray(y)[..., 0])

        def ev(y, xi):
            p = pexp(y)
            return _norm(xi) ** p / p

        def conj(y, eta):
            p = pexp(y)
            q = p / (p - 1.0)
            return _norm(eta) ** q / q

        m1, m2 = _glued_envelopes(min(p1, p2), max(p1, p2))
        return NFunction(
            name=spec, dim=dim, eval=ev, conjugate_closed_form=conj,
            m1=m1, m2=m2,
            delta2_claim="yes", delta2_conjugate_claim="yes",
            smoothness="smooth",
        )

    if name == "checkerboard":
        p1, p2 = (params + [2.0, 3.0])[:2]

        def pexp(y):
            y1 = np.mod(np.asarray(y)[..., 0], 1.0)
            return np.where(y1 < 0.5, p1, p2)

        def ev(y, xi):
            p = pexp(y)
            return _norm(xi) ** p / p

        def conj(y, eta):
            p = pexp(y)
            q = p / (p - 1.0)
            return _norm(eta) ** q / q

        m1, m2 = _glued_envelopes(min(p1, p2), max(p1, p2))
        return NFunction(
            name=spec, dim=dim, eval=ev, conjugate_closed_form=conj,
            m1=m1, m2=m2,
            delta2_claim="yes", delta2_conjugate_claim="yes",
            smoothness="piecewise", interfaces=(0.5,),
        )

    if name == "exp":
        alpha = params[0] if params else 1.0

        def m_rad(t, alpha=alpha):
            t = np.abs(t)
            return np.expm1(alpha * t) - alpha * t

        def m_conj(s, alpha=alpha):
            s = np.abs(s)
            u = np.log1p(s / alpha)
            return (s / alpha + 1.0) * u - s / alpha

        rad = RadialNFunction(eval=m_rad, conjugate_closed_form=m_conj)
        return NFunction(
            name=spec, dim=dim,
            eval=lambda y, xi: m_rad(_norm(xi)),
            conjugate_closed_form=lambda y, eta: m_conj(_norm(eta)),
            m1=rad, m2=rad,
            delta2_claim="no", delta2_conjugate_claim="yes",
            smoothness="smooth",
        )

    if name == "aniso":
        if dim != 2:
            raise ValueError("aniso entries are 2D quadratic forms")
        a11, a12, a22 = (params + [2.0, 0.5, 1.0])[:3]
        K = np.array([[a11, a12], [a12, a22]])
        evals = np.linalg.eigvalsh(K)
        if evals[0] <= 0:
            raise ValueError("aniso matrix must be positive definite")
        Kinv = np.linalg.inv(K)
        lo, hi = evals[0], evals[1]
        return NFunction(
            name=spec, dim=2,
            eval=lambda y, xi, K=K: 0.5 * np.einsum("...i,ij,...j->...", xi, K, xi),
            conjugate_closed_form=lambda y, eta, Ki=Kinv:
                0.5 * np.einsum("...i,ij,...j->...", eta, Ki, eta),
            m1=RadialNFunction(lambda t, lo=lo: lo * t ** 2 / 2,
                               lambda s, lo=lo: s ** 2 / (2 * lo)),
            m2=RadialNFunction(lambda t, hi=hi: hi * t ** 2 / 2,
                               lambda s, hi=hi: s ** 2 / (2 * hi)),
            delta2_claim="yes", delta2_conjugate_claim="yes",
            smoothness="smooth",
        )

    raise ValueError(f"unknown N-function {spec!r}")


def catalog_nfunctions():
    """Default instances of every catalog family (used by the check suites)."""
    return [
        make_nfunction("power:2"),
        make_nfunction("power:3"),
        make_nfunction("quad:1,3"),
        make_nfunction("plaplace:3,1,16"),
        make_nfunction("varexp:2,3"),
        make_nfunction("checkerboard:2,3"),
        make_nfunction("exp:1"),
        make_nfunction("aniso:2,0.5,1", dim=2),
    ]
