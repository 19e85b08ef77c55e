"""Catalog of strictly monotone vector fields A(y, xi) with convex
potentials, pointwise inversion B = A^{-1}, and sampling-based contract
checks (monotonicity, coercivity against the associated N-function).

Every catalog entry is the gradient of an explicit convex potential, which
makes the Young inequality an equality along eta = A(y, xi) and pins the
coercivity constant at 1 for these entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .nfunc import NFunction, make_nfunction, _as_points, _sample_points

__all__ = [
    "MonotoneOperator",
    "InversionError",
    "eval_A",
    "invert_A",
    "check_monotone",
    "estimate_coercivity",
    "make_operator",
    "catalog_operators",
]

_JAC_REG = 1e-8   # gradient regularization near the p-Laplacian singularity
_FD_STEP = 1e-6


class InversionError(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


@dataclass
class MonotoneOperator:
    name: str
    dim: int
    eval: Callable                      # (y (m,d), xi (m,d)) -> (m,d)
    nfunction: NFunction
    potential: Optional[Callable] = None    # Phi(y, xi), A = grad_xi Phi
    jacobian: Optional[Callable] = None     # (y, xi) -> (m,d,d)
    periodic: bool = True
    coercivity_c: Optional[float] = None
    interfaces: tuple = ()
    invert_closed: Optional[Callable] = None   # (y, zeta) -> xi, used as init

    def __call__(self, y, xi):
        return eval_A(self, y, xi)

    def jac(self, y, xi):
        """Jacobian dA/dxi, analytic where available, else central
        differences with step 1e-6 (1+|xi|)."""
        y, xi = _as_points(y, xi, self.dim)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(y, xi))
        m, d = xi.shape
        J = np.empty((m, d, d))
        h = _FD_STEP * (1.0 + np.linalg.norm(xi, axis=-1))
        for k in range(d):
            e = np.zeros(d)
            e[k] = 1.0
            step = h[:, None] * e
            J[:, :, k] = (eval_A(self, y, xi + step)
                          - eval_A(self, y, xi - step)) / (2 * h[:, None])
        return J


def eval_A(op: MonotoneOperator, y, xi):
    y, xi = _as_points(y, xi, op.dim)
    out = np.asarray(op.eval(y, xi))
    if np.any(np.isnan(out)):
        raise ValueError(f"NaN from operator {op.name}")
    return out


def invert_A(op: MonotoneOperator, y, zeta, tol_rel=1e-10, max_newton=60,
             max_backtracks=40):
    """Pointwise inverse: xi with A(y, xi) = zeta, by damped Newton on the
    residual, warm-started from the closed-form radial inverse when the
    catalog provides one."""
    y = np.asarray(y, dtype=float).reshape(1, op.dim)
    zeta = np.asarray(zeta, dtype=float).reshape(op.dim)
    tol = tol_rel * (1.0 + np.linalg.norm(zeta))
    if op.invert_closed is not None:
        xi = np.asarray(op.invert_closed(y, zeta.reshape(1, op.dim))).reshape(op.dim)
    else:
        xi = zeta.copy()

    def res(x):
        return eval_A(op, y, x.reshape(1, op.dim)).reshape(op.dim) - zeta

    r = res(xi)
    for _ in range(max_newton):
        nr = np.linalg.norm(r)
        if nr <= tol:
            return xi
        J = op.jac(y, xi.reshape(1, op.dim))[0]
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = -r
        t = 1.0
        for _ in range(max_backtracks):
            cand = xi + t * step
            rc = res(cand)
            if np.linalg.norm(rc) < nr:
                xi, r = cand, rc
                break
            t /= 2.0
        else:
            raise InversionError(
                f"Newton stagnation inverting {op.name} at zeta={zeta}",
                residual=float(nr),
            )
    raise InversionError(
        f"inversion of {op.name} did not converge (residual {np.linalg.norm(r)})",
        residual=float(np.linalg.norm(r)),
    )


@dataclass
class MonotonicityReport:
    min_pairing: float
    violations: list
    samples: int = 0


def check_monotone(op: MonotoneOperator, sample_count=10_000, rng_seed=0):
    """Sampled strict monotonicity: (A(y,xi) - A(y,eta)) . (xi - eta) > 0."""
    rng = np.random.default_rng(rng_seed)
    y = rng.uniform(0.0, 1.0, size=(sample_count, op.dim))
    xi = _sample_points(rng, sample_count, op.dim, r_lo=1e-3, r_hi=5.0)
    eta = _sample_points(rng, sample_count, op.dim, r_lo=1e-3, r_hi=5.0)
    same = np.linalg.norm(xi - eta, axis=1) < 1e-12
    eta[same] += 1.0
    pairing = np.einsum(
        "ij,ij->i", eval_A(op, y, xi) - eval_A(op, y, eta), xi - eta
    )
    bad = np.where(pairing <= 0.0)[0]
    violations = [
        (y[i].tolist(), xi[i].tolist(), eta[i].tolist(), float(pairing[i]))
        for i in bad
    ]
    return MonotonicityReport(min_pairing=float(pairing.min()),
                              violations=violations, samples=sample_count)


def estimate_coercivity(op: MonotoneOperator, sample_count=2000, rng_seed=0):
    """Empirical coercivity constant: the sampled infimum of
    A(y,xi).xi / (M(y,xi) + M*(y,A(y,xi))), clamped to (0, 1]."""
    nf = op.nfunction
    if nf is None:
        raise ValueError("operator carries no N-function")
    rng = np.random.default_rng(rng_seed)
    y = rng.uniform(0.0, 1.0, size=(sample_count, op.dim))
    xi = _sample_points(rng, sample_count, op.dim, r_lo=1e-2, r_hi=5.0)
    keep = np.linalg.norm(xi, axis=1) > 0
    y, xi = y[keep], xi[keep]
    a = eval_A(op, y, xi)
    num = np.einsum("ij,ij->i", a, xi)
    den = nf(y, xi) + nf.conjugate(y, a)
    ok = den > 0
    c = float(np.min(num[ok] / den[ok]))
    return min(max(c, np.finfo(float).tiny), 1.0)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _norm(xi):
    return np.linalg.norm(xi, axis=-1)


def _radial_jacobian(rho, drho_dt):
    """Jacobian of xi -> rho(|xi|) xi: rho I + (rho'/t) xi xi^T."""
    def jac(y, xi, t_floor=1e-14):
        t = _norm(xi)
        m, d = xi.shape
        r = rho(y, t)
        J = r[:, None, None] * np.eye(d)[None]
        ts = np.maximum(t, t_floor)
        coef = drho_dt(y, t) / ts
        J += coef[:, None, None] * xi[:, :, None] * xi[:, None, :]
        return J
    return jac


def make_operator(spec: str, dim: int = 1) -> MonotoneOperator:
    """Catalog operators by name string:

    - ``linear:a1,a2``      laminate a(y) xi
    - ``plaplace:p,a1,a2``  a(y) |xi|^{p-2} xi
    - ``varexp:p1,p2``      |xi|^{p(y)-2} xi, smooth periodic exponent
    - ``exp:alpha``         radial gradient of exp-growth potential
    - ``aniso:a11,a12,a22`` constant SPD matrix (2D)
    - ``nonmonotone``       negative-control fixture, violates monotonicity
    """
    name, _, args = spec.partition(":")
    params = [float(x) for x in args.split(",")] if args else []

    if name == "linear":
        a1, a2 = (params + [1.0, 3.0])[:2]
        nf = make_nfunction(f"quad:{a1},{a2}", dim=dim)

        def a_of(y):
            y1 = np.mod(np.asarray(y)[..., 0], 1.0)
            return np.where(y1 < 0.5, a1, a2)

        return MonotoneOperator(
            name=spec, dim=dim,
            eval=lambda y, xi: a_of(y)[:, None] * xi,
            potential=lambda y, xi: a_of(y) * _norm(xi) ** 2 / 2.0,
            jacobian=lambda y, xi: a_of(y)[:, None, None] * np.eye(dim)[None],
            nfunction=nf,
            coercivity_c=1.0,
            interfaces=(0.5,) if a1 != a2 else (),
            invert_closed=lambda y, z: z / a_of(y)[:, None],
        )

    if name == "plaplace":
        p, a1, a2 = (params + [3.0, 1.0, 1.0])[:3]
        nf = make_nfunction(f"plaplace:{p},{a1},{a2}", dim=dim)

        def a_of(y):
            y1 = np.mod(np.asarray(y)[..., 0], 1.0)
            return np.where(y1 < 0.5, a1, a2)

        def rho(y, t):
            # regularized for p < 2 and for the Jacobian near t = 0
            return a_of(y) * (t ** 2 + _JAC_REG ** 2) ** ((p - 2.0) / 2.0)

        def ev(y, xi):
            t = _norm(xi)
            with np.errstate(invalid="ignore"):
                r = a_of(y) * np.where(t > 0, t, 1.0) ** (p - 2.0)
            r = np.where(t > 0, r, 0.0 if p > 2 else a_of(y))
            return r[:, None] * xi

        def drho(y, t):
            return a_of(y) * (p - 2.0) * t * (t ** 2 + _JAC_REG ** 2) ** ((p - 4.0) / 2.0)

        def inv(y, z):
            s = _norm(z)
            a = a_of(y)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (s / a) ** (1.0 / (p - 1.0))
                out = np.where(s[:, None] > 0, t[:, None] * z / s[:, None], 0.0)
            return out

        return MonotoneOperator(
            name=spec, dim=dim, eval=ev,
            potential=lambda y, xi: a_of(y) * _norm(xi) ** p / p,
            jacobian=_radial_jacobian(rho, drho),
            nfunction=nf,
            coercivity_c=1.0,
            interfaces=(0.5,) if a1 != a2 else (),
            invert_closed=inv,
        )

    if name == "varexp":
        p1, p2 = (params + [2.0, 3.0])[:2]
        nf = make_nfunction(f"varexp:{p1},{p2}", dim=dim)
        pmid, pamp = (p1 + p2) / 2.0, (p2 - p1) / 2.0

        def pexp(y):
            return pmid + pamp * np.sin(2 * np.pi * np.asarray(y)[..., 0])

        def ev(y, xi):
            t = _norm(xi)
            p = pexp(y)
            with np.errstate(invalid="ignore", divide="ignore"):
                r = np.where(t > 0, t, 1.0) ** (p - 2.0)
            r = np.where(t > 0, r, np.where(p > 2, 0.0, 1.0))
            return r[:, None] * xi

        def rho(y, t):
            return (t ** 2 + _JAC_REG ** 2) ** ((pexp(y) - 2.0) / 2.0)

        def drho(y, t):
            p = pexp(y)
            return (p - 2.0) * t * (t ** 2 + _JAC_REG ** 2) ** ((p - 4.0) / 2.0)

        def inv(y, z):
            s = _norm(z)
            p = pexp(y)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = s ** (1.0 / (p - 1.0))
                out = np.where(s[:, None] > 0, t[:, None] * z / s[:, None], 0.0)
            return out

        def pot(y, xi):
            p = pexp(y)
            return _norm(xi) ** p / p

        return MonotoneOperator(
            name=spec, dim=dim, eval=ev, potential=pot,
            jacobian=_radial_jacobian(rho, drho),
            nfunction=nf, coercivity_c=1.0, invert_closed=inv,
        )

    if name == "exp":
        alpha = params[0] if params else 1.0
        nf = make_nfunction(f"exp:{alpha}", dim=dim)

        def rho(y, t):
            # alpha (e^{alpha t} - 1) / t, extended continuously by alpha^2
            t = np.asarray(t)
            small = t < 1e-12
            ts = np.where(small, 1.0, t)
            with np.errstate(over="ignore"):
                return np.where(small, alpha ** 2,
                                alpha * np.expm1(alpha * ts) / ts)

        def drho(y, t):
            t = np.asarray(t)
            small = t < 1e-8
            ts = np.where(small, 1.0, t)
            full = alpha * (alpha * np.exp(alpha * ts) * ts - np.expm1(alpha * ts)) / ts ** 2
            return np.where(small, alpha ** 3 / 2.0, full)

        def inv(y, z):
            s = _norm(z)
            t = np.log1p(s / alpha) / alpha
            with np.errstate(invalid="ignore"):
                out = np.where(s[:, None] > 0, t[:, None] * z / np.where(s[:, None] > 0, s[:, None], 1.0), 0.0)
            return out

        return MonotoneOperator(
            name=spec, dim=dim,
            eval=lambda y, xi: rho(y, _norm(xi))[:, None] * xi,
            potential=lambda y, xi: np.expm1(alpha * _norm(xi)) - alpha * _norm(xi),
            jacobian=_radial_jacobian(rho, drho),
            nfunction=nf, coercivity_c=1.0, invert_closed=inv,
        )

    if name == "aniso":
        if dim != 2:
            raise ValueError("aniso operators are 2D")
        a11, a12, a22 = (params + [2.0, 0.5, 1.0])[:3]
        K = np.array([[a11, a12], [a12, a22]])
        Kinv = np.linalg.inv(K)
        nf = make_nfunction(f"aniso:{a11},{a12},{a22}", dim=2)
        return MonotoneOperator(
            name=spec, dim=2,
            eval=lambda y, xi: xi @ K.T,
            potential=lambda y, xi: 0.5 * np.einsum("...i,ij,...j->...", xi, K, xi),
            jacobian=lambda y, xi: np.broadcast_to(K, (len(xi), 2, 2)).copy(),
            nfunction=nf, coercivity_c=1.0,
            invert_closed=lambda y, z: z @ Kinv.T,
        )

    if name == "nonmonotone":
        # negative-control fixture: the radial profile t (1 - 1.2 e^{-t^2})
        # decreases near t = 0, so monotonicity fails on purpose.
        nf = make_nfunction("power:2", dim=dim)

        def rho(y, t):
            return 1.0 - 1.2 * np.exp(-np.asarray(t) ** 2)

        return MonotoneOperator(
            name=spec, dim=dim,
            eval=lambda y, xi: rho(y, _norm(xi))[:, None] * xi,
            nfunction=nf,
        )

    raise ValueError(f"unknown operator {spec!r}")


def catalog_operators(include_2d=True):
    """Default instance of every (monotone) catalog family."""
    ops = [
        make_operator("linear:1,3"),
        make_operator("plaplace:3,1,16"),
        make_operator("varexp:2,3"),
        make_operator("exp:1"),
    ]
    if include_2d:
        ops.append(make_operator("aniso:2,0.5,1", dim=2))
    return ops
