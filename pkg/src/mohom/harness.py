"""Experiment orchestration: scale sweeps for the fine-to-effective
convergence study, aggregated invariant checks, and CSV emission.

Config files are flat sectioned key=value text ([problem], [mesh],
[solver], [sweep], [table], [output]); see the repository README for the
schema and the fixed CSV column sets.
"""

from __future__ import annotations

import configparser
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cell as cellmod
from . import fem, msolve, nfunc, opcat, unfold

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "SweepReport",
    "load_config",
    "make_F",
    "run_sweep",
    "run_checks",
    "worker_count",
    "WEAK_TEST_BATTERY",
]


class ConfigError(ValueError):
    pass


SWEEP_HEADER = [
    "eps", "h", "newton_iterations", "final_residual",
    "modular_grad", "modular_flux", "weak_err", "l1_err",
    "corrector_mismatch", "status",
]

DIAG_HEADER = ["eps", "quantity", "value", "gap"]


def _bump(c, wdt):
    def f(x):
        t = (np.asarray(x) - c) / wdt
        out = np.zeros_like(t)
        inside = np.abs(t) < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out
    return f


# Fixed battery of 8 smooth test functions for the weak-error metric:
# sine modes and compactly supported bump profiles.
WEAK_TEST_BATTERY = [
    lambda x: np.sin(1 * np.pi * np.asarray(x)),
    lambda x: np.sin(2 * np.pi * np.asarray(x)),
    lambda x: np.sin(3 * np.pi * np.asarray(x)),
    lambda x: np.sin(4 * np.pi * np.asarray(x)),
    _bump(0.5, 0.5),
    _bump(0.3, 0.25),
    _bump(0.7, 0.25),
    _bump(0.5, 0.25),
]


@dataclass
class ExperimentConfig:
    dim: int = 1
    operator: str = "linear:1,3"
    F_spec: str = "linear"
    r: int = 32                       # fine mesh rule h = eps / r
    cell_n: int = 64
    ref_n: int = 1024                 # homogenized reference mesh
    settings: msolve.SolverSettings = field(default_factory=msolve.SolverSettings)
    eps_list: tuple = (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))
    xi_min: float = -3.0
    xi_max: float = 3.0
    xi_n: int = 13
    out_dir: str = "out"
    seed: int = 1234
    nested: bool = False
    probes: tuple = (0.15, 0.35, 0.55, 0.75, 0.9)

    def validate(self):
        if self.dim != 1:
            raise ConfigError("sweeps are implemented for dim = 1")
        if self.r < 2:
            raise ConfigError("mesh rule requires r >= 2")
        eps = [Fraction(e) for e in self.eps_list]
        self.eps_list = tuple(eps)
        if any(e.numerator != 1 for e in eps):
            raise ConfigError("eps values must be reciprocals of integers")
        if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
            raise ConfigError("eps list must be strictly decreasing")
        if self.xi_n < 2 or self.xi_min >= self.xi_max:
            raise ConfigError("invalid xi grid")
        opcat.make_operator(self.operator, dim=self.dim)  # name must resolve
        make_F(self.F_spec)
        return self


def _parse_fraction(tok):
    tok = tok.strip()
    if "/" in tok:
        num, den = tok.split("/")
        return Fraction(int(num), int(den))
    return Fraction(tok)


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config {path}")
    cfg = ExperimentConfig()
    try:
        p = cp["problem"] if cp.has_section("problem") else {}
        cfg.dim = int(p.get("dim", cfg.dim))
        cfg.operator = p.get("operator", cfg.operator)
        cfg.F_spec = p.get("f", p.get("F", cfg.F_spec))
        m = cp["mesh"] if cp.has_section("mesh") else {}
        cfg.r = int(m.get("r", cfg.r))
        cfg.cell_n = int(m.get("cell_n", cfg.cell_n))
        cfg.ref_n = int(m.get("ref_n", cfg.ref_n))
        s = cp["solver"] if cp.has_section("solver") else {}
        cfg.settings = msolve.SolverSettings(
            residual_tol=float(s.get("residual_tol", 1e-10)),
            max_newton=int(s.get("max_newton", 50)),
            max_backtracks=int(s.get("max_backtracks", 40)),
            jacobian_mode=s.get("jacobian_mode", "analytic"),
        )
        sw = cp["sweep"] if cp.has_section("sweep") else {}
        if "eps" in sw:
            cfg.eps_list = tuple(
                _parse_fraction(t) for t in sw["eps"].split(",")
            )
        t = cp["table"] if cp.has_section("table") else {}
        cfg.xi_min = float(t.get("xi_min", cfg.xi_min))
        cfg.xi_max = float(t.get("xi_max", cfg.xi_max))
        cfg.xi_n = int(t.get("xi_n", cfg.xi_n))
        o = cp["output"] if cp.has_section("output") else {}
        cfg.out_dir = o.get("dir", cfg.out_dir)
        cfg.seed = int(o.get("seed", cfg.seed))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return cfg.validate()


def make_F(spec: str):
    """Right-hand-side flux from its config name: zero, const:c, linear,
    table:<csv of x,value rows>.  Must be essentially bounded."""
    name, _, arg = spec.partition(":")
    if name == "zero":
        return None
    if name == "const":
        c = float(arg or 1.0)
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    if name == "linear":
        return lambda x: np.asarray(x, dtype=float)
    if name == "table":
        data = np.loadtxt(arg, delimiter=",")
        xs, vs = data[:, 0], data[:, 1]
        return lambda x: np.interp(np.asarray(x)[..., 0]
                                   if np.asarray(x).ndim > 1 else np.asarray(x),
                                   xs, vs)
    raise ConfigError(f"unknown F spec {spec!r}")


def worker_count():
    env = os.environ.get("MOHOM_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class SweepRow:
    eps: Fraction
    h: float
    newton_iterations: int = 0
    final_residual: float = np.nan
    modular_bounds: tuple = (np.nan, np.nan)
    weak_err: float = np.nan
    l1_err: float = np.nan
    corrector_mismatch: float = np.nan
    status: str = "ok"


@dataclass
class SweepReport:
    rows: list
    table: cellmod.HomogTable
    hom_result: msolve.SolveResult
    hom_meta: dict

    def to_csv(self, path):
        lines = [",".join(SWEEP_HEADER)]
        for r in self.rows:
            lines.append(",".join([
                f"{float(r.eps):.17g}",
                f"{r.h:.17g}",
                str(r.newton_iterations),
                f"{r.final_residual:.17g}",
                f"{r.modular_bounds[0]:.17g}",
                f"{r.modular_bounds[1]:.17g}",
                f"{r.weak_err:.17g}",
                f"{r.l1_err:.17g}",
                f"{r.corrector_mismatch:.17g}",
                r.status,
            ]))
        Path(path).write_text("\n".join(lines) + "\n")


def _field_on_points(fld: fem.DiscreteField, x):
    return fld(x)


def _errors_vs_hom(u_eps, u_hom, order=3):
    mesh = u_eps.mesh
    pts, w = mesh.quadrature(order)
    nc, nq, _ = pts.shape
    x = pts.reshape(-1)
    diff = u_eps(x) - u_hom(x)
    wq = np.repeat(mesh.volumes, nq) * np.tile(w, nc)
    l1 = float(np.dot(wq, np.abs(diff)))
    weak = max(
        abs(float(np.dot(wq, diff * np.asarray(phi(x)))))
        for phi in WEAK_TEST_BATTERY
    )
    return weak, l1


def run_sweep(cfg: ExperimentConfig, table=None) -> SweepReport:
    """Tabulate the effective operator, solve the effective problem once,
    then solve the fine-scale problem per scale and record error metrics
    and corrector diagnostics."""
    cfg.validate()
    op = opcat.make_operator(cfg.operator, dim=cfg.dim)
    F = make_F(cfg.F_spec)
    cell_mesh = fem.build_mesh(1, cfg.cell_n, "periodic",
                               interfaces=op.interfaces)
    if table is None:
        xi_axis = np.linspace(cfg.xi_min, cfg.xi_max, cfg.xi_n)
        table = cellmod.tabulate_Ahat(op, cell_mesh, xi_axis, cfg.settings)

    if cfg.nested:
        hom_op = _NestedOperator(op, cell_mesh, cfg.settings)
    else:
        hom_op = cellmod.TableOperator1D(table)
    ref_mesh = fem.build_mesh(1, cfg.ref_n, "dirichlet_zero")
    hom = msolve.solve_dirichlet(hom_op, None, ref_mesh, F, eps=None,
                                 settings=cfg.settings)

    nf = op.nfunction
    rows = []
    for eps in cfg.eps_list:
        k = int(Fraction(eps).denominator)
        n = k * cfg.r
        row = SweepRow(eps=Fraction(eps), h=1.0 / n)
        try:
            mesh = fem.build_mesh(1, n, "dirichlet_zero")
            res = msolve.solve_dirichlet(op, nf, mesh, F, eps=float(eps),
                                         settings=cfg.settings)
            row.newton_iterations = res.iterations
            row.final_residual = res.final_residual
            row.modular_bounds = res.modular_bounds
            row.weak_err, row.l1_err = _errors_vs_hom(res.u, hom.u)
            probes = unfold.corrector_identification(
                res.u, hom.u, op, float(eps), cfg.probes, cfg.settings)
            row.corrector_mismatch = max(p.mismatch for p in probes)
        except (msolve.SolveError, fem.MeshError) as exc:
            row.status = f"failed: {exc}"
        rows.append(row)
    return SweepReport(rows=rows, table=table, hom_result=hom,
                       hom_meta={"ref_n": cfg.ref_n, "xi_n": cfg.xi_n,
                                 "cell_n": cfg.cell_n, "nested": cfg.nested})


class _NestedOperator:
    """Exact nested evaluation of the effective operator (one cell solve
    per query); validates the interpolation error of the table route."""

    dim = 1
    nfunction = None
    name = "nested"

    def __init__(self, op, cell_mesh, settings):
        self.op = op
        self.cell_mesh = cell_mesh
        self.settings = settings
        self._cache = {}

    def _ahat(self, xi):
        key = round(float(xi), 14)
        if key not in self._cache:
            sol = cellmod.solve_cell(self.op, self.cell_mesh, [xi],
                                     self.settings)
            self._cache[key] = float(sol.Ahat[0])
        return self._cache[key]

    def __call__(self, y, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.array([[self._ahat(v)] for v in xi[:, 0]])

    eval = __call__

    def jac(self, y, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        h = 1e-5
        out = np.array(
            [[[(self._ahat(v + h) - self._ahat(v - h)) / (2 * h)]]
             for v in xi[:, 0]]
        )
        return out


# ---------------------------------------------------------------------------
# aggregated invariant checks
# ---------------------------------------------------------------------------

def truncation_battery(levels=(1, 2, 4, 8), n=512, amplitude=24.0,
                       exponent=0.6):
    """Modular of grad(T_k v) - grad v for the documented steep-gradient
    fixture v(x) = amplitude * (x (1-x))^exponent, over increasing
    truncation levels k; the sequence must decrease monotonically."""
    mesh = fem.build_mesh(1, n, "dirichlet_zero")
    nfn = nfunc.make_nfunction("power:2")
    x = mesh.vertices[:, 0]
    v_full = amplitude * (x * (1.0 - x)) ** exponent
    free = mesh.free_of_node >= 0
    v = fem.DiscreteField(mesh, v_full[free])
    grads_v = fem.gradient_at_quadrature(v)
    out = []
    for k in levels:
        tk = np.clip(v_full, -k, k)
        tkf = fem.DiscreteField(mesh, tk[free])
        diff = fem.gradient_at_quadrature(tkf) - grads_v
        out.append(float(np.dot(mesh.volumes, diff[:, 0] ** 2)))
    return list(levels), out


def run_checks(cfg: ExperimentConfig = None, seed=None, fast=True,
               operator_override=None):
    """Run the module property batteries with the config seed; returns
    (report dict, ok flag).  ``operator_override`` lets a negative-control
    fixture exercise the failure path."""
    cfg = cfg or ExperimentConfig()
    seed = cfg.seed if seed is None else seed
    n_samp = 2000 if fast else 10_000
    report = {}
    ok = True

    for nfn in nfunc.catalog_nfunctions():
        rep = nfunc.check_young(nfn, sample_count=n_samp, rng_seed=seed)
        key = f"young[{nfn.name}]"
        passed = not rep.violations and (
            nfn.smoothness != "smooth" or rep.max_gap_at_conjugate_pair <= 1e-8
        )
        report[key] = {"violations": len(rep.violations),
                       "max_gap": rep.max_gap_at_conjugate_pair,
                       "ok": passed}
        ok &= passed

    if operator_override is not None:
        ops = [opcat.make_operator(operator_override)]
    else:
        ops = opcat.catalog_operators()
    for op in ops:
        rep = opcat.check_monotone(op, sample_count=n_samp, rng_seed=seed)
        passed = not rep.violations
        report[f"monotone[{op.name}]"] = {
            "min_pairing": rep.min_pairing, "ok": passed}
        ok &= passed
        c = opcat.estimate_coercivity(op, sample_count=min(n_samp, 2000),
                                      rng_seed=seed)
        passed = 0.0 < c <= 1.0
        report[f"coercivity[{op.name}]"] = {"c": c, "ok": passed}
        ok &= passed

    # effective operator vanishes at zero loading for every catalog entry
    for op in ops:
        mesh_c = fem.build_mesh(op.dim, 16 if op.dim == 1 else 4, "periodic",
                                interfaces=op.interfaces)
        sol = cellmod.solve_cell(op, mesh_c, np.zeros(op.dim), cfg.settings)
        passed = float(np.linalg.norm(sol.Ahat)) <= 1e-9
        report[f"ahat_zero[{op.name}]"] = {
            "norm": float(np.linalg.norm(sol.Ahat)), "ok": passed}
        ok &= passed

    rng = np.random.default_rng(seed)
    pts = rng.uniform(-10, 10, size=1000)
    for e in (0.5, 1.0 / 3.0):
        N, R = unfold.floor_decompose(pts, e)
        recon = e * (N + R)
        passed = bool(np.max(np.abs(recon - pts)) < 1e-12 * 10)
        report[f"unfold_decomp[eps={e:.4g}]"] = {"ok": passed}
        ok &= passed

    rep = unfold.check_unfolding_identity(
        lambda x, y: x * (y < 0.5), eps=1.0 / 3.0, y_interfaces=(0.5,))
    passed = rep.gap < 1e-10
    report["unfold_identity"] = {"gap": rep.gap, "ok": passed}
    ok &= passed

    levels, mods = truncation_battery()
    passed = all(a > b for a, b in zip(mods, mods[1:]))
    report["truncation_modular"] = {"levels": levels, "modulars": mods,
                                    "ok": passed}
    ok &= passed

    return report, bool(ok)
