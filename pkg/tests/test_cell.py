import time

import numpy as np
import pytest

from mohom import cell, fem, msolve, nfunc, opcat

ST = msolve.SolverSettings()


def _mesh(op, n=256):
    return fem.build_mesh(1, n, "periodic", interfaces=op.interfaces)


def test_constant_coefficient_identity_corrector():
    op = opcat.make_operator("linear:2,2")
    sol = cell.solve_cell(op, _mesh(op, 32), [1.5], ST)
    assert np.max(np.abs(sol.w.coeffs)) < 1e-12
    assert np.isclose(sol.Ahat[0], 3.0)


def test_harmonic_mean_laminate():
    op = opcat.make_operator("linear:1,3")
    mesh = _mesh(op)
    for xi in (-2.0, 1.0, 3.0):
        sol = cell.solve_cell(op, mesh, [xi], ST)
        assert abs(sol.Ahat[0] - 1.5 * xi) <= 1e-3 * abs(xi)
        assert sol.orthogonality <= 10 * ST.residual_tol * (1 + abs(xi))


def test_plaplace_flux_constancy():
    op = opcat.make_operator("plaplace:3,1,16")
    sol = cell.solve_cell(op, _mesh(op), [1.0], ST)
    assert abs(sol.Ahat[0] - 2.56) <= 5e-3


def test_ahat_zero_catalog():
    for op in opcat.catalog_operators():
        n = 64 if op.dim == 1 else 8
        mesh = fem.build_mesh(op.dim, n, "periodic", interfaces=op.interfaces)
        sol = cell.solve_cell(op, mesh, np.zeros(op.dim), ST)
        assert np.linalg.norm(sol.Ahat) <= 1e-9, op.name


def test_table_roundtrip_bit_exact(tmp_path):
    op = opcat.make_operator("linear:1,3")
    table = cell.tabulate_Ahat(op, _mesh(op, 64), np.linspace(-2, 2, 9), ST)
    p = tmp_path / "table.csv"
    cell.save_table(table, p)
    back = cell.load_table(p)
    assert np.array_equal(back.values, table.values)
    assert np.array_equal(back.axes[0], table.axes[0])


def test_interp_matches_cell_solve():
    op = opcat.make_operator("plaplace:3,1,16")
    mesh = _mesh(op, 128)
    table = cell.tabulate_Ahat(op, mesh, np.linspace(-2, 2, 81), ST)
    xi = 0.73
    exact = cell.solve_cell(op, mesh, [xi], ST).Ahat[0]
    approx = cell.interp_Ahat(table, xi)
    assert abs(approx - exact) < 5e-3
    with pytest.raises(ValueError):
        cell.interp_Ahat(table, 5.0)


def test_effective_density_laminate():
    op = opcat.make_operator("linear:1,3")
    mesh = _mesh(op)
    # f(xi) = xi^2 * harm_mean / 2 = 0.75 xi^2 for the a in {1,3} laminate
    for xi in (0.5, 1.0, 2.0):
        assert abs(cell.eval_f(op, mesh, [xi], ST) - 0.75 * xi ** 2) < 1e-6


def test_duality_closure_laminate():
    op = opcat.make_operator("linear:1,3")
    nf = nfunc.make_nfunction("quad:1,3")
    mesh = _mesh(op)
    # h*(s) = s^2 mean(1/a)/2 = s^2/3; f* must agree
    hstar = cell.eval_hstar(nf, [1.0], mesh)
    assert abs(hstar - 1.0 / 3.0) <= 1e-3
    fstar = cell.legendre_1d(lambda s: cell.eval_f(op, mesh, [s], ST), 1.0, 2.0)
    assert abs(fstar - 1.0 / 3.0) <= 1e-3
    assert abs(fstar - hstar) <= 1e-3


def test_hstar_2d_not_implemented():
    nf = nfunc.make_nfunction("aniso:2,0.5,1", dim=2)
    mesh = fem.build_mesh(2, 4, "periodic")
    with pytest.raises(NotImplementedError):
        cell.eval_hstar(nf, [1.0, 0.0], mesh)


def test_structure_report():
    op = opcat.make_operator("linear:1,3")
    mesh = _mesh(op, 128)
    table = cell.tabulate_Ahat(op, mesh, np.linspace(-2, 2, 17), ST)
    rep = cell.check_Ahat_structure(table, op, op.nfunction, cell_mesh=mesh,
                                    settings=ST)
    assert rep.monotone
    assert rep.min_pairing > 0
    assert rep.coercive


def test_table_operator_1d():
    op = opcat.make_operator("linear:1,3")
    table = cell.tabulate_Ahat(op, _mesh(op, 64), np.linspace(-3, 3, 25), ST)
    top = cell.TableOperator1D(table)
    xi = np.array([[0.4], [-1.2]])
    vals = top(np.zeros((2, 1)), xi)
    assert np.allclose(vals[:, 0], 1.5 * xi[:, 0], atol=1e-9)
    J = top.jac(np.zeros((2, 1)), xi)
    assert np.allclose(J[:, 0, 0], 1.5, atol=1e-9)


def test_aniso_2d_diagonalizes():
    # constant-in-y quadratic operator: corrector vanishes, Ahat = K xi
    op = opcat.make_operator("aniso:2,0.5,1", dim=2)
    mesh = fem.build_mesh(2, 8, "periodic")
    xi = np.array([1.0, -0.5])
    sol = cell.solve_cell(op, mesh, xi, ST)
    K = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert np.allclose(sol.Ahat, K @ xi, atol=1e-9)


def test_runtime_budget_cell_solve():
    op = opcat.make_operator("linear:1,3")
    mesh = _mesh(op)
    t0 = time.time()
    cell.solve_cell(op, mesh, [1.0], ST)
    assert time.time() - t0 < 1.0
