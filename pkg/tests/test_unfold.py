import numpy as np
import pytest

from mohom import fem, msolve, opcat, unfold


def test_floor_decompose_roundtrip():
    rng = np.random.default_rng(0)
    x = rng.uniform(-20, 20, size=500)
    for eps in (0.5, 1 / 3, 0.2):
        N, R = unfold.floor_decompose(x, eps)
        assert np.all(R >= 0) and np.all(R < 1)
        assert np.allclose(eps * (N + R), x, atol=1e-12)
        back = unfold.compose(eps * N / eps * 0, R, eps)  # range check only
    with pytest.raises(ValueError):
        unfold.compose(0.0, 1.5, 0.5)


def test_unfolding_identity_battery():
    integrands = [
        (lambda x, y: np.ones_like(np.asarray(x) * np.asarray(y)), ()),
        (lambda x, y: np.sin(2 * np.pi * np.asarray(y))
            + 0 * np.asarray(x), ()),
        (lambda x, y: np.asarray(x) * (np.asarray(y) < 0.5), (0.5,)),
        (lambda x, y: np.asarray(x) ** 2 * np.cos(2 * np.pi * np.asarray(y)), ()),
        (lambda x, y: (1 + np.asarray(x)) * (np.asarray(y) - 0.5) ** 2, ()),
    ]
    for eps in (1 / 3, 1 / 5):
        for g, itf in integrands:
            rep = unfold.check_unfolding_identity(g, eps=eps, y_interfaces=itf)
            assert rep.gap <= 1e-6
            assert rep.aligned


def test_weak_pairing_constant_in_y():
    # chi = 1: pairing reduces to int v phi
    v = lambda x: np.asarray(x)
    phi = lambda x: np.sin(np.pi * np.asarray(x))
    chi = lambda y: np.ones_like(np.asarray(y))
    val = unfold.weak_two_scale_pairing(v, (phi, chi), eps=0.25)
    exact = 1.0 / np.pi  # int_0^1 x sin(pi x) dx
    assert abs(val - exact) < 1e-6


def test_weak_pairing_mean_zero_oscillation():
    # v smooth, chi mean-zero: pairing is O(eps)
    v = lambda x: np.asarray(x) ** 2
    phi = lambda x: np.ones_like(np.asarray(x))
    chi = lambda y: np.sin(2 * np.pi * np.asarray(y))
    vals = [abs(unfold.weak_two_scale_pairing(v, (phi, chi), eps=e))
            for e in (1 / 4, 1 / 8, 1 / 16)]
    assert vals[0] > vals[1] > vals[2]


def test_corrector_identification_decreases():
    st = msolve.SolverSettings()
    op = opcat.make_operator("linear:1,3")
    F = lambda x: np.asarray(x, dtype=float).reshape(-1) \
        if np.asarray(x).ndim > 1 else np.asarray(x, dtype=float)

    def _F(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] if x.ndim > 1 else x

    ref = fem.build_mesh(1, 1024, "dirichlet_zero")
    from mohom import cell
    table = cell.tabulate_Ahat(op, fem.build_mesh(1, 64, "periodic",
                                                  interfaces=op.interfaces),
                               np.linspace(-3, 3, 25), st)
    hom = msolve.solve_dirichlet(cell.TableOperator1D(table), None, ref, _F,
                                 eps=None, settings=st)
    probes = (0.15, 0.35, 0.55, 0.75, 0.9)
    out = {}
    for eps_den in (16, 32):
        n = eps_den * 32
        mesh = fem.build_mesh(1, n, "dirichlet_zero")
        res = msolve.solve_dirichlet(op, op.nfunction, mesh, _F,
                                     eps=1.0 / eps_den, settings=st)
        out[eps_den] = unfold.corrector_identification(
            res.u, hom.u, op, 1.0 / eps_den, probes, st)
    for p16, p32 in zip(out[16], out[32]):
        assert p32.mismatch < p16.mismatch


def test_corrector_requires_commensurate_mesh():
    st = msolve.SolverSettings()
    op = opcat.make_operator("linear:1,3")
    mesh = fem.build_mesh(1, 100, "dirichlet_zero")
    u = fem.DiscreteField(mesh, np.zeros(mesh.n_free))
    with pytest.raises(ValueError):
        unfold.corrector_identification(u, u, op, 1.0 / 3.0, (0.5,), st)


from hypothesis import given, settings as hsettings
from hypothesis import strategies as st


@given(x=st.floats(-100, 100, allow_nan=False),
       k=st.integers(1, 64))
@hsettings(max_examples=200, deadline=None)
def test_floor_decompose_property(x, k):
    eps = 1.0 / k
    N, R = unfold.floor_decompose(np.array([x]), eps)
    assert 0.0 <= R[0] < 1.0
    assert abs(eps * (N[0] + R[0]) - x) <= 1e-10 * max(1.0, abs(x))


def test_two_scale_point():
    p = unfold.TwoScalePoint.decompose(np.array([0.7]), 0.5)
    assert np.allclose(p.composed(), 0.7)
    assert np.allclose(p.y, 0.4)
    q = unfold.TwoScalePoint(np.array([0.7]), np.array([0.3]), 0.5)
    assert np.isclose(q.composed()[0], 0.65)
    assert abs(q.composed()[0] - 0.7) <= 0.5
    with pytest.raises(ValueError):
        unfold.TwoScalePoint(np.array([0.7]), np.array([1.3]), 0.5)


def test_weak_pairing_oscillatory_limit():
    # v = cos(2 pi x/eps) against chi = cos(2 pi y): int_Y cos^2 = 1/2
    phi = lambda x: np.ones_like(np.asarray(x))
    chi = lambda y: np.cos(2 * np.pi * np.asarray(y))
    vals = []
    for k in (4, 8, 16):
        eps = 1.0 / k
        v = lambda x, e=eps: np.cos(2 * np.pi * np.asarray(x) / e)
        vals.append(unfold.weak_two_scale_pairing(v, (phi, chi), eps=eps,
                                                  n_per_cell=64))
    assert all(abs(v - 0.5) < 1e-3 for v in vals)
