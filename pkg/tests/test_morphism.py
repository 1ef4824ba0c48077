import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phmlab import morphism as M
from phmlab.catalog import catalog_lookup, flat_target
from phmlab.geometry import RiemannianChart
from phmlab.morphism import HermitianTarget, MapPoint, RankDropError, SmoothMap


@pytest.fixture(scope="module")
def scenarios():
    ids = ["flat_projection", "hopf", "sasakian_r3", "kenmotsu", "skewed_fibration", "shear", "composed_phm"]
    return {i: catalog_lookup(i, verify=False) for i in ids}


def _sample(s, n=20, seed=1):
    return s.sample(n, seed)


def test_shear_commutator_closed_form(scenarios):
    # dphi dphi* = [[2, 1], [1, 1]] against the rotation J gives sqrt(10)
    s = scenarios["shear"]
    np.testing.assert_allclose(M.phwc_defect(s.map, _sample(s)), np.sqrt(10))


def test_adjoint_identity(scenarios):
    rng = np.random.default_rng(0)
    for s in scenarios.values():
        X = _sample(s)
        dphi, adj = M.differential_and_adjoint(s.map, X)
        mp = MapPoint(s.map, X)
        v = rng.normal(size=(len(X), s.map.m))
        w = rng.normal(size=(len(X), s.map.k))
        lhs = np.einsum("ni,nij,nj->n", v, mp.geo.g.val, np.einsum("nia,na->ni", adj, w))
        rhs = np.einsum("na,nab,nb->n", np.einsum("nai,ni->na", dphi, v), mp.H.val, w)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-12)


def test_single_point_shapes(scenarios):
    s = scenarios["hopf"]
    x = s.source.center()
    dphi, adj = M.differential_and_adjoint(s.map, x)
    assert dphi.shape == (2, 3) and adj.shape == (3, 2)
    assert np.ndim(M.phwc_defect(s.map, x)) == 0
    assert M.tension_field(s.map, x).shape == (2,)


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_split_projectors(seed):
    s = catalog_lookup("hopf", verify=False)
    X = s.sample(3, seed)
    sp = M.split(s.map, X)
    P, Q = sp.P_H, sp.P_V
    eye = np.broadcast_to(np.eye(3), P.shape)
    np.testing.assert_allclose(P + Q, eye, atol=1e-12)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    g = s.source.metric_values(X)
    np.testing.assert_allclose(g @ P, np.swapaxes(g @ P, -1, -2), atol=1e-12)
    frame = np.stack(sp.horizontal + sp.vertical, -1)
    np.testing.assert_allclose(np.swapaxes(frame, -1, -2) @ g @ frame, eye, atol=1e-12)


def test_induced_f_structure(scenarios):
    for s in scenarios.values():
        X = _sample(s)
        F = M.induced_f_structure(s.map, X)
        np.testing.assert_allclose(F @ F @ F + F, 0, atol=1e-12)
        mp = MapPoint(s.map, X)
        rank = np.linalg.matrix_rank(F, tol=1e-8)
        assert np.all(rank == s.map.k)
        # F kills the vertical space
        for v in mp.frame_vals("v"):
            assert np.max(np.abs(np.einsum("nij,nj->ni", F, v))) < 1e-12


def test_f_intertwines_on_phwc_maps(scenarios):
    for key in ("flat_projection", "hopf", "sasakian_r3", "kenmotsu", "composed_phm"):
        mp = MapPoint(scenarios[key].map, _sample(scenarios[key]))
        diff = mp.dphi.val @ mp.F.val - mp.J.val @ mp.dphi.val
        assert np.max(np.abs(diff)) < 1e-12, key


def test_skewed_closed_forms(scenarios):
    s = scenarios["skewed_fibration"]
    X = _sample(s)
    # Delta x = e^{-x} d_x(e^x) = 1, Delta y = 0
    np.testing.assert_allclose(M.tension_field(s.map, X), np.tile([1.0, 0.0], (len(X), 1)), atol=1e-12)
    fdf, cos, split = M.f_div_f(s.map, X)
    np.testing.assert_allclose(cos, 1.0, atol=1e-12)
    # the split form of the cosymplectic condition fails together with it
    assert split is not None and np.min(split) > 0.5
    mp = MapPoint(s.map, X)
    np.testing.assert_allclose(mp.mean_curvature_vertical(), np.tile([0.0, -1.0, 0.0], (len(X), 1)), atol=1e-12)
    np.testing.assert_allclose(mp.decomposition_rhs(), np.tile([1.0, 0.0], (len(X), 1)), atol=1e-12)


def test_tension_decomposition_on_phwc(scenarios):
    for key in ("flat_projection", "hopf", "sasakian_r3", "kenmotsu", "skewed_fibration", "composed_phm"):
        s = scenarios[key]
        assert np.max(M.tension_decomposition_residual(s.map, _sample(s))) < 1e-10, key
        mp = MapPoint(s.map, _sample(s))
        assert np.max(np.abs(mp.tension() - mp.adapted_frame_tension())) < 1e-10, key


def test_decomposition_warns_off_phwc(scenarios):
    with pytest.warns(UserWarning):
        M.tension_decomposition_residual(scenarios["shear"].map, _sample(scenarios["shear"]))


def test_phh_defect(scenarios):
    for key in ("flat_projection", "sasakian_r3", "kenmotsu"):
        s = scenarios[key]
        assert np.max(M.phh_defect(s.map, _sample(s))) < 1e-12
    with pytest.warns(UserWarning):
        M.phh_defect(scenarios["shear"].map, _sample(scenarios["shear"]))


def test_phm_verdicts(scenarios):
    for key in ("flat_projection", "hopf", "composed_phm", "kenmotsu", "sasakian_r3"):
        rep = M.phm_verdict(scenarios[key].map, _sample(scenarios[key]))
        assert rep.verdict and rep.routes_agree, key
    rep = M.phm_verdict(scenarios["skewed_fibration"].map, _sample(scenarios["skewed_fibration"]))
    assert not rep.verdict and rep.routes_agree
    assert rep.cosymplectic_max == pytest.approx(1.0, abs=1e-12)
    assert rep.battery_max == pytest.approx(1.0, abs=1e-12)
    assert not M.phm_verdict(scenarios["shear"].map, _sample(scenarios["shear"])).verdict


def test_pullback_laplacian_closed_forms():
    s = catalog_lookup("flat_projection", verify=False)
    X = _sample(s)
    np.testing.assert_allclose(M.pullback_laplacian(s.map, lambda z: z[0] * z[1], X), 0, atol=1e-13)
    # |z1|^2 is not holomorphic; its Laplacian on R^{2n+k} is 4
    lap = M.pullback_laplacian(s.map, lambda z: z[0] * z[0].__class__(z[0].val.conj(), z[0].grad.conj(),
                                                                        z[0].hess.conj()), X)
    np.testing.assert_allclose(lap, 4.0)


def test_composed_phm_hwc_depends_on_dimension():
    two = catalog_lookup("composed_phm", verify=False)
    one = catalog_lookup("composed_phm", {"n": 1}, verify=False)
    assert np.min(MapPoint(two.map, _sample(two)).hwc_defect()) > 0.1
    assert np.max(MapPoint(one.map, _sample(one)).hwc_defect()) < 1e-12


def test_rank_drop_raises():
    chart = RiemannianChart(["x", "y"], [["1", "0"], ["0", "1"]], box=[(0.5, 1.0), (-1, 1)])
    phi = SmoothMap(chart, flat_target(1), ["x^2", "y"])
    with pytest.raises(RankDropError):
        M.induced_f_structure(phi, np.array([[0.0, 0.3]]))


def test_f_holomorphic_defect(scenarios):
    s = scenarios["sasakian_r3"]
    mp = MapPoint(s.map, _sample(s))
    assert np.max(M.f_holomorphic_defect(mp, lambda z: z[0].exp())) < 1e-12


def test_target_checks():
    tgt = flat_target(2)
    info = tgt.check(np.zeros((3, 4)))
    assert tgt.n == 2
    assert info["J_squared"] == 0 and info["compatibility"] == 0
    bad = HermitianTarget(RiemannianChart(["u", "v"], [["1", "0"], ["0", "4"]]))
    assert bad.check(np.zeros((1, 2)))["compatibility"] > 0.1


def test_composition_helper():
    s = catalog_lookup("kenmotsu", verify=False)
    square = SmoothMap(flat_target(1).chart, flat_target(1), ["(X1+2)^2-Y1^2", "2*(X1+2)*Y1"])
    comp = s.map.compose_with(square)
    X = _sample(s)
    z = comp.evaluate(X)
    w = s.map.evaluate(X)
    np.testing.assert_allclose(z[:, 0], (w[:, 0] + 2) ** 2 - w[:, 1] ** 2)


def test_cosymplectic_split_agrees_with_defect(scenarios):
    for key in ("flat_projection", "hopf", "sasakian_r3", "kenmotsu", "skewed_fibration"):
        _, cos, split = M.f_div_f(scenarios[key].map, _sample(scenarios[key]))
        assert (np.max(cos) < 1e-10) == (np.max(split) < 1e-10), key
