import numpy as np
import pytest

from phmlab import constructions as C
from phmlab import morphism as M
from phmlab.catalog import catalog_lookup
from phmlab.jetcalc import DegenerateFrameError


@pytest.fixture(scope="module")
def cone_entry():
    return catalog_lookup("cone_over_sasakian_r3", verify=False)


def test_induced_structure_rejects_degenerate_seed():
    # on the kenmotsu entry the fibers are spanned by d/dt, so d/dx has no vertical part
    s = catalog_lookup("kenmotsu", verify=False)
    bad = C.induced_almost_contact(s.map, 1)
    with pytest.raises(DegenerateFrameError):
        bad.xi(s.sample(3, 1))


def test_induced_structure_needs_one_dimensional_fibers():
    with pytest.raises(ValueError):
        C.induced_almost_contact(catalog_lookup("warped_twist", verify=False).map)


def test_induced_xi_is_unit_and_vertical():
    s = catalog_lookup("hopf", verify=False)
    X = s.sample(15, 2)
    acs = C.induced_almost_contact(s.map)
    xi = acs.xi(X).val
    g = s.source.metric_values(X)
    np.testing.assert_allclose(np.einsum("ni,nij,nj->n", xi, g, xi), 1.0, atol=1e-12)
    dphi, _ = M.differential_and_adjoint(s.map, X)
    assert np.max(np.abs(np.einsum("nai,ni->na", dphi, xi))) < 1e-12


def test_holomorphy_defect_of_reference_structure():
    s = catalog_lookup("sasakian_r3", verify=False)
    assert np.max(C.holomorphy_defect(s.map, s.acs.phi, s.sample(10, 1))) < 1e-12


def test_cone_chart_layout(cone_entry):
    cone = cone_entry.cone
    assert list(cone.chart.coords) == ["t", "x1", "y1", "z"]
    assert cone.radial == "t"


def test_cone_structure_is_hermitian(cone_entry):
    info = cone_entry.cone.check(cone_entry.sample(20, 3))
    assert info["J_squared"] < 1e-12 and info["compatibility"] < 1e-12


def test_cone_projection_defects(cone_entry):
    # pi is harmonic, horizontally homothetic with dilation 1/t, radial lines geodesic
    d = cone_entry.cone.projection_defects(cone_entry.sample(20, 3))
    for key in ("tension", "dilation", "geodesic_fibers"):
        assert np.max(d[key]) < 1e-12, key


def test_cone_equivalence_patterns(cone_entry):
    X = cone_entry.sample(20, 3)
    r = C.cone_equivalences(cone_entry.cone, cone_entry.base_map, X)
    assert set(r["pattern"].values()) == {"both-pass"}
    broken = C.cone_equivalences(cone_entry.cone, cone_entry.variants["broken"], X)
    assert broken["pattern"]["holomorphic"] == "both-fail"
    assert np.max(r["mismatch"]) == 0 and np.max(broken["mismatch"]) == 0


def test_lift_map_factors_through_projection(cone_entry):
    X = cone_entry.sample(10, 4)
    hat = cone_entry.cone.lift_map(cone_entry.base_map)
    np.testing.assert_allclose(hat.evaluate(X), cone_entry.base_map.evaluate(X[:, 1:]))


def test_cone_interval_validated(cone_entry):
    with pytest.raises(ValueError):
        C.build_cone(cone_entry.cone.acs, (0.0, 1.0))


@pytest.mark.parametrize("key", ["warped_twist", "superminimal_product"])
def test_adapted_pair_invariants(key):
    s = catalog_lookup(key, verify=False)
    pair = C.adapted_pair(s.map, s.sample(20, 3))
    inv = pair.invariants()
    for name in ("plus_squared", "plus_compat", "minus_squared", "minus_compat", "rotation"):
        assert np.max(inv[name]) < 1e-12, name
    assert np.min(inv["orientation_det"]) > 0
    assert np.max(pair.vertical_parallelism()) < 1e-12


def test_orientation_swap_exchanges_pair():
    s = catalog_lookup("warped_twist", verify=False)
    X = s.sample(10, 5)
    a, b = C.adapted_pair(s.map, X, 1), C.adapted_pair(s.map, X, -1)
    np.testing.assert_allclose(a.J_plus.val, b.J_minus.val, atol=1e-14)
    np.testing.assert_allclose(a.J_minus.val, b.J_plus.val, atol=1e-14)


def test_adapted_pair_argument_checks():
    s = catalog_lookup("sasakian_r3", verify=False)
    with pytest.raises(ValueError):
        C.adapted_pair(s.map, s.sample(2, 1))
    w = catalog_lookup("warped_twist", verify=False)
    with pytest.raises(ValueError):
        C.adapted_pair(w.map, w.sample(2, 1), orientation=2)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("sign", [1, -1])
def test_warped_twist_superminimality_closed_form(c, sign):
    # nabla_V J has four entries of length c in an orthonormal frame
    s = catalog_lookup("warped_twist", {"c": c}, verify=False)
    r = C.superminimality_and_integrability(C.adapted_pair(s.map, s.sample(20, 3)), sign)
    np.testing.assert_allclose(r["superminimality"], 2 * c, rtol=1e-12)
    assert np.max(r["nijenhuis"]) < 1e-8
    assert np.max(r["identity"]) < 1e-12


@pytest.mark.parametrize("sign", [1, -1])
def test_product_is_superminimal(sign):
    s = catalog_lookup("superminimal_product", verify=False)
    r = C.superminimality_and_integrability(C.adapted_pair(s.map, s.sample(20, 3)), sign)
    assert np.max(r["superminimality"]) < 1e-9 and np.max(r["nijenhuis"]) < 1e-9


@pytest.mark.parametrize("key,consistent", [("sasakian_r3", True), ("kenmotsu", True), ("skewed_fibration", False)])
def test_cr_defect_cross_reference(key, consistent):
    s = catalog_lookup(key, verify=False)
    r = C.cr_defect(s.map, s.sample(20, 3), s.acs)
    assert np.max(r["cr"]) < 1e-12
    assert r["consistent"] is consistent
    nmax = max(float(np.max(v)) for v in r["normality"].values())
    assert (nmax < 1e-8) is consistent
