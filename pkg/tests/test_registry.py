from phmlab import constructions, morphism, structures
from phmlab.checks import CHECKS

MAPPED = {
    morphism: ["differential_and_adjoint", "phwc_defect", "induced_f_structure", "phh_defect", "tension_field",
               "f_div_f", "tension_decomposition_residual", "pullback_laplacian", "phm_verdict"],
    structures: ["nijenhuis", "complex_distribution_integrability", "contact_tensors", "foliation_invariants",
                 "phwc_foliation_defect", "classify_acs", "normality_equivalence", "w_form",
                 "cosymplectic_identity_residual", "olszak_and_blair_residuals"],
    constructions: ["induced_almost_contact", "build_cone", "cone_equivalences", "adapted_pair",
                    "superminimality_and_integrability", "cr_defect"],
}

NAMES = ["phwc", "phh", "induced_f", "tension", "decomposition", "cosymplectic", "phm", "lemma21", "lemma22",
         "prop21", "cor21", "integrability", "normality", "classify", "wform", "cosymp_identity", "olszak",
         "blair", "cone", "adapted_pair", "superminimal", "cr"]


def test_check_names():
    assert list(CHECKS) == NAMES


def test_every_mapped_operation_is_reachable():
    reachable = {op for c in CHECKS.values() for op in c.operations}
    for mod, ops in MAPPED.items():
        for op in ops:
            assert callable(getattr(mod, op)), op
            assert op in reachable, op


def test_declared_operations_exist():
    for c in CHECKS.values():
        assert c.operations, c.name
        for op in c.operations:
            assert any(callable(getattr(m, op, None)) for m in MAPPED), (c.name, op)
