import pytest

from brst_reduction.errors import NotEquivariantError
from brst_reduction.geometry import su2_algebra
from brst_reduction.ring import scalar
from brst_reduction.scenario import su2_symplectic_data
from brst_reduction.series import NuSeries
from brst_reduction.starprod import (
    EquivalenceOp,
    GaugeEquivalence,
    QuantumMomentumMap,
    StarProduct,
    ambient_product_table,
    find_equivalence,
    verify_intertwining,
    verify_qmm,
)


@pytest.fixture
def wick(scenario1):
    return scenario1.star_product(3)


def test_wick_weight_matches_bracket(wick, scenario1):
    assert wick.weight == scalar(0, -1)
    assert wick.check_conventions(scenario1.symplectic) == []


def test_holomorphic_derivatives_act_on_the_left(wick, scenario1):
    z1, zb1 = scenario1.ring.z_element(1), scenario1.ring.zb_element(1)
    assert wick.star(z1, zb1) == NuSeries({0: z1 * zb1, 1: scenario1.ring.from_scalar(scalar(0, -1))}, 3)
    assert wick.star(zb1, z1) == NuSeries({0: z1 * zb1}, 3)


def test_commutator_is_nu_times_bracket_on_quadratics(wick, scenario1):
    ring = scenario1.ring
    f = ring.z_element(1) * ring.zb_element(2)
    g = ring.z_element(2) * ring.zb_element(2)
    bracket = scenario1.symplectic.poisson_bracket(f, g)
    assert wick.commutator(f, g) == NuSeries({1: bracket}, 3)


def test_associativity_on_monomials(wick, scenario1):
    ring = scenario1.ring
    f = ring.z_element(1) ** 2
    g = ring.zb_element(1) * ring.z_element(2)
    h = ring.zb_element(1) * ring.zb_element(2)
    assert wick.star(wick.star(f, g), h) == wick.star(f, wick.star(g, h))


def _monomials(ring, degree_bound):
    return [ring.from_poly(ring.monomial(e)) for d in range(1, degree_bound + 1)
            for e in ring.coordinate_monomials(d)]


@pytest.mark.parametrize("generator", ["z1*zb1 + z2*zb2", "z1*zb2 + z2*zb1", "z1*zb1 - 2*z2*zb2"])
def test_invariant_hamiltonian_fields_are_derivations(generator, wick, scenario1):
    ring = scenario1.ring
    X = scenario1.symplectic.hamiltonian_vector_field(ring.from_expr(generator))
    for f, g in [(ring.z_element(1) ** 2, ring.zb_element(1) * ring.zb_element(2)),
                 (ring.from_expr("z1*zb2 + z2"), ring.from_expr("zb1**2*z2"))]:
        assert wick.star(f, g).map(X) == wick.star(X(f), g) + wick.star(f, X(g))


def _triples(ring, degree_bound):
    monomials = _monomials(ring, degree_bound - 2)
    return [(f, g, h) for f in monomials for g in monomials for h in monomials
            if f.degree() + g.degree() + h.degree() <= degree_bound]


def test_associativity_on_point_orbit_monomials(scenario0):
    star = scenario0.star_product(3)
    for f, g, h in _triples(scenario0.ring, 6):
        assert star.star(star.star(f, g), h) == star.star(f, star.star(g, h)), (f, g, h)


@pytest.mark.slow
def test_associativity_on_all_monomial_triples(wick, scenario1):
    for f, g, h in _triples(scenario1.ring, 6):
        assert wick.star(wick.star(f, g), h) == wick.star(f, wick.star(g, h)), (f, g, h)


def test_truncation_is_flagged(scenario1):
    ring = scenario1.ring
    star = scenario1.star_product(1)
    assert star.star(ring.z_element(1) ** 3, ring.zb_element(1) ** 3).truncated
    assert not star.star(ring.z_element(1), ring.zb_element(1)).truncated


@pytest.mark.parametrize("c", [0, 1, scalar(0, 1)])
def test_quantum_momentum_map(c, scenario1):
    qmm = scenario1.quantum_momentum_map(c, 3)
    report = verify_qmm(qmm, scenario1.star_product(3), scenario1.symplectic, degree_bound=2)
    assert report.status == "PASS", report.failures
    assert qmm.classical == [scenario1.momentum]


def test_su2_quantum_momentum_map():
    symplectic = su2_symplectic_data()
    star = StarProduct.wick(symplectic, 2)
    qmm = QuantumMomentumMap.from_classical(symplectic.momentum_map, order=2)
    report = verify_qmm(qmm, star, symplectic, degree_bound=2)
    assert report.status == "PASS", report.failures
    assert symplectic.lie == su2_algebra()


def test_gauge_equivalence_is_an_automorphism(scenario1):
    ring = scenario1.ring
    star = scenario1.star_product(3)
    T = GaugeEquivalence(scenario1.symplectic, ring.from_expr("z1*zb2 + z2*zb1"), 3)
    T.check_equivariance(scenario1.symplectic.momentum_map)
    f, g = ring.z_element(1) * ring.zb_element(1), ring.z_element(2) * ring.zb_element(1)
    assert T.apply(star.star(f, g)) == star.star(T.apply(f), T.apply(g))
    assert GaugeEquivalence.identity(scenario1.symplectic).is_identity()


def test_gauge_equivalence_must_commute_with_momentum(scenario1):
    ring = scenario1.ring
    T = GaugeEquivalence(scenario1.symplectic, ring.z_element(1) ** 2, 2)
    with pytest.raises(NotEquivariantError):
        T.check_equivariance(scenario1.symplectic.momentum_map)


@pytest.fixture(scope="module")
def ambient_table(scenario1):
    return ambient_product_table(scenario1.star_product(2), 2, 2)


def _degree_scaling(table, order):
    """T = id + ν E with E(b) = deg(b) b."""
    basis = table.basis
    return EquivalenceOp(basis, {1: {i: {i: scalar(d)} for i, d in enumerate(basis.degrees) if d}}, order)


def test_identity_equivalence_between_equal_tables(ambient_table):
    result = find_equivalence(ambient_table, ambient_table, 1)
    assert result.found
    assert verify_intertwining(result.operator, ambient_table, ambient_table) == []
    assert result.to_json()["status"] == "FOUND"


def test_conjugated_table_is_intertwined(ambient_table):
    T = _degree_scaling(ambient_table, 2)
    conjugated = ambient_table.conjugate(T)
    assert verify_intertwining(T, conjugated, ambient_table) == []
    assert find_equivalence(conjugated, ambient_table, 1).found


def test_inverse_operator(ambient_table):
    T = _degree_scaling(ambient_table, 3)
    S = T.inverse()
    vec = {len(ambient_table.basis) - 1: scalar(1)}
    composed = {}
    for p in range(3):
        for q in range(3 - p):
            for key, value in S.stage_apply(p, T.stage_apply(q, vec)).items():
                composed.setdefault(p + q, {})[key] = composed.get(p + q, {}).get(key, scalar(0)) + value
    assert composed[0] == vec
    assert all(not any(v for v in composed.get(m, {}).values()) for m in (1, 2))


def test_tables_of_low_order_cannot_decide(ambient_table):
    with pytest.raises(ValueError):
        find_equivalence(ambient_table, ambient_table, 2)
