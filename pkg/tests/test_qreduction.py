import pytest

from brst_reduction.errors import ExpressionParseError, NotEquivariantError, NotInvariantError
from brst_reduction.koszul import KoszulChain
from brst_reduction.qreduction import (
    I_star,
    QuantizedKoszulConfig,
    ReducedFunction,
    balanced_generator,
    from_reduced,
    fubini_study_bracket,
    in_ideal,
    in_normalizer,
    normalizer_witness,
    parse_reduced,
    polynomial_lift,
    quantized_koszul,
    quantized_koszul_suite,
    reduce_equivalence,
    reduced_product_suite,
    reduced_product_table,
    reduced_star,
    to_reduced,
)
from brst_reduction.ring import scalar
from brst_reduction.scenario import su2_symplectic_data
from brst_reduction.series import NuSeries
from brst_reduction.starprod import (
    EquivalenceOp,
    GaugeEquivalence,
    QuantumMomentumMap,
    StarProduct,
    find_equivalence,
    invariant_basis,
    verify_intertwining,
)


@pytest.fixture(scope="module")
def cfg(scenario1):
    return scenario1.koszul_config(0, order=3)


def reduced(text, scenario):
    return parse_reduced(text, scenario.ring, scenario.symplectic)


def test_quantized_koszul_has_classical_limit(cfg, scenario1):
    ring = scenario1.ring
    f = ring.z_element(1) * ring.zb_element(2)
    image = quantized_koszul(KoszulChain.generator(f), cfg).component(zero=NuSeries({}, 3))
    assert image.coefficient(0, ring.zero) == f * scenario1.momentum


def test_quantized_koszul_suite(cfg):
    checked, failures = quantized_koszul_suite(cfg, degree_bound=1)
    assert checked > 0
    assert failures == []


def test_su2_koszul_operator_squares_to_zero():
    symplectic = su2_symplectic_data()
    star = StarProduct.wick(symplectic, 2)
    qmm = QuantumMomentumMap.from_classical(symplectic.momentum_map, order=2)
    su2_cfg = QuantizedKoszulConfig(star, qmm, symplectic.lie, symplectic)
    _, failures = quantized_koszul_suite(su2_cfg, degree_bound=1)
    assert failures == []


def test_I_star_kills_the_left_ideal(cfg, scenario1):
    ring = scenario1.ring
    g = ring.z_element(1) * ring.zb_element(2)
    assert in_ideal(cfg.star.star(g, cfg.qmm[0]), cfg)
    assert not in_ideal(g, cfg)


def test_I_star_of_prolongation_is_restriction(cfg, scenario1):
    u = reduced("h12 + 2*h22^2", scenario1)
    assert I_star(from_reduced(u), cfg) == NuSeries.constant(u.normal_form, 3)
    assert to_reduced(from_reduced(u), cfg) == NuSeries.constant(u, 3)


def test_I_star_flags_terms_cut_at_the_order(scenario1):
    cfg1 = scenario1.koszul_config(0, order=1)
    ring, J = scenario1.ring, scenario1.momentum
    # h₀ of the ν¹ term of z1 zb2 J is nonzero and feeds ν²
    assert I_star(ring.z_element(1) * ring.zb_element(2) * J, cfg1).truncated
    assert not I_star(J, cfg1).truncated
    assert not I_star(from_reduced(reduced("h12", scenario1)), cfg1).truncated


def test_normalizer_contains_invariants(cfg, scenario1):
    h = balanced_generator(scenario1.ring, 1, 2)
    assert in_normalizer(h, cfg, 2)


def test_normalizer_rejects_charged_functions(cfg, scenario1):
    ring = scenario1.ring
    assert normalizer_witness(ring.z_element(1) * ring.z_element(2), cfg, 2) == ring.one


def test_parse_reduced(scenario1):
    ring = scenario1.ring
    u = reduced("h11 + 1/2*h12", scenario1)
    # z1 zb1 reduces to 1 - z2 zb2 on the sphere
    assert u.normal_form == ring.from_expr("1 - z2*zb2 + 1/2*z1*zb2")
    assert reduced("h11 + h22", scenario1) == ReducedFunction(ring.one)


def test_parse_reduced_errors(scenario1):
    with pytest.raises(NotInvariantError):
        reduced("z1", scenario1)
    with pytest.raises(ExpressionParseError):
        reduced("h11 +", scenario1)
    with pytest.raises(ExpressionParseError):
        reduced("q7", scenario1)


def test_unit_is_neutral(cfg, scenario1):
    v = reduced("h12", scenario1)
    one = reduced("1", scenario1)
    assert reduced_star(one, v, cfg) == NuSeries.constant(v, 3)
    assert reduced_star(v, one, cfg) == NuSeries.constant(v, 3)


def test_order_zero_and_order_one(cfg, scenario1):
    u, v = reduced("h11", scenario1), reduced("h12", scenario1)
    zero = ReducedFunction(scenario1.ring.zero)
    series = reduced_star(u, v, cfg, 2)
    assert series.coefficient(0, zero) == u * v
    antisymmetric = series.coefficient(1, zero) - reduced_star(v, u, cfg, 1).coefficient(1, zero)
    assert antisymmetric == fubini_study_bracket(u, v, scenario1.symplectic)
    assert antisymmetric


@pytest.mark.parametrize("kappa", [1, NuSeries({1: 1}, 3)])
def test_kappa_does_not_change_abelian_reduction(kappa, cfg, scenario1):
    shifted = scenario1.koszul_config(0, kappa, 3)
    u, v = reduced("h12", scenario1), reduced("h21", scenario1)
    assert reduced_star(u, v, shifted) == reduced_star(u, v, cfg)


def test_point_reduction_is_trivial(scenario0):
    cfg0 = scenario0.koszul_config(0, order=3)
    one = reduced("h11", scenario0)
    assert one == ReducedFunction(scenario0.ring.one)
    assert reduced_star(one, one, cfg0) == NuSeries.constant(one, 3)


def test_gauge_equivalence_transfers(cfg, scenario1):
    T = GaugeEquivalence(scenario1.symplectic, scenario1.ring.from_expr("z1*zb2 + z2*zb1"), 2)
    cfg2 = scenario1.koszul_config(0, order=2)
    table = reduced_product_table(cfg2, 2, 2)
    reduced_T = reduce_equivalence(T, cfg2, 2, 2)
    assert verify_intertwining(reduced_T, table, table) == []


def test_polynomial_lift_has_the_right_reduction(cfg, scenario1):
    u = reduced("h12*h21", scenario1).normal_form
    lift = polynomial_lift(u, cfg)
    assert all(value.is_polynomial() for _, value in lift.items())
    assert I_star(lift, cfg) == NuSeries.constant(u, 3)


def test_ambient_equivalence_reduces_like_its_gauge(scenario1):
    cfg2 = scenario1.koszul_config(0, order=2)
    gauge = GaugeEquivalence(scenario1.symplectic, scenario1.ring.from_expr("z1*zb2 + z2*zb1"), 2)
    ambient = EquivalenceOp.from_gauge(gauge, invariant_basis(scenario1.ring, 4))
    assert not ambient.is_identity()
    assert reduce_equivalence(ambient, cfg2, 2, 2).stages == reduce_equivalence(gauge, cfg2, 2, 2).stages
    identity = EquivalenceOp.identity(invariant_basis(scenario1.ring, 4), 2)
    assert reduce_equivalence(identity, cfg2, 2, 2).is_identity()


def test_ambient_equivalence_must_fix_the_momentum(scenario1):
    cfg2 = scenario1.koszul_config(0, order=2)
    basis = invariant_basis(scenario1.ring, 2)
    # T_1 = degree operator moves J
    T = EquivalenceOp(basis, {1: {i: {i: scalar(d)} for i, d in enumerate(basis.degrees) if d}}, 2)
    with pytest.raises(NotEquivariantError):
        reduce_equivalence(T, cfg2, 2, 2)


@pytest.mark.slow
def test_reduced_product_suite_on_linear_functions(cfg):
    _, failures = reduced_product_suite(cfg, degree=1, order=3)
    assert failures == []


@pytest.mark.slow
def test_reduced_product_suite_on_quadratic_functions(cfg):
    checked, failures = reduced_product_suite(cfg)
    assert checked > 0
    assert failures == []


@pytest.mark.slow
def test_quantized_koszul_suite_at_full_degree(scenario1):
    _, failures = quantized_koszul_suite(scenario1.koszul_config(0, order=4), degree_bound=6)
    assert failures == []


@pytest.mark.slow
def test_gauge_equivalence_transfers_at_full_degree(scenario1):
    T = GaugeEquivalence(scenario1.symplectic, scenario1.ring.from_expr("z1*zb2 + z2*zb1"), 2)
    cfg2 = scenario1.koszul_config(0, order=2)
    table = reduced_product_table(cfg2, 6, 2)
    assert verify_intertwining(reduce_equivalence(T, cfg2, 6, 2), table, table) == []


@pytest.mark.slow
def test_shifted_momentum_gives_inequivalent_products(scenario1):
    cfg1 = scenario1.koszul_config(1, order=2)
    cfg0 = scenario1.koszul_config(0, order=2)
    table1 = reduced_product_table(cfg1, 6, 2, label="c=1")
    table0 = reduced_product_table(cfg0, 6, 2, label="c=0")
    result = find_equivalence(table1, table0, 1)
    assert not result.found
    assert result.obstruction_order == 2
    assert find_equivalence(table0, table0, 1).found
