import pytest

from brst_reduction.cartan import (
    EQUAL,
    EquivariantForm,
    PrincipalConnection,
    check_invariant,
    classes_equal,
    contraction,
    contraction_suite,
    d_equivariant,
    evaluate_at_zero,
    exact_samples,
    h_omega,
    insert_bullet,
    invariance_defects,
    kirwan,
    phi,
    pull_back,
    stabilize,
)
from brst_reduction.errors import DegreeBoundExceeded, NotClosedError, NotInvariantError
from brst_reduction.geometry import PolyForm, exterior_derivative, ideal_reduce
from brst_reduction.scenario import su2_symplectic_data


def test_mixed_total_degree_is_rejected(ring1):
    with pytest.raises(ValueError):
        EquivariantForm(ring1, 1, {(0,): PolyForm.function(ring1.one), (1,): PolyForm.function(ring1.one)})


def test_total_degree_counts_generators_twice(scenario1):
    alpha = scenario1.equivariant_symplectic_form()
    assert alpha.total_degree == 2
    assert alpha.sym_degree() == 1
    assert evaluate_at_zero(alpha) == scenario1.symplectic.omega


def test_equivariant_symplectic_form_is_closed(scenario1):
    alpha = scenario1.equivariant_symplectic_form()
    assert not d_equivariant(alpha, scenario1.connection)


def test_d_g_squares_to_zero_on_invariant_forms(scenario1):
    beta = exact_samples(scenario1.ring)[-1]
    once = d_equivariant(beta, scenario1.connection)
    assert once
    assert not d_equivariant(once, scenario1.connection)


def test_non_invariant_forms_are_rejected(scenario1):
    alpha = EquivariantForm.from_form(PolyForm.differential(scenario1.ring, 0))
    assert invariance_defects(alpha, scenario1.connection)
    with pytest.raises(NotInvariantError):
        check_invariant(alpha, scenario1.connection)


def test_su2_moment_form_is_invariant_and_closed():
    symplectic = su2_symplectic_data()
    ring = symplectic.ring
    zero = PolyForm.zero(ring)
    # no connection is needed for d_g; the zero θ only carries the fields
    connection = PrincipalConnection((zero, zero, zero), tuple(symplectic.fundamental_fields), symplectic.lie)
    alpha = EquivariantForm.from_form(symplectic.omega, 3)
    for a, J in enumerate(symplectic.momentum_map):
        alpha = alpha - EquivariantForm.generator(ring, a, 3, coefficient=J)
    assert invariance_defects(alpha, connection) == []
    assert not d_equivariant(alpha, connection)


def test_h_omega_on_squared_generator(scenario1):
    ring = scenario1.ring
    theta = scenario1.connection.theta[0]
    alpha = EquivariantForm(ring, 1, {(2,): PolyForm.function(ring.one)})
    assert h_omega(alpha, scenario1.connection) == EquivariantForm(ring, 1, {(1,): theta * 2})


def test_contraction_inverts_insertion_on_the_generator(scenario1):
    e = EquivariantForm.generator(scenario1.ring)
    K = contraction(e, scenario1.connection)
    assert K == EquivariantForm.from_form(scenario1.connection.theta[0])
    assert insert_bullet(K, scenario1.connection) == e


def test_contraction_suite_small(scenario1):
    checked, failures = contraction_suite(scenario1.connection, scenario1.ideal, 2, 2, 2)
    assert checked > 0
    assert failures == []


@pytest.mark.slow
def test_contraction_suite_full(scenario1):
    _, failures = contraction_suite(scenario1.connection, scenario1.ideal, 3, 3, 4)
    assert failures == []


def test_phi_lowers_symmetric_degree(scenario1):
    e = EquivariantForm.generator(scenario1.ring)
    lowered = phi(e, scenario1.connection, scenario1.ideal)
    assert lowered.sym_degree() == 0
    assert evaluate_at_zero(lowered) == -scenario1.curvature()


def test_kirwan_of_moment_form(scenario1):
    image = kirwan(scenario1.equivariant_symplectic_form(), scenario1.connection, scenario1.ideal)
    assert image == scenario1.reduced_symplectic_form()


def test_kirwan_of_generator_is_minus_curvature(scenario1):
    image = kirwan(EquivariantForm.generator(scenario1.ring), scenario1.connection, scenario1.ideal)
    assert image == -scenario1.curvature()
    assert scenario1.curvature() == scenario1.reduced_symplectic_form() * -2


def test_kirwan_is_nu_linear(scenario1):
    series = scenario1.equivariant_symplectic_form(1, 1)
    image = kirwan(series, scenario1.connection, scenario1.ideal)
    assert image[0] == scenario1.reduced_symplectic_form()
    assert image[1] == scenario1.curvature()


def test_kirwan_rejects_open_forms(scenario1):
    ring = scenario1.ring
    f = ring.z_element(1) * ring.zb_element(1)
    with pytest.raises(NotClosedError):
        kirwan(EquivariantForm.from_form(PolyForm.function(f)), scenario1.connection, scenario1.ideal)


def test_stabilize_gives_basic_forms_for_exact_samples(scenario1):
    for beta in exact_samples(scenario1.ring):
        exact = d_equivariant(beta, scenario1.connection)
        image = stabilize(exact, scenario1.connection, scenario1.ideal)
        zero = PolyForm.zero(scenario1.ring)
        assert classes_equal(image, zero, scenario1.ideal, 4).equal


def test_pull_back_reduces_components(scenario1):
    J = scenario1.momentum
    alpha = EquivariantForm.generator(scenario1.ring, coefficient=J)
    assert not pull_back(alpha, scenario1.ideal)


def test_exact_basic_form_has_a_primitive(scenario1):
    ring = scenario1.ring
    f = ring.from_expr("z1*zb2 + z2*zb1")
    g = ring.z_element(1) * ring.zb_element(1)
    gamma = PolyForm.function(f).wedge(exterior_derivative(PolyForm.function(g)))
    exact = ideal_reduce(exterior_derivative(gamma), scenario1.ideal)
    comparison = classes_equal(exact, PolyForm.zero(ring), scenario1.ideal, 4)
    assert comparison.status == EQUAL
    assert comparison.primitive


def test_symplectic_class_is_not_zero(scenario1):
    omega_red = scenario1.reduced_symplectic_form()
    comparison = classes_equal(omega_red, PolyForm.zero(scenario1.ring), scenario1.ideal, 4)
    assert not comparison.equal
    assert comparison.label() == "NOT_EQUAL_UP_TO_DEGREE(4)"


@pytest.mark.slow
def test_symplectic_class_is_not_zero_at_full_degree(scenario1):
    omega_red = scenario1.reduced_symplectic_form()
    comparison = classes_equal(omega_red, PolyForm.zero(scenario1.ring), scenario1.ideal, 8)
    assert comparison.label() == "NOT_EQUAL_UP_TO_DEGREE(8)"


def test_classes_equal_checks_degree(scenario1):
    ring = scenario1.ring
    big = PolyForm.function(ring.z_element(2) ** 3 * ring.zb_element(2) ** 3)
    with pytest.raises(DegreeBoundExceeded):
        classes_equal(big, PolyForm.zero(ring), scenario1.ideal, 4)


def test_point_has_no_two_dimensional_classes(scenario0):
    image = kirwan(scenario0.equivariant_symplectic_form(), scenario0.connection, scenario0.ideal)
    assert not image
    assert not scenario0.curvature()


def test_d_g_of_connection_form(scenario1):
    theta = scenario1.connection.theta[0]
    expected = EquivariantForm.from_form(exterior_derivative(theta)) + EquivariantForm.generator(scenario1.ring)
    assert d_equivariant(EquivariantForm.from_form(theta), scenario1.connection) == expected


def test_phi_fixes_basic_forms(scenario1):
    omega_red = EquivariantForm.from_form(scenario1.reduced_symplectic_form())
    assert phi(omega_red, scenario1.connection, scenario1.ideal) == omega_red
