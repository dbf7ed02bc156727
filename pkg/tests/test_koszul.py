import pytest

from brst_reduction.errors import NotDivisibleError, ZeroDegreeError
from brst_reduction.geometry import PolyForm, ideal_reduce
from brst_reduction.koszul import (
    KoszulChain,
    delta,
    even_weight_test_functions,
    h0,
    iota_star,
    koszul_suite,
    prolong,
    prolong_form,
)


def test_prolong_is_homogeneous_of_degree_zero(scenario1):
    ring = scenario1.ring
    z1 = ring.z_element(1)
    assert prolong(z1) == z1 * ring.s * ring.w
    assert prolong(z1 * ring.zb_element(2)) == z1 * ring.zb_element(2) * ring.w


def test_iota_star_of_prolong_is_identity(scenario1):
    ring = scenario1.ring
    u = iota_star(ring.from_expr("z1*zb2 + 3*z2*zb2*z1*zb1"))
    assert iota_star(prolong(u)) == u


def test_homotopy_formula(scenario1):
    ring, J = scenario1.ring, scenario1.momentum
    f = ring.z_element(1) * ring.zb_element(1)
    chain = h0(f, J)
    assert prolong(iota_star(f)) + delta(chain, [J]).component(zero=ring.zero) == f
    assert not h0(prolong(iota_star(f)), J)


def test_homotopy_of_momentum(scenario1):
    ring, J = scenario1.ring, scenario1.momentum
    # J restricts to 0, so h0 J = e ⊗ 1
    assert h0(J, J) == KoszulChain.generator(ring.one)


def test_homotopy_raises_when_difference_is_not_divisible(scenario1):
    # z1 − prol ι* z1 = z1(1 − s·w) has no factor J in A
    with pytest.raises(NotDivisibleError):
        h0(scenario1.ring.z_element(1), scenario1.momentum)


def test_homotopy_on_odd_weight_multiples_of_momentum(scenario1):
    ring, J = scenario1.ring, scenario1.momentum
    z1 = ring.z_element(1)
    assert h0(J * z1, J) == KoszulChain.generator(z1)


def test_homotopy_on_mixed_weight(scenario1):
    ring, J = scenario1.ring, scenario1.momentum
    odd = J * ring.z_element(1)
    even = ring.z_element(1) * ring.zb_element(2)
    f = odd + even
    assert h0(f, J) == h0(odd, J) + h0(even, J)
    assert prolong(iota_star(f)) + delta(h0(f, J), [J]).component(zero=ring.zero) == f


def test_delta_strict(scenario1):
    with pytest.raises(ZeroDegreeError):
        delta(KoszulChain.function(scenario1.ring.one), [scenario1.momentum], strict=True)


def test_even_weight_test_functions(ring1):
    functions = even_weight_test_functions(ring1, 2)
    assert all(w % 2 == 0 for f in functions for w in f.radial_weights())
    assert len(functions) == 1 + 4 + 10


def test_prolong_form_restricts_back(scenario1):
    ring = scenario1.ring
    alpha = PolyForm(ring, {(0, 3): ring.zb_element(1), (2,): ring.z_element(1) * ring.zb_element(2)})
    assert ideal_reduce(prolong_form(alpha), scenario1.ideal) == ideal_reduce(alpha, scenario1.ideal)


@pytest.mark.parametrize("n", [0, 1])
def test_koszul_suite(n, scenario0, scenario1):
    scenario = scenario0 if n == 0 else scenario1
    checked, failures = koszul_suite(scenario.momentum, scenario.symplectic.fundamental_fields, degree_bound=4)
    assert checked > 0
    assert failures == []


@pytest.mark.slow
def test_koszul_suite_full_degree(scenario1):
    _, failures = koszul_suite(scenario1.momentum, scenario1.symplectic.fundamental_fields, degree_bound=6)
    assert failures == []
