import pytest
import sympy as sp

from brst_reduction.config import Settings
from brst_reduction.errors import UnsupportedScenarioError
from brst_reduction.report import validate_descriptor
from brst_reduction.scenario import (
    MU,
    axiom_suite,
    build_scenario,
    canonical_point,
    chart_homotopy_defect,
    evaluate,
    radial_components,
    tubular_chart_pushforward,
)
from brst_reduction.series import NuSeries


@pytest.mark.parametrize("n", [0, 1, 2])
def test_supported_scenarios_build(n):
    scenario = build_scenario(n, Settings(degree_bound=4))
    assert scenario.ring.dim == n + 1
    assert axiom_suite(scenario) == []
    assert validate_descriptor(scenario.descriptor()) == []


def test_unsupported_n():
    with pytest.raises(UnsupportedScenarioError) as info:
        build_scenario(9)
    assert info.value.code == "UNSUPPORTED_N"


def test_descriptor_restates_conventions(scenario1):
    descriptor = scenario1.descriptor()
    assert descriptor["manifold"] == "C^2"
    assert descriptor["level_set"] == "S^3"
    assert descriptor["reduced_space"] == "CP^1"
    conventions = descriptor["conventions"]
    assert conventions["bracket_z1_zb1"] == conventions["wick_weight"]
    assert conventions["connection_constant"] == "0+1i"


def test_point_descriptor(scenario0):
    assert scenario0.descriptor()["reduced_space"] == "point"


def test_canonical_point_lies_on_sphere(scenario1):
    point = canonical_point(scenario1.ring)
    assert evaluate(scenario1.momentum, point) == 0


def test_radial_components_split_by_weight(ring1):
    f = ring1.from_expr("z1*zb1 + z2 + 3")
    pieces = radial_components(f)
    assert set(pieces) == {0, 1, 2}
    assert pieces[2] == ring1.from_expr("z1*zb1")


def test_pushforward_of_momentum_is_the_chart_coordinate(scenario1):
    chart = tubular_chart_pushforward(scenario1.momentum)
    assert not chart.restriction
    assert sp.simplify(chart.at(canonical_point(scenario1.ring)) - MU) == 0


@pytest.mark.parametrize("expr", ["z1*zb1", "z1*zb2*z2*zb1", "z1*zb1*z1*zb1 + z2*zb1"])
def test_chart_homotopy(scenario1, expr):
    f = scenario1.ring.from_expr(expr)
    assert chart_homotopy_defect(f, scenario1.momentum, canonical_point(scenario1.ring)) == []


def test_equivariant_symplectic_form_shift(scenario1):
    assert not isinstance(scenario1.equivariant_symplectic_form(0), NuSeries)
    series = scenario1.equivariant_symplectic_form(1, 2)
    assert series[0] == scenario1.equivariant_symplectic_form(0)
    assert series[1].sym_degree() == 1


def test_curvature_is_minus_twice_reduced_omega(scenario1):
    assert scenario1.curvature() == scenario1.reduced_symplectic_form() * -2
