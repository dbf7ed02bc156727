from fractions import Fraction

import pytest

from brst_reduction.errors import ExpressionParseError, NotDivisibleError
from brst_reduction.ring import (
    divide_exact,
    format_scalar,
    parse_scalar,
    partial_derivative,
    restrict_to_sphere,
    scalar,
)


def test_w_inverts_radius_squared(ring1):
    r2 = ring1.z_element(1) * ring1.zb_element(1) + ring1.z_element(2) * ring1.zb_element(2)
    assert ring1.w * r2 == ring1.one


def test_s_squares_to_radius_squared(ring1):
    r2 = ring1.z_element(1) * ring1.zb_element(1) + ring1.z_element(2) * ring1.zb_element(2)
    assert ring1.s * ring1.s == r2
    assert ring1.from_expr("s**2") == r2


def test_canonical_form_cancels_w(ring1):
    f = ring1.from_expr("z1*zb1*w + z2*zb2*w")
    assert f == ring1.one
    assert f.constant_value() == scalar(1)


def test_divide_exact(ring1):
    z1, zb1 = ring1.z_element(1), ring1.zb_element(1)
    f = z1 * zb1 * z1
    assert divide_exact(f, z1) == z1 * zb1
    with pytest.raises(NotDivisibleError):
        divide_exact(z1, zb1)


def test_divide_exact_recovers_factor(ring1):
    f = ring1.from_expr("3*z1*zb2 + z2*zb2*zb1 - 1/2")
    g = ring1.from_expr("z1 + 2*zb2")
    assert divide_exact(f * g, g) == f
    r2 = ring1.from_expr("z1*zb1 + z2*zb2")
    assert divide_exact(r2 * r2 - ring1.one, r2 - ring1.one) == r2 + ring1.one


def test_divide_exact_inverts_radius_squared(ring1, ring0):
    r2 = ring1.from_expr("z1*zb1 + z2*zb2")
    assert divide_exact(ring1.one, r2) == ring1.w
    assert divide_exact(ring1.z_element(1), r2 * r2) == ring1.z_element(1) * ring1.w * ring1.w
    # on the point orbit |z|² = z1·zb1, so z1 is a unit
    assert divide_exact(ring0.one, ring0.z_element(1)) == ring0.zb_element(1) * ring0.w


def test_from_expr_understands_every_generator(ring1):
    assert ring1.from_expr("s**2") == ring1.from_expr("z1*zb1 + z2*zb2")
    assert ring1.from_expr("w*(z1*zb1 + z2*zb2)") == ring1.one
    assert ring1.from_expr("zb2") == ring1.zb_element(2)


@pytest.mark.parametrize("index", range(4))
def test_partial_derivative_is_a_derivation(ring1, index):
    a = ring1.from_expr("s*z1*zb2 + 2*z2")
    b = ring1.from_expr("w*z2*zb1 + zb1")
    left = partial_derivative(a * b, index)
    assert left == partial_derivative(a, index) * b + a * partial_derivative(b, index)


def test_mixed_partials_commute(ring1):
    f = ring1.from_expr("s*z1*zb2*w + z1**2*zb1")
    for i in range(4):
        for j in range(i):
            assert partial_derivative(partial_derivative(f, i), j) == \
                partial_derivative(partial_derivative(f, j), i)


def test_conjugation_is_multiplicative(ring1):
    i = scalar(0, 1)
    a = ring1.from_expr("s*z1*zb2 + z2") * i
    b = ring1.from_expr("w*z2*zb1") * scalar(2, 3) + ring1.zb_element(1)
    assert (a * b).conj() == a.conj() * b.conj()


def test_derivative_of_w(ring1):
    index = 0  # z1
    assert partial_derivative(ring1.w, index) == -(ring1.zb_element(1) * ring1.w * ring1.w)


def test_derivative_of_s(ring1):
    expected = ring1.zb_element(1) * ring1.s * ring1.w * scalar(Fraction(1, 2))
    assert ring1.s.diff(0) == expected


def test_restrict_to_sphere(ring1):
    assert restrict_to_sphere(ring1.w) == ring1.one
    assert restrict_to_sphere(ring1.s * ring1.z_element(1)) == ring1.z_element(1)
    r2 = ring1.z_element(1) * ring1.zb_element(1) + ring1.z_element(2) * ring1.zb_element(2)
    assert restrict_to_sphere(r2 * r2) == ring1.one


def test_conjugation(ring1):
    i = scalar(0, 1)
    assert (ring1.z_element(1) * i).conj() == ring1.zb_element(1) * (-i)
    assert ring1.s.conj() == ring1.s


def test_charges_and_weights(ring1):
    f = ring1.z_element(1) * ring1.zb_element(2) * ring1.w
    assert f.charges() == {0}
    assert f.radial_weights() == {0}
    assert ring1.z_element(1).charges() == {1}


def test_scalar_format_and_parse():
    assert format_scalar(scalar(1, -2)) == "1-2i"
    assert format_scalar(scalar(Fraction(1, 2))) == "1/2"
    assert parse_scalar("1/2+3i") == scalar(Fraction(1, 2), 3)
    assert parse_scalar("-1i") == scalar(0, -1)
    with pytest.raises(ExpressionParseError):
        parse_scalar("one half")


def test_json_round_trip(ring1):
    f = ring1.from_expr("3*z1*zb2*w + (1/2)*s*z1")
    assert ring1.from_json(f.to_json()) == f


def test_from_expr_rejects_garbage(ring1):
    with pytest.raises(ExpressionParseError):
        ring1.from_expr("z1 +* ")


def test_point_ring_has_two_coordinates(ring0):
    assert ring0.nvars == 2
    assert ring0.w * ring0.z_element(1) * ring0.zb_element(1) == ring0.one
