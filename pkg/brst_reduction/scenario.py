"""
BRST Reduction - Scenario Module

Built-in Hopf scenarios C^{n+1} \\ {0} ⊃ S^{2n+1} → CP^n for n = 0, 1, 2:
coordinates, ω, J = (|z|² − 1)/2, the U(1) action, the tubular chart
Φ(p) = (p/|p|, J(p)), the connection θ and the default bounds. Every
scenario is validated at construction.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

import sympy as sp
from sympy.polys.domains import QQ_I

from .cartan import EquivariantForm, PrincipalConnection
from .config import Settings
from .errors import ScenarioAxiomError, UnsupportedScenarioError
from .geometry import (
    LieAlgebraData,
    PolyForm,
    SubmanifoldIdeal,
    SymplecticData,
    abelian_algebra,
    exterior_derivative,
    ideal_reduce,
    insert,
    is_basic,
    lie_derivative,
    su2_algebra,
    symplectic_form,
)
from .koszul import h0, iota_star
from .qreduction import QuantizedKoszulConfig
from .ring import CoordinateRing, RingElement, format_scalar, get_ring, scalar, to_scalar
from .series import NuSeries
from .starprod import QuantumMomentumMap, StarProduct

logger = logging.getLogger(__name__)

SUPPORTED_N = (0, 1, 2)

MU = sp.Symbol("mu", positive=True)


# =============================================================================
# Tubular chart
# =============================================================================

@dataclass
class ChartPushforward:
    """x∘Φ^{-1}(c, μ) = Σ_d x_d(c)·(1 + 2μ)^{d/2}."""

    restriction: RingElement
    components: dict[int, RingElement]
    profile: sp.Expr

    def at(self, point: dict) -> sp.Expr:
        """The profile as a function of μ alone at a point c of C."""
        return sp.expand(self.profile.subs(point))


def radial_components(f: RingElement) -> dict[int, RingElement]:
    """Split f by radial weight d (z, z̄, s ↦ t·(…), w ↦ t^{-2})."""
    ring = f.ring
    pieces: dict[int, RingElement] = {}
    for poly, k, odd in ((f.even, f.even_w, 0), (f.odd, f.odd_w, 1)):
        for monom, coeff in poly.terms():
            weight = sum(monom[:ring.nvars]) - 2 * k + odd
            term = ring.poly_ring.from_dict({monom: coeff})
            element = RingElement(ring, ring.poly_ring.zero, 0, term, k) if odd \
                else RingElement(ring, term, k, ring.poly_ring.zero, 0)
            pieces[weight] = pieces[weight] + element if weight in pieces else element
    return pieces


def tubular_chart_pushforward(f: RingElement) -> ChartPushforward:
    """(ι*f, radial profile of f in the chart coordinate μ = J)."""
    components = {d: iota_star(piece) for d, piece in radial_components(f).items()}
    profile = sp.Integer(0)
    for d, value in sorted(components.items()):
        profile += value.as_expr() * (1 + 2 * MU) ** sp.Rational(d, 2)
    return ChartPushforward(iota_star(f), components, sp.expand(profile))


def canonical_point(ring: CoordinateRing) -> dict:
    """A rational point of C: (3/5, 4/5, 0, …) for n ≥ 1 and (1) for n = 0."""
    values = [Fraction(1)] if ring.dim == 1 else [Fraction(3, 5), Fraction(4, 5)] + [Fraction(0)] * (ring.dim - 2)
    point = {}
    for k, value in enumerate(values, start=1):
        point[sp.Symbol(f"z{k}")] = sp.Rational(value.numerator, value.denominator)
        point[sp.Symbol(f"zb{k}")] = sp.Rational(value.numerator, value.denominator)
    point[sp.Symbol("w")] = sp.Integer(1)
    point[sp.Symbol("s")] = sp.Integer(1)
    return point


def evaluate(f: RingElement, point: dict) -> sp.Expr:
    return sp.nsimplify(f.as_expr().subs(point))


def chart_homotopy_defect(f: RingElement, momentum: RingElement, point: dict,
                          samples=(sp.Rational(3, 2), 4, 12)) -> list[dict]:
    """Compare the pushforward of h₀ f with ∫₀¹ ∂_μ(x∘Φ^{-1})(c, tμ) dt at c = point.

    The μ samples make 1 + 2μ a perfect square so both sides are exact.
    """
    t = sp.Symbol("t", positive=True)
    outer = tubular_chart_pushforward(f).at(point)
    integrand = sp.diff(outer, MU).subs(MU, t * MU)
    integral = sp.integrate(integrand, (t, 0, 1))
    quotient = h0(f, momentum).component(0, zero=momentum.ring.zero)
    inner = tubular_chart_pushforward(quotient).at(point)
    failures = []
    for mu in samples:
        lhs = sp.nsimplify(integral.subs(MU, mu))
        rhs = sp.nsimplify(inner.subs(MU, mu))
        if sp.simplify(lhs - rhs) != 0:
            failures.append({"check": "chart_homotopy", "witness": f"{f} at μ={mu}: {lhs} != {rhs}"})
    return failures


# =============================================================================
# Scenarios
# =============================================================================

def hopf_connection(ring: CoordinateRing, symplectic: SymplecticData) -> tuple[PrincipalConnection, object]:
    """θ = c₀·w·Σ_k (z̄_k dz_k − z_k dz̄_k) with c₀ fixed by θ(X) = 1."""
    terms = {}
    for k in range(ring.dim):
        terms[(2 * k,)] = ring.zb_element(k + 1) * ring.w
        terms[(2 * k + 1,)] = -(ring.z_element(k + 1) * ring.w)
    shape = PolyForm(ring, terms)
    X = symplectic.fundamental_fields[0]
    pairing = insert(X, shape).coefficient().constant_value()
    if not pairing:
        raise ScenarioAxiomError("connection ansatz pairs to a non-constant with X", witness=insert(X, shape))
    c0 = QQ_I.one / pairing
    logger.debug("connection constant c0 = %s", format_scalar(c0))
    theta = shape * c0
    return PrincipalConnection((theta,), tuple(symplectic.fundamental_fields), symplectic.lie), c0


@dataclass
class Scenario:
    n: int
    ring: CoordinateRing
    symplectic: SymplecticData
    lie: LieAlgebraData
    connection: PrincipalConnection
    ideal: SubmanifoldIdeal
    settings: Settings
    connection_constant: object

    @property
    def momentum(self) -> RingElement:
        return self.symplectic.momentum_map[0]

    @property
    def fundamental_field(self):
        return self.symplectic.fundamental_fields[0]

    @property
    def degree_bound(self) -> int:
        return self.settings.degree_bound

    @property
    def nu_order(self) -> int:
        return self.settings.nu_order

    def star_product(self, order: int | None = None) -> StarProduct:
        return StarProduct.wick(self.symplectic, self.nu_order if order is None else order)

    def quantum_momentum_map(self, c=0, order: int | None = None) -> QuantumMomentumMap:
        """Ĵ_c = J + νc."""
        order = self.nu_order if order is None else order
        return QuantumMomentumMap.from_classical(self.symplectic.momentum_map, shift=c, order=order)

    def koszul_config(self, c=0, kappa=None, order: int | None = None) -> QuantizedKoszulConfig:
        order = self.nu_order if order is None else order
        if kappa is not None and not isinstance(kappa, NuSeries):
            kappa = NuSeries.constant(to_scalar(kappa), order)
        return QuantizedKoszulConfig(self.star_product(order), self.quantum_momentum_map(c, order),
                                     self.lie, self.symplectic, kappa)

    def equivariant_symplectic_form(self, c=0, order: int | None = None):
        """ω − Ĵ_c as an equivariant form, a ν-series when c ≠ 0."""
        omega = EquivariantForm.from_form(self.symplectic.omega)
        classical = omega - EquivariantForm.generator(self.ring, coefficient=self.momentum)
        c = to_scalar(c)
        if not c:
            return classical
        order = self.nu_order if order is None else order
        shift = EquivariantForm.generator(self.ring) * (-c)
        return NuSeries({0: classical, 1: shift}, order)

    def reduced_symplectic_form(self) -> PolyForm:
        """ι*ω, the representative of π*ω_red."""
        return ideal_reduce(self.symplectic.omega, self.ideal)

    def curvature(self) -> PolyForm:
        """dθ restricted to C."""
        return ideal_reduce(exterior_derivative(self.connection.theta[0]), self.ideal)

    def descriptor(self) -> dict:
        ring = self.ring
        bracket = self.symplectic.poisson_bracket(ring.z_element(1), ring.zb_element(1))
        return {
            "n": self.n,
            "manifold": f"C^{ring.dim}",
            "level_set": f"S^{2 * self.n + 1}",
            "reduced_space": "point" if self.n == 0 else f"CP^{self.n}",
            "lie": self.lie.to_json(),
            "bounds": {
                "degree_bound": self.settings.degree_bound,
                "nu_order": self.settings.nu_order,
                "normalizer_degree_bound": self.settings.normalizer_degree_bound,
                "equivalence_degree_bound": self.settings.equivalence_degree_bound,
            },
            "conventions": {
                "omega": "i sum_k dz_k ^ dzb_k",
                "momentum": str(self.momentum),
                "hamiltonian": "ins_{X_f} omega = df",
                "poisson_bracket": "{f, g} = X_g(f)",
                "bracket_z1_zb1": format_scalar(bracket.constant_value()),
                "wick_weight": format_scalar(self.star_product().weight),
                "connection_constant": format_scalar(self.connection_constant),
                "fundamental_field": {ring.coordinate_name(j): str(c)
                                      for j, c in sorted(self.fundamental_field.components.items())},
            },
        }


def _axiom_checks(ring: CoordinateRing, symplectic: SymplecticData, connection: PrincipalConnection,
                  ideal: SubmanifoldIdeal) -> list[dict]:
    """Construction checks; a failure is a {check, witness} dict."""
    failures = list(symplectic.check())
    failures += symplectic.lie.check()
    point = canonical_point(ring)
    dJ = exterior_derivative(PolyForm.function(symplectic.momentum_map[0]))
    if all(evaluate(coeff, point) == 0 for coeff in dJ.terms.values()):
        failures.append({"check": "regular_value", "witness": "dJ vanishes at the canonical point"})
    X = symplectic.fundamental_fields[0]
    if all(evaluate(coeff, point) == 0 for coeff in X.components.values()):
        failures.append({"check": "free_action", "witness": "X vanishes at the canonical point"})
    failures += connection.check(ideal)
    if ideal_reduce(lie_derivative(X, symplectic.omega), ideal):
        failures.append({"check": "omega_invariant", "witness": "L_X ω ≢ 0"})
    if not is_basic(ideal_reduce(symplectic.omega, ideal), ideal):
        failures.append({"check": "restricted_omega_basic", "witness": "ι*ω is not basic"})
    return failures


def build_scenario(n: int, settings: Settings | None = None) -> Scenario:
    """The Hopf scenario for M = C^{n+1}; UnsupportedScenarioError unless n ∈ {0, 1, 2}."""
    if n not in SUPPORTED_N:
        raise UnsupportedScenarioError(f"n = {n} is not supported (choose from {SUPPORTED_N})", witness=n)
    settings = settings or Settings()
    ring = get_ring(n)
    momentum = ring.from_poly(ring.sphere_relation) * scalar(Fraction(1, 2))
    lie = abelian_algebra(1)
    symplectic = SymplecticData(symplectic_form(ring), [momentum], lie)
    ideal = SubmanifoldIdeal(momentum, symplectic.fundamental_fields, settings.degree_bound)
    connection, c0 = hopf_connection(ring, symplectic)
    failures = _axiom_checks(ring, symplectic, connection, ideal)
    if failures:
        raise ScenarioAxiomError(f"scenario n={n} fails {failures[0]['check']}", witness=failures[0]["witness"])
    logger.info("Built Hopf scenario n=%d (C^%d, connection constant %s)", n, ring.dim, format_scalar(c0))
    return Scenario(n, ring, symplectic, lie, connection, ideal, settings, c0)


def axiom_suite(scenario: Scenario) -> list[dict]:
    """Re-run the construction checks; an empty list means all pass."""
    return _axiom_checks(scenario.ring, scenario.symplectic, scenario.connection, scenario.ideal)


def su2_symplectic_data() -> SymplecticData:
    """C² with J_a = z̄ᵀσ_a z / 2 and [e_a, e_b] = ε_abc e_c, for structure-constant tests."""
    ring = get_ring(1)
    z1, z2 = ring.z_element(1), ring.z_element(2)
    zb1, zb2 = ring.zb_element(1), ring.zb_element(2)
    half = scalar(Fraction(1, 2))
    i = scalar(0, 1)
    momentum = [
        (zb1 * z2 + zb2 * z1) * half,
        (zb2 * z1 - zb1 * z2) * (i * half),
        (zb1 * z1 - zb2 * z2) * half,
    ]
    return SymplecticData(symplectic_form(ring), momentum, su2_algebra())
