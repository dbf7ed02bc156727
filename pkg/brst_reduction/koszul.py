"""
BRST Reduction - Koszul Module

The classical Koszul complex C∞(M_nice, Λ•g) with δ = ins(J), the
prolongation prol of functions on C to M_nice, the restriction ι*, and the
homotopy h₀ realized by exact division:

    h₀ f = e ⊗ (f − prol ι* f) / J

which is the closed form of the chart integral for a rank-one group, since
J is the radial coordinate of the tubular chart.
"""

import logging
from collections.abc import Mapping

from .errors import ZeroDegreeError
from .geometry import PolyForm, exterior_derivative, wedge_sign
from .ring import RingElement, divide_exact, homogeneous_components, restrict_to_sphere

logger = logging.getLogger(__name__)


class KoszulChain:
    """Σ_I x_I ⊗ e_I with e_I = e_{a1} ∧ ... ∧ e_{ak} in Λ•g.

    Coefficients are RingElements or NuSeries of RingElements; any type with
    +, −, scalar multiplication and truthiness works.
    """

    __slots__ = ("lie_dim", "components")

    def __init__(self, lie_dim: int, components: Mapping[tuple[int, ...], object] | None = None):
        self.lie_dim = lie_dim
        self.components = {}
        for indices, coeff in (components or {}).items():
            sign, key = wedge_sign(indices)
            if not sign or not coeff:
                continue
            if any(a >= lie_dim for a in key):
                raise ValueError(f"basis index out of range in {indices} (dim {lie_dim})")
            coeff = coeff if sign > 0 else -coeff
            if key in self.components:
                coeff = self.components[key] + coeff
                if not coeff:
                    del self.components[key]
                    continue
            self.components[key] = coeff

    @classmethod
    def function(cls, f, lie_dim: int = 1) -> "KoszulChain":
        return cls(lie_dim, {(): f})

    @classmethod
    def generator(cls, f, a: int = 0, lie_dim: int = 1) -> "KoszulChain":
        """f ⊗ e_a."""
        return cls(lie_dim, {(a,): f})

    def degrees(self) -> set[int]:
        return {len(k) for k in self.components}

    def part(self, degree: int) -> "KoszulChain":
        return KoszulChain(self.lie_dim, {k: v for k, v in self.components.items() if len(k) == degree})

    def component(self, *indices: int, zero=None):
        sign, key = wedge_sign(indices)
        value = self.components.get(key) if sign else None
        if value is None:
            return zero
        return value if sign > 0 else -value

    def map(self, fn) -> "KoszulChain":
        return KoszulChain(self.lie_dim, {k: fn(v) for k, v in self.components.items()})

    def __add__(self, other: "KoszulChain") -> "KoszulChain":
        comps = dict(self.components)
        for key, value in other.components.items():
            comps[key] = comps[key] + value if key in comps else value
        return KoszulChain(self.lie_dim, comps)

    def __neg__(self) -> "KoszulChain":
        return self.map(lambda v: -v)

    def __sub__(self, other: "KoszulChain") -> "KoszulChain":
        return self + (-other)

    def __mul__(self, factor) -> "KoszulChain":
        return self.map(lambda v: v * factor)

    def __bool__(self) -> bool:
        return bool(self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KoszulChain):
            return NotImplemented
        return self.lie_dim == other.lie_dim and self.components == other.components

    def __repr__(self) -> str:
        if not self.components:
            return "KoszulChain(0)"
        body = " + ".join(
            f"({v})⊗" + ("∧".join(f"e{a + 1}" for a in k) or "1")
            for k, v in sorted(self.components.items()))
        return f"KoszulChain({body})"


def insert_covector(x: KoszulChain, covector) -> KoszulChain:
    """ins(φ) for φ = (φ_a) in g* (or g*-valued functions): an antiderivation of Λ•g."""
    comps: dict = {}
    for key, coeff in x.components.items():
        for position, a in enumerate(key):
            factor = covector[a]
            if not factor:
                continue
            value = coeff * factor
            if position % 2:
                value = -value
            rest = key[:position] + key[position + 1:]
            comps[rest] = comps[rest] + value if rest in comps else value
    return KoszulChain(x.lie_dim, comps)


def delta(x: KoszulChain, momentum: list[RingElement], strict: bool = False) -> KoszulChain:
    """δ = ins(J). Degree-0 parts map to 0 (ZeroDegreeError when strict)."""
    if strict and x and x.degrees() == {0}:
        raise ZeroDegreeError("δ applied to a degree-0 chain", witness=x)
    return insert_covector(x, momentum)


def iota_star(f: RingElement) -> RingElement:
    """Restriction to C: s, w → 1, remainder modulo |z|² − 1."""
    return restrict_to_sphere(f)


def prolong(phi: RingElement) -> RingElement:
    """prol φ = φ∘(z/|z|): the degree-d piece of the representative times s^{−d}.

    Non-polynomial input is first restricted to C, so prol only depends on
    the function on C.
    """
    ring = phi.ring
    if not phi.is_polynomial():
        phi = restrict_to_sphere(phi)
    result = ring.zero
    for degree, piece in homogeneous_components(phi.even, ring).items():
        half, odd = divmod(degree, 2)
        if odd:
            # s^{-(2h+1)} = s·w^{h+1}
            result = result + RingElement(ring, ring.poly_ring.zero, 0, piece, half + 1)
        else:
            result = result + RingElement(ring, piece, half, ring.poly_ring.zero, 0)
    return result


def h0(f: RingElement, momentum: RingElement) -> KoszulChain:
    """Koszul homotopy on functions: e ⊗ (f − prol ι* f)/J (rank-one group).

    Raises NotDivisibleError when J does not divide f − prol ι* f in A,
    e.g. for a bare odd-weight monomial.
    """
    difference = f - prolong(iota_star(f))
    quotient = divide_exact(difference, momentum.even)
    return KoszulChain.generator(quotient, 0, 1)


def prolong_form(alpha: PolyForm) -> PolyForm:
    """Pullback of α along the retraction z ↦ z/|z| onto C."""
    ring = alpha.ring
    retraction = [exterior_derivative(PolyForm.function(prolong(ring.coordinate_element(j))))
                  for j in range(ring.nvars)]
    result = PolyForm.zero(ring)
    for key, coeff in alpha.terms.items():
        term = PolyForm.function(prolong(coeff))
        for j in key:
            term = term.wedge(retraction[j])
        result = result + term
    return result


# =============================================================================
# Property suite
# =============================================================================

def even_weight_test_functions(ring, degree_bound: int) -> list[RingElement]:
    """Monomials of even degree and s times monomials of odd degree, up to degree_bound."""
    functions = []
    for d in range(degree_bound + 1):
        for exps in ring.coordinate_monomials(d):
            f = ring.from_poly(ring.monomial(exps))
            functions.append(f if d % 2 == 0 else f * ring.s)
    return functions


def koszul_suite(momentum: RingElement, fundamental_fields: list, degree_bound: int = 6) -> tuple[int, list[dict]]:
    """prol ι* + δ₁h₀ = id, ι*δ₁ = 0, h₀ prol = 0 and X∘h₀ = h₀∘X on test monomials.

    Returns (number of checks, failures).
    """
    ring = momentum.ring
    checked = 0
    failures = []
    for f in even_weight_test_functions(ring, degree_bound):
        checked += 1
        chain = h0(f, momentum)
        if prolong(iota_star(f)) + delta(chain, [momentum]).component(zero=ring.zero) != f:
            failures.append({"identity": "prol_iota_plus_delta_h0", "witness": str(f)})
        checked += 1
        if iota_star(delta(KoszulChain.generator(f), [momentum]).component(zero=ring.zero)):
            failures.append({"identity": "iota_delta", "witness": str(f)})
        checked += 1
        if h0(prolong(iota_star(f)), momentum):
            failures.append({"identity": "h0_prol", "witness": str(f)})
        for a, X in enumerate(fundamental_fields):
            checked += 1
            lhs = X(chain.component(0, zero=ring.zero))
            rhs = h0(X(f), momentum).component(0, zero=ring.zero)
            if lhs != rhs:
                failures.append({"identity": "h0_equivariance", "a": a, "witness": str(f)})
    logger.info("Koszul suite: %d checks, %d failures", checked, len(failures))
    return checked, failures
