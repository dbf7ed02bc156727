"""
BRST Reduction - Quantum Reduction Module

The quantized Koszul operator

    ∂x = Σ_a ins(e^a)x ⋆ Ĵ_a + (ν/2) Σ C_ab^c e_c ∧ ins(e^a) ins(e^b) x + νκ ins(Δ)x,

the deformed restriction I* = ι* Σ_m (−(∂₁ − δ₁) h₀)^m, membership in the
left ideal J_C = im ∂₁ and its normalizer B_C, the reduced star product

    π*(u ⋆_red v) = I*(prol π*u ⋆ prol π*v),

functions on the reduced space and the transfer of equivalences.
"""

import itertools
import logging
from dataclasses import dataclass
from tokenize import TokenError

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.domains import QQ_I

from .errors import (
    DegreeBoundExceeded,
    ExpressionParseError,
    InternalConsistencyError,
    NotDivisibleError,
    NotInvariantError,
)
from .geometry import LieAlgebraData, SymplecticData, wedge_sign
from .koszul import KoszulChain, h0, insert_covector, iota_star, prolong
from .ring import CoordinateRing, RingElement, scalar
from .series import NuSeries
from .starprod import (
    EquivalenceOp,
    GaugeEquivalence,
    MonomialBasis,
    ProductTable,
    QuantumMomentumMap,
    StarProduct,
    as_series,
    coordinate_monomials,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuantizedKoszulConfig:
    """Data of the quantized Koszul complex; κ is a ν-series of scalars."""

    star: StarProduct
    qmm: QuantumMomentumMap
    lie: LieAlgebraData
    symplectic: SymplecticData
    kappa: NuSeries | None = None

    @property
    def ring(self) -> CoordinateRing:
        return self.star.ring

    @property
    def order(self) -> int:
        return self.star.order

    @property
    def momentum(self) -> list[RingElement]:
        return self.symplectic.momentum_map

    def kappa_series(self) -> NuSeries:
        return self.kappa if self.kappa is not None else NuSeries({}, self.order)


# =============================================================================
# The quantized Koszul operator
# =============================================================================

def _unit_covector(a: int, dim: int) -> list:
    return [QQ_I.one if b == a else QQ_I.zero for b in range(dim)]


def quantized_koszul(x: KoszulChain, cfg: QuantizedKoszulConfig) -> KoszulChain:
    order = cfg.order
    dim = cfg.lie.dimension
    x = x.map(lambda c: as_series(c, order))
    result = KoszulChain(dim)
    for a in range(dim):
        inserted = insert_covector(x, _unit_covector(a, dim))
        result = result + inserted.map(lambda c, a=a: cfg.star.star(c, cfg.qmm[a], order))
    if not cfg.lie.is_abelian:
        half = scalar("1/2")
        comps: dict = {}
        for a, b, c in itertools.product(range(dim), repeat=3):
            constant = cfg.lie.constant(a, b, c)
            if not constant:
                continue
            twice = insert_covector(insert_covector(x, _unit_covector(b, dim)), _unit_covector(a, dim))
            for key, coeff in twice.components.items():
                sign, new_key = wedge_sign((c,) + key)
                if not sign:
                    continue
                value = coeff.shift(1) * (constant * half * sign)
                comps[new_key] = comps[new_key] + value if new_key in comps else value
        result = result + KoszulChain(dim, comps)
    kappa = cfg.kappa_series()
    modular = cfg.lie.modular_form
    if kappa and any(modular):
        kappa_nu = kappa.shift(1)
        inserted = insert_covector(x, modular)
        result = result + inserted.map(lambda c: c * kappa_nu)
    return result


def left_multiply(g, x: KoszulChain, cfg: QuantizedKoszulConfig) -> KoszulChain:
    """g ⋆ x, acting on coefficients."""
    return x.map(lambda c: cfg.star.star(g, c, cfg.order))


# =============================================================================
# Deformed restriction
# =============================================================================

def _require_rank_one(cfg: QuantizedKoszulConfig) -> None:
    if cfg.lie.dimension != 1:
        raise ValueError("the explicit homotopy h0 is only available for a rank-one group")


def _h0_series(F: NuSeries, momentum: RingElement) -> NuSeries:
    return F.map(lambda y: h0(y, momentum).component(0))


def _deformation_step(F: NuSeries, cfg: QuantizedKoszulConfig) -> NuSeries:
    """−(∂₁ − δ₁) h₀ F, flagged truncated when part of it lies beyond cfg.order."""
    J = cfg.momentum[0]
    Y = _h0_series(F, J)
    if not Y:
        return NuSeries({}, F.order, F.truncated)
    quantum = quantized_koszul(KoszulChain.generator(Y, 0, 1), cfg).component(zero=NuSeries({}, cfg.order))
    classical = Y.map(lambda y: y * J)
    # the step raises the ν-order, so h₀F at ν^order only feeds dropped orders
    return (-(quantum - classical)).flagged(bool(Y.coefficient(cfg.order, None)))


def I_star(f, cfg: QuantizedKoszulConfig) -> NuSeries:
    """ι* (id + (∂₁ − δ₁)h₀)^{-1} as a geometric series cut at cfg.order.

    The result is flagged truncated when a step of the series had terms
    beyond cfg.order.
    """
    _require_rank_one(cfg)
    F = as_series(f, cfg.order)
    total = F
    term = F
    steps = 0
    while term:
        term = _deformation_step(term, cfg)
        steps += 1
        if term.valuation() is not None and term.valuation() <= F.valuation() + steps - 1:
            raise InternalConsistencyError("(∂₁ − δ₁)h₀ did not raise the ν-order")
        total = total + term
    logger.debug("I* converged after %d steps", steps)
    return total.map(iota_star)


def in_ideal(f, cfg: QuantizedKoszulConfig) -> bool:
    """f ∈ J_C iff I*f = 0 (exactness of the augmented complex)."""
    return not I_star(f, cfg)


def normalizer_witness(f, cfg: QuantizedKoszulConfig, degree_bound: int):
    """First test function g with [f, g ⋆ Ĵ] ∉ J_C, or None.

    Test functions are the monomials of degree ≤ degree_bound whose radial
    weight parity matches f, so every commutator lies in the even sector
    where h₀ is defined.
    """
    series = as_series(f, cfg.order)
    degree = max((c.degree() for _, c in series.items()), default=-1)
    if degree > degree_bound:
        raise DegreeBoundExceeded(f"degree {degree} exceeds bound {degree_bound}", witness=f)
    parities = {w % 2 for _, c in series.items() for w in c.radial_weights()}
    if len(parities) > 1:
        raise NotDivisibleError("mixed radial weight parity", witness=f)
    parity = parities.pop() if parities else 0
    J_hat = cfg.qmm[0]
    for g in coordinate_monomials(cfg.ring, degree_bound):
        if g.degree() % 2 != parity:
            continue
        generator = cfg.star.star(g, J_hat, cfg.order)
        bracket = cfg.star.commutator(series, generator, cfg.order)
        if not in_ideal(bracket, cfg):
            logger.info("normalizer test fails for %s with g = %s", f, g)
            return g
    return None


def in_normalizer(f, cfg: QuantizedKoszulConfig, degree_bound: int) -> bool:
    _require_rank_one(cfg)
    return normalizer_witness(f, cfg, degree_bound) is None


# =============================================================================
# Functions on the reduced space
# =============================================================================

class ReducedFunction:
    """A function on M_red, stored by its normal form on C.

    The representative prol(normal_form) is a polynomial in h_jk = z_j z̄_k w.
    """

    __slots__ = ("normal_form",)

    def __init__(self, normal_form: RingElement):
        self.normal_form = normal_form

    @classmethod
    def from_element(cls, f: RingElement, symplectic: SymplecticData | None = None) -> "ReducedFunction":
        """Restrict an invariant function to C; NotInvariantError otherwise."""
        if symplectic is not None:
            for X in symplectic.fundamental_fields:
                if X(f):
                    raise NotInvariantError(f"{f} is not invariant", witness=X(f))
        elif f.charges() - {0}:
            raise NotInvariantError(f"{f} has nonzero charge", witness=f)
        return cls(iota_star(f))

    @property
    def ring(self) -> CoordinateRing:
        return self.normal_form.ring

    @property
    def representative(self) -> RingElement:
        return prolong(self.normal_form)

    def __add__(self, other: "ReducedFunction") -> "ReducedFunction":
        return ReducedFunction(self.normal_form + other.normal_form)

    def __sub__(self, other: "ReducedFunction") -> "ReducedFunction":
        return ReducedFunction(self.normal_form - other.normal_form)

    def __neg__(self) -> "ReducedFunction":
        return ReducedFunction(-self.normal_form)

    def __mul__(self, other) -> "ReducedFunction":
        if isinstance(other, ReducedFunction):
            return ReducedFunction(iota_star(self.normal_form * other.normal_form))
        return ReducedFunction(self.normal_form * other)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.normal_form)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReducedFunction):
            return NotImplemented
        return self.normal_form == other.normal_form

    def __hash__(self) -> int:
        return hash(self.normal_form)

    def __repr__(self) -> str:
        return f"ReducedFunction({self.normal_form})"

    def to_json(self) -> dict:
        return {"normal_form": str(self.normal_form), "terms": self.normal_form.to_json()}


def balanced_generator(ring: CoordinateRing, j: int, k: int) -> RingElement:
    """h_jk = z_j z̄_k w."""
    return ring.z_element(j) * ring.zb_element(k) * ring.w


def parse_reduced(text: str, ring: CoordinateRing, symplectic: SymplecticData | None = None) -> ReducedFunction:
    """Parse an expression in h<j><k>, rationals, +, −, *, ^ (z_k, zb_k, w, s also accepted)."""
    names = {}
    for j in range(1, ring.dim + 1):
        for k in range(1, ring.dim + 1):
            names[f"h{j}{k}"] = sp.Symbol(f"z{j}") * sp.Symbol(f"zb{k}") * sp.Symbol("w")
    for name in ring.poly_ring.symbols:
        names[str(name)] = name
    try:
        expr = parse_expr(text, local_dict=names, transformations=standard_transformations + (convert_xor,))
    except (SyntaxError, TokenError, TypeError, ValueError, sp.SympifyError) as exc:
        raise ExpressionParseError(f"Cannot parse {text!r}: {exc}") from exc
    unknown = {str(s) for s in expr.free_symbols} - {str(s) for s in ring.poly_ring.symbols}
    if unknown:
        raise ExpressionParseError(f"Unknown identifiers in {text!r}: {', '.join(sorted(unknown))}")
    return ReducedFunction.from_element(ring.from_expr(expr), symplectic)


def to_reduced(f, cfg: QuantizedKoszulConfig) -> NuSeries:
    """The map B_C/J_C → C∞(M_red)⟦ν⟧, f ↦ I*f."""
    return I_star(f, cfg).map(ReducedFunction)


def from_reduced(u: ReducedFunction) -> RingElement:
    """prol π*u."""
    return u.representative


def reduced_star(u: ReducedFunction, v: ReducedFunction, cfg: QuantizedKoszulConfig,
                 order: int | None = None) -> NuSeries:
    order = cfg.order if order is None else order
    product = cfg.star.star(u.representative, v.representative, order)
    result = I_star(product, cfg).map(ReducedFunction)
    return NuSeries(dict(result.items()), order, result.truncated)


def fubini_study_bracket(u: ReducedFunction, v: ReducedFunction, symplectic: SymplecticData) -> ReducedFunction:
    """ι*{prol π*u, prol π*v}_ω, the Poisson bracket of the reduced space."""
    bracket = symplectic.poisson_bracket(u.representative, v.representative)
    return ReducedFunction(iota_star(bracket))


# =============================================================================
# Product tables and equivalences on the reduced space
# =============================================================================

def reduced_basis(ring: CoordinateRing, degree_bound: int) -> MonomialBasis:
    """Charge-0 standard monomials modulo |z|² − 1 (not divisible by z1 z̄1)."""
    exps = []
    for d in range(degree_bound + 1):
        for e in ring.coordinate_monomials(d, charge=0):
            if e[0] and e[1]:
                continue
            exps.append(e)
    return MonomialBasis(ring, exps)


def reduced_product_table(cfg: QuantizedKoszulConfig, degree_bound: int, order: int,
                          label: str = "reduced") -> ProductTable:
    basis = reduced_basis(cfg.ring, degree_bound)
    table = ProductTable(basis, degree_bound, order, {}, label=label)
    elements = [ReducedFunction(basis.element(i)) for i in range(len(basis))]
    for i, j in table.pairs():
        series = reduced_star(elements[i], elements[j], cfg, order)
        for r, value in series.items():
            coords = basis.coordinates(value.normal_form)
            if coords:
                table.products[r][(i, j)] = coords
    logger.info("Reduced product table (%s): %d basis elements, %d pairs",
                label, len(basis), len(table.pairs()))
    return table


def polynomial_lift(u: RingElement, cfg: QuantizedKoszulConfig) -> NuSeries:
    """A ν-series of polynomials F with I*F = u, i.e. prol u modulo J_C.

    Starts from the normal form of u and subtracts I*F − u order by order.
    """
    target = NuSeries.constant(u, cfg.order)
    lift = target
    for _ in range(cfg.order):
        error = I_star(lift, cfg) - target
        if not error:
            break
        lift = lift - error
    return lift


def reduce_equivalence(T: GaugeEquivalence | EquivalenceOp, cfg: QuantizedKoszulConfig,
                       degree_bound: int, order: int | None = None) -> EquivalenceOp:
    """T_red = (π*)^{-1} ∘ I* ∘ T ∘ prol ∘ π* on the reduced basis of degree ≤ degree_bound.

    T is a gauge equivalence exp(ν{b, ·}) or a matrix EquivalenceOp on
    ambient U(1)-invariant polynomials. The latter cannot act on prol u, so
    it is applied to polynomial_lift(u), which lies in the same class modulo
    J_C.
    """
    order = cfg.order if order is None else order
    T.check_equivariance(cfg.momentum)
    basis = reduced_basis(cfg.ring, degree_bound)
    stages: dict[int, dict] = {}
    for i in range(len(basis)):
        if isinstance(T, EquivalenceOp):
            transformed = T.apply_function(polynomial_lift(basis.element(i), cfg))
        else:
            transformed = T.apply(prolong(basis.element(i)))
        image = I_star(transformed, cfg)
        for k, value in image.items():
            if k > order:
                continue
            coords = basis.coordinates(value)
            if k == 0:
                if coords != {i: QQ_I.one}:
                    raise InternalConsistencyError(
                        f"reduced equivalence is not the identity at order 0 on {basis.label(i)}")
                continue
            stages.setdefault(k, {})[i] = coords
    return EquivalenceOp(basis, stages, order)


# =============================================================================
# Property suite
# =============================================================================

def quantized_koszul_suite(cfg: QuantizedKoszulConfig, degree_bound: int = 6) -> tuple[int, list[dict]]:
    """Classical limit, left ⋆-linearity and ∂∘∂ = 0 of ∂, and I*∂₁ = 0, I*prol = id.

    Left linearity is checked on pairs of total degree ≤ degree_bound.

    Returns (number of checks, failures).
    """
    ring = cfg.ring
    dim = cfg.lie.dimension
    zero_series = NuSeries({}, cfg.order)
    checked = 0
    failures = []
    monomials = coordinate_monomials(ring, degree_bound)
    for f in monomials:
        for a in range(dim):
            x = KoszulChain.generator(f, a, dim)
            image = quantized_koszul(x, cfg)
            checked += 1
            classical = image.map(lambda c: c.coefficient(0, ring.zero))
            if classical != insert_covector(x, cfg.momentum):
                failures.append({"identity": "classical_limit", "a": a, "witness": str(f)})
            for g in monomials:
                if f.degree() + g.degree() > degree_bound:
                    continue
                checked += 1
                lhs = quantized_koszul(left_multiply(g, x, cfg), cfg)
                rhs = left_multiply(g, image, cfg)
                if lhs != rhs:
                    failures.append({"identity": "left_linearity", "a": a, "witness": f"g={g}, f={f}"})
        for a, b in itertools.combinations(range(dim), 2):
            checked += 1
            twice = quantized_koszul(quantized_koszul(KoszulChain(dim, {(a, b): f}), cfg), cfg)
            if any(twice.components.values()):
                failures.append({"identity": "d_squared", "witness": f"{f} e{a + 1}∧e{b + 1}"})
    if dim == 1:
        for f in monomials:
            if any(w % 2 for w in f.radial_weights()):
                continue
            checked += 1
            image = quantized_koszul(KoszulChain.generator(f), cfg).component(zero=zero_series)
            if I_star(image, cfg):
                failures.append({"identity": "I_star_kills_image", "witness": str(f)})
        basis = reduced_basis(ring, degree_bound)
        for i in range(len(basis)):
            u = basis.element(i)
            checked += 1
            if I_star(prolong(u), cfg) != NuSeries.constant(u, cfg.order):
                failures.append({"identity": "I_star_prol", "witness": str(u)})
    logger.info("Quantized Koszul suite: %d checks, %d failures", checked, len(failures))
    return checked, failures


def reduced_star_series(U: NuSeries, V: NuSeries, cfg: QuantizedKoszulConfig, order: int | None = None) -> NuSeries:
    """Bilinear extension of ⋆_red to ν-series of reduced functions."""
    order = cfg.order if order is None else order
    total = NuSeries({}, order)
    for i, u in U.items():
        for j, v in V.items():
            if i + j > order:
                continue
            total = total + reduced_star(u, v, cfg, order - i - j).shift(i + j).truncate(order)
    return total


def balanced_monomials(ring: CoordinateRing, degree: int) -> list[ReducedFunction]:
    """Products of at most `degree` generators h_jk, as functions on M_red."""
    generators = [balanced_generator(ring, j, k) for j in range(1, ring.dim + 1) for k in range(1, ring.dim + 1)]
    functions = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(len(generators)), d):
            f = ring.one
            for index in combo:
                f = f * generators[index]
            functions.append(ReducedFunction.from_element(f))
    return functions


def reduced_product_suite(cfg: QuantizedKoszulConfig, degree: int = 2, order: int = 3) -> tuple[int, list[dict]]:
    """Associativity of ⋆_red to the given order, pointwise order 0 and the bracket at order 1."""
    functions = balanced_monomials(cfg.ring, degree)
    checked = 0
    failures = []
    products = {}
    zero = ReducedFunction(cfg.ring.zero)
    for u, v in itertools.product(functions, repeat=2):
        series = reduced_star(u, v, cfg, order)
        products[(u, v)] = series
        checked += 1
        if series.coefficient(0, zero) != u * v:
            failures.append({"identity": "order_zero_pointwise", "witness": f"{u} ⋆ {v}"})
        if order >= 1:
            checked += 1
            antisymmetric = series.coefficient(1, zero) - reduced_star(v, u, cfg, 1).coefficient(1, zero)
            if antisymmetric != fubini_study_bracket(u, v, cfg.symplectic):
                failures.append({"identity": "order_one_bracket", "witness": f"{u}, {v}"})
    for u, v, w in itertools.product(functions, repeat=3):
        checked += 1
        left = reduced_star_series(products[(u, v)], NuSeries.constant(w, order), cfg, order)
        right = reduced_star_series(NuSeries.constant(u, order), products[(v, w)], cfg, order)
        if left != right:
            failures.append({"identity": "associativity", "witness": f"({u}, {v}, {w})"})
    logger.info("Reduced product suite: %d checks, %d failures", checked, len(failures))
    return checked, failures
