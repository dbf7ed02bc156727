"""
BRST Reduction - Star Product Module

The Wick star product on C^{n+1},

    f ⋆ g = Σ_r ν^r λ^r Σ_{|α|=r} (1/α!) ∂_z^α f · ∂_z̄^α g,

quantum momentum maps and their verification, and equivalence
transformations: explicit gauge equivalences exp(ν{b, ·}) and the
degree-filtered search for an equivalence between two products given by
their structure constants on a monomial basis.
"""

import itertools
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from sympy.polys.domains import QQ, QQ_I

from .errors import DegreeBoundExceeded, InternalConsistencyError, NotEquivariantError
from .geometry import SymplecticData
from .linalg import LinearSystem
from .ring import CoordinateRing, RingElement, format_scalar, to_scalar
from .series import NuSeries

logger = logging.getLogger(__name__)


def as_series(value, order: int) -> NuSeries:
    if isinstance(value, NuSeries):
        return value
    return NuSeries.constant(value, order)


# =============================================================================
# The Wick product
# =============================================================================

class StarProduct:
    """Wick-type product with holomorphic derivatives on the left factor.

    `weight` is λ, the scalar multiplying each contraction; it is fixed by
    requiring C₁(f,g) − C₁(g,f) = {f,g}.
    """

    kind = "wick"

    def __init__(self, ring: CoordinateRing, weight, order: int = 4):
        self.ring = ring
        self.weight = to_scalar(weight)
        self.order = order

    @classmethod
    def wick(cls, symplectic: SymplecticData, order: int = 4) -> "StarProduct":
        ring = symplectic.ring
        # C₁(z1, z̄1) − C₁(z̄1, z1) = λ, so λ = {z1, z̄1}
        bracket = symplectic.poisson_bracket(ring.z_element(1), ring.zb_element(1))
        weight = bracket.constant_value()
        if weight is None or not weight:
            raise InternalConsistencyError("{z1, z̄1} is not a nonzero constant", witness=bracket)
        logger.debug("Wick weight λ = %s", format_scalar(weight))
        return cls(ring, weight, order)

    def with_order(self, order: int) -> "StarProduct":
        return StarProduct(self.ring, self.weight, order)

    # -- cochains ------------------------------------------------------------------

    def _derivatives(self, f: RingElement, holomorphic: bool, max_order: int) -> list[dict]:
        """levels[r] = {α: ∂^α f} over nonzero derivatives with |α| = r."""
        offset = 0 if holomorphic else 1
        dim = self.ring.dim
        levels = [{(0,) * dim: f}]
        for _ in range(max_order):
            nxt = {}
            for alpha, value in levels[-1].items():
                last = max((k for k in range(dim) if alpha[k]), default=0)
                for k in range(last, dim):
                    derivative = value.diff(2 * k + offset)
                    if derivative:
                        beta = alpha[:k] + (alpha[k] + 1,) + alpha[k + 1:]
                        nxt[beta] = derivative
            if not nxt:
                break
            levels.append(nxt)
        return levels

    def _contract(self, f_levels, g_levels, r: int) -> RingElement:
        total = self.ring.zero
        if r >= len(f_levels) or r >= len(g_levels):
            return total
        g_level = g_levels[r]
        for alpha, df in f_levels[r].items():
            dg = g_level.get(alpha)
            if dg is None:
                continue
            factorial = math.prod(math.factorial(a) for a in alpha)
            total = total + (df * dg) * QQ_I.convert(QQ(1, factorial))
        return total * self.weight ** r

    def cochain(self, f: RingElement, g: RingElement, r: int) -> RingElement:
        """C_r(f, g), the coefficient of ν^r in f ⋆ g."""
        return self._contract(self._derivatives(f, True, r), self._derivatives(g, False, r), r)

    # -- products --------------------------------------------------------------------

    def star(self, f, g, order: int | None = None) -> NuSeries:
        order = self.order if order is None else order
        left, right = as_series(f, order), as_series(g, order)
        order = min(order, left.order, right.order)
        coeffs: dict[int, RingElement] = {}
        truncated = left.truncated or right.truncated
        for (i, fi), (j, gj) in itertools.product(left.items(), right.items()):
            cap = order - i - j
            if cap < 0:
                continue
            f_levels = self._derivatives(fi, True, cap + 1)
            g_levels = self._derivatives(gj, False, cap + 1)
            for r in range(min(cap, len(f_levels) - 1, len(g_levels) - 1) + 1):
                term = self._contract(f_levels, g_levels, r)
                if term:
                    k = i + j + r
                    coeffs[k] = coeffs[k] + term if k in coeffs else term
            if len(f_levels) > cap + 1 and len(g_levels) > cap + 1:
                truncated = True
        if truncated:
            logger.debug("star product truncated at ν^%d", order)
        return NuSeries(coeffs, order, truncated)

    def commutator(self, f, g, order: int | None = None) -> NuSeries:
        return self.star(f, g, order) - self.star(g, f, order)

    def check_conventions(self, symplectic: SymplecticData) -> list[dict]:
        """C₁(f,g) − C₁(g,f) = {f,g} on all pairs of coordinates."""
        ring = self.ring
        failures = []
        for i, j in itertools.combinations(range(ring.nvars), 2):
            f, g = ring.coordinate_element(i), ring.coordinate_element(j)
            lhs = self.cochain(f, g, 1) - self.cochain(g, f, 1)
            rhs = symplectic.poisson_bracket(f, g)
            if lhs != rhs:
                failures.append({"check": "c1_antisymmetry", "witness": f"({f}, {g}): {lhs} != {rhs}"})
        return failures

    def to_json(self) -> dict:
        return {"kind": self.kind, "weight": format_scalar(self.weight), "order": self.order}


def star(star_product: StarProduct, f, g, order: int | None = None) -> NuSeries:
    return star_product.star(f, g, order)


def commutator(star_product: StarProduct, f, g, order: int | None = None) -> NuSeries:
    return star_product.commutator(f, g, order)


# =============================================================================
# Quantum momentum maps
# =============================================================================

@dataclass(frozen=True)
class QuantumMomentumMap:
    """Ĵ_a = J_a + Σ_{k≥1} ν^k J_a^{(k)}, one series per basis element of g."""

    values: tuple[NuSeries, ...]

    @classmethod
    def from_classical(cls, momentum: list[RingElement], shift=None, order: int = 4) -> "QuantumMomentumMap":
        """Ĵ_a = J_a + ν·shift_a; `shift` is a scalar, a RingElement or a list of either."""
        if shift is None:
            shifts = [0] * len(momentum)
        elif isinstance(shift, (list, tuple)):
            shifts = list(shift)
        else:
            shifts = [shift] * len(momentum)
        values = []
        for J, c in zip(momentum, shifts):
            correction = c if isinstance(c, RingElement) else J.ring.from_scalar(c)
            values.append(NuSeries({0: J, 1: correction}, order))
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, a: int) -> NuSeries:
        return self.values[a]

    @property
    def classical(self) -> list[RingElement]:
        return [v.coefficient(0) for v in self.values]

    def to_json(self) -> list[list[dict]]:
        return [[{"k": k, "value": v.to_json()} for k, v in series.items()] for series in self.values]


@dataclass
class QmmReport:
    status: str
    checked: int
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"status": self.status, "checked": self.checked, "failures": self.failures}


def coordinate_monomials(ring: CoordinateRing, degree_bound: int, charge: int | None = None) -> list[RingElement]:
    """All monomials in z, z̄ of degree ≤ degree_bound (optionally of a fixed charge)."""
    return [ring.from_poly(ring.monomial(exps))
            for d in range(degree_bound + 1)
            for exps in ring.coordinate_monomials(d, charge)]


def verify_qmm(qmm: QuantumMomentumMap, star_product: StarProduct, symplectic: SymplecticData,
               degree_bound: int = 3) -> QmmReport:
    """Check L_{X_a} f = −(1/ν)[Ĵ_a, f]_⋆ and [Ĵ_a, Ĵ_b]_⋆ = ν Ĵ([e_a, e_b]).

    The first identity is checked on every monomial of degree ≤ degree_bound.
    """
    order = star_product.order
    failures = []
    checked = 0
    fields = symplectic.fundamental_fields
    for f in coordinate_monomials(star_product.ring, degree_bound):
        for a, X in enumerate(fields):
            checked += 1
            lhs = NuSeries({1: X(f)}, order)
            rhs = -star_product.commutator(qmm[a], f, order)
            if lhs != rhs:
                failures.append({"identity": "fundamental_field", "a": a, "witness": str(f)})
    lie = symplectic.lie
    for a, b in itertools.product(range(len(qmm)), repeat=2):
        checked += 1
        expected = NuSeries({}, order)
        for c in range(len(qmm)):
            constant = lie.constant(a, b, c)
            if constant:
                expected = expected + qmm[c].shift(1) * constant
        if star_product.commutator(qmm[a], qmm[b], order) != expected.truncate(order):
            failures.append({"identity": "bracket", "a": a, "b": b, "witness": f"[Ĵ_{a}, Ĵ_{b}]"})
    status = "FAIL" if failures else "PASS"
    logger.info("verify_qmm: %s (%d checks, %d failures)", status, checked, len(failures))
    return QmmReport(status, checked, failures)


# =============================================================================
# Monomial bases, product tables and equivalence operators
# =============================================================================

Vector = dict  # basis index -> Scalar


def _vec_add(target: dict, source: Mapping, factor=QQ_I.one) -> None:
    for key, value in source.items():
        new = target.get(key, QQ_I.zero) + value * factor
        if new:
            target[key] = new
        else:
            target.pop(key, None)


class MonomialBasis:
    """A finite set of z, z̄-monomials spanning the filtered function space."""

    def __init__(self, ring: CoordinateRing, exponents: Iterable[tuple[int, ...]]):
        self.ring = ring
        self.exponents = sorted(set(exponents), key=lambda e: (sum(e), tuple(-x for x in e)))
        self.degrees = [sum(e) for e in self.exponents]
        self.index = {e: i for i, e in enumerate(self.exponents)}

    def __len__(self) -> int:
        return len(self.exponents)

    def element(self, i: int) -> RingElement:
        return self.ring.from_poly(self.ring.monomial(self.exponents[i]))

    def label(self, i: int) -> str:
        return str(self.element(i))

    def coordinates(self, f: RingElement) -> Vector:
        if not f.is_polynomial():
            raise ValueError(f"{f} is not a polynomial in the basis")
        coords = {}
        for monom, coeff in f.even.terms():
            exps = monom[:self.ring.nvars]
            i = self.index.get(exps)
            if i is None:
                raise DegreeBoundExceeded(f"monomial {exps} outside the basis", witness=f)
            coords[i] = coeff
        return coords

    def combine(self, vec: Mapping) -> RingElement:
        total = self.ring.zero
        for i, value in vec.items():
            total = total + self.element(i) * value
        return total


def invariant_basis(ring: CoordinateRing, degree_bound: int) -> MonomialBasis:
    """U(1)-invariant (charge 0) monomials of degree ≤ degree_bound."""
    return MonomialBasis(ring, (e for d in range(degree_bound + 1)
                                for e in ring.coordinate_monomials(d, charge=0)))


class ProductTable:
    """Structure constants C_r(b_i, b_j) for r ≤ order and deg b_i + deg b_j ≤ degree_bound."""

    def __init__(self, basis: MonomialBasis, degree_bound: int, order: int,
                 products: Mapping[int, Mapping[tuple[int, int], Vector]], label: str = ""):
        self.basis = basis
        self.degree_bound = degree_bound
        self.order = order
        self.products = {r: dict(products.get(r, {})) for r in range(order + 1)}
        self.label = label

    def pairs(self) -> list[tuple[int, int]]:
        degs = self.basis.degrees
        n = len(self.basis)
        return [(i, j) for i in range(n) for j in range(n) if degs[i] + degs[j] <= self.degree_bound]

    def product(self, x: Mapping, y: Mapping, r: int) -> Vector:
        """Bilinear extension of C_r to coordinate vectors."""
        result: dict = {}
        table = self.products[r]
        for (i, a), (j, b) in itertools.product(x.items(), y.items()):
            if self.basis.degrees[i] + self.basis.degrees[j] > self.degree_bound:
                raise DegreeBoundExceeded(f"product of basis {i} and {j} outside the table")
            _vec_add(result, table.get((i, j), {}), a * b)
        return result

    def conjugate(self, T: "EquivalenceOp") -> "ProductTable":
        """The product u ⋆' v = T^{-1}(T u ⋆ T v)."""
        order = min(self.order, T.order)
        inverse = T.inverse()
        products: dict = {r: {} for r in range(order + 1)}
        unit = lambda i: {i: QQ_I.one}  # noqa: E731
        for i, j in self.pairs():
            images_i = [T.stage_apply(p, unit(i)) for p in range(order + 1)]
            images_j = [T.stage_apply(q, unit(j)) for q in range(order + 1)]
            for m in range(order + 1):
                total: dict = {}
                for a, b, c in itertools.product(range(m + 1), repeat=3):
                    r = m - a - b - c
                    if r < 0:
                        continue
                    inner = self.product(images_i[b], images_j[c], r)
                    _vec_add(total, inverse.stage_apply(a, inner))
                if total:
                    products[m][(i, j)] = total
        return ProductTable(self.basis, self.degree_bound, order, products, f"{self.label} conjugated")


class EquivalenceOp:
    """T = id + Σ_{k≥1} ν^k T_k; stages[k][i] is the coordinate vector of T_k(b_i)."""

    def __init__(self, basis: MonomialBasis, stages: Mapping[int, Mapping[int, Vector]], order: int):
        self.basis = basis
        self.order = order
        self.stages = {k: {i: dict(v) for i, v in cols.items() if v}
                       for k, cols in stages.items() if 1 <= k <= order}

    @classmethod
    def identity(cls, basis: MonomialBasis, order: int) -> "EquivalenceOp":
        return cls(basis, {}, order)

    def stage_apply(self, k: int, vec: Mapping) -> Vector:
        if k == 0:
            return {i: v for i, v in vec.items() if v}
        result: dict = {}
        columns = self.stages.get(k, {})
        for i, value in vec.items():
            _vec_add(result, columns.get(i, {}), value)
        return result

    def apply(self, vec: Mapping) -> NuSeries:
        return NuSeries({k: self.stage_apply(k, vec) for k in range(self.order + 1)}, self.order)

    def inverse(self) -> "EquivalenceOp":
        """S = T^{-1}: S_m = −Σ_{p=1..m} T_p S_{m−p} (unitriangular in ν)."""
        n = len(self.basis)
        inv: dict[int, dict[int, Vector]] = {}
        for m in range(1, self.order + 1):
            cols = {}
            for i in range(n):
                total: dict = {}
                for p in range(1, m + 1):
                    prev = {i: QQ_I.one} if m - p == 0 else inv[m - p].get(i, {})
                    _vec_add(total, self.stage_apply(p, prev), -QQ_I.one)
                if total:
                    cols[i] = total
            inv[m] = cols
        return EquivalenceOp(self.basis, inv, self.order)

    def is_identity(self) -> bool:
        return not any(self.stages.values())

    @classmethod
    def from_gauge(cls, gauge: "GaugeEquivalence", basis: MonomialBasis) -> "EquivalenceOp":
        """Matrix of exp(ν{b, ·}) on a basis it preserves."""
        stages: dict[int, dict[int, Vector]] = {}
        for i in range(len(basis)):
            for k, value in gauge.apply(basis.element(i)).items():
                if k:
                    stages.setdefault(k, {})[i] = basis.coordinates(value)
        return cls(basis, stages, gauge.order)

    def apply_function(self, f) -> NuSeries:
        """T on a ν-series of polynomials in the span of the basis."""
        series = as_series(f, self.order)
        coeffs: dict[int, RingElement] = {}
        for j, fj in series.items():
            vec = self.basis.coordinates(fj)
            for k in range(self.order - j + 1):
                image = self.basis.combine(self.stage_apply(k, vec))
                if image:
                    coeffs[j + k] = coeffs[j + k] + image if j + k in coeffs else image
        return NuSeries(coeffs, min(self.order, series.order), series.truncated)

    def check_equivariance(self, momentum: list[RingElement]) -> None:
        """T must act on U(1)-invariants and fix every component of J."""
        for i in range(len(self.basis)):
            if self.basis.element(i).charges() - {0}:
                raise NotEquivariantError(
                    f"basis element {self.basis.label(i)} is not U(1)-invariant", witness=self.basis.element(i))
        for a, J in enumerate(momentum):
            try:
                vec = self.basis.coordinates(J)
            except ValueError as exc:
                raise NotEquivariantError(f"J_{a} lies outside the basis", witness=J) from exc
            for k in range(1, self.order + 1):
                moved = self.stage_apply(k, vec)
                if moved:
                    raise NotEquivariantError(f"T_{k} moves J_{a}", witness=self.basis.combine(moved))

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "dimension": len(self.basis),
            "stages": [
                {"k": k, "entries": [[self.basis.label(i), self.basis.label(l), format_scalar(v)]
                                     for i in sorted(cols) for l, v in sorted(cols[i].items())]}
                for k, cols in sorted(self.stages.items()) if cols
            ],
        }


def ambient_product_table(star_product: StarProduct, degree_bound: int, order: int) -> ProductTable:
    """Wick structure constants on U(1)-invariant polynomials of degree ≤ degree_bound."""
    basis = invariant_basis(star_product.ring, degree_bound)
    table = ProductTable(basis, degree_bound, order, {}, label="ambient wick")
    for i, j in table.pairs():
        u, v = basis.element(i), basis.element(j)
        for r in range(order + 1):
            coords = basis.coordinates(star_product.cochain(u, v, r))
            if coords:
                table.products[r][(i, j)] = coords
    logger.info("Ambient product table: %d basis elements, %d pairs", len(basis), len(table.pairs()))
    return table


# =============================================================================
# Equivalence search
# =============================================================================

@dataclass
class EquivalenceResult:
    """FOUND with an operator, or NONE_UP_TO(class_order, degree_bound)."""

    operator: EquivalenceOp | None
    class_order: int
    degree_bound: int
    dimension: int
    obstruction_order: int | None = None
    obstruction_witness: str | None = None

    @property
    def found(self) -> bool:
        return self.operator is not None

    @property
    def status(self) -> str:
        return "FOUND" if self.found else "NONE_UP_TO"

    def to_json(self) -> dict:
        data = {
            "status": self.status,
            "order": self.class_order,
            "degree_bound": self.degree_bound,
            "dimension": self.dimension,
            "obstruction_order": self.obstruction_order,
            "obstruction_witness": self.obstruction_witness,
        }
        if self.operator is not None:
            data["operator"] = self.operator.to_json()
        return data


class _StageEquations:
    """Linear equations δT_m(u,v) − (derivation corrections) = known, per pair and coordinate."""

    def __init__(self, table1: ProductTable, table2: ProductTable):
        self.t1, self.t2 = table1, table2
        self.basis = table1.basis
        self.degrees = self.basis.degrees
        n = len(self.basis)
        self.filtered = {i: [l for l in range(n) if self.degrees[l] <= self.degrees[i]] for i in range(n)}

    def hochschild(self, tag: str, i: int, j: int, eqs: dict, sign=QQ_I.one):
        """Add sign·(X(b_i b_j) − X(b_i) b_j − b_i X(b_j)) for the filtered unknown map X named tag."""
        uv = self.t2.product({i: QQ_I.one}, {j: QQ_I.one}, 0)
        for src, value in uv.items():
            for l in self.filtered[src]:
                eqs.setdefault(l, {})
                key = (tag, src, l)
                eqs[l][key] = eqs[l].get(key, QQ_I.zero) + value * sign
        for l in self.filtered[i]:
            for k, value in self.t2.product({l: QQ_I.one}, {j: QQ_I.one}, 0).items():
                key = (tag, i, l)
                eqs.setdefault(k, {})
                eqs[k][key] = eqs[k].get(key, QQ_I.zero) - value * sign
        for l in self.filtered[j]:
            for k, value in self.t2.product({i: QQ_I.one}, {l: QQ_I.one}, 0).items():
                key = (tag, j, l)
                eqs.setdefault(k, {})
                eqs[k][key] = eqs[k].get(key, QQ_I.zero) - value * sign


def _known_terms(T: EquivalenceOp, table1: ProductTable, table2: ProductTable,
                 i: int, j: int, m: int) -> Vector:
    """Σ_{p,q<m} C²_r(T_p b_i, T_q b_j) − Σ_{p<m} T_p C¹_{m−p}(b_i, b_j), with p+q+r = m."""
    known: dict = {}
    for p in range(m):
        for q in range(m - p + 1):
            r = m - p - q
            if q == m or r > table2.order:
                continue
            x = T.stage_apply(p, {i: QQ_I.one})
            y = T.stage_apply(q, {j: QQ_I.one})
            _vec_add(known, table2.product(x, y, r))
    for p in range(m):
        r = m - p
        if r > table1.order:
            continue
        _vec_add(known, T.stage_apply(p, table1.product({i: QQ_I.one}, {j: QQ_I.one}, r)), -QQ_I.one)
    return known


def _solve_stage(T: EquivalenceOp, table1: ProductTable, table2: ProductTable, m: int,
                 with_correction: bool):
    """Solve stage m for T_m, optionally together with a derivation D correcting T_{m−1}."""
    eqs_builder = _StageEquations(table1, table2)
    system = LinearSystem()
    t1 = T.stages.get(1, {})
    for i, j in table1.pairs():
        eqs: dict = {}
        eqs_builder.hochschild("T", i, j, eqs)
        if with_correction:
            # −[C²₁(Du, v) + C²₁(u, Dv) + Du·T₁v + T₁u·Dv − D C¹₁(u, v)]
            for l in eqs_builder.filtered[i]:
                contrib: dict = {}
                _vec_add(contrib, table2.product({l: QQ_I.one}, {j: QQ_I.one}, 1))
                _vec_add(contrib, table2.product({l: QQ_I.one}, t1.get(j, {}), 0))
                for k, value in contrib.items():
                    eqs.setdefault(k, {})
                    key = ("D", i, l)
                    eqs[k][key] = eqs[k].get(key, QQ_I.zero) - value
            for l in eqs_builder.filtered[j]:
                contrib = {}
                _vec_add(contrib, table2.product({i: QQ_I.one}, {l: QQ_I.one}, 1))
                _vec_add(contrib, table2.product(t1.get(i, {}), {l: QQ_I.one}, 0))
                for k, value in contrib.items():
                    eqs.setdefault(k, {})
                    key = ("D", j, l)
                    eqs[k][key] = eqs[k].get(key, QQ_I.zero) - value
            for src, value in table1.product({i: QQ_I.one}, {j: QQ_I.one}, 1).items():
                for l in eqs_builder.filtered[src]:
                    eqs.setdefault(l, {})
                    key = ("D", src, l)
                    eqs[l][key] = eqs[l].get(key, QQ_I.zero) + value
        known = _known_terms(T, table1, table2, i, j, m)
        for k in set(eqs) | set(known):
            system.add_equation(eqs.get(k, {}), known.get(k, QQ_I.zero), label=(i, j, k))
        if with_correction:
            derivation: dict = {}
            eqs_builder.hochschild("D", i, j, derivation)
            for k, row in derivation.items():
                system.add_equation(row, 0, label=(i, j, k))
    logger.debug("Equivalence stage %d: %d equations, %d unknowns", m, len(system), len(system.unknowns))
    return system.solve()


def _extract(solution, tag: str) -> dict[int, Vector]:
    cols: dict[int, Vector] = {}
    for key, value in solution.values.items():
        if key[0] == tag and value:
            cols.setdefault(key[1], {})[key[2]] = value
    return cols


def find_equivalence(table1: ProductTable, table2: ProductTable, class_order: int) -> EquivalenceResult:
    """Search T with T(u ⋆₁ v) = T(u) ⋆₂ T(v) on the filtered space, stages 1..class_order+1.

    At stage m ≥ 2 the previous stage may still be corrected by a derivation,
    so an inconsistency certifies that no filtered equivalence agrees up to
    this order.
    """
    if table1.basis.exponents != table2.basis.exponents or table1.degree_bound != table2.degree_bound:
        raise ValueError("product tables live on different function spaces")
    for pair in table1.pairs():
        if table1.products[0].get(pair, {}) != table2.products[0].get(pair, {}):
            raise ValueError("products differ at order 0")
    stages_needed = class_order + 1
    if stages_needed > min(table1.order, table2.order):
        raise ValueError(
            f"tables of order {min(table1.order, table2.order)} cannot decide class order {class_order}")
    basis = table1.basis
    T = EquivalenceOp.identity(basis, stages_needed)
    for m in range(1, stages_needed + 1):
        solution = _solve_stage(T, table1, table2, m, with_correction=m >= 2)
        if not solution:
            i, j, k = solution.witness
            witness = f"ν^{m} coefficient of {basis.label(k)} in {basis.label(i)} ⋆ {basis.label(j)}"
            logger.info("No equivalence: obstruction at order %d (%s)", m, witness)
            return EquivalenceResult(None, class_order, table1.degree_bound, len(basis), m, witness)
        stages = dict(T.stages)
        correction = _extract(solution, "D") if m >= 2 else {}
        if correction:
            previous = {i: dict(v) for i, v in stages.get(m - 1, {}).items()}
            for i, vec in correction.items():
                _vec_add(previous.setdefault(i, {}), vec)
            stages[m - 1] = previous
            T = EquivalenceOp(basis, stages, stages_needed)
            solution = _solve_stage(T, table1, table2, m, with_correction=False)
            if not solution:
                raise InternalConsistencyError(f"stage {m} inconsistent after derivation correction")
        stages = dict(T.stages)
        stages[m] = _extract(solution, "T")
        T = EquivalenceOp(basis, stages, stages_needed)
    logger.info("Equivalence found through order %d on %d basis elements", stages_needed, len(basis))
    return EquivalenceResult(T, class_order, table1.degree_bound, len(basis))


def verify_intertwining(T: EquivalenceOp, table1: ProductTable, table2: ProductTable,
                        order: int | None = None) -> list[dict]:
    """Check Σ T_p C¹_q = Σ C²_r(T_p ·, T_q ·) on every table pair at orders ≤ order."""
    order = min(T.order, table1.order, table2.order) if order is None else order
    failures = []
    for i, j in table1.pairs():
        for m in range(order + 1):
            lhs: dict = {}
            for p in range(m + 1):
                _vec_add(lhs, T.stage_apply(p, table1.product({i: QQ_I.one}, {j: QQ_I.one}, m - p)))
            rhs: dict = {}
            for p in range(m + 1):
                for q in range(m + 1 - p):
                    x = T.stage_apply(p, {i: QQ_I.one})
                    y = T.stage_apply(q, {j: QQ_I.one})
                    _vec_add(rhs, table2.product(x, y, m - p - q))
            if lhs != rhs:
                failures.append({"order": m, "witness": f"{table1.basis.label(i)} ⋆ {table1.basis.label(j)}"})
    return failures


# =============================================================================
# Gauge equivalences exp(ν{b, ·})
# =============================================================================

class GaugeEquivalence:
    """T = exp(ad_⋆ b) = Σ_k (ν^k / k!) {b, ·}^k for a quadratic b.

    For b with one holomorphic and one antiholomorphic factor per term,
    [b, f]_⋆ = ν{b, f} exactly, so T is an automorphism of the Wick product;
    it is equivariant iff {b, J_a} = 0 for all a.
    """

    def __init__(self, symplectic: SymplecticData, generator: RingElement, order: int = 4):
        self.symplectic = symplectic
        self.generator = generator
        self.order = order

    @classmethod
    def identity(cls, symplectic: SymplecticData, order: int = 4) -> "GaugeEquivalence":
        return cls(symplectic, symplectic.ring.zero, order)

    def is_identity(self) -> bool:
        return not self.generator

    def apply(self, f) -> NuSeries:
        series = as_series(f, self.order)
        coeffs: dict[int, RingElement] = {}
        for i, fi in series.items():
            term = fi
            for k in range(self.order - i + 1):
                if k:
                    term = self.symplectic.poisson_bracket(self.generator, term) * QQ_I.convert(QQ(1, k))
                if not term:
                    break
                coeffs[i + k] = coeffs[i + k] + term if i + k in coeffs else term
        return NuSeries(coeffs, min(self.order, series.order), series.truncated)

    def check_equivariance(self, momentum: list[RingElement]) -> None:
        for a, J in enumerate(momentum):
            bracket = self.symplectic.poisson_bracket(self.generator, J)
            if bracket:
                raise NotEquivariantError(
                    f"gauge generator {self.generator} does not commute with J_{a}", witness=bracket)

    def to_json(self) -> dict:
        return {"generator": self.generator.to_json(), "order": self.order}
