"""
BRST Reduction - Geometry Module

Differential forms and vector fields with coefficients in the coordinate
ring A of C^{n+1} \\ {0}, the symplectic data (ω, J), Lie algebra data of
the acting group, and restriction of forms to the level set C = J^{-1}(0)
as a quotient by the differential ideal (J, dJ).

Forms are stored as {sorted tuple of coordinate indices: coefficient}; index
2(k−1) is dz_k and 2(k−1)+1 is dz̄_k, matching the ring's variable order.
"""

import itertools
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import DegreeBoundExceeded, ScenarioAxiomError, ZeroDegreeError
from .ring import CoordinateRing, RingElement, format_scalar, restrict_to_sphere, to_scalar

logger = logging.getLogger(__name__)


def wedge_sign(indices: Iterable[int]) -> tuple[int, tuple[int, ...] | None]:
    """Sort an exterior monomial; return (sign, sorted) or (0, None) on a repeat."""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        return 0, None
    inversions = sum(1 for a, b in itertools.combinations(indices, 2) if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


# =============================================================================
# Differential forms
# =============================================================================

class PolyForm:
    """Finite sum Σ_I f_I dx_I with RingElement coefficients (possibly of mixed degree)."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: CoordinateRing, terms: Mapping[tuple[int, ...], RingElement] | None = None):
        self.ring = ring
        self.terms = {}
        for indices, coeff in (terms or {}).items():
            sign, key = wedge_sign(indices)
            if not sign or not coeff:
                continue
            coeff = coeff if sign > 0 else -coeff
            if key in self.terms:
                coeff = self.terms[key] + coeff
                if not coeff:
                    del self.terms[key]
                    continue
            self.terms[key] = coeff

    # -- constructors ------------------------------------------------------------

    @classmethod
    def zero(cls, ring: CoordinateRing) -> "PolyForm":
        return cls(ring)

    @classmethod
    def function(cls, f: RingElement) -> "PolyForm":
        return cls(f.ring, {(): f})

    @classmethod
    def differential(cls, ring: CoordinateRing, *indices: int) -> "PolyForm":
        """dx_{i1} ∧ ... ∧ dx_{ik}."""
        return cls(ring, {tuple(indices): ring.one})

    # -- structure -----------------------------------------------------------------

    def degrees(self) -> set[int]:
        return {len(key) for key in self.terms}

    @property
    def degree(self) -> int:
        """Exterior degree of a homogeneous form; −1 for the zero form."""
        degrees = self.degrees()
        if not degrees:
            return -1
        if len(degrees) > 1:
            raise ValueError(f"form of mixed degree {sorted(degrees)}")
        return degrees.pop()

    def part(self, degree: int) -> "PolyForm":
        return PolyForm(self.ring, {k: v for k, v in self.terms.items() if len(k) == degree})

    def coefficient(self, *indices: int) -> RingElement:
        sign, key = wedge_sign(indices)
        if not sign:
            return self.ring.zero
        value = self.terms.get(key, self.ring.zero)
        return value if sign > 0 else -value

    def coefficient_degree(self) -> int:
        return max((c.degree() for c in self.terms.values()), default=-1)

    def map_coefficients(self, fn) -> "PolyForm":
        return PolyForm(self.ring, {k: fn(v) for k, v in self.terms.items()})

    # -- algebra ------------------------------------------------------------------

    def __add__(self, other: "PolyForm") -> "PolyForm":
        if not isinstance(other, PolyForm):
            return NotImplemented
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms[key] + value if key in terms else value
        return PolyForm(self.ring, terms)

    def __neg__(self) -> "PolyForm":
        return PolyForm(self.ring, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        if not isinstance(other, PolyForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, factor) -> "PolyForm":
        """Multiply by a function (RingElement) or a scalar."""
        if isinstance(factor, PolyForm):
            return NotImplemented
        return PolyForm(self.ring, {k: v * factor for k, v in self.terms.items()})

    __rmul__ = __mul__

    def wedge(self, other: "PolyForm") -> "PolyForm":
        terms: dict = {}
        for (left, f), (right, g) in itertools.product(self.terms.items(), other.terms.items()):
            sign, key = wedge_sign(left + right)
            if not sign:
                continue
            value = f * g if sign > 0 else -(f * g)
            terms[key] = terms[key] + value if key in terms else value
        return PolyForm(self.ring, terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyForm):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "PolyForm(0)"
        parts = []
        for key in sorted(self.terms):
            dx = "∧".join("d" + self.ring.coordinate_name(i) for i in key)
            parts.append(f"({self.terms[key]})" + (f"·{dx}" if dx else ""))
        return "PolyForm(" + " + ".join(parts) + ")"

    def to_json(self) -> list[dict]:
        return [
            {"dx": ["d" + self.ring.coordinate_name(i) for i in key],
             "coefficient": self.terms[key].to_json()}
            for key in sorted(self.terms, key=lambda k: (len(k), k))
        ]


class PolyVectorField:
    """Σ_j X^j ∂/∂x_j over the coordinate variables z_k, z̄_k."""

    __slots__ = ("ring", "components")

    def __init__(self, ring: CoordinateRing, components: Mapping[int, RingElement]):
        self.ring = ring
        self.components = {j: c for j, c in components.items() if c}

    def __call__(self, f: RingElement) -> RingElement:
        total = self.ring.zero
        for j, coeff in self.components.items():
            total = total + coeff * f.diff(j)
        return total

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        comps = dict(self.components)
        for j, c in other.components.items():
            comps[j] = comps[j] + c if j in comps else c
        return PolyVectorField(self.ring, comps)

    def __mul__(self, factor) -> "PolyVectorField":
        return PolyVectorField(self.ring, {j: c * factor for j, c in self.components.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "PolyVectorField":
        return self * -1

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.components == other.components

    def __repr__(self) -> str:
        body = " + ".join(f"({c})·∂/∂{self.ring.coordinate_name(j)}"
                          for j, c in sorted(self.components.items()))
        return f"PolyVectorField({body or 0})"

    def to_json(self) -> dict:
        return {self.ring.coordinate_name(j): c.to_json() for j, c in sorted(self.components.items())}


def radial_field(ring: CoordinateRing) -> PolyVectorField:
    """R = Σ z_k ∂/∂z_k + z̄_k ∂/∂z̄_k."""
    return PolyVectorField(ring, {j: ring.coordinate_element(j) for j in range(ring.nvars)})


def vector_field_bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    """[X, Y]^j = X(Y^j) − Y(X^j)."""
    ring = X.ring
    comps = {}
    for j in range(ring.nvars):
        value = X(Y.components.get(j, ring.zero)) - Y(X.components.get(j, ring.zero))
        if value:
            comps[j] = value
    return PolyVectorField(ring, comps)


# =============================================================================
# Cartan calculus
# =============================================================================

def exterior_derivative(alpha: PolyForm) -> PolyForm:
    ring = alpha.ring
    terms: dict = {}
    for key, coeff in alpha.terms.items():
        for j in range(ring.nvars):
            if j in key:
                continue
            derivative = coeff.diff(j)
            if not derivative:
                continue
            sign, new_key = wedge_sign((j,) + key)
            value = derivative if sign > 0 else -derivative
            terms[new_key] = terms[new_key] + value if new_key in terms else value
    return PolyForm(ring, terms)


def insert(X: PolyVectorField, alpha: PolyForm, strict: bool = False) -> PolyForm:
    """Interior product ins_X α, a graded antiderivation of degree −1.

    Degree-0 parts contribute 0; with strict=True a pure function raises
    ZeroDegreeError instead.
    """
    if strict and alpha and alpha.degrees() == {0}:
        raise ZeroDegreeError("insertion into a 0-form", witness=alpha)
    ring = alpha.ring
    terms: dict = {}
    for key, coeff in alpha.terms.items():
        for position, j in enumerate(key):
            component = X.components.get(j)
            if component is None:
                continue
            value = component * coeff
            if position % 2:
                value = -value
            rest = key[:position] + key[position + 1:]
            terms[rest] = terms[rest] + value if rest in terms else value
    return PolyForm(ring, terms)


def lie_derivative(X: PolyVectorField, alpha: PolyForm) -> PolyForm:
    """L_X = d∘ins_X + ins_X∘d."""
    return exterior_derivative(insert(X, alpha)) + insert(X, exterior_derivative(alpha))


# =============================================================================
# Lie algebra and symplectic data
# =============================================================================

@dataclass(frozen=True)
class LieAlgebraData:
    """Basis e_1..e_dim with [e_a, e_b] = Σ_c C_ab^c e_c (0-based indices)."""

    dimension: int
    structure_constants: Mapping[tuple[int, int, int], object] = field(default_factory=dict)
    name: str = ""

    def constant(self, a: int, b: int, c: int):
        return to_scalar(self.structure_constants.get((a, b, c), 0))

    @property
    def is_abelian(self) -> bool:
        return not any(to_scalar(v) for v in self.structure_constants.values())

    @property
    def modular_form(self) -> list:
        """Δ(e_a) = tr ad(e_a) = Σ_b C_ab^b."""
        return [sum((self.constant(a, b, b) for b in range(self.dimension)), QQ_I.zero)
                for a in range(self.dimension)]

    def check(self) -> list[dict]:
        """Antisymmetry and Jacobi; failures as {check, witness} dicts."""
        failures = []
        rng = range(self.dimension)
        for a, b, c in itertools.product(rng, rng, rng):
            if self.constant(a, b, c) != -self.constant(b, a, c):
                failures.append({"check": "antisymmetry", "witness": f"C[{a},{b}]^{c}"})
        for a, b, c, d in itertools.product(rng, rng, rng, rng):
            # [[a,b],c] + [[b,c],a] + [[c,a],b], component d
            total = QQ_I.zero
            for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                for m in rng:
                    total += self.constant(x, y, m) * self.constant(m, z, d)
            if total:
                failures.append({"check": "jacobi", "witness": f"({a},{b},{c}) component {d}"})
        return failures

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "structure_constants": [
                {"a": a, "b": b, "c": c, "value": format_scalar(v)}
                for (a, b, c), v in sorted(self.structure_constants.items()) if to_scalar(v)
            ],
        }


def abelian_algebra(dimension: int = 1) -> LieAlgebraData:
    return LieAlgebraData(dimension, {}, name="u(1)" if dimension == 1 else f"u(1)^{dimension}")


def su2_algebra() -> LieAlgebraData:
    """[e_a, e_b] = ε_abc e_c."""
    constants = {}
    for a, b, c in itertools.permutations(range(3)):
        # sign of the permutation (a, b, c) of (0, 1, 2)
        constants[(a, b, c)] = 1 if (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
    return LieAlgebraData(3, constants, name="su(2)")


class SymplecticData:
    """Constant-coefficient symplectic form ω with momentum map J_a.

    Hamiltonian vector fields follow ins_{X_f} ω = df and the Poisson
    bracket is {f, g} = ω(X_f, X_g) = X_g(f). Fundamental vector fields are
    the Hamiltonian fields of the momentum map components.
    """

    def __init__(self, omega: PolyForm, momentum_map: list[RingElement], lie: LieAlgebraData):
        self.ring = omega.ring
        self.omega = omega
        self.momentum_map = list(momentum_map)
        self.lie = lie
        self._inverse = self._invert_omega()
        self.fundamental_fields = [self.hamiltonian_vector_field(J) for J in self.momentum_map]

    def _omega_matrix(self) -> DomainMatrix:
        ring = self.ring
        size = ring.nvars
        rows = {}
        for key, coeff in self.omega.part(2).terms.items():
            value = coeff.constant_value()
            if value is None:
                raise ScenarioAxiomError("ω must have constant coefficients", witness=coeff)
            i, j = key
            rows.setdefault(i, {})[j] = value
            rows.setdefault(j, {})[i] = -value
        return DomainMatrix(rows, (size, size), QQ_I)

    def _invert_omega(self) -> DomainMatrix:
        matrix = self._omega_matrix()
        if not matrix.to_dense().det():
            raise ScenarioAxiomError("ω is degenerate")
        # (ins_X ω)_j = Σ_i Ω_ij X^i, so X = (Ω^T)^{-1} grad f
        return matrix.transpose().to_dense().inv()

    def hamiltonian_vector_field(self, f: RingElement) -> PolyVectorField:
        ring = self.ring
        gradient = [f.diff(j) for j in range(ring.nvars)]
        inverse = self._inverse.to_list()
        comps = {}
        for i in range(ring.nvars):
            total = ring.zero
            for j in range(ring.nvars):
                if inverse[i][j]:
                    total = total + gradient[j] * inverse[i][j]
            comps[i] = total
        return PolyVectorField(ring, comps)

    def poisson_bracket(self, f: RingElement, g: RingElement) -> RingElement:
        return self.hamiltonian_vector_field(g)(f)

    def check(self) -> list[dict]:
        """Closedness, Hamiltonian condition and equivariance of J."""
        failures = []
        if exterior_derivative(self.omega):
            failures.append({"check": "omega_closed", "witness": repr(exterior_derivative(self.omega))})
        for a, (X, J) in enumerate(zip(self.fundamental_fields, self.momentum_map)):
            defect = insert(X, self.omega) - exterior_derivative(PolyForm.function(J))
            if defect:
                failures.append({"check": "hamiltonian", "witness": f"a={a}: {defect!r}"})
        dim = self.lie.dimension
        for a, b in itertools.product(range(dim), range(dim)):
            expected = self.ring.zero
            for c in range(dim):
                expected = expected + self.momentum_map[c] * self.lie.constant(a, b, c)
            bracket = self.poisson_bracket(self.momentum_map[a], self.momentum_map[b])
            if bracket != expected:
                failures.append({"check": "momentum_equivariance", "witness": f"{{J_{a}, J_{b}}} = {bracket}"})
        return failures


def poisson_bracket(symplectic: SymplecticData, f: RingElement, g: RingElement) -> RingElement:
    return symplectic.poisson_bracket(f, g)


def hamiltonian_vector_field(symplectic: SymplecticData, f: RingElement) -> PolyVectorField:
    return symplectic.hamiltonian_vector_field(f)


# =============================================================================
# Restriction to the level set C = J^{-1}(0)
# =============================================================================

class SubmanifoldIdeal:
    """The differential ideal (J, dJ) of C = {|z|² = 1}, with the vertical fields.

    `degree_bound` is the coefficient degree admitted by ideal_reduce.
    """

    def __init__(self, momentum: RingElement, fundamental_fields: list[PolyVectorField],
                 degree_bound: int = 8):
        self.ring = momentum.ring
        self.momentum = momentum
        self.generator = momentum * 2
        self.differential = exterior_derivative(PolyForm.function(momentum))
        self.fundamental_fields = list(fundamental_fields)
        self.degree_bound = degree_bound
        self._radial = radial_field(self.ring)
        # ins_R dJ = |z|², so w·dJ splits off the normal direction
        self._normal = self.differential * self.ring.w

    def with_degree_bound(self, degree_bound: int) -> "SubmanifoldIdeal":
        return SubmanifoldIdeal(self.momentum, self.fundamental_fields, degree_bound)

    def restrict_function(self, f: RingElement) -> RingElement:
        return restrict_to_sphere(f)

    def horizontal_part(self, alpha: PolyForm) -> PolyForm:
        """α − w·dJ ∧ ins_R α: kills dJ∧(...) and fixes forms annihilated by R."""
        return alpha - self._normal.wedge(insert(self._radial, alpha))


def ideal_reduce(alpha: PolyForm, ideal: SubmanifoldIdeal) -> PolyForm:
    """Canonical representative of α modulo (J, dJ).

    Two forms agree on C iff their reductions coincide; the result has
    polynomial coefficients in sphere normal form and is fixed by a second
    reduction.
    """
    degree = alpha.coefficient_degree()
    if degree > ideal.degree_bound:
        raise DegreeBoundExceeded(
            f"coefficient degree {degree} exceeds bound {ideal.degree_bound}", witness=alpha)
    return ideal.horizontal_part(alpha).map_coefficients(restrict_to_sphere)


def is_basic(alpha: PolyForm, ideal: SubmanifoldIdeal) -> bool:
    for X in ideal.fundamental_fields:
        if ideal_reduce(insert(X, alpha), ideal):
            return False
        if ideal_reduce(lie_derivative(X, alpha), ideal):
            return False
    return True


def symplectic_form(ring: CoordinateRing) -> PolyForm:
    """ω = i Σ_k dz_k ∧ dz̄_k."""
    i = to_scalar("0+1i")
    terms = {(2 * k, 2 * k + 1): ring.from_scalar(i) for k in range(ring.dim)}
    return PolyForm(ring, terms)
