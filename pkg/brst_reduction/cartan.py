"""
BRST Reduction - Cartan Model Module

Equivariant differential forms Σ p ⊗ α with p a monomial in the dual basis
e^a of g*, the Cartan differential d_g = d + ins_•, the connection-induced
vertical homotopy h_ω and its normalized contraction, the stabilization
maps φ and Φ, and the Kirwan map

    K = (π*)^{-1} ∘ Φ ∘ ι*.

Forms on the reduced space are represented by basic forms on C, so the
(π*)^{-1} step is the identity on representatives.
"""

import itertools
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InternalConsistencyError, NotClosedError, NotInvariantError
from .geometry import (
    LieAlgebraData,
    PolyForm,
    PolyVectorField,
    SubmanifoldIdeal,
    exterior_derivative,
    ideal_reduce,
    insert,
    is_basic,
    lie_derivative,
)
from .linalg import LinearSystem
from .ring import CoordinateRing, scalar
from .series import NuSeries

logger = logging.getLogger(__name__)

SymMonomial = tuple[int, ...]


def _bump(mono: SymMonomial, a: int, step: int) -> SymMonomial:
    exps = list(mono)
    exps[a] += step
    return tuple(exps)


def _accumulate(terms: dict, mono: SymMonomial, form: PolyForm) -> None:
    if not form:
        return
    terms[mono] = terms[mono] + form if mono in terms else form


# =============================================================================
# Equivariant forms
# =============================================================================

class EquivariantForm:
    """Σ_p p ⊗ α_p, keyed by exponent tuples of the dual basis e^1..e^dim.

    All terms share the total degree 2·(sym degree) + (exterior degree).
    """

    __slots__ = ("ring", "lie_dim", "terms")

    def __init__(self, ring: CoordinateRing, lie_dim: int,
                 terms: Mapping[SymMonomial, PolyForm] | None = None):
        self.ring = ring
        self.lie_dim = lie_dim
        self.terms = {}
        for mono, form in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != lie_dim or min(mono, default=0) < 0:
                raise ValueError(f"invalid symmetric monomial {mono} for dimension {lie_dim}")
            if form:
                self.terms[mono] = form
        degrees = self.total_degrees()
        if len(degrees) > 1:
            raise ValueError(f"equivariant form of mixed total degree {sorted(degrees)}")

    @classmethod
    def from_form(cls, form: PolyForm, lie_dim: int = 1) -> "EquivariantForm":
        """1 ⊗ α."""
        return cls(form.ring, lie_dim, {(0,) * lie_dim: form})

    @classmethod
    def generator(cls, ring: CoordinateRing, a: int = 0, lie_dim: int = 1,
                  coefficient=None) -> "EquivariantForm":
        """e^a ⊗ f for a function f (default 1)."""
        f = ring.one if coefficient is None else coefficient
        return cls(ring, lie_dim, {_bump((0,) * lie_dim, a, 1): PolyForm.function(f)})

    @classmethod
    def zero(cls, ring: CoordinateRing, lie_dim: int = 1) -> "EquivariantForm":
        return cls(ring, lie_dim)

    # -- structure -------------------------------------------------------------

    def total_degrees(self) -> set[int]:
        return {2 * sum(mono) + d for mono, form in self.terms.items() for d in form.degrees()}

    @property
    def total_degree(self) -> int:
        degrees = self.total_degrees()
        return degrees.pop() if degrees else -1

    def sym_degree(self) -> int:
        """Maximal symmetric degree; −1 for the zero form."""
        return max((sum(mono) for mono in self.terms), default=-1)

    def component(self, mono: SymMonomial) -> PolyForm:
        return self.terms.get(tuple(mono), PolyForm.zero(self.ring))

    def sym_part(self, degree: int) -> "EquivariantForm":
        return EquivariantForm(self.ring, self.lie_dim,
                               {m: f for m, f in self.terms.items() if sum(m) == degree})

    def map_forms(self, fn) -> "EquivariantForm":
        return EquivariantForm(self.ring, self.lie_dim, {m: fn(f) for m, f in self.terms.items()})

    # -- algebra -------------------------------------------------------------------

    def __add__(self, other: "EquivariantForm") -> "EquivariantForm":
        if not isinstance(other, EquivariantForm):
            return NotImplemented
        terms = dict(self.terms)
        for mono, form in other.terms.items():
            _accumulate(terms, mono, form)
        return EquivariantForm(self.ring, self.lie_dim, terms)

    def __neg__(self) -> "EquivariantForm":
        return self.map_forms(lambda f: -f)

    def __sub__(self, other: "EquivariantForm") -> "EquivariantForm":
        if not isinstance(other, EquivariantForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, factor) -> "EquivariantForm":
        """Multiply by a scalar or an invariant function."""
        return self.map_forms(lambda f: f * factor)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EquivariantForm):
            return NotImplemented
        return self.lie_dim == other.lie_dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "EquivariantForm(0)"
        parts = []
        for mono in sorted(self.terms):
            sym = "·".join(f"(e^{a + 1})^{k}" if k > 1 else f"e^{a + 1}"
                           for a, k in enumerate(mono) if k) or "1"
            parts.append(f"{sym} ⊗ {self.terms[mono]!r}")
        return "EquivariantForm(" + " + ".join(parts) + ")"

    def to_json(self) -> list[dict]:
        return [{"sym_monomial": list(mono), "form": self.terms[mono].to_json()}
                for mono in sorted(self.terms, key=lambda m: (sum(m), m))]


# =============================================================================
# Connection and invariance
# =============================================================================

@dataclass(frozen=True)
class PrincipalConnection:
    """θ = Σ_a θ^a ⊗ e_a with the fundamental fields X_a it is dual to."""

    theta: tuple[PolyForm, ...]
    fundamental_fields: tuple[PolyVectorField, ...]
    lie: LieAlgebraData = field(compare=False)

    @property
    def ring(self) -> CoordinateRing:
        return self.theta[0].ring

    @property
    def dimension(self) -> int:
        return len(self.theta)

    def check(self, ideal: SubmanifoldIdeal) -> list[dict]:
        """θ^a(X_b) ≡ δ^a_b and L_{X_b}θ^c − Σ_a C_ba^c θ^a ≡ 0 modulo the ideal."""
        failures = []
        ring = self.ring
        for a, theta in enumerate(self.theta):
            for b, X in enumerate(self.fundamental_fields):
                value = ideal.restrict_function(insert(X, theta).coefficient())
                if value != (ring.one if a == b else ring.zero):
                    failures.append({"check": "connection_normalization", "witness": f"θ^{a}(X_{b}) = {value}"})
        for b, X in enumerate(self.fundamental_fields):
            for c, theta in enumerate(self.theta):
                defect = lie_derivative(X, theta)
                for a, other in enumerate(self.theta):
                    constant = self.lie.constant(b, a, c)
                    if constant:
                        defect = defect - other * constant
                defect = ideal_reduce(defect, ideal)
                if defect:
                    failures.append({"check": "connection_equivariance", "witness": f"b={b}, c={c}: {defect!r}"})
        return failures

    def to_json(self) -> dict:
        return {"theta": [t.to_json() for t in self.theta], "lie": self.lie.to_json()}


def pull_back(alpha: EquivariantForm, ideal: SubmanifoldIdeal) -> EquivariantForm:
    """ι* on equivariant forms: p ⊗ α ↦ p ⊗ ι*α."""
    return alpha.map_forms(lambda f: ideal_reduce(f, ideal))


def evaluate_at_zero(alpha: EquivariantForm) -> PolyForm:
    """The invariant de Rham part: drop every term of positive symmetric degree."""
    return alpha.component((0,) * alpha.lie_dim)


def invariance_defects(alpha: EquivariantForm, connection: PrincipalConnection,
                       ideal: SubmanifoldIdeal | None = None) -> list[dict]:
    """Terms of L_{X_a}α + (coadjoint action of e_a on the symmetric factor).

    e_a acts on Sym(g*) as the derivation e^c ↦ Σ_d C_ad^c e^d.
    """
    lie = connection.lie
    failures = []
    for a, X in enumerate(connection.fundamental_fields):
        defect: dict = {}
        for mono, form in alpha.terms.items():
            _accumulate(defect, mono, lie_derivative(X, form))
            for c, exponent in enumerate(mono):
                if not exponent:
                    continue
                for d in range(lie.dimension):
                    constant = lie.constant(a, d, c)
                    if constant:
                        _accumulate(defect, _bump(_bump(mono, c, -1), d, 1), form * (constant * exponent))
        for mono, form in sorted(defect.items()):
            if ideal is not None:
                form = ideal_reduce(form, ideal)
            if form:
                failures.append({"a": a, "sym_monomial": list(mono), "witness": repr(form)})
    return failures


def check_invariant(alpha: EquivariantForm, connection: PrincipalConnection,
                    ideal: SubmanifoldIdeal | None = None) -> None:
    failures = invariance_defects(alpha, connection, ideal)
    if failures:
        raise NotInvariantError(f"equivariant form is not invariant under X_{failures[0]['a']}",
                                witness=failures[0]["witness"])


# =============================================================================
# Differential and homotopies
# =============================================================================

def insert_bullet(alpha: EquivariantForm, connection: PrincipalConnection) -> EquivariantForm:
    """ins_•(p ⊗ α) = Σ_a e^a p ⊗ ins_{X_a} α."""
    terms: dict = {}
    for mono, form in alpha.terms.items():
        for a, X in enumerate(connection.fundamental_fields):
            _accumulate(terms, _bump(mono, a, 1), insert(X, form))
    return EquivariantForm(alpha.ring, alpha.lie_dim, terms)


def d_equivariant(alpha: EquivariantForm, connection: PrincipalConnection,
                  ideal: SubmanifoldIdeal | None = None, check: bool = True) -> EquivariantForm:
    """d_g = d + ins_•; with an ideal the result is reduced to C."""
    if check:
        check_invariant(alpha, connection, ideal)
    terms: dict = {}
    for mono, form in alpha.terms.items():
        _accumulate(terms, mono, exterior_derivative(form))
    result = EquivariantForm(alpha.ring, alpha.lie_dim, terms) + insert_bullet(alpha, connection)
    return pull_back(result, ideal) if ideal is not None else result


def h_omega(alpha: EquivariantForm, connection: PrincipalConnection) -> EquivariantForm:
    """p_1⋯p_k ⊗ α ↦ Σ_j (Π_{i≠j} p_i) ⊗ p_j(θ) ∧ α; zero on symmetric degree 0."""
    terms: dict = {}
    for mono, form in alpha.terms.items():
        for a, exponent in enumerate(mono):
            if exponent:
                _accumulate(terms, _bump(mono, a, -1), connection.theta[a].wedge(form) * exponent)
    return EquivariantForm(alpha.ring, alpha.lie_dim, terms)


def vertical_count(form: PolyForm, connection: PrincipalConnection) -> PolyForm:
    """N_v α = Σ_a θ^a ∧ ins_{X_a} α, counting vertical directions."""
    total = PolyForm.zero(form.ring)
    for theta, X in zip(connection.theta, connection.fundamental_fields):
        total = total + theta.wedge(insert(X, form))
    return total


def _shifted_inverse(form: PolyForm, k: int, connection: PrincipalConnection,
                     ideal: SubmanifoldIdeal | None) -> PolyForm:
    """(k + N_v)^{-1} α via the spectral projections of N_v (eigenvalues 0..rank)."""
    top = min(connection.dimension, max(form.degrees(), default=0))
    reduce_form = (lambda f: ideal_reduce(f, ideal)) if ideal is not None else (lambda f: f)
    result = PolyForm.zero(form.ring)
    for v in range(top + 1):
        projected = form
        for u in range(top + 1):
            if u == v:
                continue
            projected = reduce_form(vertical_count(projected, connection) - projected * u)
            projected = projected * scalar(Fraction(1, v - u))
        result = result + projected * scalar(Fraction(1, k + v))
    return result


def contraction(alpha: EquivariantForm, connection: PrincipalConnection,
                ideal: SubmanifoldIdeal | None = None) -> EquivariantForm:
    """K = h_ω ∘ (k + N_v)^{-1}, so that ins_• K + K ins_• = id in positive symmetric degree."""
    terms: dict = {}
    for mono, form in alpha.terms.items():
        k = sum(mono)
        if not k:
            continue
        normalized = _shifted_inverse(form, k, connection, ideal)
        piece = h_omega(EquivariantForm(alpha.ring, alpha.lie_dim, {mono: normalized}), connection)
        for new_mono, new_form in piece.terms.items():
            _accumulate(terms, new_mono, new_form)
    result = EquivariantForm(alpha.ring, alpha.lie_dim, terms)
    return pull_back(result, ideal) if ideal is not None else result


# =============================================================================
# Stabilization and the Kirwan map
# =============================================================================

def _require_closed(alpha: EquivariantForm, connection: PrincipalConnection,
                    ideal: SubmanifoldIdeal | None) -> None:
    defect = d_equivariant(alpha, connection, ideal)
    if defect:
        where = "on C" if ideal is not None else "on M"
        raise NotClosedError(f"equivariant form is not d_g-closed {where}", witness=repr(defect))


def phi(alpha: EquivariantForm, connection: PrincipalConnection, ideal: SubmanifoldIdeal) -> EquivariantForm:
    """α ↦ α − d_g K α on C; lowers the maximal symmetric degree of a closed form."""
    alpha = pull_back(alpha, ideal)
    _require_closed(alpha, connection, ideal)
    primitive = contraction(alpha, connection, ideal)
    return alpha - d_equivariant(primitive, connection, ideal, check=False)


def stabilize(alpha: EquivariantForm, connection: PrincipalConnection, ideal: SubmanifoldIdeal) -> PolyForm:
    """Φ: apply φ until symmetric degree 0 and return the basic form."""
    current = pull_back(alpha, ideal)
    _require_closed(current, connection, ideal)
    steps = 0
    while current.sym_degree() > 0:
        current = phi(current, connection, ideal)
        steps += 1
        if steps > max(alpha.sym_degree(), 0):
            raise InternalConsistencyError("φ did not lower the symmetric degree", witness=repr(current))
    logger.debug("stabilize: %d applications of φ", steps)
    result = evaluate_at_zero(current)
    if not is_basic(result, ideal):
        raise InternalConsistencyError("stabilized form is not basic", witness=repr(result))
    return result


def kirwan(alpha, connection: PrincipalConnection, ideal: SubmanifoldIdeal):
    """K(α): the basic representative on C of the class on M_red.

    ν-linear: a NuSeries of equivariant forms maps to a NuSeries of forms.
    """
    if isinstance(alpha, NuSeries):
        return alpha.map(lambda a: kirwan(a, connection, ideal))
    _require_closed(alpha, connection, None)
    return stabilize(alpha, connection, ideal)


# =============================================================================
# Equality of classes of basic forms
# =============================================================================

EQUAL = "EQUAL"
NOT_EQUAL = "NOT_EQUAL_UP_TO_DEGREE"


@dataclass
class ClassComparison:
    status: str
    degree_bound: int
    unknowns: int = 0
    primitive: PolyForm | None = None

    @property
    def equal(self) -> bool:
        return self.status == EQUAL

    def label(self) -> str:
        return EQUAL if self.equal else f"{NOT_EQUAL}({self.degree_bound})"

    def to_json(self) -> dict:
        data = {"status": self.status, "degree_bound": self.degree_bound, "unknowns": self.unknowns}
        if self.primitive is not None:
            data["primitive"] = self.primitive.to_json()
        return data


def _form_coordinates(form: PolyForm) -> dict:
    """{(dx key, monomial exponents): coefficient} of a reduced form."""
    ring = form.ring
    coords = {}
    for key, coeff in form.terms.items():
        if not coeff.is_polynomial():
            raise InternalConsistencyError("reduced form has non-polynomial coefficient", witness=coeff)
        for monom, value in coeff.even.terms():
            coords[(key, monom[:ring.nvars])] = value
    return coords


def _candidate_primitives(ring: CoordinateRing, degree_bound: int):
    """Charge-0 one-forms m·dx_j with m a standard monomial modulo |z|² − 1."""
    for j in range(ring.nvars):
        differential_charge = 1 if j % 2 == 0 else -1
        for d in range(degree_bound + 1):
            for exps in ring.coordinate_monomials(d, charge=-differential_charge):
                if exps[0] and exps[1]:
                    continue
                yield (j, exps), PolyForm(ring, {(j,): ring.from_poly(ring.monomial(exps))})


def classes_equal(alpha: PolyForm, beta: PolyForm, ideal: SubmanifoldIdeal,
                  degree_bound: int) -> ClassComparison:
    """EQUAL iff α − β = dγ on C for a basic one-form γ of coefficient degree ≤ degree_bound.

    Both inputs must have coefficient degree ≤ degree_bound
    (DegreeBoundExceeded otherwise).
    """
    difference = ideal_reduce(alpha - beta, ideal.with_degree_bound(degree_bound))
    if not difference:
        return ClassComparison(EQUAL, degree_bound, 0, PolyForm.zero(alpha.ring))
    work = ideal.with_degree_bound(degree_bound + 2)
    system = LinearSystem()
    rows: dict = {}
    for unknown, gamma in _candidate_primitives(alpha.ring, degree_bound):
        system.column(unknown)
        images = [("exact", ideal_reduce(exterior_derivative(gamma), work))]
        for a, X in enumerate(ideal.fundamental_fields):
            images.append((("vertical", a), ideal_reduce(insert(X, gamma), work)))
            images.append((("invariant", a), ideal_reduce(lie_derivative(X, gamma), work)))
        for kind, image in images:
            for key, value in _form_coordinates(image).items():
                rows.setdefault((kind, key), {})[unknown] = value
    targets = {("exact", key): value for key, value in _form_coordinates(difference).items()}
    for row_key in sorted(set(rows) | set(targets), key=repr):
        system.add_equation(rows.get(row_key, {}), targets.get(row_key, 0), label=row_key)
    logger.debug("classes_equal: %d equations, %d unknowns", len(system), len(system.unknowns))
    solution = system.solve()
    if not solution:
        logger.info("classes differ up to degree %d (witness %s)", degree_bound, solution.witness)
        return ClassComparison(NOT_EQUAL, degree_bound, len(system.unknowns))
    primitive = PolyForm.zero(alpha.ring)
    for (j, exps), value in solution.values.items():
        if value:
            primitive = primitive + PolyForm(alpha.ring, {(j,): alpha.ring.from_poly(alpha.ring.monomial(exps))}) * value
    return ClassComparison(EQUAL, degree_bound, len(system.unknowns), primitive)


# =============================================================================
# Property suites
# =============================================================================

def _invariant_test_forms(ring: CoordinateRing, form_degree: int, coefficient_degree: int):
    """Charge-0 forms m·dx_I with m a standard monomial modulo |z|² − 1."""
    for size in range(form_degree + 1):
        for key in itertools.combinations(range(ring.nvars), size):
            differential_charge = sum(1 if j % 2 == 0 else -1 for j in key)
            for d in range(coefficient_degree + 1):
                for exps in ring.coordinate_monomials(d, charge=-differential_charge):
                    if exps[0] and exps[1]:
                        continue
                    yield PolyForm(ring, {key: ring.from_poly(ring.monomial(exps))})


def contraction_suite(connection: PrincipalConnection, ideal: SubmanifoldIdeal, sym_bound: int = 3,
                      form_degree: int = 3, coefficient_degree: int = 4) -> tuple[int, list[dict]]:
    """ins_• K + K ins_• = id on invariant forms of symmetric degree 1..sym_bound, modulo the ideal."""
    ring = connection.ring
    dim = connection.dimension
    checked = 0
    failures = []
    for form in _invariant_test_forms(ring, form_degree, coefficient_degree):
        for k in range(1, sym_bound + 1):
            for mono in _sym_monomials(dim, k):
                alpha = EquivariantForm(ring, dim, {mono: form})
                checked += 1
                lhs = insert_bullet(contraction(alpha, connection, ideal), connection) \
                    + contraction(insert_bullet(alpha, connection), connection, ideal)
                if pull_back(lhs - alpha, ideal):
                    failures.append({"identity": "contraction", "sym_monomial": list(mono), "witness": repr(form)})
    logger.info("Contraction suite: %d checks, %d failures", checked, len(failures))
    return checked, failures


def _sym_monomials(dim: int, degree: int):
    for combo in itertools.combinations_with_replacement(range(dim), degree):
        mono = [0] * dim
        for a in combo:
            mono[a] += 1
        yield tuple(mono)


def exact_samples(ring: CoordinateRing, lie_dim: int = 1) -> list[EquivariantForm]:
    """Invariant primitives β whose d_g β are fed to the Kirwan map: e^*⊗f and 1⊗f dg."""
    balanced = [ring.z_element(j) * ring.zb_element(k) + ring.z_element(k) * ring.zb_element(j)
                for j in range(1, ring.dim + 1) for k in range(j, ring.dim + 1)]
    samples = [EquivariantForm.generator(ring, 0, lie_dim, coefficient=balanced[-1])]
    if len(balanced) > 1:
        f, g = balanced[0], balanced[1]
        samples.append(EquivariantForm.from_form(PolyForm.function(f).wedge(
            exterior_derivative(PolyForm.function(g))), lie_dim))
    return samples
