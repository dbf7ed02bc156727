"""
BRST Reduction - Coordinate Ring Module

Exact arithmetic on the localized coordinate algebra

    A = Q(i)[z, z̄, s^{±1}] / (s² − Σ z_k z̄_k)

of M_nice = C^{n+1} \\ {0}. The generator w stands for |z|^{-2} = s^{-2}.
Every element is stored canonically as

    P·w^k + Q·w^l·s

with P, Q polynomials in z, z̄ only and k (resp. l) minimal, i.e. |z|² does
not divide P when k > 0. Polynomial arithmetic is done by sympy's sparse
PolyRing over the Gaussian rationals QQ_I with the degree-lexicographic
order z1 > zb1 > ... > z_{n+1} > zb_{n+1} > w > s.
"""

import re
import itertools
from fractions import Fraction
from functools import lru_cache

import sympy as sp
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .errors import ExpressionParseError, NotDivisibleError

# =============================================================================
# Scalars: exact Gaussian rationals
# =============================================================================

Scalar = QQ_I.dtype

_SCALAR_RE = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)\s*(?:(?P<sign>[+-])\s*(?P<im>\d+(?:/\d+)?)\s*i)?\s*$"
)
_IMAG_RE = re.compile(r"^\s*(?P<im>[+-]?\d+(?:/\d+)?)\s*i\s*$")


def _rational(value):
    """Convert int / Fraction / 'p/q' / sympy Rational to a QQ element."""
    if isinstance(value, str):
        value = Fraction(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, sp.Rational):
        return QQ(int(value.p), int(value.q))
    return QQ.convert(value)


def scalar(re_part=0, im_part=0) -> Scalar:
    """Build the Gaussian rational re_part + i·im_part."""
    return Scalar(_rational(re_part), _rational(im_part))


def to_scalar(value) -> Scalar:
    """Coerce ints, Fractions, scalar strings and sympy numbers to Scalar."""
    if isinstance(value, Scalar):
        return value
    if isinstance(value, (int, Fraction)):
        return scalar(value)
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, sp.Basic):
        return QQ_I.from_sympy(sp.nsimplify(value))
    return QQ_I.convert(value)


def conj_scalar(value: Scalar) -> Scalar:
    return Scalar(value.x, -value.y)


def _format_rational(q) -> str:
    num, den = int(q.numerator), int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


def format_scalar(value) -> str:
    """'a/b' for rationals, 'a/b+c/di' otherwise."""
    value = to_scalar(value)
    re_txt = _format_rational(value.x)
    if not value.y:
        return re_txt
    sign = "+" if value.y > 0 else "-"
    return f"{re_txt}{sign}{_format_rational(abs(value.y))}i"


def parse_scalar(text: str) -> Scalar:
    match = _SCALAR_RE.match(text)
    if match:
        im_txt = match.group("im")
        im_part = Fraction(im_txt) if im_txt else Fraction(0)
        if match.group("sign") == "-":
            im_part = -im_part
        return scalar(Fraction(match.group("re")), im_part)
    match = _IMAG_RE.match(text)
    if match:
        return scalar(0, Fraction(match.group("im")))
    raise ExpressionParseError(f"Not a Gaussian rational: {text!r}")


# =============================================================================
# The coordinate ring of M_nice
# =============================================================================

class CoordinateRing:
    """Generators and relations of A for M = C^{n+1}.

    Coordinate variables are indexed 0..2n+1 with z_k at 2(k−1) and z̄_k at
    2(k−1)+1; w and s come last.
    """

    def __init__(self, n: int):
        self.n = n
        self.dim = n + 1
        names = []
        for k in range(1, self.dim + 1):
            names += [f"z{k}", f"zb{k}"]
        self.coordinate_names = tuple(names)
        self.poly_ring = PolyRing(",".join(names + ["w", "s"]), QQ_I, grlex)
        gens = self.poly_ring.gens
        self.nvars = 2 * self.dim
        self.coordinates = gens[: self.nvars]
        self.z = gens[0:self.nvars:2]
        self.zb = gens[1:self.nvars:2]
        self.w_gen = gens[self.nvars]
        self.s_gen = gens[self.nvars + 1]
        self.w_index = self.nvars
        self.s_index = self.nvars + 1
        self.radius_squared = sum((a * b for a, b in zip(self.z, self.zb)), self.poly_ring.zero)
        self.sphere_relation = self.radius_squared - 1
        self._r2_powers = [self.poly_ring.one, self.radius_squared]
        # ∂|z|²/∂x_j: z̄_k for z_k and z_k for z̄_k
        self._r2_gradient = tuple(self.coordinates[j ^ 1] for j in range(self.nvars))

    def __repr__(self) -> str:
        return f"CoordinateRing(n={self.n})"

    def __reduce__(self):
        return (get_ring, (self.n,))

    # -- helpers on plain polynomials -----------------------------------------

    def r2_power(self, j: int) -> PolyElement:
        while len(self._r2_powers) <= j:
            self._r2_powers.append(self._r2_powers[-1] * self.radius_squared)
        return self._r2_powers[j]

    def r2_gradient(self, index: int) -> PolyElement:
        return self._r2_gradient[index]

    def is_coordinate_poly(self, poly: PolyElement) -> bool:
        return all(m[self.w_index] == 0 and m[self.s_index] == 0 for m in poly.itermonoms())

    def sphere_normal_form(self, poly: PolyElement) -> PolyElement:
        """Division remainder of a coordinate polynomial by |z|² − 1."""
        _, remainder = poly.div(self.sphere_relation)
        return remainder

    def conjugate_index(self, index: int) -> int:
        return index ^ 1

    def coordinate_name(self, index: int) -> str:
        return self.coordinate_names[index]

    def monomial(self, exponents) -> PolyElement:
        exps = tuple(exponents) + (0,) * (self.nvars + 2 - len(exponents))
        return self.poly_ring.from_dict({exps: QQ_I.one})

    def coordinate_monomials(self, degree: int, charge: int | None = None):
        """Exponent tuples (over coordinate variables) of total degree `degree`.

        `charge` restricts to deg_z − deg_z̄ == charge (the U(1) weight).
        """
        for combo in itertools.combinations_with_replacement(range(self.nvars), degree):
            exps = [0] * self.nvars
            for idx in combo:
                exps[idx] += 1
            if charge is not None and monomial_charge(exps) != charge:
                continue
            yield tuple(exps)

    # -- element constructors --------------------------------------------------

    @property
    def zero(self) -> "RingElement":
        return RingElement(self, self.poly_ring.zero, 0, self.poly_ring.zero, 0)

    @property
    def one(self) -> "RingElement":
        return RingElement(self, self.poly_ring.one, 0, self.poly_ring.zero, 0)

    def from_scalar(self, value) -> "RingElement":
        return RingElement(self, self.poly_ring.one * to_scalar(value), 0, self.poly_ring.zero, 0)

    def from_poly(self, poly: PolyElement) -> "RingElement":
        return reduce(poly, self)

    def z_element(self, k: int) -> "RingElement":
        return self.from_poly(self.z[k - 1])

    def zb_element(self, k: int) -> "RingElement":
        return self.from_poly(self.zb[k - 1])

    def coordinate_element(self, index: int) -> "RingElement":
        return self.from_poly(self.coordinates[index])

    @property
    def w(self) -> "RingElement":
        return RingElement(self, self.poly_ring.one, 1, self.poly_ring.zero, 0)

    @property
    def s(self) -> "RingElement":
        return RingElement(self, self.poly_ring.zero, 0, self.poly_ring.one, 0)

    def from_expr(self, expr) -> "RingElement":
        """Parse a sympy expression (or string) in z1, zb1, ..., w, s."""
        if isinstance(expr, str):
            try:
                expr = sp.sympify(expr, locals={str(sym): sym for sym in self.poly_ring.symbols})
            except (sp.SympifyError, SyntaxError, TypeError) as exc:
                raise ExpressionParseError(f"Cannot parse {expr!r}: {exc}") from exc
        try:
            raw = self.poly_ring.from_expr(sp.expand(expr))
        except ValueError as exc:
            raise ExpressionParseError(f"{expr} is not a polynomial in {self.poly_ring.symbols}") from exc
        return reduce(raw, self)

    def from_json(self, data: dict) -> "RingElement":
        parts = []
        for key in ("even", "odd"):
            block = data.get(key) or {"w": 0, "terms": []}
            terms = {}
            for term in block.get("terms", []):
                exps = tuple(term["exponents"]) + (0, 0)
                terms[exps] = parse_scalar(term["coefficient"])
            parts.append((self.poly_ring.from_dict(terms), int(block.get("w", 0))))
        (even, ew), (odd, ow) = parts
        return RingElement(self, even, ew, odd, ow)


@lru_cache(maxsize=None)
def get_ring(n: int) -> CoordinateRing:
    return CoordinateRing(n)


def monomial_charge(exps) -> int:
    """deg_z − deg_z̄ of an exponent tuple over coordinate variables."""
    return sum(exps[0::2]) - sum(exps[1::2])


# =============================================================================
# Fractions P·w^k (plain polynomial P, k >= 0)
# =============================================================================

def _cancel(ring: CoordinateRing, poly: PolyElement, k: int) -> tuple[PolyElement, int]:
    """Minimize the w-exponent against the relation w·|z|² = 1."""
    if not poly:
        return ring.poly_ring.zero, 0
    while k > 0:
        quotient, remainder = poly.div(ring.radius_squared)
        if remainder:
            break
        poly, k = quotient, k - 1
    return poly, k


def _frac_add(ring, a: tuple, b: tuple) -> tuple[PolyElement, int]:
    (p, k), (q, l) = a, b
    if not p:
        return q, l
    if not q:
        return p, k
    top = max(k, l)
    total = p * ring.r2_power(top - k) + q * ring.r2_power(top - l)
    return _cancel(ring, total, top)


def _frac_mul(ring, a: tuple, b: tuple) -> tuple[PolyElement, int]:
    (p, k), (q, l) = a, b
    if not p or not q:
        return ring.poly_ring.zero, 0
    return _cancel(ring, p * q, k + l)


def _frac_diff(ring, frac: tuple, index: int) -> tuple[PolyElement, int]:
    """∂(P·w^k)/∂x = (∂P·|z|² − k·∂|z|²·P)·w^{k+1}."""
    poly, k = frac
    dpoly = poly.diff(ring.coordinates[index])
    if k == 0:
        return dpoly, 0
    total = dpoly * ring.radius_squared - poly * ring.r2_gradient(index) * k
    return _cancel(ring, total, k + 1)


# =============================================================================
# Ring elements
# =============================================================================

class RingElement:
    """Immutable element even·w^{even_w} + odd·w^{odd_w}·s of A."""

    __slots__ = ("ring", "even", "even_w", "odd", "odd_w", "_hash")

    def __init__(self, ring: CoordinateRing, even: PolyElement, even_w: int,
                 odd: PolyElement, odd_w: int):
        self.ring = ring
        self.even, self.even_w = _cancel(ring, even, even_w)
        self.odd, self.odd_w = _cancel(ring, odd, odd_w)
        self._hash = None

    # -- canonical views -------------------------------------------------------

    @property
    def even_part(self) -> PolyElement:
        return self.even * self.ring.w_gen ** self.even_w

    @property
    def odd_part(self) -> PolyElement:
        """Coefficient of s, as a polynomial in z, z̄, w."""
        return self.odd * self.ring.w_gen ** self.odd_w

    def as_poly(self) -> PolyElement:
        """even_part + odd_part·s in the raw polynomial ring."""
        return self.even_part + self.odd_part * self.ring.s_gen

    def as_expr(self) -> sp.Expr:
        return self.as_poly().as_expr()

    def is_polynomial(self) -> bool:
        """True when the element lies in Q(i)[z, z̄] (no w, no s)."""
        return not self.odd and self.even_w == 0

    def is_even(self) -> bool:
        return not self.odd

    def constant_value(self) -> Scalar | None:
        if self.odd or self.even_w:
            return None
        if not self.even:
            return QQ_I.zero
        if self.even.is_ground:
            return self.even.LC
        return None

    def radial_weights(self) -> set[int]:
        """Homogeneity degrees under z, z̄, s ↦ t·(…), w ↦ t^{-2}."""
        weights = {sum(m[:self.ring.nvars]) - 2 * self.even_w for m in self.even.itermonoms()}
        weights |= {sum(m[:self.ring.nvars]) - 2 * self.odd_w + 1 for m in self.odd.itermonoms()}
        return weights

    def charges(self) -> set[int]:
        """U(1) weights deg_z − deg_z̄ occurring in the element."""
        monoms = list(self.even.itermonoms()) + list(self.odd.itermonoms())
        return {monomial_charge(m[:self.ring.nvars]) for m in monoms}

    def degree(self) -> int:
        """Total z, z̄-degree of the numerators (−1 for zero)."""
        monoms = list(self.even.itermonoms()) + list(self.odd.itermonoms())
        if not monoms:
            return -1
        return max(sum(m[:self.ring.nvars]) for m in monoms)

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.ring is not self.ring:
                raise ValueError("ring elements from different coordinate rings")
            return other
        return self.ring.from_scalar(other)

    def __add__(self, other) -> "RingElement":
        other = self._coerce(other)
        ring = self.ring
        even = _frac_add(ring, (self.even, self.even_w), (other.even, other.even_w))
        odd = _frac_add(ring, (self.odd, self.odd_w), (other.odd, other.odd_w))
        return RingElement(ring, even[0], even[1], odd[0], odd[1])

    __radd__ = __add__

    def __neg__(self) -> "RingElement":
        return RingElement(self.ring, -self.even, self.even_w, -self.odd, self.odd_w)

    def __sub__(self, other) -> "RingElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RingElement":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RingElement":
        if not isinstance(other, RingElement):
            value = to_scalar(other)
            return RingElement(self.ring, self.even * value, self.even_w,
                               self.odd * value, self.odd_w)
        other = self._coerce(other)
        ring = self.ring
        a, b = (self.even, self.even_w), (self.odd, self.odd_w)
        c, d = (other.even, other.even_w), (other.odd, other.odd_w)
        even = _frac_mul(ring, a, c)
        if b[0] and d[0]:
            # s·s = |z|², absorbed by one power of w when available
            bd_poly, bd_w = b[0] * d[0], b[1] + d[1]
            bd = (bd_poly, bd_w - 1) if bd_w > 0 else (bd_poly * ring.radius_squared, 0)
            even = _frac_add(ring, even, bd)
        odd = _frac_add(ring, _frac_mul(ring, a, d), _frac_mul(ring, b, c))
        return RingElement(ring, even[0], even[1], odd[0], odd[1])

    def __rmul__(self, other) -> "RingElement":
        return self * other

    def __pow__(self, exponent: int) -> "RingElement":
        if exponent < 0:
            raise ValueError("negative powers are only available for s and w")
        result = self.ring.one
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.even) or bool(self.odd)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError, sp.polys.polyerrors.CoercionFailed):
                return NotImplemented
        return (self.ring is other.ring and self.even_w == other.even_w
                and self.odd_w == other.odd_w and self.even == other.even
                and self.odd == other.odd)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring.n, self.even, self.even_w, self.odd, self.odd_w))
        return self._hash

    # -- involutions and derivations -----------------------------------------------

    def conj(self) -> "RingElement":
        """Swap z_k ↔ z̄_k and conjugate coefficients; s and w are fixed."""
        return RingElement(self.ring, _conj_poly(self.ring, self.even), self.even_w,
                           _conj_poly(self.ring, self.odd), self.odd_w)

    def diff(self, index: int) -> "RingElement":
        return partial_derivative(self, index)

    # -- display / serialization --------------------------------------------------------

    def __repr__(self) -> str:
        return f"RingElement({self})"

    def __str__(self) -> str:
        return str(self.as_expr())

    def to_json(self) -> dict:
        def block(poly, k):
            terms = sorted(poly.terms(), key=lambda t: t[0], reverse=True)
            return {
                "w": k,
                "terms": [
                    {"exponents": list(m[:self.ring.nvars]), "coefficient": format_scalar(c)}
                    for m, c in terms
                ],
            }
        return {"even": block(self.even, self.even_w), "odd": block(self.odd, self.odd_w)}


def _conj_poly(ring: CoordinateRing, poly: PolyElement) -> PolyElement:
    swapped = {}
    for monom, coeff in poly.terms():
        exps = list(monom)
        for j in range(0, ring.nvars, 2):
            exps[j], exps[j + 1] = exps[j + 1], exps[j]
        swapped[tuple(exps)] = conj_scalar(coeff)
    return ring.poly_ring.from_dict(swapped)


# =============================================================================
# Operations
# =============================================================================

def reduce(raw: PolyElement, ring: CoordinateRing) -> RingElement:
    """Canonical form of a raw polynomial in z, z̄, w, s.

    s^{2j} becomes |z|^{2j}, odd powers keep one factor s, and w-powers are
    minimized against w·|z|² = 1. Idempotent on canonical input.
    """
    parts = {0: {}, 1: {}}
    for monom, coeff in raw.terms():
        s_exp, w_exp = monom[ring.s_index], monom[ring.w_index]
        base = list(monom)
        base[ring.s_index] = base[ring.w_index] = 0
        r2_exp = s_exp // 2
        common = min(r2_exp, w_exp)
        r2_exp, w_exp = r2_exp - common, w_exp - common
        term = ring.poly_ring.from_dict({tuple(base): coeff}) * ring.r2_power(r2_exp)
        bucket = parts[s_exp % 2]
        bucket[w_exp] = bucket.get(w_exp, ring.poly_ring.zero) + term
    fracs = []
    for parity in (0, 1):
        frac = (ring.poly_ring.zero, 0)
        for w_exp, poly in parts[parity].items():
            frac = _frac_add(ring, frac, (poly, w_exp))
        fracs.append(frac)
    (even, even_w), (odd, odd_w) = fracs
    return RingElement(ring, even, even_w, odd, odd_w)


def divide_exact(f: RingElement, g) -> RingElement:
    """Return q with f = q·g for a nonzero polynomial g in z, z̄.

    Powers of |z|² in g are units of A and are divided out as powers of w.
    Each parity part P·w^k is then divided by the rest of g with
    single-divisor multivariate division, retried against P·|z|^{2j} up to
    the degree of g so that factors of |z|² (as z1 on a point orbit) are
    inverted too. Since {g} is a Gröbner basis of (g), a nonzero remainder
    on every try certifies that g does not divide f.
    """
    ring = f.ring
    divisor = g.as_poly() if isinstance(g, RingElement) else g
    if not divisor or not ring.is_coordinate_poly(divisor):
        raise ValueError("divisor must be a nonzero polynomial in z, z̄")
    units = 0
    while not divisor.is_ground:
        stripped, remainder = divisor.div(ring.radius_squared)
        if remainder:
            break
        divisor, units = stripped, units + 1
    retries = max(sum(m) for m in divisor.monoms())
    parts = []
    for poly, k in ((f.even, f.even_w), (f.odd, f.odd_w)):
        for j in range(retries + 1):
            quotient, remainder = (poly * ring.r2_power(j)).div(divisor)
            if not remainder:
                break
            if not j:
                witness = remainder
        else:
            raise NotDivisibleError(f"{divisor.as_expr()} does not divide {f}",
                                    witness=witness.as_expr())
        parts.append((quotient, k + units + j))
    (even, ew), (odd, ow) = parts
    return RingElement(ring, even, ew, odd, ow)


def partial_derivative(f: RingElement, index: int) -> RingElement:
    """∂f/∂x for a coordinate variable x (z_k or z̄_k), extended to s and w by
    ∂s/∂z_k = z̄_k·s·w/2 and ∂w/∂z_k = −z̄_k·w² (and conjugates)."""
    ring = f.ring
    even = _frac_diff(ring, (f.even, f.even_w), index)
    odd = _frac_diff(ring, (f.odd, f.odd_w), index)
    if f.odd:
        half = QQ_I.convert(QQ(1, 2))
        odd = _frac_add(ring, odd, (f.odd * ring.r2_gradient(index) * half, f.odd_w + 1))
    return RingElement(ring, even[0], even[1], odd[0], odd[1])


def restrict_to_sphere(f: RingElement) -> RingElement:
    """ι*: set s → 1 and w → 1, then take the remainder modulo |z|² − 1."""
    ring = f.ring
    remainder = ring.sphere_normal_form(f.even + f.odd)
    return RingElement(ring, remainder, 0, ring.poly_ring.zero, 0)


def homogeneous_components(poly: PolyElement, ring: CoordinateRing) -> dict[int, PolyElement]:
    """Split a coordinate polynomial by total z, z̄-degree."""
    pieces: dict[int, dict] = {}
    for monom, coeff in poly.terms():
        pieces.setdefault(sum(monom[:ring.nvars]), {})[monom] = coeff
    return {d: ring.poly_ring.from_dict(terms) for d, terms in pieces.items()}
