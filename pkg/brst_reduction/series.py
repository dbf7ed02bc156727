"""
BRST Reduction - Formal Power Series Module
Truncated series in the formal parameter ν with coefficients in any
commutative-enough algebra (Gaussian rationals, ring elements, forms).
"""

from collections.abc import Callable, Iterable, Mapping

MIN_ORDER = -1


class NuSeries:
    """Σ_k ν^k a_k for MIN_ORDER <= k <= order; coefficients above `order` are dropped.

    `truncated` records that some contribution above `order` was discarded by
    a non-terminating operation (not merely that the series has a cutoff).
    """

    __slots__ = ("_coeffs", "order", "truncated")

    def __init__(self, coeffs: Mapping[int, object] | None = None, order: int = 4,
                 truncated: bool = False):
        if order < MIN_ORDER:
            raise ValueError(f"truncation order {order} below {MIN_ORDER}")
        clean = {}
        for k, value in (coeffs or {}).items():
            if k < MIN_ORDER:
                raise ValueError(f"ν-order {k} below {MIN_ORDER}")
            if k > order or not value:
                continue
            clean[int(k)] = value
        self._coeffs = clean
        self.order = order
        self.truncated = truncated

    @classmethod
    def constant(cls, value, order: int = 4) -> "NuSeries":
        return cls({0: value}, order)

    @classmethod
    def monomial(cls, value, k: int, order: int = 4) -> "NuSeries":
        return cls({k: value}, order)

    # -- access ------------------------------------------------------------

    def __getitem__(self, k: int):
        return self._coeffs.get(k)

    def coefficient(self, k: int, zero=0):
        return self._coeffs.get(k, zero)

    def items(self) -> list[tuple[int, object]]:
        return sorted(self._coeffs.items())

    def orders(self) -> list[int]:
        return sorted(self._coeffs)

    def valuation(self) -> int | None:
        return min(self._coeffs) if self._coeffs else None

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    # -- arithmetic ----------------------------------------------------------

    def _combine(self, other: "NuSeries", op) -> "NuSeries":
        order = min(self.order, other.order)
        coeffs = dict(self._coeffs)
        for k, value in other._coeffs.items():
            coeffs[k] = op(coeffs[k], value) if k in coeffs else op(None, value)
        return NuSeries(coeffs, order, self.truncated or other.truncated)

    def __add__(self, other: "NuSeries") -> "NuSeries":
        if not isinstance(other, NuSeries):
            return NotImplemented
        return self._combine(other, lambda a, b: b if a is None else a + b)

    def __sub__(self, other: "NuSeries") -> "NuSeries":
        if not isinstance(other, NuSeries):
            return NotImplemented
        return self._combine(other, lambda a, b: -b if a is None else a - b)

    def __neg__(self) -> "NuSeries":
        return NuSeries({k: -v for k, v in self._coeffs.items()}, self.order, self.truncated)

    def __mul__(self, other) -> "NuSeries":
        if isinstance(other, NuSeries):
            order = min(self.order, other.order)
            coeffs: dict[int, object] = {}
            for i, a in self._coeffs.items():
                for j, b in other._coeffs.items():
                    if i + j > order:
                        continue
                    term = a * b
                    coeffs[i + j] = coeffs[i + j] + term if i + j in coeffs else term
            return NuSeries(coeffs, order, self.truncated or other.truncated)
        return NuSeries({k: v * other for k, v in self._coeffs.items()}, self.order,
                        self.truncated)

    def __rmul__(self, other) -> "NuSeries":
        return NuSeries({k: other * v for k, v in self._coeffs.items()}, self.order,
                        self.truncated)

    def shift(self, k: int) -> "NuSeries":
        """Multiply by ν^k (k may be negative when the low orders vanish)."""
        return NuSeries({i + k: v for i, v in self._coeffs.items()}, self.order,
                        self.truncated)

    def map(self, fn: Callable[[object], object]) -> "NuSeries":
        """Apply a ν-linear map coefficientwise."""
        return NuSeries({k: fn(v) for k, v in self._coeffs.items()}, self.order,
                        self.truncated)

    def truncate(self, order: int) -> "NuSeries":
        return NuSeries(self._coeffs, min(order, self.order), self.truncated)

    def flagged(self, truncated: bool = True) -> "NuSeries":
        return NuSeries(self._coeffs, self.order, self.truncated or truncated)

    # -- comparison ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, NuSeries):
            return NotImplemented
        order = min(self.order, other.order)
        mine = {k: v for k, v in self._coeffs.items() if k <= order}
        theirs = {k: v for k, v in other._coeffs.items() if k <= order}
        return mine == theirs

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self) -> str:
        if not self._coeffs:
            return f"0 + O(ν^{self.order + 1})"
        body = " + ".join(f"ν^{k}·({v})" for k, v in self.items())
        return f"{body} + O(ν^{self.order + 1})"


def series_sum(terms: Iterable[NuSeries], order: int) -> NuSeries:
    total = NuSeries({}, order)
    for term in terms:
        total = total + term
    return total
