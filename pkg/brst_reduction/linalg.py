"""
BRST Reduction - Exact Linear Algebra Module

Sparse linear systems over the Gaussian rationals, solved by reduced row
echelon form with sympy's DomainMatrix (sparse SDM format). Used by the
class-equality test and the equivalence search.
"""

import logging
from collections.abc import Hashable, Mapping

from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)


class LinearSystem:
    """Equations Σ_u a_u·x_u = b with hashable unknown labels.

    Unknowns are registered on first use, so their column order follows
    insertion order and results are deterministic.
    """

    def __init__(self, unknowns=()):
        self._columns: dict[Hashable, int] = {}
        self._rows: list[dict[int, object]] = []
        self._rhs: list[object] = []
        self._labels: list[Hashable] = []
        for unknown in unknowns:
            self.column(unknown)

    def column(self, unknown: Hashable) -> int:
        index = self._columns.get(unknown)
        if index is None:
            index = self._columns[unknown] = len(self._columns)
        return index

    @property
    def unknowns(self) -> list[Hashable]:
        return list(self._columns)

    def __len__(self) -> int:
        return len(self._rows)

    def add_equation(self, coefficients: Mapping[Hashable, object], rhs=0, label=None) -> None:
        row = {}
        for unknown, value in coefficients.items():
            value = QQ_I.convert(value)
            if value:
                row[self.column(unknown)] = value
        rhs = QQ_I.convert(rhs)
        if not row and not rhs:
            return
        self._rows.append(row)
        self._rhs.append(rhs)
        self._labels.append(label)

    def solve(self) -> "Solution":
        """Particular solution with all free unknowns set to zero."""
        ncols = len(self._columns)
        if not self._rows:
            return Solution({u: QQ_I.zero for u in self._columns}, None)
        rhs_col = ncols
        data = {}
        for i, (row, rhs) in enumerate(zip(self._rows, self._rhs)):
            entries = dict(row)
            if rhs:
                entries[rhs_col] = rhs
            if entries:
                data[i] = entries
        logger.debug("Solving %d x %d system", len(self._rows), ncols)
        augmented = DomainMatrix(data, (len(self._rows), ncols + 1), QQ_I)
        reduced, pivots = augmented.rref()
        rep = reduced.to_sparse().rep
        if rhs_col in pivots:
            witness = self._labels[self._first_inconsistent(rhs_col)]
            return Solution(None, witness)
        values = {u: QQ_I.zero for u in self._columns}
        labels = list(self._columns)
        for i, pivot in enumerate(pivots):
            values[labels[pivot]] = rep.get(i, {}).get(rhs_col, QQ_I.zero)
        return Solution(values, None)

    def _first_inconsistent(self, rhs_col: int) -> int:
        """Index of the equation that first makes the prefix system inconsistent."""
        lo, hi = 0, len(self._rows)
        while lo < hi:
            mid = (lo + hi) // 2
            if _consistent(self._rows[:mid + 1], self._rhs[:mid + 1], rhs_col):
                lo = mid + 1
            else:
                hi = mid
        return min(lo, len(self._rows) - 1)

    def rank(self) -> int:
        if not self._rows:
            return 0
        data = {i: dict(row) for i, row in enumerate(self._rows) if row}
        matrix = DomainMatrix(data, (len(self._rows), max(len(self._columns), 1)), QQ_I)
        return matrix.rank()


class Solution:
    """Outcome of LinearSystem.solve: values or an inconsistency witness."""

    __slots__ = ("values", "witness")

    def __init__(self, values: dict | None, witness):
        self.values = values
        self.witness = witness

    @property
    def consistent(self) -> bool:
        return self.values is not None

    def __bool__(self) -> bool:
        return self.consistent

    def __getitem__(self, unknown):
        return self.values.get(unknown, QQ_I.zero)


def _consistent(rows, rhs, rhs_col: int) -> bool:
    data = {}
    for i, (row, b) in enumerate(zip(rows, rhs)):
        entries = dict(row)
        if b:
            entries[rhs_col] = b
        if entries:
            data[i] = entries
    if not data:
        return True
    _, pivots = DomainMatrix(data, (len(rows), rhs_col + 1), QQ_I).rref()
    return rhs_col not in pivots
