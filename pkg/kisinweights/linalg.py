from __future__ import annotations

from typing import Iterable, Mapping

from kisinweights.algebra import FqField

SparseVector = dict[int, int]


def _axpy(field: FqField, target: SparseVector, factor: int, row: Mapping[int, int]) -> None:
    """target -= factor * row, in place, on field codes."""
    for index, value in row.items():
        current = target.get(index, 0)
        updated = field.sub_codes(current, field.mul_codes(factor, value))
        if updated:
            target[index] = updated
        else:
            target.pop(index, None)


def _scale(field: FqField, row: Mapping[int, int], factor: int) -> SparseVector:
    return {index: field.mul_codes(value, factor) for index, value in row.items()}


class EchelonBasis:
    """Reduced row echelon basis of a subspace of F_q^n with sparse rows.

    Every stored row has pivot coefficient 1 and zeros in all other pivot
    columns, so reduction against the basis is a single pass.
    """

    def __init__(self, field: FqField, *, pivot_limit: int | None = None) -> None:
        self.field = field
        self._rows: dict[int, SparseVector] = {}
        # columns >= pivot_limit are never pivots (augmented right-hand sides)
        self._pivot_limit = pivot_limit

    @property
    def rank(self) -> int:
        return len(self._rows)

    def rows(self) -> dict[int, SparseVector]:
        return {pivot: dict(row) for pivot, row in self._rows.items()}

    def reduce(self, vector: Mapping[int, int]) -> SparseVector:
        reduced = {index: value for index, value in vector.items() if value}
        for pivot in [index for index in reduced if index in self._rows]:
            factor = reduced.get(pivot, 0)
            if factor:
                _axpy(self.field, reduced, factor, self._rows[pivot])
        return reduced

    def add(self, vector: Mapping[int, int]) -> bool:
        """Insert a vector; returns False when it already lies in the span."""
        reduced = self.reduce(vector)
        candidates = [index for index in reduced if self._pivot_limit is None or index < self._pivot_limit]
        if not candidates:
            if reduced:
                # only augmented columns survive
                raise _Inconsistent()
            return False
        pivot = min(candidates)
        row = _scale(self.field, reduced, self.field.inv_code(reduced[pivot]))
        for other_pivot, other in self._rows.items():
            factor = other.get(pivot, 0)
            if factor:
                _axpy(self.field, other, factor, row)
        self._rows[pivot] = row
        return True

    def contains(self, vector: Mapping[int, int]) -> bool:
        return not self.reduce(vector)


class _Inconsistent(Exception):
    pass


def solve_linear_system(
    field: FqField,
    equations: Iterable[tuple[Mapping[int, int], int]],
    unknowns: int,
) -> list[int] | None:
    """Solve sum_j a_j x_j = b for each (a, b); free unknowns are set to 0.

    Coefficients and right-hand sides are field codes. Returns the solution as
    codes or None when the system is inconsistent.
    """
    rhs_column = unknowns
    basis = EchelonBasis(field, pivot_limit=unknowns)
    try:
        for coefficients, rhs in equations:
            row = {index: value for index, value in coefficients.items() if value}
            if rhs:
                row[rhs_column] = rhs
            if row:
                basis.add(row)
    except _Inconsistent:
        return None

    solution = [0] * unknowns
    for pivot, row in basis.rows().items():
        solution[pivot] = row.get(rhs_column, 0)
    return solution
