"""Exact linear algebra over the rationals: sparse reduced row echelon form
with a null-space parametrization, plus small dense kernel/solve helpers.

Rows are dicts {column: Fraction}; this keeps the modular-symbol relation
systems (a few nonzero entries per row) cheap to reduce exactly.
"""

from __future__ import annotations

from fractions import Fraction


def _reduce_row(row: dict, pivots: dict) -> dict:
    out = dict(row)
    for col in sorted(out):
        if col in pivots and out.get(col):
            coef = out[col]
            for c2, v2 in pivots[col].items():
                new = out.get(c2, Fraction(0)) - coef * v2
                if new:
                    out[c2] = new
                else:
                    out.pop(c2, None)
    return {c: v for c, v in out.items() if v}


def sparse_rref(rows, ncols: int):
    """Reduced row echelon form of a sparse rational matrix.

    Returns a dict mapping each pivot column to its fully reduced row
    (pivot entry scaled to 1, zero in every other pivot column).
    """
    pivots: dict[int, dict] = {}
    for row in rows:
        red = _reduce_row(row, pivots)
        if not red:
            continue
        pivot_col = min(red)
        inv = Fraction(1) / red[pivot_col]
        red = {c: v * inv for c, v in red.items()}
        for other in pivots.values():
            if pivot_col in other:
                coef = other.pop(pivot_col)
                for c2, v2 in red.items():
                    if c2 == pivot_col:
                        continue
                    new = other.get(c2, Fraction(0)) - coef * v2
                    if new:
                        other[c2] = new
                    else:
                        other.pop(c2, None)
        pivots[pivot_col] = red
    return pivots


class NullspaceParametrization:
    """Solution space of R x = 0 written as x = E * x_free.

    ``free_cols`` lists the free coordinates in increasing order; ``expr``
    maps every ambient coordinate to a sparse row over the free ones, so a
    full solution vector is reconstructed from its free part exactly.
    """

    def __init__(self, rows, ncols: int):
        pivots = sparse_rref(rows, ncols)
        self.ncols = ncols
        self.free_cols = [c for c in range(ncols) if c not in pivots]
        self.free_index = {c: i for i, c in enumerate(self.free_cols)}
        self.dim = len(self.free_cols)
        self.expr: list[dict[int, Fraction]] = []
        for c in range(ncols):
            if c in pivots:
                row = {
                    self.free_index[c2]: -v
                    for c2, v in pivots[c].items()
                    if c2 != c
                }
                self.expr.append(row)
            else:
                self.expr.append({self.free_index[c]: Fraction(1)})

    def reconstruct(self, free_vector):
        """Full ambient vector from a vector of free coordinates."""
        full = []
        for c in range(self.ncols):
            acc = Fraction(0)
            for k, coef in self.expr[c].items():
                if free_vector[k]:
                    acc += coef * free_vector[k]
            full.append(acc)
        return full

    def restrict(self, full_vector):
        """Free coordinates of an ambient vector (assumed in the space)."""
        return [full_vector[c] for c in self.free_cols]


def mat_vec(matrix, vector):
    return [sum((row[j] * vector[j] for j in range(len(vector))), Fraction(0)) for row in matrix]


def mat_mul(a, b):
    n, m = len(a), len(b[0])
    inner = len(b)
    return [
        [sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(m)]
        for i in range(n)
    ]


def nullspace(matrix):
    """Basis of the kernel of a dense rational matrix (list of row vectors)."""
    if not matrix:
        return []
    ncols = len(matrix[0])
    rows = [{j: Fraction(v) for j, v in enumerate(row) if v} for row in matrix]
    param = NullspaceParametrization(rows, ncols)
    basis = []
    for k in range(param.dim):
        free = [Fraction(0)] * param.dim
        free[k] = Fraction(1)
        basis.append(param.reconstruct(free))
    return basis


class SpanSolver:
    """Expresses vectors in the span of a fixed list of basis vectors."""

    def __init__(self, basis):
        self.basis = [list(map(Fraction, v)) for v in basis]
        self.dim = len(self.basis)
        self.ambient = len(self.basis[0]) if self.basis else 0
        # echelonize the basis, remembering the combination that produced
        # each echelon row
        self._rows = []  # (pivot_col, vector, combo)
        for i, vec in enumerate(self.basis):
            v = list(vec)
            combo = [Fraction(0)] * self.dim
            combo[i] = Fraction(1)
            for pcol, pvec, pcombo in self._rows:
                if v[pcol]:
                    coef = v[pcol]
                    v = [a - coef * b for a, b in zip(v, pvec)]
                    combo = [a - coef * b for a, b in zip(combo, pcombo)]
            pivot = next((j for j, a in enumerate(v) if a), None)
            if pivot is None:
                raise ValueError("basis vectors are linearly dependent")
            inv = Fraction(1) / v[pivot]
            v = [a * inv for a in v]
            combo = [a * inv for a in combo]
            self._rows.append((pivot, v, combo))

    def solve(self, vector):
        """Coefficients c with sum c_i basis_i = vector; raises if outside."""
        v = list(map(Fraction, vector))
        coeffs = [Fraction(0)] * self.dim
        for pcol, pvec, pcombo in self._rows:
            if v[pcol]:
                coef = v[pcol]
                v = [a - coef * b for a, b in zip(v, pvec)]
                coeffs = [a + coef * b for a, b in zip(coeffs, pcombo)]
        if any(v):
            raise ValueError("vector does not lie in the span")
        return coeffs
