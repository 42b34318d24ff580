"""Weight-k modular symbols for Gamma_0(N) in the Manin presentation.

A symbol phi is a map from degree-zero cusp divisors to homogeneous
polynomials of degree k-2, equivariant for the substitution action
(phi(g D))(X, Y) = (phi(D))((X, Y) g).  It is determined by its values on
the generator paths g_j({0} - {oo}), one for each (c : d) in P^1(Z/N); the
two- and three-term Manin relations cut out exactly the valid value systems,
and are solved once per space by exact sparse elimination over Q.

Hecke operators and the plus involution are computed from first principles
by pushing divisors through the degeneracy matrices and twisting values by
the adjugate substitution, which is what the period-integral definition of
the symbol forces.  Everything is exact; eigen-symbols are normalised to
integer values with content one, which fixes the cohomological-period scale
simultaneously at every prime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import cfrac_paths, is_prime, primes_up_to
from .linalg import NullspaceParametrization, SpanSolver, nullspace

S_MAT = (0, -1, 1, 0)
T_MAT = (0, -1, 1, -1)


class EigenSymbolError(RuntimeError):
    pass


def mat_mul2(A, B):
    a, b, c, d = A
    e, f, g, h = B
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_det2(A):
    return A[0] * A[3] - A[1] * A[2]


def mat_adj2(A):
    a, b, c, d = A
    return (d, -b, -c, a)


def moebius(A, x):
    """Fractional-linear image of a cusp (None = infinity)."""
    a, b, c, d = A
    if x is None:
        return None if c == 0 else Fraction(a, c)
    num = a * x + b
    den = c * x + d
    return None if den == 0 else Fraction(num, den)


def poly_act(coeffs, mat):
    """Coefficients of P((X,Y) mat) for P given by X^i Y^(d-i) coefficients.

    Works over any commutative coefficients (ints during evaluation,
    Fractions during space construction).
    """
    a, b, c, d = mat
    deg = len(coeffs) - 1
    if deg == 0:
        return list(coeffs)
    # powers of (aX + cY) and (bX + dY), as lists over X-degree
    pow1 = [[1]]
    pow2 = [[1]]
    for i in range(deg):
        last = pow1[-1]
        nxt = [0] * (len(last) + 1)
        for t, v in enumerate(last):
            nxt[t + 1] += v * a
            nxt[t] += v * c
        pow1.append(nxt)
        last = pow2[-1]
        nxt = [0] * (len(last) + 1)
        for t, v in enumerate(last):
            nxt[t + 1] += v * b
            nxt[t] += v * d
        pow2.append(nxt)
    out = [0] * (deg + 1)
    for i, coef in enumerate(coeffs):
        if not coef:
            continue
        left, right = pow1[i], pow2[deg - i]
        for t1, v1 in enumerate(left):
            if not v1:
                continue
            for t2, v2 in enumerate(right):
                out[t1 + t2] += coef * v1 * v2
    return out


def poly_matrix(mat, deg):
    """Matrix A with (P|mat)_i = sum_m A[i][m] P_m on degree-deg polynomials."""
    cols = []
    for m in range(deg + 1):
        unit = [0] * (deg + 1)
        unit[m] = 1
        cols.append(poly_act(unit, mat))
    return [[cols[m][i] for m in range(deg + 1)] for i in range(deg + 1)]


@dataclass(frozen=True)
class HomogeneousPoly:
    """Homogeneous polynomial sum coeffs[i] X^i Y^(degree-i)."""

    degree: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ValueError("need exactly degree+1 coefficients")

    def at(self, x, y):
        return sum(c * x**i * y ** (self.degree - i) for i, c in enumerate(self.coeffs))

    def at_zero_one(self):
        """Specialisation (X, Y) = (0, 1): the Y^degree coefficient."""
        return self.coeffs[0]

    def __add__(self, other):
        return HomogeneousPoly(
            self.degree, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __sub__(self, other):
        return HomogeneousPoly(
            self.degree, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)


# ---------------------------------------------------------------------------
# the projective line over Z/N


def _p1_normalize(N: int, c: int, d: int):
    if N == 1:
        return (0, 0)
    c %= N
    d %= N
    if math.gcd(math.gcd(c, d), N) != 1:
        raise ValueError(f"({c}:{d}) is not a point of P^1(Z/{N})")
    if c == 0:
        return (0, 1)
    g = math.gcd(c, N)
    # scale by a unit taking c to g
    c1 = c // g
    n1 = N // g
    u = pow(c1, -1, n1)
    while math.gcd(u, N) != 1:
        u += n1
    d = (d * u) % N
    # the remaining stabiliser scales d by units congruent to 1 mod N/g
    best = d
    if g > 1:
        for t in range(1, g):
            v = 1 + t * n1
            if math.gcd(v, N) == 1:
                cand = (d * v) % N
                if cand < best:
                    best = cand
    return (g, best)


def _p1_list(N: int):
    if N == 1:
        return [(0, 0)]
    seen = {}
    order = []
    for c in range(N):
        for d in range(N):
            if math.gcd(math.gcd(c, d), N) != 1:
                continue
            key = _p1_normalize(N, c, d)
            if key not in seen:
                seen[key] = True
                order.append(key)
    return order


def _lift_to_sl2(N: int, c: int, d: int):
    """Some g in SL_2(Z) whose bottom row is congruent to (c, d) mod N."""
    if N == 1 or (c, d) == (0, 0):
        return (1, 0, 0, 1)
    if c % N == 0:
        return (1, 0, 0, 1) if d % N == 1 else _lift_to_sl2(N, 0, 1)
    c0 = c % N
    d0 = d % N
    k = 0
    while math.gcd(c0, d0 + k * N) != 1:
        k += 1
    d0 += k * N
    # solve u*c0 + v*d0 = 1, set g = [v, -u; c0, d0]
    u, v = _xgcd(c0, d0)
    return (v, -u, c0, d0)


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a != 1:
        raise ValueError("inputs are not coprime")
    return x0, y0


# ---------------------------------------------------------------------------
# the space


class ManinSymbolSpace:
    """Solved modular-symbol space for Gamma_0(N) in weight k.

    Coordinates are indexed by (generator j, monomial i); the relation
    solution expresses every coordinate over the free subset, so a symbol is
    a free-coordinate vector and its full value system is reconstructed on
    demand.  Immutable after construction; evaluations are pure.
    """

    def __init__(self, N: int, k: int):
        if N < 1:
            raise ValueError("level must be >= 1")
        if k < 2 or k % 2 != 0:
            raise ValueError("weight must be an even integer >= 2")
        self.N = N
        self.k = k
        self.degree = k - 2
        self.width = k - 1
        self.p1 = _p1_list(N)
        self.p1_index = {pt: j for j, pt in enumerate(self.p1)}
        self.lifts = [_lift_to_sl2(N, c, d) for c, d in self.p1]
        self.ncoords = self.width * len(self.p1)
        rows = self._relation_rows()
        self.param = NullspaceParametrization(rows, self.ncoords)
        self.dim = self.param.dim
        self._plus_basis = None
        self._involution_free = None
        self._hecke_plus: dict[int, list] = {}
        self._hecke_solver = None

    # -- indexing helpers

    def coord(self, j: int, i: int) -> int:
        return j * self.width + i

    def index_of_point(self, c: int, d: int) -> int:
        return self.p1_index[_p1_normalize(self.N, c, d)]

    def coset_of(self, mat):
        """(j, gamma) with mat = gamma * lift_j and gamma in Gamma_0(N)."""
        j = self.index_of_point(mat[2], mat[3])
        gamma = mat_mul2(mat, mat_adj2(self.lifts[j]))
        if mat_det2(gamma) != 1 or gamma[2] % self.N != 0:
            raise ArithmeticError("coset decomposition failed")
        return j, gamma

    def _relation_rows(self):
        rows = []
        deg = self.degree
        for j, lift in enumerate(self.lifts):
            for step_mats in ((S_MAT,), (T_MAT, mat_mul2(T_MAT, T_MAT))):
                entries: dict[int, Fraction] = {}
                for i in range(self.width):
                    entries[self.coord(j, i)] = Fraction(1)
                acc = dict(entries)
                rowset = []
                for mstep in step_mats:
                    m = mat_mul2(lift, mstep)
                    j2, gamma = self.coset_of(m)
                    action = poly_matrix(gamma, deg)
                    rowset.append((j2, action))
                for i in range(self.width):
                    row = {self.coord(j, i): Fraction(1)}
                    for j2, action in rowset:
                        for mcol in range(self.width):
                            val = action[i][mcol]
                            if val:
                                key = self.coord(j2, mcol)
                                row[key] = row.get(key, Fraction(0)) + val
                    rows.append({c: v for c, v in row.items() if v})
        return rows

    # -- symbols as value systems

    def block(self, full, j):
        return full[j * self.width : (j + 1) * self.width]

    def value_at_matrix(self, full, mat):
        """phi(mat({0} - {oo})) for a det-one integer matrix."""
        j, gamma = self.coset_of(mat)
        return poly_act(self.block(full, j), gamma)

    def eval_from_infinity(self, full, r, cache=None):
        """phi({oo} - {r}) with r a Fraction or None for infinity."""
        if r is None:
            return [0] * self.width
        if cache is not None and r in cache:
            return cache[r]
        total = [0] * self.width
        for path in cfrac_paths(r):
            piece = self.value_at_matrix(full, (path.a, path.b, path.c, path.d))
            total = [x + y for x, y in zip(total, piece)]
        if cache is not None:
            cache[r] = total
        return total

    def eval_divisor(self, full, alpha, beta, cache=None):
        """phi({alpha} - {beta}), endpoints Fractions or None for infinity."""
        left = self.eval_from_infinity(full, beta, cache)
        right = self.eval_from_infinity(full, alpha, cache)
        return [x - y for x, y in zip(left, right)]

    # -- involution and Hecke action

    def _apply_involution_block(self, full, j, cache=None):
        a, b, c, d = self.lifts[j]
        val = self.value_at_matrix(full, (a, -b, -c, d))
        return poly_act(val, (1, 0, 0, -1))

    def _hecke_degeneracies(self, ell):
        mats = [(1, j, 0, ell) for j in range(ell)]
        if self.N % ell != 0:
            mats.append((ell, 0, 0, 1))
        return mats

    def _apply_hecke_block(self, full, j, ell, cache):
        lift = self.lifts[j]
        alpha0 = moebius(lift, Fraction(0))
        beta0 = moebius(lift, None)
        total = [0] * self.width
        for delta in self._hecke_degeneracies(ell):
            val = self.eval_divisor(
                full, moebius(delta, alpha0), moebius(delta, beta0), cache
            )
            piece = poly_act(val, mat_adj2(delta))
            total = [x + y for x, y in zip(total, piece)]
        return total

    def _free_coords_of(self, block_fn, full):
        """Free coordinates of the symbol whose block at j is block_fn(full, j)."""
        by_gen: dict[int, list] = {}
        out = []
        for c in self.param.free_cols:
            j, i = divmod(c, self.width)
            if j not in by_gen:
                by_gen[j] = block_fn(full, j)
            out.append(by_gen[j][i])
        return out

    def apply_hecke_free(self, full, ell):
        """Free coordinates of T_ell phi (U_ell when ell | N)."""
        if not is_prime(ell):
            raise ValueError("Hecke operators are provided at primes only")
        cache: dict = {}
        return self._free_coords_of(
            lambda f, j: self._apply_hecke_block(f, j, ell, cache), full
        )

    def involution_free_matrix(self):
        if self._involution_free is None:
            cols = []
            for b in range(self.dim):
                free = [Fraction(0)] * self.dim
                free[b] = Fraction(1)
                full = self.param.reconstruct(free)
                cols.append(self._free_coords_of(self._apply_involution_block, full))
            self._involution_free = [
                [cols[b][i] for b in range(self.dim)] for i in range(self.dim)
            ]
        return self._involution_free

    def plus_basis(self):
        """Basis (free coordinates) of the +1 eigenspace of the involution."""
        if self._plus_basis is None:
            iota = self.involution_free_matrix()
            mat = [
                [iota[i][j] - (1 if i == j else 0) for j in range(self.dim)]
                for i in range(self.dim)
            ]
            self._plus_basis = nullspace(mat)
            self._hecke_solver = SpanSolver(self._plus_basis) if self._plus_basis else None
        return self._plus_basis

    @property
    def plus_dimension(self):
        return len(self.plus_basis())

    def hecke_matrix_plus(self, ell):
        """Exact matrix of T_ell (U_ell for ell | N) on the plus subspace."""
        if ell not in self._hecke_plus:
            basis = self.plus_basis()
            cols = []
            for vec in basis:
                full = self.param.reconstruct(vec)
                image = self.apply_hecke_free(full, ell)
                cols.append(self._hecke_solver.solve(image))
            self._hecke_plus[ell] = [
                [cols[b][i] for b in range(len(basis))] for i in range(len(basis))
            ]
        return self._hecke_plus[ell]


_SPACE_CACHE: dict = {}


def build_space(N: int, k: int) -> ManinSymbolSpace:
    """Construct (and memoise) the level-N weight-k space."""
    key = (N, k)
    if key not in _SPACE_CACHE:
        _SPACE_CACHE[key] = ManinSymbolSpace(N, k)
    return _SPACE_CACHE[key]


def hecke_operator(space: ManinSymbolSpace, ell: int):
    """Matrix of the ell-th Hecke operator on the plus subspace."""
    return space.hecke_matrix_plus(ell)


# ---------------------------------------------------------------------------
# eigen-symbols


@dataclass(frozen=True)
class EigenSymbol:
    """Integer-valued symbol spanning a rank-one simultaneous eigenspace.

    ``coords`` lists the value system over all generators (content one,
    first nonzero entry positive), so every evaluation of the symbol is an
    exact integer-coefficient polynomial.
    """

    space: ManinSymbolSpace = field(repr=False)
    coords: tuple
    eigen_used: tuple

    def block(self, j):
        return list(self.space.block(self.coords, j))

    def evaluate_divisor(self, alpha, beta) -> HomogeneousPoly:
        vals = self.space.eval_divisor(list(self.coords), alpha, beta)
        return HomogeneousPoly(self.space.degree, tuple(vals))

    def evaluate(self, r) -> HomogeneousPoly:
        """phi({oo} - {r}) as a polynomial; r a Fraction (or None for oo)."""
        vals = self.space.eval_from_infinity(list(self.coords), r)
        return HomogeneousPoly(self.space.degree, tuple(vals))

    def hecke_eigenvalue(self, ell) -> Fraction:
        image = self.space.apply_hecke_free(list(self.coords), ell)
        free = self.space.param.restrict(list(self.coords))
        pivot = next(i for i, v in enumerate(free) if v)
        value = Fraction(image[pivot], free[pivot])
        for i, v in enumerate(free):
            if image[i] != value * v:
                raise EigenSymbolError(f"symbol is not a T_{ell} eigenvector")
        return value


def normalize_integral(vector):
    """Scale a rational vector to integers with content 1 and a positive
    leading nonzero entry."""
    vec = [Fraction(v) for v in vector]
    if all(v == 0 for v in vec):
        raise ValueError("cannot normalise the zero vector")
    denom = 1
    for v in vec:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    ints = [int(v * denom) for v in vec]
    content = 0
    for v in ints:
        content = math.gcd(content, abs(v))
    ints = [v // content for v in ints]
    lead = next(v for v in ints if v)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def eigen_symbol(space: ManinSymbolSpace, eigen_data, prime_bound: int = 50) -> EigenSymbol:
    """Cut the plus subspace down to the rank-one a_ell eigensystem.

    ``eigen_data`` maps primes not dividing the level to eigenvalues (a dict
    or a callable); kernels of T_ell - a_ell are intersected over increasing
    ell until the space is one-dimensional.
    """
    getter = eigen_data.get if isinstance(eigen_data, dict) else eigen_data
    subspace = space.plus_basis()
    if not subspace:
        raise EigenSymbolError("no eigenvector: plus subspace is trivial")
    used = []
    for ell in primes_up_to(prime_bound):
        if space.N % ell == 0:
            continue
        if len(subspace) == 1:
            break
        a_ell = getter(ell)
        if a_ell is None:
            continue
        solver = SpanSolver(subspace)
        images = []
        for vec in subspace:
            full = space.param.reconstruct(vec)
            images.append(solver.solve(space.apply_hecke_free(full, ell)))
        s = len(subspace)
        mat = [[images[b][i] - (a_ell if i == b else 0) for b in range(s)] for i in range(s)]
        kernel = nullspace(mat)
        used.append((ell, a_ell))
        if not kernel:
            raise EigenSymbolError("no eigenvector for the requested eigenvalues")
        subspace = [
            [
                sum((kvec[b] * subspace[b][c] for b in range(s)), Fraction(0))
                for c in range(space.dim)
            ]
            for kvec in kernel
        ]
    if len(subspace) != 1:
        raise EigenSymbolError(
            f"not rank one: eigenspace has dimension {len(subspace)} "
            f"after primes up to {prime_bound}"
        )
    full = space.param.reconstruct(subspace[0])
    coords = normalize_integral(full)
    return EigenSymbol(space, coords, tuple(used))
