"""Mazur-Tate elements and their Iwasawa invariants.

The level-n raw element collects the exact integers
C_a = phi({oo} - {a/p^(n+1)}) specialised at (X, Y) = (0, 1) over the units
a of Z/p^(n+1), for every p.  Projection to the cyclotomic layer collapses
the tame torsion of (Z/p^(n+1))^*: sigma_a factors as its torsion part
times gamma^(a'), so sigma_a maps to (1+X)^(a') with a' the cyclotomic
discrete logarithm, and the group-ring coefficient at (1+X)^(a') is the sum
of C_a over the torsion fibre.  The layer has p^n elements for odd p and
2^(n-1) for p = 2 (the torsion is {+-1} there).  The plus-eigenspace forces
C_(-a) = C_a, so twisting the fibre sum by an odd power of the Teichmuller
character would annihilate everything; the untwisted fibre sum is the
element whose invariants the lambda tables record.

Because the fibre sums are plain integers, the element is carried exactly:
vanishing is decidable (invariants (oo, oo) exactly when all coefficients
vanish) and the residue precision M of the reported group-ring element can
be raised for free until mu is certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .curves import WeierstrassCurve, count_points, is_additive_at
from .exactnum import INF, cyclotomic_dlog, is_prime
from .modsymb import EigenSymbol, build_space, eigen_symbol
from .qseries import delta_qexp

DEFAULT_EVALUATION_BUDGET = 10**6


def layer_size(p: int, n: int) -> int:
    """Order of the degree-n cyclotomic layer group: the units modulo
    p^(n+1) with the tame torsion ({+-1} for p = 2) removed."""
    if p == 2:
        return 1 if n == 0 else 2 ** (n - 1)
    return p**n


def _layer_exponent(a: int, p: int, n: int) -> int:
    if p == 2:
        return 0 if n == 0 else cyclotomic_dlog(a, 2, n - 1)
    return cyclotomic_dlog(a, p, n)


# ---------------------------------------------------------------------------
# raw theta elements


@dataclass(frozen=True)
class RawTheta:
    """Exact integer coefficients C_a indexed by the units of the modulus."""

    p: int
    n: int
    units: tuple
    values: tuple

    @property
    def modulus(self) -> int:
        return self.p ** (self.n + 1)

    def value(self, a: int) -> int:
        return self.values[self.units.index(a)]

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def scaled(self, c: int) -> "RawTheta":
        return RawTheta(self.p, self.n, self.units, tuple(c * v for v in self.values))


def theta_units(p: int, n: int) -> tuple:
    modulus = p ** (n + 1)
    return tuple(a for a in range(1, modulus) if a % p != 0) or (1,)


def theta_raw(
    phi: EigenSymbol, p: int, n: int, budget: int = DEFAULT_EVALUATION_BUDGET
) -> RawTheta:
    """Evaluate the symbol across one cyclotomic layer.

    C_a = phi({oo} - {a/p^(n+1)}) at (X, Y) = (0, 1), an exact integer by
    the content-one normalisation of the symbol.
    """
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if n < 0:
        raise ValueError("level n must be >= 0")
    units = theta_units(p, n)
    if len(units) > budget:
        raise ValueError(
            f"level n = {n} needs {len(units)} evaluations, over the budget {budget}"
        )
    modulus = p ** (n + 1)
    values = tuple(phi.evaluate(Fraction(a, modulus)).at_zero_one() for a in units)
    return RawTheta(p, n, units, values)


# ---------------------------------------------------------------------------
# group-ring elements: exact integer form and residue snapshots


@dataclass(frozen=True)
class GroupRingElement:
    """Element of (Z/p^M)[X] / ((1+X)^s - 1), s the layer size, in the
    X-power basis (s = p^n for odd p, 2^(n-1) for p = 2)."""

    p: int
    n: int
    M: int
    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) != layer_size(self.p, self.n):
            raise ValueError("coefficient count must equal the layer size")
        mod = self.p**self.M
        object.__setattr__(
            self, "coefficients", tuple(c % mod for c in self.coefficients)
        )

    @property
    def size(self) -> int:
        return layer_size(self.p, self.n)

    @property
    def residue_modulus(self) -> int:
        return self.p**self.M

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def scaled(self, c: int) -> "GroupRingElement":
        return GroupRingElement(
            self.p, self.n, self.M, tuple(c * v for v in self.coefficients)
        )

    def reduced_mod_p(self) -> tuple:
        return tuple(c % self.p for c in self.coefficients)

    def to_json_dict(self, invariants=None) -> dict:
        out = {
            "p": self.p,
            "n": self.n,
            "M": self.M,
            "basis": "X-power",
            "coefficients": list(self.coefficients),
        }
        if invariants is not None:
            out["mu"] = "inf" if invariants.mu == INF else invariants.mu
            out["lambda"] = "inf" if invariants.lam == INF else invariants.lam
            out["precision_certified"] = invariants.precision_certified
        return out


def _onepx_to_x(coeffs, ring_size):
    """(1+X)-basis to X-power basis: a_i = sum_{j >= i} C(j, i) c_j."""
    out = [0] * ring_size
    for j, cj in enumerate(coeffs):
        if not cj:
            continue
        row = 1  # C(j, i) as i advances
        for i in range(j + 1):
            out[i] += cj * row
            row = row * (j - i) // (i + 1)
    return out


def _x_to_onepx(coeffs, ring_size, modulus=None):
    """Inverse binomial transform (unitriangular, exact; optionally mod m)."""
    c = [0] * ring_size
    for j in range(ring_size - 1, -1, -1):
        acc = coeffs[j]
        row = 1  # C(j', j) starting at j' = j
        for jp in range(j + 1, ring_size):
            row = row * jp // (jp - j)
            if c[jp]:
                acc -= row * c[jp]
        c[j] = acc if modulus is None else acc % modulus
    return c


@dataclass(frozen=True)
class ExactTheta:
    """The projected element with exact integer coefficients, stored in the
    (1+X)-power basis of Z[X] / ((1+X)^s - 1), s the layer size."""

    p: int
    n: int
    coeffs: tuple

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def corestricted(self) -> "ExactTheta":
        if self.n < 1:
            raise ValueError("corestriction needs level >= 1")
        size = layer_size(self.p, self.n - 1)
        out = [0] * size
        for j, c in enumerate(self.coeffs):
            out[j % size] += c
        return ExactTheta(self.p, self.n - 1, tuple(out))

    def scaled(self, c: int) -> "ExactTheta":
        return ExactTheta(self.p, self.n, tuple(c * v for v in self.coeffs))

    def minus(self, other: "ExactTheta") -> "ExactTheta":
        return ExactTheta(
            self.p, self.n, tuple(u - v for u, v in zip(self.coeffs, other.coeffs))
        )

    def x_basis(self) -> list:
        return _onepx_to_x(self.coeffs, layer_size(self.p, self.n))

    def to_group_ring(self, M: int) -> GroupRingElement:
        return GroupRingElement(self.p, self.n, M, tuple(self.x_basis()))


def exact_projection(raw: RawTheta) -> ExactTheta:
    """Collapse the tame torsion: sum C_a onto (1+X)^(a') over the fibre of
    each cyclotomic exponent a'."""
    out = [0] * layer_size(raw.p, raw.n)
    for a, c in zip(raw.units, raw.values):
        if c:
            out[_layer_exponent(a, raw.p, raw.n)] += c
    return ExactTheta(raw.p, raw.n, tuple(out))


def project_twist(raw: RawTheta, M: int) -> GroupRingElement:
    """The Mazur-Tate group-ring element modulo p^M in the X-power basis."""
    if M < 1:
        raise ValueError("precision M must be >= 1")
    return exact_projection(raw).to_group_ring(M)


# ---------------------------------------------------------------------------
# Iwasawa invariants


@dataclass(frozen=True)
class IwasawaInvariants:
    mu: object
    lam: object
    precision_certified: bool

    def __post_init__(self):
        if (self.mu == INF) != (self.lam == INF):
            raise ValueError("mu and lambda must be infinite together")

    def is_infinite(self) -> bool:
        return self.mu == INF

    def as_pair(self):
        return (self.mu, self.lam)

    def to_json_dict(self) -> dict:
        return {
            "mu": "inf" if self.mu == INF else self.mu,
            "lambda": "inf" if self.lam == INF else self.lam,
            "precision_certified": self.precision_certified,
        }


def mu_lambda(F: GroupRingElement, guard: int = 2) -> IwasawaInvariants:
    """mu = least coefficient valuation, lambda = first index attaining it.

    Works at the stored precision: an element vanishing mod p^M yields
    (oo, oo) uncertified; finite values are certified when mu stays guard
    digits clear of the precision ceiling.
    """
    best = None
    best_index = None
    for i, c in enumerate(F.coefficients):
        if c == 0:
            continue
        v = 0
        while c % F.p == 0:
            c //= F.p
            v += 1
        if best is None or v < best:
            best, best_index = v, i
            if best == 0:
                break
    if best is None:
        return IwasawaInvariants(INF, INF, False)
    return IwasawaInvariants(best, best_index, best < F.M - guard)


# ---------------------------------------------------------------------------
# the theta pipeline (form -> invariants, precision-managed)


@dataclass(frozen=True)
class ThetaElement:
    """A computed Mazur-Tate element: raw data, exact projection, residue
    snapshot at the working precision, and certified invariants."""

    form: str
    p: int
    n: int
    raw: RawTheta = field(repr=False)
    exact: ExactTheta = field(repr=False)
    element: GroupRingElement
    invariants: IwasawaInvariants

    def to_json_dict(self) -> dict:
        out = {"form": self.form, "normalization": "content-one integral symbol"}
        out.update(self.element.to_json_dict(self.invariants))
        return out


def default_precision(n: int) -> int:
    return n + 12


_MAX_PRECISION = 4096


def theta_element(
    phi: EigenSymbol,
    p: int,
    n: int,
    M: int | None = None,
    form: str = "",
    budget: int = DEFAULT_EVALUATION_BUDGET,
) -> ThetaElement:
    """Full pipeline: evaluate, project, certify invariants.

    Vanishing is decided exactly on the integer coefficients; otherwise the
    residue precision starts at M (default n + 12) and doubles until mu is
    certified, which terminates because nonzero integers have finite
    valuation.
    """
    raw = theta_raw(phi, p, n, budget)
    exact = exact_projection(raw)
    precision = M if M is not None else default_precision(n)
    if exact.is_zero():
        element = exact.to_group_ring(precision)
        inv = IwasawaInvariants(INF, INF, True)
        return ThetaElement(form, p, n, raw, exact, element, inv)
    while True:
        element = exact.to_group_ring(precision)
        inv = mu_lambda(element)
        if not inv.is_infinite() and inv.precision_certified:
            return ThetaElement(form, p, n, raw, exact, element, inv)
        if M is not None and precision >= M and precision != default_precision(n):
            # caller pinned the precision: report at that precision as is
            return ThetaElement(form, p, n, raw, exact, element, inv)
        if M is not None:
            return ThetaElement(form, p, n, raw, exact, element, inv)
        if precision >= _MAX_PRECISION:
            raise ArithmeticError("precision ceiling reached while certifying mu")
        precision *= 2


# ---------------------------------------------------------------------------
# eigen-symbol providers for the forms in scope


_SYMBOL_CACHE: dict = {}


def eigen_symbol_for_delta(prime_bound: int = 50) -> EigenSymbol:
    key = ("delta", prime_bound)
    if key not in _SYMBOL_CACHE:
        series = delta_qexp(prime_bound + 1)
        space = build_space(1, 12)
        _SYMBOL_CACHE[key] = eigen_symbol(
            space, lambda ell: series.coefficient(ell), prime_bound
        )
    return _SYMBOL_CACHE[key]


def eigen_symbol_for_curve(E: WeierstrassCurve, prime_bound: int = 50) -> EigenSymbol:
    key = (E.label, E.ainvs(), E.conductor, prime_bound)
    if key not in _SYMBOL_CACHE:
        space = build_space(E.conductor, 2)
        _SYMBOL_CACHE[key] = eigen_symbol(
            space, lambda ell: count_points(E, ell).a_ell, prime_bound
        )
    return _SYMBOL_CACHE[key]


def theta_for_delta(
    p: int, n: int, M: int | None = None, budget: int = DEFAULT_EVALUATION_BUDGET
) -> ThetaElement:
    return theta_element(eigen_symbol_for_delta(), p, n, M, form="delta", budget=budget)


def theta_for_curve(
    E: WeierstrassCurve,
    p: int,
    n: int,
    M: int | None = None,
    budget: int = DEFAULT_EVALUATION_BUDGET,
) -> ThetaElement:
    return theta_element(eigen_symbol_for_curve(E), p, n, M, form=E.label, budget=budget)


# ---------------------------------------------------------------------------
# group-ring operations at the residue level


def corestrict(F: GroupRingElement) -> GroupRingElement:
    """Image under the natural projection to the previous layer: in the
    (1+X)-power basis, exponent j maps to j mod (previous layer size)."""
    if F.n < 1:
        raise ValueError("corestriction needs level >= 1")
    mod = F.p**F.M
    onepx = _x_to_onepx(F.coefficients, F.size, mod)
    size = layer_size(F.p, F.n - 1)
    folded = [0] * size
    for j, c in enumerate(onepx):
        folded[j % size] = (folded[j % size] + c) % mod
    return GroupRingElement(F.p, F.n - 1, F.M, tuple(_onepx_to_x(folded, size)))


def multiply(F: GroupRingElement, G: GroupRingElement) -> GroupRingElement:
    """Ring product, via convolution of (1+X)-exponents modulo the layer size."""
    if (F.p, F.n, F.M) != (G.p, G.n, G.M):
        raise ValueError("mixed group rings")
    size = F.size
    mod = F.p**F.M
    cf = _x_to_onepx(F.coefficients, size, mod)
    cg = _x_to_onepx(G.coefficients, size, mod)
    out = [0] * size
    for i, a in enumerate(cf):
        if a:
            for j, b in enumerate(cg):
                if b:
                    k = (i + j) % size
                    out[k] = (out[k] + a * b) % mod
    return GroupRingElement(F.p, F.n, F.M, tuple(_onepx_to_x(out, size)))


def omega_cycle(p: int, n: int, M: int) -> GroupRingElement:
    """(1+X)^s' - 1 inside the level-n ring, s' the previous layer size
    (the augmentation cycle of the previous layer)."""
    size = layer_size(p, n)
    size_prev = layer_size(p, n - 1)
    if size_prev >= size:
        raise ValueError("no augmentation cycle: the layer does not grow")
    onepx = [0] * size
    onepx[size_prev] = 1
    onepx[0] = -1
    return GroupRingElement(p, n, M, tuple(_onepx_to_x(onepx, size)))


def divide_by_augmentation_cycle(F: GroupRingElement) -> GroupRingElement:
    """Quotient G with F = G * ((1+X)^s' - 1), s' the previous layer size,
    for F with vanishing corestriction; raises when divisibility fails."""
    if F.n < 1:
        raise ValueError("needs level >= 1")
    size = F.size
    size_prev = layer_size(F.p, F.n - 1)
    if size_prev >= size:
        raise ValueError("no augmentation cycle: the layer does not grow")
    ratio = size // size_prev
    mod = F.p**F.M
    onepx = _x_to_onepx(F.coefficients, size, mod)
    quotient = [0] * len(onepx)
    for u in range(size_prev):
        total = 0
        for v in range(ratio):
            total = (total + onepx[u + v * size_prev]) % mod
        if total != 0:
            raise ValueError("not divisible: corestriction is nonzero")
        acc = 0
        for v in range(ratio):
            acc = (acc - onepx[u + v * size_prev]) % mod
            quotient[u + v * size_prev] = acc
    return GroupRingElement(F.p, F.n, F.M, tuple(_onepx_to_x(quotient, size)))


def substitute_generator(F: GroupRingElement, u: int) -> GroupRingElement:
    """Ring automorphism induced by gamma -> gamma^u (u prime to p):
    (1+X)^j -> (1+X)^(u j mod layer size)."""
    if u % F.p == 0:
        raise ValueError("generator exponent must be a unit")
    size = F.size
    mod = F.p**F.M
    onepx = _x_to_onepx(F.coefficients, size, mod)
    out = [0] * size
    for j, c in enumerate(onepx):
        out[(u * j) % size] = (out[(u * j) % size] + c) % mod
    return GroupRingElement(F.p, F.n, F.M, tuple(_onepx_to_x(out, size)))


# ---------------------------------------------------------------------------
# theorem-level checks


@dataclass(frozen=True)
class NormRelationReport:
    label: str
    p: int
    n: int
    a_p: int
    passed: bool
    sides_zero: bool
    first_failing_index: int | None

    def to_json_dict(self) -> dict:
        return {
            "curve": self.label,
            "p": self.p,
            "n": self.n,
            "a_p": self.a_p,
            "passed": self.passed,
            "sides_zero": self.sides_zero,
            "first_failing_index": self.first_failing_index,
        }


def check_norm_relation(
    E: WeierstrassCurve, p: int, n: int, M: int | None = None
) -> NormRelationReport:
    """corestriction(theta_(n+1)) = a_p * theta_n at a bad prime p | N_E.

    Both sides are compared through their exact integer coefficients, so a
    pass certifies the identity at every precision at once.
    """
    if E.conductor % p != 0:
        raise ValueError("the norm relation in this form needs p | conductor")
    a_p = count_points(E, p).a_ell
    top = theta_for_curve(E, p, n + 1, M)
    bottom = theta_for_curve(E, p, n, M)
    cor = top.exact.corestricted()
    difference = cor.minus(bottom.exact.scaled(a_p))
    if difference.is_zero():
        return NormRelationReport(E.label, p, n, a_p, True, cor.is_zero(), None)
    failing = next(i for i, c in enumerate(difference.x_basis()) if c)
    return NormRelationReport(E.label, p, n, a_p, False, False, failing)


@dataclass(frozen=True)
class LowerBoundReport:
    label: str
    p: int
    n: int
    lam: object
    bound: int
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "curve": self.label,
            "p": self.p,
            "n": self.n,
            "lambda": "inf" if self.lam == INF else self.lam,
            "bound": self.bound,
            "passed": self.passed,
        }


def check_lambda_lower_bound(E: WeierstrassCurve, p: int, n: int) -> LowerBoundReport:
    """lambda(theta_n) >= p^(n-1) for a curve with additive reduction at p
    (infinite lambda passes vacuously)."""
    if not is_additive_at(E, p):
        raise ValueError(f"{E.label} does not have additive reduction at {p}")
    theta = theta_for_curve(E, p, n)
    bound = p ** (n - 1)
    lam = theta.invariants.lam
    return LowerBoundReport(E.label, p, n, lam, bound, lam == INF or lam >= bound)


@dataclass(frozen=True)
class ThetaComparisonReport:
    p: int
    n: int
    congruent: bool
    unit: int | None
    mu_first: object
    mu_second: object
    lambda_first: object
    lambda_second: object
    lambda_equal: bool

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "congruent_mod_p": self.congruent,
            "congruence_unit": self.unit,
            "mu_first": "inf" if self.mu_first == INF else self.mu_first,
            "mu_second": "inf" if self.mu_second == INF else self.mu_second,
            "lambda_first": "inf" if self.lambda_first == INF else self.lambda_first,
            "lambda_second": "inf" if self.lambda_second == INF else self.lambda_second,
            "lambda_equal": self.lambda_equal,
        }


def primitive_part(F: GroupRingElement) -> GroupRingElement:
    """Scale away the common p-power so the coefficients are not all
    divisible by p (the tilde-normalisation used when comparing elements)."""
    inv = mu_lambda(F)
    if inv.is_infinite():
        return F
    mu = inv.mu
    mod = F.p ** (F.M - mu)
    return GroupRingElement(
        F.p, F.n, F.M - mu, tuple((c // F.p**mu) % mod for c in F.coefficients)
    )


def compare_theta_mod_p(
    F: GroupRingElement, G: GroupRingElement, p: int
) -> ThetaComparisonReport:
    """Coefficientwise congruence mod p of the primitive parts, up to the
    unit ambiguity left by the period normalisation, plus mu and lambda of
    both sides."""
    if F.p != p or G.p != p or F.n != G.n:
        raise ValueError("elements live in different group rings")
    inv_f = mu_lambda(F)
    inv_g = mu_lambda(G)
    fbar = primitive_part(F).reduced_mod_p()
    gbar = primitive_part(G).reduced_mod_p()
    unit = None
    for u in range(1, p):
        if all((a - u * b) % p == 0 for a, b in zip(fbar, gbar)):
            unit = u
            break
    if unit is None and not any(fbar) and not any(gbar):
        unit = 1
    return ThetaComparisonReport(
        p,
        F.n,
        unit is not None,
        unit,
        inv_f.mu,
        inv_g.mu,
        inv_f.lam,
        inv_g.lam,
        inv_f.lam == inv_g.lam,
    )
