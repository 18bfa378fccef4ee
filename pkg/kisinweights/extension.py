"""Rank-two extensions of rank-one Kisin modules.

An extension of type (r, a, b, J) with coefficients x_i is

    phi(e_{i-1}) = (b)_i u**(r_i - h_i) e_i
    phi(f_{i-1}) = (a)_i u**h_i f_i + x_i e_i

with h_i = r_i when i is in J and 0 otherwise. A change of basis
f'_i = f_i + alpha_i e_i replaces x_i by

    x_i + (b)_i u**(r_i - h_i) phi(alpha_{i-1}) - (a)_i u**h_i alpha_i.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from kisinweights.algebra import FqElement, FqField, TruncatedSeries, frobenius_substitute
from kisinweights.combinat import h_components, p_set_member
from kisinweights.errors import DomainError, InternalError, ResourceError, StructuralError, TruncationError
from kisinweights.linalg import EchelonBasis, solve_linear_system
from kisinweights.rankone import RankOneModule

logger = logging.getLogger(__name__)

Pair = tuple[int, int]

MAX_FORMS = 2**20


@dataclass(frozen=True, slots=True)
class ExtensionType:
    p: int
    f: int
    r: tuple[int, ...]
    J: frozenset[int]
    a: FqElement
    b: FqElement

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        object.__setattr__(self, "J", frozenset(int(i) for i in self.J))
        if self.f < 1 or len(self.r) != self.f:
            raise StructuralError(f"expected {self.f} twists, got {len(self.r)}")
        if any(x < 1 or x > self.p for x in self.r):
            raise DomainError(f"twists must lie in [1, {self.p}]: {list(self.r)}")
        if any(i < 0 or i >= self.f for i in self.J):
            raise DomainError(f"J={sorted(self.J)} is not inside [0, {self.f})")
        if self.a.field != self.b.field:
            raise StructuralError("labels a and b live in different fields")
        if self.a.field.p != self.p:
            raise StructuralError(f"labels live in characteristic {self.a.field.p}, type in {self.p}")
        if not self.a or not self.b:
            raise DomainError("labels a and b must be nonzero")

    @property
    def field(self) -> FqField:
        return self.a.field

    @property
    def h(self) -> tuple[int, ...]:
        return h_components(self.r, self.J)

    def label_a(self, i: int) -> FqElement:
        return self.a if i % self.f == 0 else self.field.one

    def label_b(self, i: int) -> FqElement:
        return self.b if i % self.f == 0 else self.field.one

    def next_in_J(self, i: int) -> int:
        """Distance delta >= 1 from i to the next element of J (cyclically)."""
        for delta in range(1, self.f + 1):
            if (i + delta) % self.f in self.J:
                return delta
        raise DomainError("J is empty")

    def prev_in_J(self, i: int) -> int:
        for delta in range(1, self.f + 1):
            if (i - delta) % self.f in self.J:
                return delta
        raise DomainError("J is empty")

    def distinguished_index(self) -> int | None:
        return min(self.J) if self.J else None


@dataclass(frozen=True, slots=True)
class ExtensionData:
    p: int
    f: int
    r: tuple[int, ...]
    J: frozenset[int]
    a: FqElement
    b: FqElement
    x: tuple[TruncatedSeries, ...]
    trunc: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        object.__setattr__(self, "J", frozenset(int(i) for i in self.J))
        object.__setattr__(self, "x", tuple(self.x))
        ExtensionType(self.p, self.f, self.r, self.J, self.a, self.b)
        if len(self.x) != self.f:
            raise StructuralError(f"expected {self.f} extension coefficients, got {len(self.x)}")
        for series in self.x:
            if series.field != self.a.field:
                raise StructuralError("extension coefficient over a different field")
            if series.trunc != self.trunc:
                raise StructuralError(f"extension coefficient truncated at {series.trunc}, expected {self.trunc}")

    @classmethod
    def split(cls, ext_type: ExtensionType, trunc: int) -> ExtensionData:
        zero = TruncatedSeries.zero(ext_type.field, trunc)
        return cls.of_type(ext_type, (zero,) * ext_type.f, trunc)

    @classmethod
    def of_type(cls, ext_type: ExtensionType, x: Sequence[TruncatedSeries], trunc: int) -> ExtensionData:
        t = ext_type
        return cls(t.p, t.f, t.r, t.J, t.a, t.b, tuple(x), trunc)

    @property
    def type(self) -> ExtensionType:
        return ExtensionType(self.p, self.f, self.r, self.J, self.a, self.b)

    @property
    def field(self) -> FqField:
        return self.a.field

    @property
    def h(self) -> tuple[int, ...]:
        return h_components(self.r, self.J)

    def with_x(self, x: Sequence[TruncatedSeries]) -> ExtensionData:
        return replace(self, x=tuple(x))

    def is_split(self) -> bool:
        return all(s.is_zero() for s in self.x)


@dataclass(frozen=True, slots=True)
class BasisChange:
    alpha: tuple[TruncatedSeries, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(self.alpha))

    @classmethod
    def zero(cls, field: FqField, f: int, trunc: int) -> BasisChange:
        return cls((TruncatedSeries.zero(field, trunc),) * f)

    @classmethod
    def constrained(cls, alpha: Sequence[TruncatedSeries], ext_type: ExtensionType) -> BasisChange:
        """A change of basis preserving x_i = 0 off J.

        For i outside a nonempty J this requires
        alpha_i = (b/a)_i u**r_i phi(alpha_{i-1}), checked at the known precision.
        """
        values = tuple(alpha)
        t = ext_type
        if len(values) != t.f:
            raise StructuralError(f"expected {t.f} series, got {len(values)}")
        if t.J:
            for i in range(t.f):
                if i in t.J:
                    continue
                precision = values[i].trunc
                source = values[(i - 1) % t.f].retruncate(precision)
                expected = frobenius_substitute(source).shift(t.r[i]).scale(t.label_b(i) / t.label_a(i))
                if expected != values[i]:
                    raise DomainError(f"alpha_{i} violates the recursion required off J")
        return cls(values)

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.alpha)

    def __add__(self, other: BasisChange) -> BasisChange:
        return BasisChange(tuple(x + y for x, y in zip(self.alpha, other.alpha)))


@dataclass(frozen=True, slots=True)
class PairChain:
    pairs: tuple[Pair, ...]
    # the pair affected by the last element; outside the partition
    exit: Pair

    @property
    def start(self) -> Pair:
        return self.pairs[0]


@dataclass(frozen=True, slots=True)
class PairPartition:
    loops: tuple[tuple[Pair, ...], ...]
    stubs: tuple[PairChain, ...]
    paths: tuple[PairChain, ...]
    cutoff: int

    def locate(self, pair: Pair) -> tuple[str, int] | None:
        for index, loop in enumerate(self.loops):
            if pair in loop:
                return "loop", index
        for index, chain in enumerate(self.stubs):
            if pair in chain.pairs:
                return "stub", index
        for index, chain in enumerate(self.paths):
            if pair in chain.pairs:
                return "path", index
        return None


@dataclass(frozen=True, slots=True)
class EquivalenceResult:
    equivalent: bool
    witness: BasisChange | None = None
    scale: FqElement | None = None


@dataclass(slots=True)
class ExtDimension:
    codimension: int
    normal_form_dimension: int
    coboundary_rank: int
    ambient_dimension: int


def is_exceptional(p: int, r: Sequence[int], J: Iterable[int], a: FqElement, b: FqElement) -> bool:
    """r in P, J = {i : r_i in {p-1, p}} and a = b."""
    subset = frozenset(J)
    if not p_set_member(p, r):
        return False
    expected = frozenset(i for i, x in enumerate(r) if x in (p - 1, p))
    return subset == expected and a == b


def _exceptional(t: ExtensionType) -> bool:
    return is_exceptional(t.p, t.r, t.J, t.a, t.b)


def affects(t: ExtensionType, i: int, d: int) -> tuple[Pair, FqElement]:
    """The pair (i + delta, d') hit when the term of degree d at i in J is killed.

    Also returns kappa, the factor such that killing c u**d at i deposits
    kappa * c / (a)_i u**d' at i + delta.
    """
    p, f = t.p, t.f
    delta = t.next_in_J(i)
    carry = sum(t.r[(i + j) % f] * p ** (delta - j) for j in range(1, delta))
    degree = p**delta * (d - t.r[i]) + carry
    kappa = t.label_b(i + delta)
    for k in range(i + 1, i + delta):
        kappa = kappa * t.label_b(k) / t.label_a(k)
    return ((i + delta) % f, degree), kappa


def _predecessor(t: ExtensionType, pair: Pair) -> Pair | None:
    i_next, d_next = pair
    p, f = t.p, t.f
    delta = t.prev_in_J(i_next)
    i = (i_next - delta) % f
    carry = sum(t.r[(i + j) % f] * p ** (delta - j) for j in range(1, delta))
    rest = d_next - carry
    if rest < 0 or rest % p**delta:
        return None
    return i, rest // p**delta + t.r[i]


def _as_type(e: ExtensionData | ExtensionType) -> ExtensionType:
    return e.type if isinstance(e, ExtensionData) else e


def classify_pairs(e: ExtensionData | ExtensionType, cutoff: int) -> PairPartition:
    t = _as_type(e)
    if not t.J:
        raise DomainError("no pairs exist when J is empty")

    pairs = {(i, d) for i in sorted(t.J) for d in range(t.r[i], cutoff + 1)}
    successor = {pair: affects(t, *pair)[0] for pair in pairs}

    visited: set[Pair] = set()
    stubs: list[PairChain] = []
    paths: list[PairChain] = []
    for start in sorted(pairs):
        before = _predecessor(t, start)
        if before is not None and before in pairs:
            continue
        chain = [start]
        while successor[chain[-1]] in pairs:
            chain.append(successor[chain[-1]])
        visited.update(chain)
        exit_pair = successor[chain[-1]]
        built = PairChain(tuple(chain), exit_pair)
        if exit_pair[1] < t.r[exit_pair[0]]:
            stubs.append(built)
        else:
            paths.append(built)

    loops: list[tuple[Pair, ...]] = []
    for start in sorted(pairs - visited):
        if start in visited:
            continue
        cycle = [start]
        while successor[cycle[-1]] != start:
            cycle.append(successor[cycle[-1]])
        visited.update(cycle)
        loops.append(tuple(cycle))
    return PairPartition(tuple(loops), tuple(stubs), tuple(paths), cutoff)


def apply_basis_change(e: ExtensionData, bc: BasisChange) -> ExtensionData:
    n, p = e.trunc, e.p
    if len(bc.alpha) != e.f:
        raise StructuralError(f"basis change has {len(bc.alpha)} entries, expected {e.f}")
    h = e.h
    for i, alpha in enumerate(bc.alpha):
        if alpha.field != e.field:
            raise StructuralError("basis change over a different field")
        needed = max(n // p, n - h[i])
        if alpha.trunc < needed:
            raise TruncationError(f"alpha_{i} known to u^{alpha.trunc + 1}, need truncation {needed}")

    t = e.type
    x_new = []
    for i in range(e.f):
        previous = bc.alpha[(i - 1) % e.f].retruncate(n)
        current = bc.alpha[i].retruncate(n)
        incoming = frobenius_substitute(previous).shift(e.r[i] - h[i]).scale(t.label_b(i))
        outgoing = current.shift(h[i]).scale(t.label_a(i))
        x_new.append(e.x[i] + incoming - outgoing)
    return e.with_x(x_new)


def conforms_to_type(e: ExtensionData) -> bool:
    """Normal-form shape: x_i = 0 off J, deg x_i < h_i on J (one degree-p term allowed
    at the distinguished index in the exceptional case)."""
    t = e.type
    h = e.h
    allowed_extra = t.distinguished_index() if _exceptional(t) else None
    for i, series in enumerate(e.x):
        for degree, _ in series.terms():
            if degree < h[i]:
                continue
            if i == allowed_extra and degree == e.p:
                continue
            return False
    return True


class _Eliminator:
    """Kills individual terms of x on J, propagating through the indices off J."""

    def __init__(self, e: ExtensionData) -> None:
        self.t = e.type
        self.n = e.trunc
        zero = e.field.zero
        self.x = [list(series.coeffs) for series in e.x]
        self.alpha = [[zero] * (self.n + 1) for _ in range(e.f)]

    def kill(self, i: int, d: int, value: FqElement) -> Pair:
        t, n, f, p = self.t, self.n, self.t.f, self.t.p
        coeff = value / t.label_a(i)
        degree = d - t.r[i]
        self.alpha[i][degree] = self.alpha[i][degree] + coeff
        self.x[i][d] = self.x[i][d] - value
        k = i
        while True:
            k_next = k + 1
            if k_next % f in t.J:
                target = (k_next % f, p * degree)
                if target[1] <= n:
                    self.x[target[0]][target[1]] = self.x[target[0]][target[1]] + t.label_b(k_next) * coeff
                return target
            coeff = coeff * t.label_b(k_next) / t.label_a(k_next)
            degree = t.r[k_next % f] + p * degree
            if degree > n:
                return (k_next % f, degree)
            slot = k_next % f
            self.alpha[slot][degree] = self.alpha[slot][degree] + coeff
            k = k_next

    def walk_chain(self, pairs: Sequence[Pair]) -> None:
        for i, d in pairs:
            value = self.x[i][d]
            if value:
                self.kill(i, d, value)

    def close_loop(self, loop: Sequence[Pair], anchor: int) -> bool:
        """Move all loop mass to ``anchor`` and kill it when the loop allows.

        Returns True when a degree-p term necessarily remains at the anchor.
        """
        start = next(k for k, pair in enumerate(loop) if pair[0] == anchor)
        ordered = list(loop[start:]) + list(loop[:start])
        self.walk_chain(ordered[1:])

        gain = self.t.field.one
        for i, d in ordered:
            gain = gain * affects(self.t, i, d)[1] / self.t.label_a(i)
        i0, d0 = ordered[0]
        remaining = self.x[i0][d0]
        if not remaining:
            return False
        if gain == self.t.field.one:
            return True
        self.kill(i0, d0, remaining / (self.t.field.one - gain))
        self.walk_chain(ordered[1:])
        return False

    def basis_change(self) -> BasisChange:
        field_ = self.t.field
        return BasisChange(tuple(TruncatedSeries(field_, self.n, tuple(row)) for row in self.alpha))

    def coefficients(self) -> tuple[TruncatedSeries, ...]:
        field_ = self.t.field
        return tuple(TruncatedSeries(field_, self.n, tuple(row)) for row in self.x)


def _clear_off_j(e: ExtensionData) -> BasisChange:
    t, n = e.type, e.trunc
    zero = TruncatedSeries.zero(e.field, n)
    alpha = [zero] * e.f

    def solve_at(k: int) -> TruncatedSeries:
        incoming = frobenius_substitute(alpha[(k - 1) % e.f]).shift(t.r[k]).scale(t.label_b(k))
        return (e.x[k] + incoming).scale(t.label_a(k).inverse())

    if t.J:
        for j in sorted(t.J):
            k = (j + 1) % e.f
            while k not in t.J:
                alpha[k] = solve_at(k)
                k = (k + 1) % e.f
        return BasisChange(tuple(alpha))

    for _ in range(n + 2):
        before = list(alpha)
        for k in range(e.f):
            alpha[k] = solve_at(k)
        if alpha == before:
            break
    return BasisChange(tuple(alpha))


def reduce_normal_form(e: ExtensionData) -> tuple[ExtensionData, BasisChange]:
    p, n = e.p, e.trunc
    if n < p * p:
        raise TruncationError(f"reduction needs truncation >= p^2 = {p * p}, got {n}")

    first = _clear_off_j(e)
    cleared = apply_basis_change(e, first)
    if not cleared.J:
        total = first
        reduced = cleared
    else:
        partition = classify_pairs(cleared, n)
        eliminator = _Eliminator(cleared)
        for chain in partition.stubs + partition.paths:
            eliminator.walk_chain(chain.pairs)
        for loop in partition.loops:
            eliminator.close_loop(loop, cleared.type.distinguished_index())
        second = eliminator.basis_change()
        total = first + second
        reduced = apply_basis_change(e, total)
        if reduced.x != eliminator.coefficients():
            raise InternalError("eliminator bookkeeping disagrees with the change-of-basis formula")

    if not conforms_to_type(reduced):
        raise InternalError(f"reduction left coefficients outside the normal-form shape for r={list(e.r)}")
    return reduced, total


def dispose_term(e: ExtensionData, pair: Pair) -> tuple[ExtensionData, BasisChange, str]:
    """Clear the term at ``pair`` (i in J, d >= r_i) along its loop, stub or path.

    Returns the new data, the change of basis and the kind of structure used.
    """
    partition = classify_pairs(e, e.trunc)
    located = partition.locate(pair)
    if located is None:
        raise DomainError(f"{pair} is not a degree-index pair of this extension")
    kind, index = located
    eliminator = _Eliminator(e)
    if kind == "loop":
        eliminator.close_loop(partition.loops[index], e.type.distinguished_index())
    else:
        chain = (partition.stubs if kind == "stub" else partition.paths)[index]
        eliminator.walk_chain(chain.pairs[chain.pairs.index(pair) :])
    bc = eliminator.basis_change()
    result = apply_basis_change(e, bc)
    if result.x != eliminator.coefficients():
        raise InternalError("eliminator bookkeeping disagrees with the change-of-basis formula")
    logger.debug("disposed of %s through a %s", pair, kind)
    return result, bc, kind


def _unknown(f_index: int, degree: int, n: int) -> int:
    return f_index * (n + 1) + degree


def _coboundary_columns(t: ExtensionType, n: int) -> dict[int, dict[int, int]]:
    """Image of each coefficient alpha_k[s] under the coboundary map, as sparse vectors
    indexed by i * (n + 1) + d."""
    p, f = t.p, t.f
    h = t.h
    columns: dict[int, dict[int, int]] = {}
    field_ = t.field
    for k in range(f):
        for s in range(n + 1):
            column: dict[int, int] = {}
            # direct term at index k
            d = s + h[k]
            if d <= n:
                position = _unknown(k, d, n)
                column[position] = field_.sub_codes(column.get(position, 0), t.label_a(k).code)
            # phi term at index k + 1
            i = (k + 1) % f
            d = p * s + t.r[i] - h[i]
            if d <= n:
                position = _unknown(i, d, n)
                column[position] = field_.add_codes(column.get(position, 0), t.label_b(i).code)
            columns[_unknown(k, s, n)] = {pos: v for pos, v in column.items() if v}
    return columns


def _check_comparable(e1: ExtensionData, e2: ExtensionData) -> None:
    if e1.type != e2.type:
        raise StructuralError("extensions of different types cannot be compared")
    if e1.trunc != e2.trunc:
        raise StructuralError(f"truncations differ: {e1.trunc} vs {e2.trunc}")


def _solve_difference(e1: ExtensionData, e2: ExtensionData) -> BasisChange | None:
    n, f = e1.trunc, e1.f
    field_ = e1.field
    rows: dict[int, dict[int, int]] = {_unknown(i, d, n): {} for i in range(f) for d in range(n + 1)}
    for unknown, column in _coboundary_columns(e1.type, n).items():
        for position, value in column.items():
            rows[position][unknown] = value
    equations = []
    for i in range(f):
        delta = e2.x[i] - e1.x[i]
        for d in range(n + 1):
            equations.append((rows[_unknown(i, d, n)], delta.coeffs[d].code))
    solution = solve_linear_system(field_, equations, f * (n + 1))
    if solution is None:
        return None
    alpha = []
    for k in range(f):
        codes = solution[k * (n + 1) : (k + 1) * (n + 1)]
        alpha.append(TruncatedSeries(field_, n, tuple(FqElement(field_, c) for c in codes)))
    return BasisChange(tuple(alpha))


def coboundary_equivalent(e1: ExtensionData, e2: ExtensionData, *, scaled: bool = False) -> EquivalenceResult:
    _check_comparable(e1, e2)
    witness = _solve_difference(e1, e2)
    if witness is not None:
        return EquivalenceResult(True, witness, e1.field.one if scaled else None)
    if not scaled:
        return EquivalenceResult(False)
    for factor in e1.field.nonzero_elements():
        if factor == e1.field.one:
            continue
        rescaled = e1.with_x([s.scale(factor) for s in e1.x])
        witness = _solve_difference(rescaled, e2)
        if witness is not None:
            return EquivalenceResult(True, witness, factor)
    return EquivalenceResult(False)


def coboundary_space(t: ExtensionType, n: int) -> EchelonBasis:
    basis = EchelonBasis(t.field)
    for column in _coboundary_columns(t, n).values():
        if column:
            basis.add(column)
    return basis


def _vector(e: ExtensionData) -> dict[int, int]:
    n = e.trunc
    return {
        _unknown(i, d, n): c.code
        for i, series in enumerate(e.x)
        for d, c in series.terms()
    }


def ext_dimension(t: ExtensionType, n: int) -> ExtDimension:
    """F_q-dimension of extension classes of type t at truncation n."""
    basis = coboundary_space(t, n)
    ambient = t.f * (n + 1)
    normal = sum(t.h) + (1 if _exceptional(t) else 0)
    return ExtDimension(ambient - basis.rank, normal, basis.rank, ambient)


def class_count(t: ExtensionType, n: int) -> int:
    return t.field.q ** ext_dimension(t, n).codimension


def count_distinct_classes(extensions: Sequence[ExtensionData], *, basis: EchelonBasis | None = None) -> int:
    """Number of coboundary classes met by ``extensions`` (all of one type and truncation)."""
    if not extensions:
        return 0
    first = extensions[0]
    space = basis or coboundary_space(first.type, first.trunc)
    residues = set()
    for e in extensions:
        _check_comparable(first, e)
        residues.add(frozenset(space.reduce(_vector(e)).items()))
    return len(residues)


def crystalline_forms(t: ExtensionType, trunc: int | None = None) -> list[ExtensionData]:
    n = t.p * t.p if trunc is None else trunc
    field_ = t.field
    positions = sorted(t.J)
    exceptional = _exceptional(t)
    slots: list[Pair] = [(i, 0) for i in positions]
    if exceptional:
        if n < t.p:
            raise DomainError(f"the exceptional degree-{t.p} term needs truncation >= {t.p}")
        slots.append((t.distinguished_index(), t.p))
    total = field_.q ** len(slots)
    if total > MAX_FORMS:
        raise ResourceError(f"{total} crystalline forms exceed the enumeration guard {MAX_FORMS}")

    forms = []
    elements = list(field_.elements())
    for values in itertools.product(elements, repeat=len(slots)):
        rows = [[field_.zero] * (n + 1) for _ in range(t.f)]
        for (i, d), value in zip(slots, values):
            rows[i][d] = value
        forms.append(ExtensionData.of_type(t, [TruncatedSeries(field_, n, tuple(row)) for row in rows], n))
    return forms


def constituents(e: ExtensionData | ExtensionType) -> tuple[RankOneModule, RankOneModule]:
    """(sub, quotient) = (M(r - h; b), M(h; a))."""
    t = _as_type(e)
    h = t.h
    sub = RankOneModule(t.p, t.f, tuple(x - y for x, y in zip(t.r, h)), t.b)
    quotient = RankOneModule(t.p, t.f, h, t.a)
    return sub, quotient


def random_extension(t: ExtensionType, trunc: int, rng: random.Random) -> ExtensionData:
    field_ = t.field
    x = [
        TruncatedSeries(field_, trunc, tuple(field_.random_element(rng) for _ in range(trunc + 1)))
        for _ in range(t.f)
    ]
    return ExtensionData.of_type(t, x, trunc)


def monomial_extension(t: ExtensionType, trunc: int, index: int, degree: int) -> ExtensionData:
    field_ = t.field
    x = [TruncatedSeries.zero(field_, trunc) for _ in range(t.f)]
    x[index] = TruncatedSeries.monomial(field_.one, degree, trunc)
    return ExtensionData.of_type(t, x, trunc)


def degree_p_survives(e: ExtensionData) -> bool:
    """Whether the reduced form of ``e`` keeps a term of degree p (always >= h_i)."""
    reduced, _ = reduce_normal_form(e)
    return any(bool(series.coefficient(reduced.p)) for series in reduced.x)
