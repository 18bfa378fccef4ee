"""Serre weights and the inertial form of the predicted weight sets.

Characters are exponents of the fundamental character of the last embedding:
a niveau-1 character prod omega_i**n_i has exponent sum(p**(f-1-i) n_i) mod
p**f - 1, a niveau-2 one uses p**(2f-1-s) over s in [0, 2f). Diagonal pairs
are compared unordered.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from kisinweights.algebra import FqElement
from kisinweights.combinat import STRINGS, all_subsets, carry_decompose
from kisinweights.config import enumeration_limit
from kisinweights.errors import DomainError, InternalError, NotInKernelError, ResourceError
from kisinweights.rankone import InertialCharacter

logger = logging.getLogger(__name__)

Subset = frozenset[int]


@dataclass(frozen=True, slots=True)
class SerreWeight:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple((int(a1), int(a2)) for a1, a2 in self.pairs))

    @property
    def f(self) -> int:
        return len(self.pairs)

    def validate(self, p: int) -> SerreWeight:
        if not self.pairs:
            raise DomainError("a Serre weight needs at least one embedding")
        for i, (a1, a2) in enumerate(self.pairs):
            if not 0 <= a1 - a2 <= p - 1:
                raise DomainError(f"pair {i} = ({a1}, {a2}) needs 0 <= a1 - a2 <= {p - 1}")
        return self

    def differences(self) -> tuple[int, ...]:
        return tuple(a1 - a2 for a1, a2 in self.pairs)


@dataclass(frozen=True, slots=True)
class InertialType:
    p: int
    f: int
    niveau: int
    exponents: tuple[int, int]
    unramified: tuple[FqElement, FqElement] | None = None

    def __post_init__(self) -> None:
        if self.niveau not in (1, 2):
            raise DomainError(f"niveau must be 1 or 2, got {self.niveau}")
        if self.f < 1:
            raise DomainError(f"f must be positive, got {self.f}")
        if len(self.exponents) != 2:
            raise DomainError(f"an inertial type has two exponents, got {len(self.exponents)}")
        order = self.order
        e1, e2 = (int(x) % order for x in self.exponents)
        object.__setattr__(self, "exponents", (e1, e2))
        if self.niveau == 2 and not _conjugate_pair(self.p, self.f, e1, e2):
            raise DomainError(f"exponents {e1}, {e2} are not an irreducible niveau-2 pair")
        if self.unramified is not None:
            object.__setattr__(self, "unramified", tuple(self.unramified))

    @property
    def order(self) -> int:
        return self.p ** (self.niveau * self.f) - 1

    @property
    def reducible(self) -> bool:
        return self.niveau == 1

    def key(self) -> tuple[int, int]:
        return tuple(sorted(self.exponents))


@dataclass(frozen=True, slots=True)
class BalancedSubset:
    f: int
    J: Subset

    def __post_init__(self) -> None:
        subset = frozenset(int(s) for s in self.J)
        object.__setattr__(self, "J", subset)
        if not is_balanced(subset, self.f):
            raise DomainError(f"{sorted(subset)} does not hold exactly one lift of each embedding")


@dataclass(frozen=True, slots=True)
class BdjResult:
    member: bool
    witnesses: tuple[Subset, ...] = field(default_factory=tuple)
    # False when only the inertial restriction was compared (non-split reducible)
    exact: bool = True


def _conjugate_pair(p: int, f: int, e1: int, e2: int) -> bool:
    order = p ** (2 * f) - 1
    return e1 != e2 and (e1 * p**f - e2) % order == 0


def is_balanced(J: Iterable[int], f: int) -> bool:
    subset = frozenset(J)
    if any(s < 0 or s >= 2 * f for s in subset):
        return False
    return all((s in subset) != (s + f in subset) for s in range(f))


def weight_equivalent(w1: SerreWeight, w2: SerreWeight, p: int, f: int) -> bool:
    for w in (w1, w2):
        w.validate(p)
        if w.f != f:
            raise DomainError(f"weight has {w.f} embeddings, expected {f}")
    if w1.differences() != w2.differences():
        return False
    shift = sum(p ** (f - 1 - i) * (a[1] - b[1]) for i, (a, b) in enumerate(zip(w1.pairs, w2.pairs)))
    return shift % (p**f - 1) == 0


def hodge_type(w: SerreWeight) -> tuple[tuple[int, int], ...]:
    return tuple((a1 + 1, a2) for a1, a2 in w.pairs)


def twist_exponent(w: SerreWeight, p: int) -> int:
    f = w.f
    return sum(p ** (f - 1 - i) * a2 for i, (_, a2) in enumerate(w.pairs)) % (p**f - 1)


def weight_characters(w: SerreWeight, p: int, J: Iterable[int], niveau: int = 1) -> tuple[int, int]:
    """Exponents of the diagonal characters attached to ``w`` and J (J inside S or S_2)."""
    f = w.f
    n = niveau * f
    subset = frozenset(J)
    first = second = 0
    for s in range(n):
        a1, a2 = w.pairs[s % f]
        weight = p ** (n - 1 - s)
        if s in subset:
            first += weight * (a1 + 1)
            second += weight * a2
        else:
            first += weight * a2
            second += weight * (a1 + 1)
    order = p**n - 1
    return first % order, second % order


def inertial_type_from_characters(c1: InertialCharacter, c2: InertialCharacter) -> InertialType:
    if (c1.p, c1.f, c1.n) != (c2.p, c2.f, c2.n):
        raise DomainError("characters of different (p, f, niveau)")
    unramified = None
    if c1.unramified is not None and c2.unramified is not None:
        unramified = (c1.unramified, c2.unramified)
    return InertialType(c1.p, c1.f, c1.n, (c1.exponent, c2.exponent), unramified)


def _check_pair(t: InertialType, w: SerreWeight, niveau: int) -> None:
    if t.niveau != niveau:
        raise DomainError(f"expected a niveau-{niveau} type, got niveau {t.niveau}")
    w.validate(t.p)
    if w.f != t.f:
        raise DomainError(f"weight has {w.f} embeddings, type has f={t.f}")
    if t.f > enumeration_limit():
        raise ResourceError(f"f={t.f} exceeds the subset enumeration guard {enumeration_limit()}")


def _balanced_subsets(f: int) -> Iterable[Subset]:
    for lifts in itertools.product((0, 1), repeat=f):
        yield frozenset(s + f * lift for s, lift in enumerate(lifts))


def bdj_niveau1(t: InertialType, w: SerreWeight) -> BdjResult:
    _check_pair(t, w, 1)
    target = t.key()
    witnesses = [J for J in all_subsets(t.f) if tuple(sorted(weight_characters(w, t.p, J))) == target]
    witnesses.sort(key=lambda J: tuple(sorted(J)))
    return BdjResult(bool(witnesses), tuple(witnesses))


def bdj_niveau2(t: InertialType, w: SerreWeight) -> BdjResult:
    _check_pair(t, w, 2)
    target = t.key()
    witnesses = [
        J for J in _balanced_subsets(t.f) if tuple(sorted(weight_characters(w, t.p, J, niveau=2))) == target
    ]
    witnesses.sort(key=lambda J: tuple(sorted(J)))
    return BdjResult(bool(witnesses), tuple(witnesses))


def bdj_inertial(t: InertialType, w: SerreWeight, *, split: bool = True) -> BdjResult:
    """Membership of ``w`` in the predicted set, compared on inertia.

    Exact for irreducible and split reducible types. For a non-split reducible
    type the extension class is not inspected and the answer over-approximates.
    """
    if t.niveau == 2:
        return bdj_niveau2(t, w)
    result = bdj_niveau1(t, w)
    return BdjResult(result.member, result.witnesses, exact=split)


def crystalline_ext_dimension(J: Iterable[int], chars_equal: bool) -> int:
    return len(frozenset(J)) + (1 if chars_equal else 0)


def _pair_characters(p: int, f: int, exps: Sequence[tuple[int, int]], J: Subset) -> tuple[int, int]:
    first = second = 0
    for s in range(2 * f):
        b1, b2 = exps[s % f]
        weight = p ** (2 * f - 1 - s)
        if s in J:
            first += weight * b1
            second += weight * b2
        else:
            first += weight * b2
            second += weight * b1
    order = p ** (2 * f) - 1
    return first % order, second % order


def rebalance(p: int, f: int, exps: Sequence[tuple[int, int]], J: Iterable[int]) -> BalancedSubset:
    """Balanced J' inducing the same unordered pair of niveau-2 characters as J.

    ``exps`` holds (b_1, b_2) per embedding of k; the characters are
    prod_{s in J} omega_s**b_{s,1} prod_{s not in J} omega_s**b_{s,2} and the
    same with the roles swapped.
    """
    pairs = [(int(b1), int(b2)) for b1, b2 in exps]
    if len(pairs) != f:
        raise DomainError(f"expected {f} exponent pairs, got {len(pairs)}")
    for i, (b1, b2) in enumerate(pairs):
        if not 1 <= b1 - b2 <= p:
            raise DomainError(f"pair {i} = ({b1}, {b2}) needs 1 <= b1 - b2 <= {p}")
    subset = frozenset(int(s) for s in J)
    if any(s < 0 or s >= 2 * f for s in subset):
        raise DomainError(f"subset {sorted(subset)} is not inside [0, {2 * f})")
    e1, e2 = _pair_characters(p, f, pairs, subset)
    if not _conjugate_pair(p, f, e1, e2):
        raise DomainError(f"J={sorted(subset)} does not give an irreducible pair")
    if is_balanced(subset, f):
        return BalancedSubset(f, subset)

    x = []
    for sigma, (b1, b2) in enumerate(pairs):
        lower, upper = sigma in subset, sigma + f in subset
        if lower and upper:
            x.append(b1 - b2)
        elif not lower and not upper:
            x.append(b2 - b1)
        else:
            x.append(0)
    try:
        decomposition = carry_decompose(p, f, x)
    except NotInKernelError as exc:
        raise DomainError(f"unbalanced places give a sequence outside the kernel: {x}") from exc
    if decomposition.kind != STRINGS:
        raise DomainError(f"unbalanced places give a constant sequence {x}")

    # each string flips a run of consecutive places in Z/2f from one lift of its start
    runs = [
        [frozenset((lift + t) % (2 * f) for t in range(string.length + 1)) for lift in (string.start + f, string.start)]
        for string in decomposition.strings
    ]
    target = sorted((e1, e2))
    for choice in itertools.product(*runs):
        result = set(subset)
        for run in choice:
            result ^= run
        balanced = frozenset(result)
        if not is_balanced(balanced, f):
            raise InternalError(f"flipping strings left {sorted(balanced)} unbalanced")
        if sorted(_pair_characters(p, f, pairs, balanced)) == target:
            logger.debug("rebalanced %s -> %s", sorted(subset), sorted(balanced))
            return BalancedSubset(f, balanced)
    raise InternalError(f"no string flip of J={sorted(subset)} keeps the character pair")


def weights_list(t: InertialType) -> list[tuple[SerreWeight, BdjResult]]:
    """One weight per equivalence class, with its membership result, for every member."""
    p, f = t.p, t.f
    if f > enumeration_limit():
        raise ResourceError(f"f={f} exceeds the subset enumeration guard {enumeration_limit()}")
    found = []
    for lows in itertools.product(range(p), repeat=f):
        if all(a2 == p - 1 for a2 in lows):
            continue
        for diffs in itertools.product(range(p), repeat=f):
            w = SerreWeight(tuple((a2 + d, a2) for a2, d in zip(lows, diffs)))
            result = bdj_inertial(t, w)
            if result.member:
                found.append((w, result))
    found.sort(key=lambda item: item[0].pairs)
    return found
