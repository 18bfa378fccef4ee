"""Base-p carrying combinatorics.

A sequence r in [-p, p]**f with sum(p**(f-1-i) r_i) = 0 mod p**f - 1 is
either constant +-(p-1), constant +-2 (p = 2 only), or a disjoint union of
signed strings +-(-1, p-1, ..., p-1, p) on cyclic intervals, zero elsewhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from sympy import isprime

from kisinweights.config import enumeration_limit
from kisinweights.errors import DomainError, InternalError, NotInKernelError, ResourceError

ALL_P_MINUS_ONE = "all_p_minus_one"
STRINGS = "strings"
ALL_TWO = "all_two"

Subset = frozenset[int]


@dataclass(frozen=True, slots=True)
class CarryString:
    start: int
    length: int
    sign: int

    def positions(self, f: int) -> list[int]:
        return [(self.start + t) % f for t in range(self.length + 1)]


@dataclass(frozen=True, slots=True)
class CarryDecomposition:
    kind: str
    sign: int = 1
    strings: tuple[CarryString, ...] = field(default_factory=tuple)


@dataclass(frozen=True, slots=True)
class HClass:
    p: int
    f: int
    h: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", int(self.h) % (self.p**self.f - 1))


def _check_prime(p: int) -> None:
    if not isprime(p):
        raise DomainError(f"{p} is not prime")


def _check_twists(p: int, f: int, r: Sequence[int]) -> tuple[int, ...]:
    values = tuple(int(x) for x in r)
    if len(values) != f:
        raise DomainError(f"expected {f} entries, got {len(values)}")
    if any(x < 1 or x > p for x in values):
        raise DomainError(f"entries must lie in [1, {p}]: {list(values)}")
    return values


def _check_subset(f: int, J: Iterable[int]) -> Subset:
    subset = frozenset(int(i) for i in J)
    if any(i < 0 or i >= f for i in subset):
        raise DomainError(f"subset {sorted(subset)} is not inside [0, {f})")
    return subset


def twisted_sum(p: int, r: Sequence[int]) -> int:
    f = len(r)
    return sum(p ** (f - 1 - i) * x for i, x in enumerate(r))


def _carries(p: int, r: Sequence[int]) -> list[int] | None:
    """Carry digits c in {-1, 0, 1}**f with r_k = c_k p - c_{k+1} cyclically."""
    f = len(r)
    for first in (0, 1, -1):
        carries = [0] * f
        carries[0] = first
        for k in range(f - 1, 0, -1):
            total = r[k] + carries[(k + 1) % f]
            if total % p:
                break
            carries[k] = total // p
            if abs(carries[k]) > 1:
                break
        else:
            if r[0] == first * p - carries[1 % f]:
                return carries
    return None


def carry_decompose(p: int, f: int, r: Sequence[int]) -> CarryDecomposition:
    _check_prime(p)
    values = tuple(int(x) for x in r)
    if len(values) != f:
        raise DomainError(f"expected {f} entries, got {len(values)}")
    if any(abs(x) > p for x in values):
        raise DomainError(f"entries must lie in [-{p}, {p}]: {list(values)}")
    if twisted_sum(p, values) % (p**f - 1):
        raise NotInKernelError(f"sum of p^(f-1-i) r_i is not 0 mod {p}^{f}-1 for r={list(values)}")

    for sign in (1, -1):
        if all(x == sign * (p - 1) for x in values):
            return CarryDecomposition(ALL_P_MINUS_ONE, sign)
        if p == 2 and all(x == 2 * sign for x in values):
            return CarryDecomposition(ALL_TWO, sign)

    carries = _carries(p, values)
    if carries is None:
        raise InternalError(f"no carry pattern for kernel sequence {list(values)}")

    strings = []
    for start in range(f):
        nxt = carries[(start + 1) % f]
        if carries[start] == 0 and nxt != 0:
            length = 0
            while length < f and carries[(start + 1 + length) % f] == nxt:
                length += 1
            strings.append(CarryString(start, length, nxt))
    decomposition = CarryDecomposition(STRINGS, 1, tuple(strings))
    if reconstruct(decomposition, p, f) != values:
        raise InternalError(f"string decomposition does not reproduce {list(values)}")
    return decomposition


def reconstruct(decomposition: CarryDecomposition, p: int, f: int) -> tuple[int, ...]:
    if decomposition.kind == ALL_P_MINUS_ONE:
        return (decomposition.sign * (p - 1),) * f
    if decomposition.kind == ALL_TWO:
        return (decomposition.sign * 2,) * f

    values = [0] * f
    for string in decomposition.strings:
        positions = string.positions(f)
        values[positions[0]] = -string.sign
        for k in positions[1:-1]:
            values[k] = string.sign * (p - 1)
        values[positions[-1]] = string.sign * p
    return tuple(values)


def p_set_member(p: int, r: Sequence[int]) -> bool:
    f = len(r)
    allowed = {1, p - 1, p}
    if any(x not in allowed for x in r):
        return False
    for i, x in enumerate(r):
        nxt = r[(i + 1) % f]
        if x == p and nxt != 1:
            return False
        if x in (1, p - 1) and nxt not in (p - 1, p):
            return False
    return True


def lemma73_bullets(p: int, r: Sequence[int], J: Iterable[int]) -> bool:
    """The adjacency conditions on J that pair with membership in the set P."""
    f = len(r)
    subset = frozenset(J)
    for i in range(f):
        pair = (r[i - 1], r[i])
        nxt_in = (i + 1) % f in subset
        if pair == (p, 1) and nxt_in != (i not in subset):
            return False
        if pair in ((1, p - 1), (p - 1, p - 1)) and nxt_in != (i in subset):
            return False
    return True


def lemma73_congruence(p: int, r: Sequence[int], J: Iterable[int]) -> bool:
    """h(J) = h(J^c) modulo p**f - 1."""
    f = len(r)
    h = h_of_J(p, f, r, J).h
    return (2 * h - twisted_sum(p, r)) % (p**f - 1) == 0


def h_components(r: Sequence[int], J: Iterable[int]) -> tuple[int, ...]:
    subset = frozenset(J)
    return tuple(x if i in subset else 0 for i, x in enumerate(r))


def h_of_J(p: int, f: int, r: Sequence[int], J: Iterable[int]) -> HClass:
    values = _check_twists(p, f, r)
    subset = _check_subset(f, J)
    return HClass(p, f, twisted_sum(p, h_components(values, subset)))


def all_subsets(f: int) -> Iterable[Subset]:
    for mask in range(2**f):
        yield frozenset(i for i in range(f) if mask >> i & 1)


def _subset_key(J: Subset) -> tuple[int, ...]:
    return tuple(sorted(J))


def j_sets_for_h(p: int, f: int, r: Sequence[int], h: HClass | int, *, limit: int | None = None) -> list[Subset]:
    values = _check_twists(p, f, r)
    guard = enumeration_limit() if limit is None else limit
    if f > guard:
        raise ResourceError(f"f={f} exceeds the subset enumeration guard {guard}")
    target = h.h if isinstance(h, HClass) else int(h) % (p**f - 1)
    found = [J for J in all_subsets(f) if h_of_J(p, f, values, J).h == target]
    return sorted(found, key=_subset_key)


def j_strings(p: int, r: Sequence[int]) -> list[tuple[int, int]]:
    """Cyclic strings (i, s), s > 0, with (r_i, ..., r_{i+s}) = (1, p-1, ..., p-1, p)."""
    if p <= 2:
        raise DomainError("strings are only defined for p > 2")
    f = len(r)
    strings = []
    for i in range(f):
        if r[i] != 1:
            continue
        for s in range(1, f):
            value = r[(i + s) % f]
            if value == p:
                strings.append((i, s))
                break
            if value != p - 1:
                break
    return strings


def _string_positions(f: int, start: int, s: int) -> list[int]:
    return [(start + t) % f for t in range(1, s + 1)]


def _all_p_minus_one(p: int, r: Sequence[int]) -> bool:
    return all(x == p - 1 for x in r)


def j_max(p: int, f: int, r: Sequence[int], J: Iterable[int]) -> Subset:
    values = _check_twists(p, f, r)
    subset = _check_subset(f, J)
    if p <= 2:
        raise DomainError("J_max is only defined for p > 2")
    full = frozenset(range(f))
    if _all_p_minus_one(p, values) and subset in (frozenset(), full):
        return full

    result = set(subset)
    for start, s in j_strings(p, values):
        tail = _string_positions(f, start, s)
        if start in subset and not any(k in subset for k in tail):
            result.discard(start)
            result.update(tail)
    return frozenset(result)


def all_j_sets(p: int, f: int, r: Sequence[int], J: Iterable[int]) -> list[Subset]:
    """Every J' with h(J') = h(J), generated by flipping pure strings of J."""
    values = _check_twists(p, f, r)
    subset = _check_subset(f, J)
    if p <= 2:
        raise DomainError("string flips are only defined for p > 2")
    full = frozenset(range(f))
    if _all_p_minus_one(p, values) and subset in (frozenset(), full):
        return sorted({frozenset(), full}, key=_subset_key)

    flippable = []
    for start, s in j_strings(p, values):
        tail = _string_positions(f, start, s)
        head_in = start in subset
        tail_in = [k in subset for k in tail]
        if head_in and not any(tail_in):
            flippable.append((start, tail))
        elif not head_in and all(tail_in):
            flippable.append((start, tail))

    found = set()
    for choice in itertools.product((False, True), repeat=len(flippable)):
        current = set(subset)
        for chosen, (start, tail) in zip(choice, flippable):
            if chosen:
                current ^= {start, *tail}
        found.add(frozenset(current))
    return sorted(found, key=_subset_key)
