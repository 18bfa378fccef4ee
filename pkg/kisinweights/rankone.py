"""Rank-one Kisin modules M(r_0, ..., r_{f-1}; a) in idempotent presentation.

phi(e_{i-1}) = (a)_i u**r_i e_i with (a)_i = a when i = 0 mod f and 1 otherwise.
Characters are exponents of the fundamental character of the last embedding,
so the exponent of M(r; a) is sum(p**(f-1-i) * r_i) mod p**f - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from kisinweights.algebra import FqElement, FqField, TruncatedSeries, frobenius_substitute, u_valuation
from kisinweights.errors import DegenerateModuleError, DomainError, StructuralError


@dataclass(frozen=True, slots=True)
class RankOneModule:
    p: int
    f: int
    r: tuple[int, ...]
    a: FqElement

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if self.f < 1:
            raise DomainError(f"f must be positive, got {self.f}")
        if len(self.r) != self.f:
            raise StructuralError(f"expected {self.f} twists, got {len(self.r)}")
        if any(x < 0 for x in self.r):
            raise DomainError(f"twists must be non-negative: {list(self.r)}")
        if self.a.field.p != self.p:
            raise StructuralError(f"label lives in characteristic {self.a.field.p}, module in {self.p}")
        if not self.a:
            raise DegenerateModuleError("unramified label a must be nonzero")

    @property
    def field(self) -> FqField:
        return self.a.field

    def label(self, i: int) -> FqElement:
        return self.a if i % self.f == 0 else self.field.one

    def exponent(self) -> int:
        return character_exponent(self.p, self.r)


@dataclass(frozen=True, slots=True)
class InertialCharacter:
    """omega_{nf-1}**exponent times an unramified character.

    ``unramified`` may be None when only the restriction to inertia matters.
    """

    p: int
    n: int
    f: int
    exponent: int
    unramified: FqElement | None = None

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise DomainError(f"niveau must be 1 or 2, got {self.n}")
        if self.f < 1:
            raise DomainError(f"f must be positive, got {self.f}")
        if self.unramified is not None and not self.unramified:
            raise DomainError("unramified label must be nonzero")
        object.__setattr__(self, "exponent", int(self.exponent) % self.order)

    @property
    def order(self) -> int:
        return self.p ** (self.n * self.f) - 1

    def inertial_part(self) -> InertialCharacter:
        return InertialCharacter(self.p, self.n, self.f, self.exponent)


@dataclass(frozen=True, slots=True)
class RawRankOne:
    p: int
    f: int
    c: tuple[TruncatedSeries, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", tuple(self.c))
        if len(self.c) != self.f:
            raise StructuralError(f"expected {self.f} structure constants, got {len(self.c)}")
        fields = {s.field for s in self.c}
        if len(fields) != 1:
            raise StructuralError("structure constants over different fields")
        if self.c[0].field.p != self.p:
            raise StructuralError(f"structure constants live in characteristic {self.c[0].field.p}")
        for i, s in enumerate(self.c):
            if s.is_zero():
                raise DegenerateModuleError(f"structure constant c_{i} vanishes")


def character_exponent(p: int, r: Sequence[int]) -> int:
    f = len(r)
    return sum(p ** (f - 1 - i) * r_i for i, r_i in enumerate(r)) % (p**f - 1)


def canonicalize(raw: RawRankOne) -> RankOneModule:
    r = tuple(int(u_valuation(s)) for s in raw.c)
    field = raw.c[0].field
    a = field.one
    for s, r_i in zip(raw.c, r):
        a = a * s.coefficient(r_i)
    return RankOneModule(raw.p, raw.f, r, a)


def normalizing_units(raw: RawRankOne) -> tuple[TruncatedSeries, ...]:
    """Units lambda_i such that e'_i = lambda_i e_i puts ``raw`` in canonical form.

    Solves phi(lambda_{i-1}) c_i = (a)_i u**r_i lambda_i cyclically by u-adic
    successive approximation. The result is known modulo u**(n+1) with
    n = min(trunc_i - r_i).
    """
    canonical = canonicalize(raw)
    field = canonical.field
    precision = min(s.trunc - r_i for s, r_i in zip(raw.c, canonical.r))
    units = [
        TruncatedSeries(field, precision, s.coeffs[r_i : r_i + precision + 1])
        for s, r_i in zip(raw.c, canonical.r)
    ]

    def sweep(start: TruncatedSeries) -> list[TruncatedSeries]:
        lambdas = [start]
        for i in range(1, raw.f):
            lambdas.append(frobenius_substitute(lambdas[i - 1]) * units[i])
        return lambdas

    current = TruncatedSeries.constant(field.one, precision)
    for _ in range(precision + 2):
        lambdas = sweep(current)
        updated = (frobenius_substitute(lambdas[-1]) * units[0]).scale(canonical.a.inverse())
        if updated == current:
            return tuple(lambdas)
        current = updated
    return tuple(sweep(current))


def inertial_exponent(module: RankOneModule) -> InertialCharacter:
    return InertialCharacter(module.p, 1, module.f, module.exponent(), module.a)


def _check_same_setting(m1: RankOneModule, m2: RankOneModule) -> None:
    if (m1.p, m1.f) != (m2.p, m2.f):
        raise StructuralError(f"modules over (p, f) = {(m1.p, m1.f)} and {(m2.p, m2.f)}")
    if m1.field != m2.field:
        raise StructuralError("modules with labels in different coefficient fields")


def product(m1: RankOneModule, m2: RankOneModule) -> RankOneModule:
    _check_same_setting(m1, m2)
    r = tuple(x + y for x, y in zip(m1.r, m2.r))
    return RankOneModule(m1.p, m1.f, r, m1.a * m2.a)


def iso_test(m1: RankOneModule, m2: RankOneModule) -> bool:
    _check_same_setting(m1, m2)
    return m1.a == m2.a and m1.exponent() == m2.exponent()


def shift_exponents(target: RankOneModule, source: RankOneModule) -> tuple[int, ...]:
    """Integers m_i with e''_i -> u**m_i e_i intertwining phi from ``source`` to ``target``."""
    if not iso_test(target, source):
        raise DomainError("modules do not define isomorphic characters")
    p, f = target.p, target.f
    diff = [s - t for s, t in zip(source.r, target.r)]
    shifts = []
    for i in range(f):
        total = sum(p**k * diff[(i - k) % f] for k in range(f))
        shifts.append(total // (p**f - 1))
    return tuple(shifts)


def intertwines(target: RankOneModule, source: RankOneModule, shifts: Sequence[int]) -> bool:
    p, f = target.p, target.f
    return target.a == source.a and all(
        source.r[i] + shifts[i] == p * shifts[(i - 1) % f] + target.r[i] for i in range(f)
    )


def small_representative(module: RankOneModule) -> RankOneModule:
    r = [0] * module.f
    r[-1] = module.exponent()
    return RankOneModule(module.p, module.f, tuple(r), module.a)


def twist(module: RankOneModule, exponent: int) -> RankOneModule:
    r = [0] * module.f
    r[-1] = exponent % (module.p**module.f - 1)
    return product(module, RankOneModule(module.p, module.f, tuple(r), module.field.one))
