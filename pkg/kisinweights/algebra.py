"""Exact arithmetic over small finite fields and truncated series rings.

Elements of F_q (q = p**m) are stored by their integer code
``sum(c_k * p**k)`` where ``c_0 + c_1 t + ... + c_{m-1} t**(m-1)`` is the
representative modulo the user-supplied irreducible modulus. Multiplication
goes through exp/log tables built from the smallest primitive element.

Series live in F_q[u]/(u**(N+1)); the Frobenius substitution u -> u**p acts
trivially on coefficients.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from sympy import Poly, isprime, primefactors, symbols

from kisinweights.errors import DomainError, StructuralError

MAX_FIELD_SIZE = 2**16

# u_valuation of the zero series
INFINITY = math.inf

_T = symbols("t")


def is_infinite(value: float | int) -> bool:
    return value == INFINITY


class FqField:
    __slots__ = ("p", "m", "q", "modulus", "_digits", "_exp", "_log", "zero", "one")

    def __init__(self, p: int, m: int = 1, modulus: Sequence[int] | None = None) -> None:
        p = int(p)
        m = int(m)
        if not isprime(p):
            raise DomainError(f"characteristic {p} is not prime")
        if p == 2:
            raise DomainError("characteristic 2 is not supported")
        if m < 1:
            raise DomainError(f"extension degree must be positive, got {m}")
        if p**m > MAX_FIELD_SIZE:
            raise DomainError(f"field size {p}^{m} exceeds {MAX_FIELD_SIZE}")

        self.p = p
        self.m = m
        self.q = p**m
        self.modulus = _check_modulus(p, m, modulus)
        self._digits: list[tuple[int, ...]] = [_to_digits(code, p, m) for code in range(self.q)]
        self._exp, self._log = self._build_tables()
        self.zero = FqElement(self, 0)
        self.one = FqElement(self, 1)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, FqField):
            return NotImplemented
        return (self.p, self.m, self.modulus) == (other.p, other.m, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.m, self.modulus))

    def __repr__(self) -> str:
        if self.m == 1:
            return f"FqField({self.p})"
        return f"FqField({self.p}, {self.m}, {list(self.modulus)})"

    def __call__(self, value: int | Sequence[int] | FqElement) -> FqElement:
        if isinstance(value, FqElement):
            if value.field != self:
                raise StructuralError(f"element of {value.field!r} used in {self!r}")
            return value
        if isinstance(value, int):
            return FqElement(self, value % self.p)
        return self.element(value)

    def element(self, coeffs: Sequence[int]) -> FqElement:
        values = [int(c) % self.p for c in coeffs]
        if len(values) > self.m:
            raise DomainError(f"element has {len(values)} coefficients, field degree is {self.m}")
        return FqElement(self, _from_digits(values, self.p))

    def elements(self) -> Iterator[FqElement]:
        for code in range(self.q):
            yield FqElement(self, code)

    def nonzero_elements(self) -> Iterator[FqElement]:
        for code in range(1, self.q):
            yield FqElement(self, code)

    def random_element(self, rng: random.Random, *, nonzero: bool = False) -> FqElement:
        low = 1 if nonzero else 0
        return FqElement(self, rng.randrange(low, self.q))

    @property
    def generator(self) -> FqElement:
        return FqElement(self, self._exp[1 % (self.q - 1)])

    # code-level arithmetic, used by FqElement and the linear algebra layer

    def add_codes(self, a: int, b: int) -> int:
        if self.m == 1:
            return (a + b) % self.p
        da, db = self._digits[a], self._digits[b]
        return _from_digits([(x + y) % self.p for x, y in zip(da, db)], self.p)

    def neg_code(self, a: int) -> int:
        if self.m == 1:
            return (-a) % self.p
        return _from_digits([(-x) % self.p for x in self._digits[a]], self.p)

    def sub_codes(self, a: int, b: int) -> int:
        return self.add_codes(a, self.neg_code(b))

    def mul_codes(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv_code(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def digits(self, code: int) -> tuple[int, ...]:
        return self._digits[code]

    def _build_tables(self) -> tuple[list[int], list[int]]:
        order = self.q - 1
        factors = primefactors(order)
        for candidate in range(1, self.q):
            digits = self._digits[candidate]
            if all(self._poly_pow(digits, order // ell) != self._digits[1] for ell in factors):
                break
        else:  # pragma: no cover - irreducibility guarantees a primitive element
            raise DomainError(f"no primitive element found for {self!r}")

        exp_table = [0] * order
        log_table = [0] * self.q
        current = self._digits[1]
        for k in range(order):
            code = _from_digits(current, self.p)
            exp_table[k] = code
            log_table[code] = k
            current = self._poly_mulmod(current, digits)
        return exp_table, log_table

    def _poly_mulmod(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        p, m = self.p, self.m
        product = [0] * (2 * m - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    product[i + j] = (product[i + j] + x * y) % p
        for k in range(2 * m - 2, m - 1, -1):
            c = product[k]
            if c:
                for j in range(m + 1):
                    product[k - m + j] = (product[k - m + j] - c * self.modulus[j]) % p
        return tuple(product[:m])

    def _poly_pow(self, base: Sequence[int], exponent: int) -> tuple[int, ...]:
        result = self._digits[1]
        square = tuple(base)
        while exponent:
            if exponent & 1:
                result = self._poly_mulmod(result, square)
            square = self._poly_mulmod(square, square)
            exponent >>= 1
        return result

    def to_json(self) -> dict[str, object]:
        return {"p": self.p, "m": self.m, "modulus": list(self.modulus)}


@lru_cache(maxsize=64)
def _cached_field(p: int, m: int, modulus: tuple[int, ...] | None) -> FqField:
    return FqField(p, m, modulus)


def get_field(p: int, m: int = 1, modulus: Sequence[int] | None = None) -> FqField:
    """Shared field instance; table construction is paid once per (p, m, modulus)."""
    key = None if modulus is None or int(m) == 1 else tuple(int(c) for c in modulus)
    return _cached_field(int(p), int(m), key)


def _check_modulus(p: int, m: int, modulus: Sequence[int] | None) -> tuple[int, ...]:
    if m == 1:
        return (0, 1)
    if modulus is None:
        raise DomainError(f"extension degree {m} requires an explicit modulus")
    values = tuple(int(c) for c in modulus)
    if len(values) != m + 1:
        raise DomainError(f"modulus must have {m + 1} coefficients, got {len(values)}")
    if any(c < 0 or c >= p for c in values):
        raise DomainError(f"modulus coefficients must lie in [0, {p})")
    if values[-1] != 1:
        raise DomainError("modulus must be monic (little-endian, leading coefficient last)")
    poly = Poly(list(reversed(values)), _T, modulus=p)
    if not poly.is_irreducible:
        raise DomainError(f"modulus {list(values)} is reducible over F_{p}")
    return values


def _to_digits(code: int, p: int, m: int) -> tuple[int, ...]:
    digits = []
    for _ in range(m):
        code, digit = divmod(code, p)
        digits.append(digit)
    return tuple(digits)


def _from_digits(digits: Iterable[int], p: int) -> int:
    code = 0
    for digit in reversed(list(digits)):
        code = code * p + digit
    return code


@dataclass(frozen=True, slots=True)
class FqElement:
    field: FqField
    code: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.digits(self.code)

    def is_zero(self) -> bool:
        return self.code == 0

    def __bool__(self) -> bool:
        return self.code != 0

    def __repr__(self) -> str:
        if self.field.m == 1:
            return f"F{self.field.p}({self.code})"
        return f"F{self.field.q}({list(self.coeffs)})"

    def _coerce(self, other: object) -> FqElement | None:
        if isinstance(other, FqElement):
            if other.field != self.field:
                raise StructuralError(f"mixed fields {self.field!r} and {other.field!r}")
            return other
        if isinstance(other, int):
            return self.field(other)
        return None

    def __add__(self, other: object) -> FqElement:
        value = self._coerce(other)
        if value is None:
            return NotImplemented
        return FqElement(self.field, self.field.add_codes(self.code, value.code))

    __radd__ = __add__

    def __sub__(self, other: object) -> FqElement:
        value = self._coerce(other)
        if value is None:
            return NotImplemented
        return FqElement(self.field, self.field.sub_codes(self.code, value.code))

    def __rsub__(self, other: object) -> FqElement:
        value = self._coerce(other)
        if value is None:
            return NotImplemented
        return value - self

    def __neg__(self) -> FqElement:
        return FqElement(self.field, self.field.neg_code(self.code))

    def __mul__(self, other: object) -> FqElement:
        value = self._coerce(other)
        if value is None:
            return NotImplemented
        return FqElement(self.field, self.field.mul_codes(self.code, value.code))

    __rmul__ = __mul__

    def inverse(self) -> FqElement:
        if self.code == 0:
            raise DomainError("zero has no inverse")
        return FqElement(self.field, self.field.inv_code(self.code))

    def __truediv__(self, other: object) -> FqElement:
        value = self._coerce(other)
        if value is None:
            return NotImplemented
        return self * value.inverse()

    def __rtruediv__(self, other: object) -> FqElement:
        value = self._coerce(other)
        if value is None:
            return NotImplemented
        return value * self.inverse()

    def __pow__(self, exponent: int) -> FqElement:
        if self.code == 0:
            if exponent < 0:
                raise DomainError("zero has no inverse")
            return self.field.one if exponent == 0 else self
        log = self.field._log[self.code]
        return FqElement(self.field, self.field._exp[(log * exponent) % (self.field.q - 1)])


@dataclass(frozen=True, slots=True)
class TruncatedSeries:
    """An element of F_q[u]/(u**(trunc+1)); ``coeffs[d]`` is the u**d coefficient."""

    field: FqField
    trunc: int
    coeffs: tuple[FqElement, ...]

    def __post_init__(self) -> None:
        if self.trunc < 0:
            raise StructuralError(f"truncation must be non-negative, got {self.trunc}")
        if len(self.coeffs) != self.trunc + 1:
            raise StructuralError(f"expected {self.trunc + 1} coefficients, got {len(self.coeffs)}")
        for c in self.coeffs:
            if c.field != self.field:
                raise StructuralError("series coefficient from a different field")

    @classmethod
    def zero(cls, field: FqField, trunc: int) -> TruncatedSeries:
        return cls(field, trunc, (field.zero,) * (trunc + 1))

    @classmethod
    def monomial(cls, coeff: FqElement, degree: int, trunc: int) -> TruncatedSeries:
        field = coeff.field
        values = [field.zero] * (trunc + 1)
        if 0 <= degree <= trunc:
            values[degree] = coeff
        return cls(field, trunc, tuple(values))

    @classmethod
    def constant(cls, coeff: FqElement, trunc: int) -> TruncatedSeries:
        return cls.monomial(coeff, 0, trunc)

    @classmethod
    def from_values(
        cls, field: FqField, trunc: int, values: Sequence[int | Sequence[int] | FqElement]
    ) -> TruncatedSeries:
        if len(values) > trunc + 1:
            raise StructuralError(f"{len(values)} coefficients do not fit truncation {trunc}")
        coeffs = [field(v) if not isinstance(v, (list, tuple)) else field.element(v) for v in values]
        coeffs.extend([field.zero] * (trunc + 1 - len(coeffs)))
        return cls(field, trunc, tuple(coeffs))

    def coefficient(self, degree: int) -> FqElement:
        if 0 <= degree <= self.trunc:
            return self.coeffs[degree]
        return self.field.zero

    def terms(self) -> Iterator[tuple[int, FqElement]]:
        for degree, c in enumerate(self.coeffs):
            if c:
                yield degree, c

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def degree(self) -> int | None:
        for d in range(self.trunc, -1, -1):
            if self.coeffs[d]:
                return d
        return None

    def u_valuation(self) -> int | float:
        return u_valuation(self)

    def _check_compatible(self, other: TruncatedSeries) -> None:
        if other.field != self.field:
            raise StructuralError(f"series over {self.field!r} and {other.field!r}")
        if other.trunc != self.trunc:
            raise StructuralError(f"series truncations differ: {self.trunc} vs {other.trunc}")

    def __add__(self, other: object) -> TruncatedSeries:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_compatible(other)
        return TruncatedSeries(self.field, self.trunc, tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: object) -> TruncatedSeries:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check_compatible(other)
        return TruncatedSeries(self.field, self.trunc, tuple(x - y for x, y in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> TruncatedSeries:
        return TruncatedSeries(self.field, self.trunc, tuple(-x for x in self.coeffs))

    def __mul__(self, other: object) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        if isinstance(other, (FqElement, int)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other: object) -> TruncatedSeries:
        if isinstance(other, (FqElement, int)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c: FqElement | int) -> TruncatedSeries:
        value = self.field(c)
        return TruncatedSeries(self.field, self.trunc, tuple(x * value for x in self.coeffs))

    def shift(self, k: int) -> TruncatedSeries:
        """Multiply by u**k (k >= 0), dropping degrees beyond the truncation."""
        if k < 0:
            raise DomainError("negative shifts are not defined on truncated series")
        zero = self.field.zero
        values = [zero] * min(k, self.trunc + 1) + list(self.coeffs[: max(self.trunc + 1 - k, 0)])
        return TruncatedSeries(self.field, self.trunc, tuple(values))

    def retruncate(self, trunc: int) -> TruncatedSeries:
        """Cut to a lower truncation, or pad with zeros when raising it (polynomial reading)."""
        if trunc <= self.trunc:
            return TruncatedSeries(self.field, trunc, self.coeffs[: trunc + 1])
        return TruncatedSeries(self.field, trunc, self.coeffs + (self.field.zero,) * (trunc - self.trunc))

    def frobenius(self) -> TruncatedSeries:
        return frobenius_substitute(self)

    def inverse(self) -> TruncatedSeries:
        lead = self.coeffs[0]
        if not lead:
            raise DomainError("only series with nonzero constant term are invertible")
        lead_inv = lead.inverse()
        result = [lead_inv]
        for n in range(1, self.trunc + 1):
            acc = self.field.zero
            for k in range(1, n + 1):
                acc = acc + self.coeffs[k] * result[n - k]
            result.append(-acc * lead_inv)
        return TruncatedSeries(self.field, self.trunc, tuple(result))

    def __truediv__(self, other: object) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other.inverse())
        if isinstance(other, (FqElement, int)):
            return self.scale(self.field(other).inverse())
        return NotImplemented


def series_mul(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    s._check_compatible(t)
    field, n = s.field, s.trunc
    left = [c.code for c in s.coeffs]
    right = [c.code for c in t.coeffs]
    out = [0] * (n + 1)
    for i, a in enumerate(left):
        if not a:
            continue
        for j in range(n + 1 - i):
            b = right[j]
            if b:
                out[i + j] = field.add_codes(out[i + j], field.mul_codes(a, b))
    return TruncatedSeries(field, n, tuple(FqElement(field, c) for c in out))


def frobenius_substitute(s: TruncatedSeries) -> TruncatedSeries:
    p = s.field.p
    values = [s.field.zero] * (s.trunc + 1)
    for degree in range(0, s.trunc // p + 1):
        values[degree * p] = s.coeffs[degree]
    return TruncatedSeries(s.field, s.trunc, tuple(values))


def u_valuation(s: TruncatedSeries) -> int | float:
    for degree, c in enumerate(s.coeffs):
        if c:
            return degree
    return INFINITY
