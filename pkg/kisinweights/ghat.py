"""(phi, G-hat) bookkeeping for rank-two extensions.

The tau-action itself lives in a ring that is not computable here; only the
exponents it is built from and their valuations are tracked, as exact
rationals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from kisinweights.algebra import INFINITY, TruncatedSeries
from kisinweights.combinat import h_components, j_max, j_strings
from kisinweights.errors import DomainError, InternalError, TruncationError
from kisinweights.extension import (
    BasisChange,
    ExtensionData,
    ExtensionType,
    apply_basis_change,
    conforms_to_type,
    dispose_term,
    reduce_normal_form,
)

logger = logging.getLogger(__name__)

ValuationQ = Fraction
# same data as an extension type: (r, a, b, J) over (p, f)
GhatType = ExtensionType


@dataclass(frozen=True, slots=True)
class TauExponents:
    alpha_exponent: int
    gamma_exponent: int
    alpha_valuation: Fraction | float
    gamma_valuation: Fraction | float
    meets_bound: bool


@dataclass(frozen=True, slots=True)
class RaiseStep:
    string: tuple[int, int]
    J_before: frozenset[int]
    J_after: frozenset[int]
    cleanup: str


def _check_range(p: int, r: Sequence[int]) -> None:
    if any(x < 1 or x > p for x in r):
        raise DomainError(f"twists must lie in [1, {p}]: {list(r)}")


def valuation_bound(p: int) -> Fraction:
    return Fraction(p * p, p - 1)


def beta_valuation(p: int, f: int, r: Sequence[int], J: Iterable[int], i: int) -> Fraction:
    _check_range(p, r)
    h = h_components(r, J)
    total = sum(p ** (f - j) * (2 * h[(i + j) % f] - r[(i + j) % f]) for j in range(f))
    return Fraction(total, p**f - 1)


def ghat_unique(p: int, f: int, r: Sequence[int], J: Iterable[int]) -> bool:
    _check_range(p, r)
    subset = frozenset(J)
    h = h_components(r, subset)
    unique = not all(x == p and y == p for x, y in zip(r, h))
    reaches_bound = max(beta_valuation(p, f, r, subset, i) for i in range(f)) >= valuation_bound(p)
    if unique == reaches_bound:
        raise InternalError(f"valuation criterion disagrees with the h = r = p test for r={list(r)}")
    return unique


def epsilon_valuation(p: int, m: int) -> Fraction | float:
    """v_R(eps**m - 1) = p**s * p/(p-1) for m = p**s * m0 with p not dividing m0."""
    if m == 0:
        return INFINITY
    s = 0
    m = abs(m)
    while m % p == 0:
        m //= p
        s += 1
    return Fraction(p**s * p, p - 1)


def tau_exponents(p: int, f: int, r: Sequence[int], J: Iterable[int], i: int) -> TauExponents:
    """Exponents A, G with alpha_i = eta**A and gamma_i = eta**G on the diagonal of tau."""
    _check_range(p, r)
    h = h_components(r, J)
    alpha = sum(p ** (f - j) * (r[(i + j) % f] - h[(i + j) % f]) for j in range(f))
    gamma = sum(p ** (f - j) * h[(i + j) % f] for j in range(f))
    v_alpha = epsilon_valuation(p, alpha)
    v_gamma = epsilon_valuation(p, gamma)
    bound = valuation_bound(p)
    return TauExponents(alpha, gamma, v_alpha, v_gamma, v_alpha >= bound and v_gamma >= bound)


def _check_string(e: ExtensionData, string: tuple[int, int]) -> list[int]:
    p, f = e.p, e.f
    i, s = string
    if p <= 2:
        raise DomainError("model raising needs p > 2")
    if (i % f, s) not in j_strings(p, e.r):
        raise DomainError(f"no string of shape (1, p-1, ..., p) at start {i} with length {s}")
    tail = [(i + t) % f for t in range(1, s + 1)]
    if i not in e.J or any(k in e.J for k in tail):
        raise DomainError(f"string at {i} is not raisable for J={sorted(e.J)}")
    return tail


def model_raise(e: ExtensionData, j_string: tuple[int, int]) -> ExtensionData:
    return _raise_once(e, j_string)[0]


def _raise_once(e: ExtensionData, j_string: tuple[int, int]) -> tuple[ExtensionData, str]:
    p, f, n = e.p, e.f, e.trunc
    if n < p * p:
        raise TruncationError(f"model raising needs truncation >= p^2 = {p * p}, got {n}")
    tail = _check_string(e, j_string)
    i = j_string[0] % f
    if not conforms_to_type(e):
        e = reduce_normal_form(e)[0]

    # f'_j = u f_j and e'_j = u^-1 e_j on [i, i+s-1]
    rescaled = {(i + t) % f for t in range(len(tail))}
    x_new = []
    for j in range(f):
        mu_prev = 1 if (j - 1) % f in rescaled else 0
        lam = -1 if j in rescaled else 0
        x_new.append(e.x[j].shift(p * mu_prev - lam))
    J_new = (e.J - {i}) | set(tail)
    raised = ExtensionData(p, f, e.r, J_new, e.a, e.b, x_new, n)

    # i has left J: clear x_i, which pushes a degree-p term to i+1
    t = raised.type
    zero = TruncatedSeries.zero(raised.field, n)
    alpha = [zero] * f
    alpha[i] = raised.x[i].scale(t.label_a(i).inverse())
    raised = apply_basis_change(raised, BasisChange(tuple(alpha)))

    target = ((i + 1) % f, p)
    kind = "none"
    if raised.x[target[0]].coefficient(p):
        raised, _, kind = dispose_term(raised, target)
    if not conforms_to_type(raised):
        raise InternalError(f"raised extension is not in normal form for J'={sorted(J_new)}")
    logger.debug("raised string %s: J %s -> %s via %s", j_string, sorted(e.J), sorted(J_new), kind)
    return raised, kind


def _next_string(e: ExtensionData) -> tuple[int, int] | None:
    for start, s in sorted(j_strings(e.p, e.r)):
        tail = [(start + t) % e.f for t in range(1, s + 1)]
        if start in e.J and not any(k in e.J for k in tail):
            return start, s
    return None


def raise_trace(e: ExtensionData) -> tuple[ExtensionData, list[RaiseStep]]:
    p, f = e.p, e.f
    if p <= 2:
        raise DomainError("raising to J_max needs p > 2")
    if all(x == p - 1 for x in e.r) and not e.J:
        return e, []

    target = j_max(p, f, e.r, e.J)
    steps: list[RaiseStep] = []
    current = e
    while (string := _next_string(current)) is not None:
        if len(steps) >= f:
            raise InternalError("raising to J_max did not terminate within f steps")
        before = current.J
        current, kind = _raise_once(current, string)
        steps.append(RaiseStep(string, before, current.J, kind))
    if current.J != target:
        raise InternalError(f"raising stopped at J={sorted(current.J)}, J_max={sorted(target)}")
    return current, steps


def raise_to_jmax(e: ExtensionData) -> ExtensionData:
    return raise_trace(e)[0]
