"""JSON readers and writers for the domain types.

Writers return plain dicts/lists ready for ``json.dumps``; readers accept what
the writers emit, plus the shorthand the command line uses (bare integers or
coefficient lists for elements once the field is known).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from kisinweights.algebra import FqElement, FqField, TruncatedSeries, get_field, is_infinite
from kisinweights.combinat import ALL_P_MINUS_ONE, ALL_TWO, STRINGS, CarryDecomposition, CarryString
from kisinweights.errors import StructuralError
from kisinweights.extension import (
    BasisChange,
    EquivalenceResult,
    ExtDimension,
    ExtensionData,
    ExtensionType,
    PairChain,
    PairPartition,
)
from kisinweights.rankone import InertialCharacter, RankOneModule
from kisinweights.weights import BdjResult, InertialType, SerreWeight

INFINITY_TOKEN = "infinity"


def _as_dict(value: object, name: str) -> Mapping[str, object]:
    if not isinstance(value, Mapping):
        raise StructuralError(f"{name} must be a JSON object")
    return value


def _require(values: Mapping[str, object], key: str) -> object:
    if key not in values:
        raise StructuralError(f"missing key {key!r}")
    return values[key]


def _int_list(value: object, name: str) -> list[int]:
    if not isinstance(value, (list, tuple)):
        raise StructuralError(f"{name} must be a list")
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise StructuralError(f"{name} must hold integers") from exc


def subset_to_json(J: frozenset[int] | set[int]) -> list[int]:
    return sorted(J)


def field_to_json(field: FqField) -> dict[str, object]:
    return field.to_json()


def field_from_json(obj: object) -> FqField:
    values = _as_dict(obj, "field")
    p = int(_require(values, "p"))
    m = int(values.get("m", 1))
    modulus = values.get("modulus")
    return get_field(p, m, None if modulus is None else _int_list(modulus, "modulus"))


def element_to_json(e: FqElement) -> dict[str, object]:
    return {**e.field.to_json(), "coeffs": list(e.coeffs)}


def element_from_json(obj: object, field: FqField | None = None) -> FqElement:
    if isinstance(obj, Mapping):
        own = field_from_json(obj)
        if field is not None and own != field:
            raise StructuralError(f"element over {own!r} where {field!r} was expected")
        return own.element(_int_list(_require(obj, "coeffs"), "coeffs"))
    if field is None:
        raise StructuralError("a bare element needs a known field")
    if isinstance(obj, bool):
        raise StructuralError("booleans are not field elements")
    if isinstance(obj, int):
        return field(obj)
    return field.element(_int_list(obj, "element"))


def series_to_json(s: TruncatedSeries) -> dict[str, object]:
    return {**s.field.to_json(), "trunc": s.trunc, "coeffs": [list(c.coeffs) for c in s.coeffs]}


def series_from_json(obj: object, field: FqField | None = None, trunc: int | None = None) -> TruncatedSeries:
    if isinstance(obj, Mapping):
        own = field_from_json(obj)
        if field is not None and own != field:
            raise StructuralError(f"series over {own!r} where {field!r} was expected")
        n = int(_require(obj, "trunc"))
        if trunc is not None and n != trunc:
            raise StructuralError(f"series truncated at {n}, expected {trunc}")
        coeffs = _require(obj, "coeffs")
        if not isinstance(coeffs, list):
            raise StructuralError("coeffs must be a list")
        return TruncatedSeries.from_values(own, n, [_coefficient(c) for c in coeffs])
    if field is None or trunc is None:
        raise StructuralError("a bare coefficient list needs a known field and truncation")
    if not isinstance(obj, list):
        raise StructuralError("series must be an object or a coefficient list")
    return TruncatedSeries.from_values(field, trunc, [_coefficient(c) for c in obj])


def _coefficient(value: object) -> int | list[int]:
    if isinstance(value, (list, tuple)):
        return _int_list(value, "coefficient")
    return int(value)


def valuation_to_json(v: Fraction | float | int) -> dict[str, int] | str:
    if is_infinite(v):
        return INFINITY_TOKEN
    value = Fraction(v)
    return {"num": value.numerator, "den": value.denominator}


def valuation_from_json(obj: object) -> Fraction | float:
    if obj == INFINITY_TOKEN:
        return float("inf")
    values = _as_dict(obj, "valuation")
    return Fraction(int(_require(values, "num")), int(_require(values, "den")))


def rankone_to_json(m: RankOneModule) -> dict[str, object]:
    return {"p": m.p, "f": m.f, "r": list(m.r), "a": element_to_json(m.a)}


def rankone_from_json(obj: object, field: FqField | None = None) -> RankOneModule:
    values = _as_dict(obj, "module")
    p = int(_require(values, "p"))
    r = _int_list(_require(values, "r"), "r")
    f = int(values.get("f", len(r)))
    return RankOneModule(p, f, tuple(r), element_from_json(_require(values, "a"), field))


def character_to_json(c: InertialCharacter) -> dict[str, object]:
    unramified = None if c.unramified is None else element_to_json(c.unramified)
    return {"p": c.p, "f": c.f, "niveau": c.n, "exponent": c.exponent, "unramified": unramified}


def character_from_json(obj: object) -> InertialCharacter:
    values = _as_dict(obj, "character")
    unramified = values.get("unramified")
    return InertialCharacter(
        int(_require(values, "p")),
        int(values.get("niveau", 1)),
        int(_require(values, "f")),
        int(_require(values, "exponent")),
        None if unramified is None else element_from_json(unramified),
    )


def decomposition_to_json(d: CarryDecomposition) -> dict[str, object]:
    body: dict[str, object] = {
        "kind": d.kind,
        "strings": [{"start": s.start, "len": s.length, "sign": s.sign} for s in d.strings],
    }
    if d.kind in (ALL_P_MINUS_ONE, ALL_TWO):
        body["sign"] = d.sign
    return body


def decomposition_from_json(obj: object) -> CarryDecomposition:
    values = _as_dict(obj, "decomposition")
    kind = str(_require(values, "kind"))
    if kind not in (ALL_P_MINUS_ONE, ALL_TWO, STRINGS):
        raise StructuralError(f"unknown decomposition kind {kind!r}")
    strings = tuple(
        CarryString(int(s["start"]), int(s["len"]), int(s["sign"])) for s in values.get("strings") or []
    )
    return CarryDecomposition(kind, int(values.get("sign", 1)), strings)


def extension_type_to_json(t: ExtensionType) -> dict[str, object]:
    return {
        "p": t.p,
        "f": t.f,
        "r": list(t.r),
        "J": subset_to_json(t.J),
        "a": element_to_json(t.a),
        "b": element_to_json(t.b),
    }


def extension_to_json(e: ExtensionData) -> dict[str, object]:
    return {
        **extension_type_to_json(e.type),
        "trunc": e.trunc,
        "x": [series_to_json(s) for s in e.x],
    }


def extension_type_from_json(obj: object, field: FqField | None = None) -> ExtensionType:
    values = _as_dict(obj, "extension type")
    p = int(_require(values, "p"))
    r = _int_list(_require(values, "r"), "r")
    f = int(values.get("f", len(r)))
    a = element_from_json(_require(values, "a"), field)
    b = element_from_json(_require(values, "b"), a.field)
    return ExtensionType(p, f, tuple(r), frozenset(_int_list(values.get("J") or [], "J")), a, b)


def extension_from_json(obj: object, field: FqField | None = None) -> ExtensionData:
    values = _as_dict(obj, "extension")
    t = extension_type_from_json(values, field)
    raw_trunc = values.get("trunc")
    trunc = t.p * t.p if raw_trunc is None else int(raw_trunc)
    raw_x = values.get("x")
    if raw_x is None:
        return ExtensionData.split(t, trunc)
    if not isinstance(raw_x, list):
        raise StructuralError("x must be a list of series")
    return ExtensionData.of_type(t, [series_from_json(s, t.field, trunc) for s in raw_x], trunc)


def basis_change_to_json(bc: BasisChange | None) -> list[dict[str, object]] | None:
    if bc is None:
        return None
    return [series_to_json(s) for s in bc.alpha]


def equivalence_to_json(result: EquivalenceResult) -> dict[str, object]:
    body: dict[str, object] = {"equivalent": result.equivalent, "witness": basis_change_to_json(result.witness)}
    if result.scale is not None:
        body["scale"] = element_to_json(result.scale)
    return body


def _chain_to_json(chain: PairChain) -> dict[str, object]:
    return {"pairs": [list(pair) for pair in chain.pairs], "exit": list(chain.exit)}


def partition_to_json(partition: PairPartition) -> dict[str, object]:
    return {
        "cutoff": partition.cutoff,
        "loops": [[list(pair) for pair in loop] for loop in partition.loops],
        "stubs": [_chain_to_json(chain) for chain in partition.stubs],
        "paths": [_chain_to_json(chain) for chain in partition.paths],
    }


def ext_dimension_to_json(dim: ExtDimension) -> dict[str, int]:
    return {
        "codimension": dim.codimension,
        "normal_form_dimension": dim.normal_form_dimension,
        "coboundary_rank": dim.coboundary_rank,
        "ambient_dimension": dim.ambient_dimension,
    }


def weight_to_json(w: SerreWeight) -> dict[str, object]:
    return {"pairs": [list(pair) for pair in w.pairs]}


def weight_from_json(obj: object) -> SerreWeight:
    values = _as_dict(obj, "weight")
    pairs = _require(values, "pairs")
    if not isinstance(pairs, list) or any(not isinstance(pair, (list, tuple)) or len(pair) != 2 for pair in pairs):
        raise StructuralError("pairs must be a list of [a1, a2]")
    return SerreWeight(tuple((int(a1), int(a2)) for a1, a2 in pairs))


def inertial_type_to_json(t: InertialType) -> dict[str, object]:
    unramified = None if t.unramified is None else [element_to_json(c) for c in t.unramified]
    return {"p": t.p, "f": t.f, "niveau": t.niveau, "exponents": list(t.exponents), "unramified": unramified}


def inertial_type_from_json(obj: object, p: int | None = None, f: int | None = None) -> InertialType:
    values = _as_dict(obj, "inertial type")
    exponents = _int_list(_require(values, "exponents"), "exponents")
    if len(exponents) != 2:
        raise StructuralError("an inertial type has two exponents")
    raw_unramified = values.get("unramified")
    unramified = None
    if raw_unramified is not None:
        unramified = tuple(element_from_json(c) for c in raw_unramified)
    p = values.get("p", p)
    f = values.get("f", f)
    if p is None or f is None:
        raise StructuralError("an inertial type needs p and f")
    return InertialType(
        int(p),
        int(f),
        int(values.get("niveau", 1)),
        (exponents[0], exponents[1]),
        unramified,
    )


def bdj_to_json(result: BdjResult) -> dict[str, object]:
    return {
        "member": result.member,
        "witnesses": [subset_to_json(J) for J in result.witnesses],
        "exact": result.exact,
    }


def series_list_to_json(values: Sequence[TruncatedSeries]) -> list[dict[str, object]]:
    return [series_to_json(s) for s in values]
