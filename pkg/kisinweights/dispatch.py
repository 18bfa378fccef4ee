from __future__ import annotations

import logging
from typing import Callable, Mapping

from kisinweights import codec
from kisinweights.algebra import FqElement, FqField, TruncatedSeries, get_field
from kisinweights.combinat import (
    all_j_sets,
    carry_decompose,
    j_max,
    lemma73_bullets,
    lemma73_congruence,
    p_set_member,
)
from kisinweights.config import KisinConfig
from kisinweights.extension import (
    ExtensionData,
    ExtensionType,
    class_count,
    classify_pairs,
    coboundary_equivalent,
    count_distinct_classes,
    crystalline_forms,
    ext_dimension,
    is_exceptional,
    reduce_normal_form,
)
from kisinweights.ghat import beta_valuation, ghat_unique, model_raise, raise_trace, tau_exponents, valuation_bound
from kisinweights.rankone import RankOneModule, RawRankOne, canonicalize, inertial_exponent, iso_test, normalizing_units, product
from kisinweights.suites import SUITES, run_suite
from kisinweights.weights import (
    InertialType,
    SerreWeight,
    bdj_inertial,
    hodge_type,
    rebalance,
    weight_equivalent,
    weights_list,
)

logger = logging.getLogger(__name__)

Params = Mapping[str, object]
Emit = Callable[[dict[str, object]], None]


class UsageError(ValueError):
    """Malformed request: unknown command, missing or unparseable parameter."""


def _discard(_event: dict[str, object]) -> None:
    return None


class KisinDispatcher:
    def __init__(self, *, config: KisinConfig | None = None, emit: Emit | None = None) -> None:
        self._config = config or KisinConfig()
        self._emit = emit or _discard
        self._handlers: dict[str, Callable[[Params], dict[str, object]]] = {
            "rankone-canon": self._handle_rankone_canon,
            "rankone-iso": self._handle_rankone_iso,
            "rankone-char": self._handle_rankone_char,
            "rankone-product": self._handle_rankone_product,
            "carry": self._handle_carry,
            "pset": self._handle_pset,
            "jmax": self._handle_jmax,
            "ext-reduce": self._handle_ext_reduce,
            "ext-equiv": self._handle_ext_equiv,
            "ext-forms": self._handle_ext_forms,
            "ext-dimension": self._handle_ext_dimension,
            "ghat-unique": self._handle_ghat_unique,
            "beta-val": self._handle_beta_val,
            "tau": self._handle_tau,
            "raise": self._handle_raise,
            "weights-equiv": self._handle_weights_equiv,
            "hodge-type": self._handle_hodge_type,
            "bdj1": self._handle_bdj1,
            "bdj2": self._handle_bdj2,
            "weights-list": self._handle_weights_list,
            "rebalance": self._handle_rebalance,
            "suite": self._handle_suite,
        }

    @property
    def commands(self) -> list[str]:
        return sorted(self._handlers)

    def handle_request(self, command: str, params: Params) -> dict[str, object]:
        try:
            handler = self._handlers[command]
        except KeyError as exc:
            raise UsageError(f"Unsupported command: {command}") from exc
        logger.debug("dispatching %s", command)
        return handler(params)

    # rank one

    def _handle_rankone_canon(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_f(params)
        field = self._field(params)
        trunc = self._get_int(params, "trunc", default=self._config.trunc_for(p))
        raw_c = params.get("c", params.get("x"))
        if not isinstance(raw_c, list):
            raise UsageError("rankone-canon needs the structure constants as c (or x)")
        raw = RawRankOne(p, f, tuple(codec.series_from_json(s, field, trunc) for s in raw_c))
        module = canonicalize(raw)
        return {
            "module": codec.rankone_to_json(module),
            "units": codec.series_list_to_json(normalizing_units(raw)),
        }

    def _handle_rankone_iso(self, params: Params) -> dict[str, object]:
        m1, m2 = self._module(params, ""), self._module(params, "2")
        return {"isomorphic": iso_test(m1, m2)}

    def _handle_rankone_char(self, params: Params) -> dict[str, object]:
        return {"character": codec.character_to_json(inertial_exponent(self._module(params, "")))}

    def _handle_rankone_product(self, params: Params) -> dict[str, object]:
        m1, m2 = self._module(params, ""), self._module(params, "2")
        return {"module": codec.rankone_to_json(product(m1, m2))}

    # combinatorics

    def _handle_carry(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_f(params)
        return codec.decomposition_to_json(carry_decompose(p, f, self._get_ints(params, "r")))

    def _handle_pset(self, params: Params) -> dict[str, object]:
        p = self._get_int(params, "p")
        r = self._get_ints(params, "r")
        body: dict[str, object] = {"member": p_set_member(p, r)}
        if params.get("J") is not None:
            J = self._get_subset(params, "J")
            body["bullets"] = lemma73_bullets(p, r, J)
            body["congruence"] = lemma73_congruence(p, r, J)
        return body

    def _handle_jmax(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_f(params)
        r, J = self._get_ints(params, "r"), self._get_subset(params, "J")
        body: dict[str, object] = {"J_max": codec.subset_to_json(j_max(p, f, r, J))}
        if self._get_bool(params, "all"):
            body["all_J"] = [codec.subset_to_json(s) for s in all_j_sets(p, f, r, J)]
        return body

    # extensions

    def _handle_ext_reduce(self, params: Params) -> dict[str, object]:
        e = self._extension(params, "x")
        reduced, bc = reduce_normal_form(e)
        body = {
            "reduced": codec.extension_to_json(reduced),
            "basis_change": codec.basis_change_to_json(bc),
            "exceptional": is_exceptional(e.p, e.r, e.J, e.a, e.b),
        }
        if self._get_bool(params, "partition") and e.J:
            body["partition"] = codec.partition_to_json(classify_pairs(e, e.trunc))
        return body

    def _handle_ext_equiv(self, params: Params) -> dict[str, object]:
        e1, e2 = self._extension(params, "x"), self._extension(params, "x2")
        result = coboundary_equivalent(e1, e2, scaled=self._get_bool(params, "scaled"))
        return codec.equivalence_to_json(result)

    def _handle_ext_forms(self, params: Params) -> dict[str, object]:
        t = self._extension_type(params)
        trunc = self._get_int(params, "trunc", default=self._config.trunc_for(t.p))
        forms = crystalline_forms(t, trunc)
        exceptional = is_exceptional(t.p, t.r, t.J, t.a, t.b)
        return {
            "forms": [codec.extension_to_json(e) for e in forms],
            "count": len(forms),
            "classes": count_distinct_classes(forms),
            "bound": t.field.q ** (len(t.J) + (1 if exceptional else 0)),
            "exceptional": exceptional,
        }

    def _handle_ext_dimension(self, params: Params) -> dict[str, object]:
        t = self._extension_type(params)
        trunc = self._get_int(params, "trunc", default=self._config.trunc_for(t.p))
        body: dict[str, object] = codec.ext_dimension_to_json(ext_dimension(t, trunc))
        body["class_count"] = class_count(t, trunc)
        return body

    # (phi, G-hat)

    def _handle_ghat_unique(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_f(params)
        return {"unique": ghat_unique(p, f, self._get_ints(params, "r"), self._get_subset(params, "J"))}

    def _handle_beta_val(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_f(params)
        r, J = self._get_ints(params, "r"), self._get_subset(params, "J")
        i = self._get_int(params, "i", default=0)
        return {
            "beta": codec.valuation_to_json(beta_valuation(p, f, r, J, i)),
            "bound": codec.valuation_to_json(valuation_bound(p)),
        }

    def _handle_tau(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_f(params)
        r, J = self._get_ints(params, "r"), self._get_subset(params, "J")
        tau = tau_exponents(p, f, r, J, self._get_int(params, "i", default=0))
        return {
            "alpha_exponent": tau.alpha_exponent,
            "gamma_exponent": tau.gamma_exponent,
            "alpha_valuation": codec.valuation_to_json(tau.alpha_valuation),
            "gamma_valuation": codec.valuation_to_json(tau.gamma_valuation),
            "meets_bound": tau.meets_bound,
        }

    def _handle_raise(self, params: Params) -> dict[str, object]:
        e = self._extension(params, "x")
        string = params.get("string")
        if string is not None:
            values = self._as_ints(string, "string")
            if len(values) != 2:
                raise UsageError("string must be a pair i,s")
            raised = model_raise(e, (values[0], values[1]))
            return {"raised": codec.extension_to_json(raised), "J": codec.subset_to_json(raised.J)}
        raised, steps = raise_trace(e)
        return {
            "raised": codec.extension_to_json(raised),
            "J": codec.subset_to_json(raised.J),
            "steps": [
                {
                    "string": list(step.string),
                    "J_before": codec.subset_to_json(step.J_before),
                    "J_after": codec.subset_to_json(step.J_after),
                    "cleanup": step.cleanup,
                }
                for step in steps
            ],
        }

    # weights

    def _handle_weights_equiv(self, params: Params) -> dict[str, object]:
        p = self._get_int(params, "p")
        w1, w2 = self._weight(params, "w"), self._weight(params, "w2")
        f = self._get_int(params, "f", default=w1.f)
        return {"equivalent": weight_equivalent(w1, w2, p, f)}

    def _handle_hodge_type(self, params: Params) -> dict[str, object]:
        w = self._weight(params, "w")
        if params.get("p") is not None:
            w.validate(self._get_int(params, "p"))
        return {"hodge_type": [list(pair) for pair in hodge_type(w)]}

    def _handle_bdj1(self, params: Params) -> dict[str, object]:
        return self._bdj(params, 1)

    def _handle_bdj2(self, params: Params) -> dict[str, object]:
        return self._bdj(params, 2)

    def _bdj(self, params: Params, niveau: int) -> dict[str, object]:
        t = self._inertial_type(params, niveau)
        w = self._weight(params, "w")
        split = self._get_bool(params, "split", default=True)
        return codec.bdj_to_json(bdj_inertial(t, w, split=split))

    def _handle_weights_list(self, params: Params) -> dict[str, object]:
        t = self._inertial_type(params, self._get_int(params, "niveau", default=1))
        return {
            "type": codec.inertial_type_to_json(t),
            "weights": [
                {**codec.weight_to_json(w), "witnesses": [codec.subset_to_json(J) for J in result.witnesses]}
                for w, result in weights_list(t)
            ],
        }

    def _handle_rebalance(self, params: Params) -> dict[str, object]:
        p, f = self._get_int(params, "p"), self._get_int(params, "f")
        exps = self._pairs(params, "exps")
        balanced = rebalance(p, f, exps, self._get_subset(params, "J"))
        return {"J": codec.subset_to_json(balanced.J)}

    def _handle_suite(self, params: Params) -> dict[str, object]:
        name = self._get_str(params, "name", "suite")
        if name not in SUITES:
            raise UsageError(f"Unknown suite: {name}; expected one of {', '.join(sorted(SUITES))}")
        overrides = {key: params[key] for key in ("samples", "configs", "primes", "max_f") if params.get(key) is not None}
        return run_suite(
            name,
            config=self._config,
            emit=self._emit,
            seed=self._get_int(params, "seed", default=self._config.seed),
            workers=self._get_int(params, "workers", default=self._config.workers),
            **overrides,
        )

    # builders

    def _field(self, params: Params) -> FqField:
        modulus = params.get("modulus")
        return get_field(
            self._get_int(params, "p"),
            self._get_int(params, "m", default=1),
            None if modulus is None else self._as_ints(modulus, "modulus"),
        )

    def _element(self, params: Params, key: str, field: FqField, default: int = 1) -> FqElement:
        value = params.get(key)
        if value is None:
            return field(default)
        return codec.element_from_json(value, field)

    def _module(self, params: Params, suffix: str) -> RankOneModule:
        nested = params.get(f"module{suffix or '1'}")
        if nested is not None:
            return codec.rankone_from_json(nested)
        field = self._field(params)
        r = self._get_ints(params, f"r{suffix}")
        return RankOneModule(field.p, len(r), tuple(r), self._element(params, f"a{suffix}", field))

    def _extension_type(self, params: Params) -> ExtensionType:
        field = self._field(params)
        r = self._get_ints(params, "r")
        f = self._get_int(params, "f", default=len(r))
        return ExtensionType(
            field.p,
            f,
            tuple(r),
            self._get_subset(params, "J"),
            self._element(params, "a", field),
            self._element(params, "b", field),
        )

    def _extension(self, params: Params, key: str) -> ExtensionData:
        nested = params.get("extension" if key == "x" else "extension2")
        if isinstance(nested, Mapping):
            return codec.extension_from_json(nested)
        t = self._extension_type(params)
        trunc = self._get_int(params, "trunc", default=self._config.trunc_for(t.p))
        raw_x = params.get(key)
        if raw_x is None:
            return ExtensionData.split(t, trunc)
        if not isinstance(raw_x, list) or len(raw_x) != t.f:
            raise UsageError(f"{key} must list one series per index")
        x: list[TruncatedSeries] = [codec.series_from_json(s, t.field, trunc) for s in raw_x]
        return ExtensionData.of_type(t, x, trunc)

    def _weight(self, params: Params, key: str) -> SerreWeight:
        value = params.get(key)
        if isinstance(value, Mapping):
            return codec.weight_from_json(value)
        return SerreWeight(tuple(self._pairs(params, key)))

    def _inertial_type(self, params: Params, niveau: int) -> InertialType:
        nested = params.get("type")
        if isinstance(nested, Mapping):
            t = codec.inertial_type_from_json(nested, params.get("p"), params.get("f"))
        else:
            exponents = self._get_ints(params, "exps", "exponents")
            if len(exponents) != 2:
                raise UsageError("an inertial type needs two exponents")
            t = InertialType(self._get_int(params, "p"), self._get_int(params, "f"), niveau, (exponents[0], exponents[1]))
        if t.niveau != niveau:
            raise UsageError(f"expected a niveau-{niveau} type")
        return t

    # params

    def _get_f(self, params: Params) -> int:
        if params.get("f") is not None:
            return self._get_int(params, "f")
        return len(self._get_ints(params, "r"))

    def _get_str(self, values: Params, *keys: str) -> str:
        for key in keys:
            value = values.get(key)
            if value is None:
                continue
            return str(value).strip()
        return ""

    def _get_int(self, values: Params, *keys: str, default: int | None = None) -> int:
        for key in keys:
            value = values.get(key)
            if value is None or value == "":
                continue
            try:
                return int(value)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"{key} must be an integer, got {value!r}") from exc
        if default is None:
            raise UsageError(f"missing parameter {keys[0]}")
        return int(default)

    def _get_bool(self, values: Params, *keys: str, default: bool = False) -> bool:
        for key in keys:
            value = values.get(key)
            if value is None:
                continue
            return bool(value)
        return bool(default)

    def _as_ints(self, value: object, name: str) -> list[int]:
        if not isinstance(value, (list, tuple)):
            raise UsageError(f"{name} must be a list of integers")
        try:
            return [int(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{name} must be a list of integers") from exc

    def _get_ints(self, values: Params, *keys: str) -> list[int]:
        for key in keys:
            value = values.get(key)
            if value is not None:
                return self._as_ints(value, key)
        raise UsageError(f"missing parameter {keys[0]}")

    def _get_subset(self, values: Params, key: str) -> frozenset[int]:
        value = values.get(key)
        if value is None:
            return frozenset()
        return frozenset(self._as_ints(value, key))

    def _pairs(self, values: Params, key: str) -> list[tuple[int, int]]:
        value = values.get(key)
        if not isinstance(value, list):
            raise UsageError(f"missing parameter {key}")
        pairs = []
        for pair in value:
            ints = self._as_ints(pair, key)
            if len(ints) != 2:
                raise UsageError(f"{key} must be a list of pairs")
            pairs.append((ints[0], ints[1]))
        return pairs
