"""Acceptance batteries.

Each suite splits its work into independent picklable tasks, runs them
in-process or on a process pool, and merges the results in task order, so the
report does not depend on ``workers``.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

from kisinweights.algebra import get_field
from kisinweights.combinat import (
    all_subsets,
    carry_decompose,
    h_of_J,
    j_max,
    lemma73_bullets,
    lemma73_congruence,
    p_set_member,
    reconstruct,
    twisted_sum,
)
from kisinweights.config import KisinConfig, enumeration_limit
from kisinweights.errors import KisinError, NotInKernelError, ResourceError
from kisinweights.extension import (
    ExtensionData,
    ExtensionType,
    coboundary_equivalent,
    coboundary_space,
    conforms_to_type,
    constituents,
    count_distinct_classes,
    crystalline_forms,
    degree_p_survives,
    ext_dimension,
    is_exceptional,
    monomial_extension,
    random_extension,
    reduce_normal_form,
)
from kisinweights.ghat import beta_valuation, ghat_unique, raise_trace, valuation_bound
from kisinweights.rankone import inertial_exponent, twist
from kisinweights.weights import (
    InertialType,
    SerreWeight,
    bdj_niveau1,
    is_balanced,
    rebalance,
    twist_exponent,
)

logger = logging.getLogger(__name__)

MAX_COUNTEREXAMPLES = 20

Emit = Callable[[dict[str, object]], None]
TaskResult = dict[str, list]


def _result(checked: int = 0) -> TaskResult:
    return {"checked": [checked], "counterexamples": [], "details": []}


def _twists(p: int, f: int, low: int, high: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(low, high + 1), repeat=f)


# lemma71


def _kernel_count(p: int, f: int) -> int:
    """Sequences in [-p, p]**f with sum p**(f-1-i) r_i = 0 mod p**f - 1, by residue counting."""
    modulus = p**f - 1
    counts = {0: 1}
    for i in range(f):
        weight = p ** (f - 1 - i)
        updated: dict[int, int] = {}
        for residue, count in counts.items():
            for value in range(-p, p + 1):
                key = (residue + weight * value) % modulus
                updated[key] = updated.get(key, 0) + count
        counts = updated
    return counts.get(0, 0)


def _check_lemma71(task: tuple[int, int]) -> TaskResult:
    p, f = task
    result = _result()
    decomposed = 0
    for r in _twists(p, f, -p, p):
        result["checked"][0] += 1
        in_kernel = twisted_sum(p, r) % (p**f - 1) == 0
        try:
            decomposition = carry_decompose(p, f, r)
        except NotInKernelError:
            if in_kernel:
                result["counterexamples"].append({"p": p, "r": list(r), "reason": "rejected a kernel sequence"})
            continue
        except KisinError as exc:
            result["counterexamples"].append({"p": p, "r": list(r), "reason": exc.detail})
            continue
        decomposed += 1
        if not in_kernel:
            result["counterexamples"].append({"p": p, "r": list(r), "reason": "decomposed outside the kernel"})
        elif reconstruct(decomposition, p, f) != r:
            result["counterexamples"].append({"p": p, "r": list(r), "reason": "reconstruction differs"})
    expected = _kernel_count(p, f)
    if expected != decomposed:
        result["counterexamples"].append({"p": p, "f": f, "reason": f"{decomposed} decomposed, {expected} expected"})
    result["details"].append({"p": p, "f": f, "kernel_sequences": expected})
    return result


def _lemma71_tasks(options: dict) -> list:
    return [(p, f) for p in options["primes"] for f in range(1, options["max_f"] + 1)]


# lemma73


def _check_lemma73(task: tuple[int, int]) -> TaskResult:
    p, f = task
    result = _result()
    holds = 0
    for r in _twists(p, f, 1, p):
        member = p_set_member(p, r)
        for J in all_subsets(f):
            result["checked"][0] += 1
            congruence = lemma73_congruence(p, r, J)
            holds += congruence
            if congruence != (member and lemma73_bullets(p, r, J)):
                result["counterexamples"].append({"p": p, "r": list(r), "J": sorted(J), "congruence": congruence})
    result["details"].append({"p": p, "f": f, "congruence_holds": holds})
    return result


def _lemma73_tasks(options: dict) -> list:
    return [(p, f) for p in options["primes"] for f in range(1, options["max_f"] + 1)]


# prop74-reduce


def _check_prop74(task: tuple[int, int, tuple[int, ...], tuple[int, ...], int, int, int, int]) -> TaskResult:
    p, f, r, J, a_code, b_code, samples, seed = task
    field = get_field(p)
    t = ExtensionType(p, f, r, frozenset(J), field(a_code), field(b_code))
    n = p * p
    rng = random.Random(seed)
    space = coboundary_space(t, n)
    result = _result()
    label = {"p": p, "r": list(r), "J": list(J), "a": a_code, "b": b_code}
    oracle_checked = 0
    for index in range(samples):
        e = random_extension(t, n, rng)
        result["checked"][0] += 1
        try:
            reduced, _ = reduce_normal_form(e)
        except KisinError as exc:
            result["counterexamples"].append({**label, "sample": index, "reason": exc.detail})
            continue
        if not conforms_to_type(reduced):
            result["counterexamples"].append({**label, "sample": index, "reason": "shape"})
        elif count_distinct_classes([e, reduced], basis=space) != 1:
            result["counterexamples"].append({**label, "sample": index, "reason": "not equivalent"})
        # the coboundary oracle runs on every reduced sample
        oracle_checked += 1
        if not coboundary_equivalent(e, reduced).equivalent:
            result["counterexamples"].append({**label, "sample": index, "reason": "oracle disagrees"})
    result["details"].append({**label, "samples": samples, "oracle_checked": oracle_checked})
    return result


def _prop74_tasks(options: dict) -> list:
    configurations = []
    for p in options["primes"]:
        for f in range(1, options["max_f"] + 1):
            for r in _twists(p, f, 1, p):
                for J in all_subsets(f):
                    for a_code, b_code in itertools.product(range(1, p), repeat=2):
                        configurations.append((p, f, r, tuple(sorted(J)), a_code, b_code))
    rng = random.Random(options["seed"])
    count = min(options["configs"], len(configurations))
    chosen = sorted(rng.sample(range(len(configurations)), count))
    return [
        (*configurations[index], options["samples"], options["seed"] * 1_000_003 + index) for index in chosen
    ]


# thm75-counts


def _check_thm75(task: tuple[int, int, tuple[int, ...], tuple[int, ...], int, int]) -> TaskResult:
    p, f, r, J, a_code, b_code = task
    field = get_field(p)
    t = ExtensionType(p, f, r, frozenset(J), field(a_code), field(b_code))
    n = p * p
    exceptional = is_exceptional(p, r, J, t.a, t.b)
    forms = crystalline_forms(t, n)
    classes = count_distinct_classes(forms)
    bound = field.q ** (len(J) + (1 if exceptional else 0))
    dimension = ext_dimension(t, n)
    # reduction is linear in x, so the monomials decide survival for every x
    survives = any(
        degree_p_survives(monomial_extension(t, n, i, d)) for i in range(f) for d in range(n + 1)
    )
    result = _result(1 + f * (n + 1))
    label = {"p": p, "r": list(r), "J": list(J), "a": a_code, "b": b_code}
    result["details"].append(
        {
            **label,
            "classes": classes,
            "bound": bound,
            "ext_dimension": dimension.codimension,
            "equality": classes == bound,
            "exceptional": exceptional,
        }
    )
    if classes > bound:
        result["counterexamples"].append({**label, "reason": f"{classes} classes exceed {bound}"})
    if survives != exceptional:
        result["counterexamples"].append({**label, "reason": f"degree-p survival {survives}, exceptional {exceptional}"})
    return result


def _thm75_tasks(options: dict) -> list:
    tasks = []
    for p in options["primes"]:
        for f in range(1, options["max_f"] + 1):
            for r in _twists(p, f, 1, p):
                for J in all_subsets(f):
                    for a_code, b_code in itertools.product(range(1, p), repeat=2):
                        tasks.append((p, f, r, tuple(sorted(J)), a_code, b_code))
    return tasks


# jmax


def _check_jmax(task: tuple[int, int]) -> TaskResult:
    p, f = task
    field = get_field(p)
    full = frozenset(range(f))
    bound = valuation_bound(p)
    result = _result()
    for r in _twists(p, f, 1, p):
        for J in all_subsets(f):
            result["checked"][0] += 1
            label = {"p": p, "r": list(r), "J": sorted(J)}
            h = h_of_J(p, f, r, J)
            top = j_max(p, f, r, J)
            if h_of_J(p, f, r, top) != h:
                result["counterexamples"].append({**label, "reason": "h changed by j_max"})
            if j_max(p, f, r, top) != top:
                result["counterexamples"].append({**label, "reason": "j_max not idempotent"})

            expected = J if all(x == p - 1 for x in r) and not J else top
            split = ExtensionData.split(ExtensionType(p, f, r, J, field.one, field.one), p * p)
            try:
                raised, steps = raise_trace(split)
            except KisinError as exc:
                result["counterexamples"].append({**label, "reason": exc.detail})
            else:
                if raised.J != expected or len(steps) > f:
                    result["counterexamples"].append({**label, "reason": f"raised to {sorted(raised.J)}"})
                if any(h_of_J(p, f, r, step.J_after) != h for step in steps):
                    result["counterexamples"].append({**label, "reason": "h changed while raising"})

            extreme = all(x == p for x in r) and J == full
            if ghat_unique(p, f, r, J) == extreme:
                result["counterexamples"].append({**label, "reason": "uniqueness criterion"})
            betas = [beta_valuation(p, f, r, J, i) for i in range(f)]
            if max(betas) > bound or (max(betas) == bound) != extreme:
                result["counterexamples"].append({**label, "reason": f"beta {max(betas)} against bound {bound}"})
    return result


def _jmax_tasks(options: dict) -> list:
    return [(p, f) for p in options["primes"] if p > 2 for f in range(1, options["max_f"] + 1)]


# rebalance


def _rebalance_examples(p: int) -> list[tuple]:
    """(f, exps, J, expected) cases with a known balanced answer."""
    cases = [
        (4, ((1, 0), (p - 1, 0), (p, 0), (b, 0)), frozenset({1, 2, 3, 5, 6}), frozenset({1, 2, 3, 4}))
        for b in sorted({1, p - 1})
    ]
    if p == 3:
        # the carry string wraps from the last embedding to the first
        cases.append((3, ((3, 0), (1, 0), (1, 0)), frozenset({0, 1, 3}), frozenset({1, 3, 5})))
    return cases


def _niveau2_pair(p: int, f: int, exps: Sequence[tuple[int, int]], J: frozenset[int]) -> tuple[int, int]:
    order = p ** (2 * f) - 1
    first = second = 0
    for s in range(2 * f):
        b1, b2 = exps[s % f]
        weight = pow(p, 2 * f - 1 - s)
        first += weight * (b1 if s in J else b2)
        second += weight * (b2 if s in J else b1)
    return tuple(sorted((first % order, second % order)))


def _check_rebalance(task: tuple) -> TaskResult:
    kind = task[0]
    result = _result()
    if kind == "example":
        _, p, f, exps, J, expected = task
        result["checked"][0] += 1
        try:
            got = rebalance(p, f, exps, J).J
        except KisinError as exc:
            got = exc.detail
        if got != expected:
            label = {"p": p, "exps": [list(pair) for pair in exps], "J": sorted(J)}
            result["counterexamples"].append({**label, "got": sorted(got) if isinstance(got, frozenset) else got})
        return result

    _, p, f, exps = task
    order = p ** (2 * f) - 1
    balanced = [J for J in all_subsets(2 * f) if is_balanced(J, f)]
    for J in all_subsets(2 * f):
        e1, e2 = _niveau2_pair(p, f, exps, J)
        if e1 == e2 or ((e1 * p**f - e2) % order and (e2 * p**f - e1) % order):
            continue
        result["checked"][0] += 1
        label = {"p": p, "exps": [list(pair) for pair in exps], "J": sorted(J)}
        candidates = {K for K in balanced if _niveau2_pair(p, f, exps, K) == (e1, e2)}
        try:
            got = rebalance(p, f, exps, J).J
        except KisinError as exc:
            result["counterexamples"].append({**label, "reason": exc.detail})
            continue
        if got not in candidates:
            result["counterexamples"].append({**label, "reason": f"returned {sorted(got)}"})
    return result


def _rebalance_tasks(options: dict) -> list:
    tasks: list[tuple] = []
    for p in options["primes"]:
        for case in _rebalance_examples(p):
            tasks.append(("example", p, *case))
    # exhaustive sweeps only for p <= 5
    small = [p for p in options["primes"] if p <= 5] or [min(options["primes"])]
    for p in small:
        for f in range(1, options["max_f"] + 1):
            for b1s in itertools.product(range(1, p + 1), repeat=f):
                tasks.append(("exhaustive", p, f, tuple((b1, 0) for b1 in b1s)))
    return tasks


# cross-char


def _check_cross_char(task: tuple[int, int]) -> TaskResult:
    p, f = task
    field = get_field(p)
    result = _result()
    for r in _twists(p, f, 1, p):
        for J in all_subsets(f):
            sub, quotient = constituents(ExtensionType(p, f, r, J, field.one, field.one))
            for shift in (0, 1):
                result["checked"][0] += 1
                w = SerreWeight(tuple((x - 1 + shift, shift) for x in r))
                k = twist_exponent(w, p)
                chars = (inertial_exponent(twist(quotient, k)), inertial_exponent(twist(sub, k)))
                t = InertialType(p, f, 1, (chars[0].exponent, chars[1].exponent))
                if J not in bdj_niveau1(t, w).witnesses:
                    result["counterexamples"].append({"p": p, "r": list(r), "J": sorted(J), "twist": shift})
    return result


def _cross_char_tasks(options: dict) -> list:
    return [(p, f) for p in options["primes"] for f in range(1, options["max_f"] + 1)]


SUITES: dict[str, tuple[Callable[[dict], list], Callable[..., TaskResult], tuple[int, ...], int]] = {
    "lemma71": (_lemma71_tasks, _check_lemma71, (3, 5), 3),
    "lemma73": (_lemma73_tasks, _check_lemma73, (3, 5), 3),
    "prop74-reduce": (_prop74_tasks, _check_prop74, (3, 5), 2),
    "thm75-counts": (_thm75_tasks, _check_thm75, (3,), 1),
    "jmax": (_jmax_tasks, _check_jmax, (3, 5), 3),
    "rebalance": (_rebalance_tasks, _check_rebalance, (3, 5, 7), 3),
    "cross-char": (_cross_char_tasks, _check_cross_char, (3, 5), 2),
}


def _sort_key(item: dict) -> str:
    return json.dumps(item, sort_keys=True)


def _discard(_event: dict[str, object]) -> None:
    return None


def run_suite(
    name: str,
    *,
    config: KisinConfig | None = None,
    emit: Emit | None = None,
    seed: int | None = None,
    workers: int | None = None,
    samples: int | None = None,
    configs: int | None = None,
    primes: Sequence[int] | None = None,
    max_f: int | None = None,
) -> dict[str, object]:
    config = config or KisinConfig()
    emit = emit or _discard
    make_tasks, check, default_primes, default_max_f = SUITES[name]
    options = {
        "seed": config.seed if seed is None else int(seed),
        "samples": config.samples_per_config if samples is None else int(samples),
        "configs": config.min_configs if configs is None else int(configs),
        "primes": tuple(int(p) for p in (primes or default_primes)),
        "max_f": default_max_f if max_f is None else int(max_f),
    }
    limit = enumeration_limit(config)
    if options["max_f"] > limit:
        raise ResourceError(f"max_f={options['max_f']} exceeds the enumeration guard {limit}")

    tasks = make_tasks(options)
    pool_size = config.workers if workers is None else int(workers)
    emit({"event": "log", "message": f"suite {name}: {len(tasks)} tasks on {max(pool_size, 1)} worker(s)"})
    logger.info("running suite %s with %d tasks", name, len(tasks))

    results: list[TaskResult] = []
    if pool_size > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=pool_size) as executor:
            for index, outcome in enumerate(executor.map(check, tasks), start=1):
                results.append(outcome)
                emit({"event": "progress", "current": index, "total": len(tasks)})
    else:
        for index, task in enumerate(tasks, start=1):
            results.append(check(task))
            emit({"event": "progress", "current": index, "total": len(tasks)})

    counterexamples = sorted((c for outcome in results for c in outcome["counterexamples"]), key=_sort_key)
    report = {
        "suite": name,
        "passed": not counterexamples,
        "checked": sum(outcome["checked"][0] for outcome in results),
        "counterexamples": counterexamples[:MAX_COUNTEREXAMPLES],
        "details": [d for outcome in results for d in outcome["details"]],
    }
    if counterexamples:
        logger.warning("suite %s: %d counterexamples", name, len(counterexamples))
    return report
