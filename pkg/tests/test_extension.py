from __future__ import annotations

import itertools
import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from kisinweights.algebra import TruncatedSeries, get_field
from kisinweights.combinat import all_subsets
from kisinweights.errors import DomainError, StructuralError, TruncationError
from kisinweights.extension import (
    BasisChange,
    ExtensionData,
    ExtensionType,
    PairChain,
    affects,
    apply_basis_change,
    class_count,
    classify_pairs,
    coboundary_equivalent,
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
from kisinweights.rankone import iso_test

F3 = get_field(3)
F5 = get_field(5)


def _type(p: int, r: tuple[int, ...], J: set[int], a: int = 1, b: int = 1) -> ExtensionType:
    field = get_field(p)
    return ExtensionType(p, len(r), r, frozenset(J), field(a), field(b))


def _extension(t: ExtensionType, trunc: int, *values: list[int]) -> ExtensionData:
    x = [TruncatedSeries.from_values(t.field, trunc, v) for v in values]
    return ExtensionData.of_type(t, x, trunc)


class TypeTests(unittest.TestCase):
    def test_validation(self) -> None:
        with self.assertRaises(DomainError):
            _type(3, (4,), {0})
        with self.assertRaises(DomainError):
            _type(3, (2,), {1})
        with self.assertRaises(DomainError):
            _type(3, (2,), {0}, a=0)
        with self.assertRaises(StructuralError):
            ExtensionData.of_type(_type(3, (2,), {0}), [TruncatedSeries.zero(F3, 4)], 9)

    def test_h_and_constituents(self) -> None:
        t = _type(5, (1, 3), {1}, a=2, b=3)
        self.assertEqual(t.h, (0, 3))
        sub, quotient = constituents(t)
        self.assertEqual((sub.r, sub.a), ((1, 0), F5(3)))
        self.assertEqual((quotient.r, quotient.a), ((0, 3), F5(2)))

    def test_exceptional_detection(self) -> None:
        self.assertTrue(is_exceptional(3, (2,), {0}, F3.one, F3.one))
        self.assertFalse(is_exceptional(3, (2,), {0}, F3.one, F3(2)))
        self.assertFalse(is_exceptional(3, (1,), {0}, F3.one, F3.one))
        self.assertTrue(is_exceptional(3, (3, 1), {0}, F3.one, F3.one))


class BasisChangeTests(unittest.TestCase):
    def test_zero_change_is_identity(self) -> None:
        t = _type(3, (2,), {0})
        e = _extension(t, 9, [0, 0, 1])
        self.assertEqual(apply_basis_change(e, BasisChange.zero(F3, 1, 9)), e)

    def test_hand_computed_change(self) -> None:
        t = _type(3, (2,), {0})
        e = _extension(t, 9, [0, 0, 1])
        changed = apply_basis_change(e, BasisChange((TruncatedSeries.constant(F3.one, 9),)))
        self.assertEqual(changed.x[0], TruncatedSeries.constant(F3.one, 9))

    def test_short_alpha_is_rejected(self) -> None:
        t = _type(3, (2,), {0})
        e = _extension(t, 9, [0, 0, 1])
        with self.assertRaises(TruncationError):
            apply_basis_change(e, BasisChange((TruncatedSeries.constant(F3.one, 2),)))

    def test_constrained_checks_recursion_off_J(self) -> None:
        t = _type(3, (1, 1), {0})
        one = TruncatedSeries.constant(F3.one, 9)
        u = TruncatedSeries.monomial(F3.one, 1, 9)
        BasisChange.constrained((one, u), t)
        with self.assertRaises(DomainError):
            BasisChange.constrained((one, TruncatedSeries.zero(F3, 9)), t)

    def test_constrained_change_keeps_zeros_off_J(self) -> None:
        t = _type(3, (1, 1), {0}, a=2)
        one = TruncatedSeries.constant(F3.one, 9)
        u = TruncatedSeries.monomial(F3.one, 1, 9)
        e = _extension(t, 9, [1], [])
        changed = apply_basis_change(e, BasisChange.constrained((one, u), t))
        self.assertTrue(changed.x[1].is_zero())


class PartitionTests(unittest.TestCase):
    def test_single_index_partition(self) -> None:
        t = _type(3, (2,), {0})
        partition = classify_pairs(t, 9)
        self.assertEqual(partition.loops, (((0, 3),),))
        self.assertEqual(partition.stubs, (PairChain(((0, 2),), (0, 0)),))
        self.assertEqual([chain.start for chain in partition.paths], [(0, 4), (0, 5), (0, 7), (0, 8)])
        self.assertEqual(partition.locate((0, 6)), ("path", 0))
        self.assertEqual(affects(t, 0, 3)[0], (0, 3))

    def test_every_pair_in_exactly_one_structure(self) -> None:
        for r in itertools.product(range(1, 4), repeat=2):
            for J in all_subsets(2):
                if not J:
                    continue
                t = _type(3, r, set(J))
                partition = classify_pairs(t, 9)
                members = [pair for loop in partition.loops for pair in loop]
                members += [pair for chain in partition.stubs + partition.paths for pair in chain.pairs]
                expected = {(i, d) for i in J for d in range(r[i], 10)}
                self.assertEqual(len(members), len(set(members)))
                self.assertEqual(set(members), expected)
                for chain in partition.stubs + partition.paths:
                    for pair, nxt in zip(chain.pairs, chain.pairs[1:] + (chain.exit,)):
                        self.assertEqual(affects(t, *pair)[0], nxt)

    def test_no_loops_when_all_twists_are_one(self) -> None:
        self.assertEqual(classify_pairs(_type(3, (1, 1), {0, 1}), 9).loops, ())

    def test_empty_J_has_no_pairs(self) -> None:
        with self.assertRaises(DomainError):
            classify_pairs(_type(3, (2,), set()), 9)


class ReductionTests(unittest.TestCase):
    def test_loop_term_is_killed_when_labels_differ(self) -> None:
        t = _type(3, (2,), {0}, a=1, b=2)
        e = _extension(t, 9, [0, 0, 0, 1])
        reduced, bc = reduce_normal_form(e)
        self.assertTrue(reduced.x[0].is_zero())
        self.assertEqual(apply_basis_change(e, bc), reduced)
        self.assertTrue(coboundary_equivalent(e, reduced).equivalent)

    def test_exceptional_term_survives(self) -> None:
        t = _type(3, (2,), {0})
        e = _extension(t, 9, [0, 0, 1, 1])
        reduced, _ = reduce_normal_form(e)
        self.assertEqual(reduced.x[0], TruncatedSeries.from_values(F3, 9, [1, 0, 0, 1]))
        self.assertTrue(conforms_to_type(reduced))
        self.assertTrue(coboundary_equivalent(e, reduced).equivalent)

    def test_normal_form_is_fixed(self) -> None:
        t = _type(5, (3, 2), {0})
        e = _extension(t, 25, [4, 1, 2], [])
        reduced, bc = reduce_normal_form(e)
        self.assertEqual(reduced, e)
        self.assertTrue(bc.is_zero())

    def test_off_J_coefficients_are_cleared(self) -> None:
        t = _type(3, (2,), set())
        e = _extension(t, 9, [2, 1])
        reduced, _ = reduce_normal_form(e)
        self.assertTrue(reduced.is_split())

    def test_truncation_must_reach_p_squared(self) -> None:
        t = _type(3, (2,), {0})
        with self.assertRaises(TruncationError):
            reduce_normal_form(ExtensionData.split(t, 8))

    def test_random_extensions_reduce_to_equivalent_normal_forms(self) -> None:
        rng = random.Random(7)
        for p in (3, 5):
            field = get_field(p)
            for r in itertools.product(range(1, p + 1), repeat=2):
                for J in all_subsets(2):
                    a, b = field.random_element(rng, nonzero=True), field.random_element(rng, nonzero=True)
                    t = ExtensionType(p, 2, r, J, a, b)
                    e = random_extension(t, p * p, rng)
                    reduced, _ = reduce_normal_form(e)
                    self.assertTrue(conforms_to_type(reduced))
                    self.assertEqual(count_distinct_classes([e, reduced]), 1)

    def test_degree_p_survives_only_when_exceptional(self) -> None:
        for f in (1, 2):
            for r in itertools.product(range(1, 4), repeat=f):
                for J in all_subsets(f):
                    for a, b in itertools.product((1, 2), repeat=2):
                        t = _type(3, r, set(J), a, b)
                        exceptional = is_exceptional(3, r, J, t.a, t.b)
                        survives = any(
                            degree_p_survives(monomial_extension(t, 9, i, d)) for i in range(f) for d in range(10)
                        )
                        self.assertEqual(survives, exceptional, (r, sorted(J), a, b))
                        if exceptional:
                            self.assertTrue(iso_test(*constituents(t)))


class OracleTests(unittest.TestCase):
    def test_examples(self) -> None:
        t = _type(3, (2,), {0})
        one = _extension(t, 9, [1])
        self.assertTrue(coboundary_equivalent(one, one).equivalent)
        result = coboundary_equivalent(_extension(t, 9, [0, 0, 1]), one)
        self.assertTrue(result.equivalent)
        self.assertEqual(apply_basis_change(_extension(t, 9, [0, 0, 1]), result.witness), one)
        self.assertFalse(coboundary_equivalent(ExtensionData.split(t, 9), one).equivalent)

    def test_scaled_equivalence(self) -> None:
        t = _type(5, (3,), {0}, a=1, b=2)
        e1, e2 = _extension(t, 25, [1]), _extension(t, 25, [3])
        self.assertFalse(coboundary_equivalent(e1, e2).equivalent)
        scaled = coboundary_equivalent(e1, e2, scaled=True)
        self.assertTrue(scaled.equivalent)
        self.assertEqual(scaled.scale, F5(3))

    def test_mismatched_types_are_rejected(self) -> None:
        with self.assertRaises(StructuralError):
            coboundary_equivalent(ExtensionData.split(_type(3, (2,), {0}), 9), ExtensionData.split(_type(3, (1,), {0}), 9))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_equivalence_relation(self, seed: int) -> None:
        rng = random.Random(seed)
        t = _type(3, (2, 1), {0})
        e1, e2, e3 = (random_extension(t, 9, rng) for _ in range(3))
        self.assertEqual(coboundary_equivalent(e1, e2).equivalent, coboundary_equivalent(e2, e1).equivalent)
        if coboundary_equivalent(e1, e2).equivalent and coboundary_equivalent(e2, e3).equivalent:
            self.assertTrue(coboundary_equivalent(e1, e3).equivalent)


class CountTests(unittest.TestCase):
    def test_crystalline_form_counts(self) -> None:
        self.assertEqual(len(crystalline_forms(_type(3, (2,), {0}))), 9)
        self.assertEqual(len(crystalline_forms(_type(3, (2,), {0}, a=1, b=2))), 3)
        forms = crystalline_forms(_type(3, (2,), set()))
        self.assertEqual(len(forms), 1)
        self.assertTrue(forms[0].is_split())

    def test_class_counts_are_bounded(self) -> None:
        for r in range(1, 4):
            for J in ({0}, set()):
                for a, b in itertools.product((1, 2), repeat=2):
                    t = _type(3, (r,), J, a, b)
                    forms = crystalline_forms(t)
                    self.assertLessEqual(count_distinct_classes(forms), len(forms))
                    dim = ext_dimension(t, 9)
                    self.assertEqual(dim.codimension + dim.coboundary_rank, dim.ambient_dimension)
                    self.assertEqual(class_count(t, 9), 3**dim.codimension)


if __name__ == "__main__":
    unittest.main()
