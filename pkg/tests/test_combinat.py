from __future__ import annotations

import itertools
import os
import unittest
from unittest import mock

from kisinweights.combinat import (
    ALL_P_MINUS_ONE,
    ALL_TWO,
    STRINGS,
    CarryString,
    HClass,
    all_j_sets,
    all_subsets,
    carry_decompose,
    h_of_J,
    j_max,
    j_sets_for_h,
    j_strings,
    lemma73_bullets,
    lemma73_congruence,
    p_set_member,
    reconstruct,
    twisted_sum,
)
from kisinweights.config import MAX_F_ENV
from kisinweights.errors import DomainError, NotInKernelError, ResourceError


class CarryTests(unittest.TestCase):
    def test_constant_sequences_take_priority(self) -> None:
        decomposition = carry_decompose(3, 2, (2, 2))
        self.assertEqual((decomposition.kind, decomposition.sign), (ALL_P_MINUS_ONE, 1))
        self.assertEqual(carry_decompose(5, 3, (-4, -4, -4)).sign, -1)
        self.assertEqual(carry_decompose(2, 2, (2, 2)).kind, ALL_TWO)

    def test_single_string(self) -> None:
        decomposition = carry_decompose(3, 2, (-1, 3))
        self.assertEqual(decomposition.kind, STRINGS)
        self.assertEqual(decomposition.strings, (CarryString(0, 1, 1),))

    def test_zero_sequence_has_no_strings(self) -> None:
        self.assertEqual(carry_decompose(3, 2, (0, 0)).strings, ())

    def test_rejects_sequences_outside_the_kernel(self) -> None:
        with self.assertRaises(NotInKernelError):
            carry_decompose(3, 2, (1, 0))
        with self.assertRaises(DomainError):
            carry_decompose(3, 2, (4, 0))

    def test_exhaustive_reconstruction(self) -> None:
        for p, f in ((3, 1), (3, 2), (3, 3), (5, 2)):
            decomposed = 0
            for r in itertools.product(range(-p, p + 1), repeat=f):
                in_kernel = twisted_sum(p, r) % (p**f - 1) == 0
                if not in_kernel:
                    with self.assertRaises(NotInKernelError):
                        carry_decompose(p, f, r)
                    continue
                decomposed += 1
                decomposition = carry_decompose(p, f, r)
                self.assertEqual(reconstruct(decomposition, p, f), r)
                covered = [k for s in decomposition.strings for k in s.positions(f)]
                self.assertEqual(len(covered), len(set(covered)))
            self.assertGreater(decomposed, 0)


class PSetTests(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertTrue(p_set_member(3, (3, 1)))
        self.assertTrue(p_set_member(3, (2, 2)))
        self.assertFalse(p_set_member(3, (3, 2)))

    def test_congruence_matches_bullets(self) -> None:
        for p, f in ((3, 1), (3, 2), (5, 2), (3, 3)):
            for r in itertools.product(range(1, p + 1), repeat=f):
                member = p_set_member(p, r)
                for J in all_subsets(f):
                    expected = member and lemma73_bullets(p, r, J)
                    self.assertEqual(lemma73_congruence(p, r, J), expected, (p, r, sorted(J)))


class HClassTests(unittest.TestCase):
    def test_h_of_J_examples(self) -> None:
        self.assertEqual(h_of_J(3, 2, (1, 3), {0}).h, 3)
        self.assertEqual(h_of_J(3, 2, (1, 3), set()).h, 0)
        self.assertEqual(h_of_J(3, 2, (1, 3), {1}).h, 3)
        self.assertEqual(HClass(3, 2, 11).h, 3)
        with self.assertRaises(DomainError):
            h_of_J(3, 2, (0, 3), {0})

    def test_j_sets_for_h(self) -> None:
        self.assertEqual(j_sets_for_h(3, 2, (1, 3), HClass(3, 2, 3)), [frozenset({0}), frozenset({1})])
        self.assertEqual(j_sets_for_h(3, 1, (2,), 0), [frozenset(), frozenset({0})])
        self.assertEqual(j_sets_for_h(3, 2, (1, 1), 2), [])

    def test_enumeration_guard(self) -> None:
        with self.assertRaises(ResourceError):
            j_sets_for_h(3, 3, (1, 1, 1), 0, limit=2)
        with mock.patch.dict(os.environ, {MAX_F_ENV: "1"}):
            with self.assertRaises(ResourceError):
                j_sets_for_h(3, 2, (1, 3), 3)


class JMaxTests(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(j_strings(3, (1, 3)), [(0, 1)])
        self.assertEqual(j_max(3, 2, (1, 3), {0}), frozenset({1}))
        self.assertEqual(j_max(3, 2, (2, 2), set()), frozenset({0, 1}))
        self.assertEqual(j_max(3, 2, (1, 3), {1}), frozenset({1}))

    def test_preserves_h_and_is_idempotent(self) -> None:
        for p, f in ((3, 1), (3, 2), (3, 3), (5, 2)):
            for r in itertools.product(range(1, p + 1), repeat=f):
                for J in all_subsets(f):
                    top = j_max(p, f, r, J)
                    h = h_of_J(p, f, r, J)
                    self.assertEqual(h_of_J(p, f, r, top), h)
                    self.assertEqual(j_max(p, f, r, top), top)
                    self.assertIn(top, j_sets_for_h(p, f, r, h))

    def test_string_flips_reach_every_j_set(self) -> None:
        for p, f in ((3, 2), (3, 3), (5, 3)):
            for r in itertools.product(range(1, p + 1), repeat=f):
                for J in all_subsets(f):
                    self.assertEqual(all_j_sets(p, f, r, J), j_sets_for_h(p, f, r, h_of_J(p, f, r, J)))


if __name__ == "__main__":
    unittest.main()
