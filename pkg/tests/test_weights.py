from __future__ import annotations

import itertools
import unittest

from kisinweights.algebra import get_field
from kisinweights.combinat import all_subsets
from kisinweights.errors import DomainError
from kisinweights.extension import ExtensionType, constituents
from kisinweights.rankone import RankOneModule, inertial_exponent, twist
from kisinweights.weights import (
    BalancedSubset,
    InertialType,
    SerreWeight,
    bdj_inertial,
    bdj_niveau1,
    bdj_niveau2,
    crystalline_ext_dimension,
    hodge_type,
    is_balanced,
    rebalance,
    twist_exponent,
    weight_characters,
    weight_equivalent,
    weights_list,
)


def _weight(*pairs: tuple[int, int]) -> SerreWeight:
    return SerreWeight(pairs)


def _weights(p: int, f: int, top: int) -> list[SerreWeight]:
    found = []
    for lows in itertools.product(range(top), repeat=f):
        for diffs in itertools.product(range(p), repeat=f):
            found.append(SerreWeight(tuple((a2 + d, a2) for a2, d in zip(lows, diffs))))
    return found


def _pair(p: int, f: int, exps: list[tuple[int, int]], J: frozenset[int]) -> tuple[int, ...]:
    w = SerreWeight(tuple((b1 - 1, b2) for b1, b2 in exps))
    return tuple(sorted(weight_characters(w, p, J, niveau=2)))


class WeightTests(unittest.TestCase):
    def test_equivalence_examples(self) -> None:
        w = _weight((1, 0))
        self.assertTrue(weight_equivalent(w, w, 3, 1))
        self.assertTrue(weight_equivalent(w, _weight((3, 2)), 3, 1))
        # det is nontrivial on GL_2(F_3)
        self.assertFalse(weight_equivalent(w, _weight((2, 1)), 3, 1))
        self.assertFalse(weight_equivalent(w, _weight((1, 1)), 3, 1))

    def test_invalid_weights_are_rejected(self) -> None:
        with self.assertRaises(DomainError):
            weight_equivalent(_weight((3, 0)), _weight((1, 0)), 3, 1)
        with self.assertRaises(DomainError):
            _weight((0, 1)).validate(5)
        with self.assertRaises(DomainError):
            weight_equivalent(_weight((1, 0)), _weight((1, 0)), 3, 2)

    def test_hodge_type_examples(self) -> None:
        self.assertEqual(hodge_type(_weight((0, 0), (0, 0))), ((1, 0), (1, 0)))
        self.assertEqual(hodge_type(_weight((1, 0), (2, 0))), ((2, 0), (3, 0)))
        self.assertEqual(hodge_type(_weight((4, 0))), ((5, 0),))

    def test_equivalent_weights_share_differences(self) -> None:
        weights = _weights(3, 2, 4)
        for w1 in weights:
            for w2 in weights:
                if weight_equivalent(w1, w2, 3, 2):
                    self.assertEqual(w1.differences(), w2.differences())
                    self.assertTrue(weight_equivalent(w2, w1, 3, 2))


class InertialTypeTests(unittest.TestCase):
    def test_exponents_are_reduced(self) -> None:
        t = InertialType(3, 1, 1, (5, 2))
        self.assertEqual(t.exponents, (1, 0))
        self.assertEqual(t.key(), (0, 1))
        self.assertTrue(t.reducible)

    def test_niveau_two_needs_a_conjugate_pair(self) -> None:
        self.assertFalse(InertialType(3, 1, 2, (2, 6)).reducible)
        with self.assertRaises(DomainError):
            InertialType(3, 1, 2, (1, 2))
        with self.assertRaises(DomainError):
            InertialType(3, 1, 2, (4, 4))
        with self.assertRaises(DomainError):
            InertialType(3, 1, 3, (0, 0))

    def test_balanced_subsets(self) -> None:
        self.assertTrue(is_balanced({0, 3}, 2))
        self.assertFalse(is_balanced({0, 2}, 2))
        self.assertFalse(is_balanced({0, 4}, 2))
        with self.assertRaises(DomainError):
            BalancedSubset(2, frozenset({1, 3}))


class BdjTests(unittest.TestCase):
    def test_niveau_one_examples(self) -> None:
        result = bdj_niveau1(InertialType(3, 1, 1, (2, 0)), _weight((1, 0)))
        self.assertTrue(result.member)
        self.assertEqual(result.witnesses, (frozenset(), frozenset({0})))
        trivial = bdj_niveau1(InertialType(3, 1, 1, (0, 0)), _weight((1, 0)))
        self.assertEqual(trivial.witnesses, (frozenset(), frozenset({0})))

    def test_determinant_obstruction(self) -> None:
        result = bdj_niveau1(InertialType(5, 1, 1, (1, 0)), _weight((1, 0)))
        self.assertFalse(result.member)
        self.assertEqual(result.witnesses, ())

    def test_niveau_two_example(self) -> None:
        result = bdj_niveau2(InertialType(3, 1, 2, (2, 6)), _weight((1, 0)))
        self.assertTrue(result.member)
        self.assertEqual(result.witnesses, (frozenset({0}), frozenset({1})))
        for J in result.witnesses:
            self.assertTrue(is_balanced(J, 1))

    def test_niveau_mismatch(self) -> None:
        with self.assertRaises(DomainError):
            bdj_niveau1(InertialType(3, 1, 2, (2, 6)), _weight((1, 0)))
        with self.assertRaises(DomainError):
            bdj_niveau2(InertialType(3, 1, 1, (2, 0)), _weight((1, 0)))
        with self.assertRaises(DomainError):
            bdj_niveau1(InertialType(3, 1, 1, (2, 0)), _weight((3, 0)))

    def test_inertial_membership_flags_non_split(self) -> None:
        t, w = InertialType(3, 1, 1, (2, 0)), _weight((1, 0))
        self.assertTrue(bdj_inertial(t, w).exact)
        loose = bdj_inertial(t, w, split=False)
        self.assertFalse(loose.exact)
        self.assertEqual(loose.witnesses, bdj_niveau1(t, w).witnesses)
        self.assertTrue(bdj_inertial(InertialType(3, 1, 2, (2, 6)), w, split=False).exact)

    def test_membership_depends_on_the_weight_class(self) -> None:
        for p, f in ((3, 1), (3, 2), (5, 1)):
            weights = _weights(p, f, p + 1)
            order = p**f - 1
            types = [InertialType(p, f, 1, (e1, e2)) for e1 in range(order) for e2 in range(e1, order)]
            for w1, w2 in itertools.combinations(weights, 2):
                if not weight_equivalent(w1, w2, p, f):
                    continue
                for t in types:
                    self.assertEqual(bdj_niveau1(t, w1), bdj_niveau1(t, w2))

    def test_witnesses_match_rank_one_characters(self) -> None:
        for p, f in ((3, 1), (3, 2), (5, 2)):
            one = get_field(p).one
            for w in _weights(p, f, p):
                k = twist_exponent(w, p)
                for J in all_subsets(f):
                    r = [a1 + 1 - a2 for a1, a2 in w.pairs]
                    first = RankOneModule(p, f, tuple(x if i in J else 0 for i, x in enumerate(r)), one)
                    second = RankOneModule(p, f, tuple(0 if i in J else x for i, x in enumerate(r)), one)
                    exponents = tuple(inertial_exponent(twist(m, k)).exponent for m in (first, second))
                    t = InertialType(p, f, 1, exponents)
                    self.assertIn(J, bdj_niveau1(t, w).witnesses)

    def test_extension_constituents_are_predicted(self) -> None:
        for p, f in ((3, 2), (5, 2)):
            one = get_field(p).one
            for r in itertools.product(range(1, p + 1), repeat=f):
                w = SerreWeight(tuple((x - 1, 0) for x in r))
                for J in all_subsets(f):
                    sub, quotient = constituents(ExtensionType(p, f, r, J, one, one))
                    t = InertialType(p, f, 1, (quotient.exponent(), sub.exponent()))
                    self.assertIn(J, bdj_niveau1(t, w).witnesses)

    def test_weights_list(self) -> None:
        t = InertialType(3, 1, 1, (2, 0))
        found = weights_list(t)
        self.assertIn(_weight((1, 0)), [w for w, _ in found])
        self.assertEqual([w.pairs for w, _ in found], sorted(w.pairs for w, _ in found))
        for w, result in found:
            self.assertTrue(result.member)
            self.assertNotEqual(w.pairs, ((2, 2),))


class RebalanceTests(unittest.TestCase):
    def test_worked_example(self) -> None:
        for p in (3, 5, 7):
            for b in (1, p - 1):
                exps = [(1, 0), (p - 1, 0), (p, 0), (b, 0)]
                J = frozenset({1, 2, 3, 5, 6})
                balanced = rebalance(p, 4, exps, J)
                self.assertEqual(balanced.J, frozenset({1, 2, 3, 4}))
                self.assertEqual(_pair(p, 4, exps, balanced.J), _pair(p, 4, exps, J))

    def test_balanced_input_is_kept(self) -> None:
        exps = [(1, 0), (1, 0)]
        self.assertEqual(rebalance(3, 2, exps, {0, 3}).J, frozenset({0, 3}))

    def test_rejects_bad_inputs(self) -> None:
        with self.assertRaises(DomainError):
            rebalance(3, 1, [(0, 0)], {0})
        with self.assertRaises(DomainError):
            rebalance(3, 2, [(1, 0), (1, 0)], set())
        with self.assertRaises(DomainError):
            rebalance(3, 2, [(1, 0), (1, 0)], {4})
        with self.assertRaises(DomainError):
            rebalance(3, 2, [(1, 0)], {0})

    def test_string_wrapping_past_the_last_embedding(self) -> None:
        exps = [(3, 0), (1, 0), (1, 0)]
        J = frozenset({0, 1, 3})
        result = rebalance(3, 3, exps, J)
        self.assertEqual(result.J, frozenset({1, 3, 5}))
        self.assertEqual(_pair(3, 3, exps, result.J), _pair(3, 3, exps, J))

    def test_exhaustive_small_cases(self) -> None:
        for p, f in ((3, 1), (3, 2), (5, 2), (3, 3), (5, 3)):
            order = p ** (2 * f) - 1
            for diffs in itertools.product(range(1, p + 1), repeat=f):
                exps = [(d, 0) for d in diffs]
                balanced_pairs = {_pair(p, f, exps, J) for J in all_subsets(2 * f) if is_balanced(J, f)}
                for J in all_subsets(2 * f):
                    e1, e2 = _pair(p, f, exps, J)
                    irreducible = e1 != e2 and ((e1 * p**f - e2) % order == 0 or (e2 * p**f - e1) % order == 0)
                    if not irreducible:
                        continue
                    result = rebalance(p, f, exps, J)
                    self.assertTrue(is_balanced(result.J, f))
                    self.assertEqual(_pair(p, f, exps, result.J), (e1, e2), (p, exps, sorted(J)))
                    self.assertIn((e1, e2), balanced_pairs)


class DimensionTests(unittest.TestCase):
    def test_recorded_formula(self) -> None:
        self.assertEqual(crystalline_ext_dimension(set(), False), 0)
        self.assertEqual(crystalline_ext_dimension({0, 1}, True), 3)
        self.assertEqual(crystalline_ext_dimension(range(4), False), 4)


if __name__ == "__main__":
    unittest.main()
