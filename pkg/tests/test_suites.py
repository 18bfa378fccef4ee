from __future__ import annotations

import os
import unittest
from unittest import mock

from kisinweights.config import MAX_F_ENV, KisinConfig
from kisinweights.errors import ResourceError
from kisinweights.suites import SUITES, run_suite

SMALL = {
    "lemma71": {"primes": (3,), "max_f": 2},
    "lemma73": {"primes": (3, 5), "max_f": 2},
    "prop74-reduce": {"primes": (3,), "max_f": 2, "samples": 3, "configs": 6},
    "thm75-counts": {},
    "jmax": {"primes": (3,), "max_f": 2},
    "rebalance": {"primes": (3, 5), "max_f": 2},
    "cross-char": {"primes": (3,), "max_f": 2},
}


class SuiteTests(unittest.TestCase):
    def test_every_suite_passes_at_small_scale(self) -> None:
        self.assertEqual(set(SMALL), set(SUITES))
        for name, overrides in SMALL.items():
            with self.subTest(suite=name):
                events: list[dict[str, object]] = []
                report = run_suite(name, emit=events.append, seed=3, workers=1, **overrides)
                self.assertEqual(set(report), {"suite", "passed", "checked", "counterexamples", "details"})
                self.assertEqual(report["suite"], name)
                self.assertEqual(report["counterexamples"], [])
                self.assertTrue(report["passed"])
                self.assertGreater(report["checked"], 0)
                self.assertEqual(events[0]["event"], "log")
                self.assertEqual(events[-1]["current"], events[-1]["total"])

    def test_lemma71_cross_checks_kernel_counts(self) -> None:
        report = run_suite("lemma71", primes=(3,), max_f=1)
        # 0 and the constant sequences +-2 are the kernel of x -> x mod 2 in [-3, 3]
        self.assertEqual(report["details"], [{"p": 3, "f": 1, "kernel_sequences": 3}])

    def test_thm75_reports_counts(self) -> None:
        report = run_suite("thm75-counts")
        self.assertTrue(report["passed"])
        self.assertEqual(len(report["details"]), 3 * 2 * 4)
        exceptional = [d for d in report["details"] if d["exceptional"]]
        self.assertIn({"r": [2], "J": [0], "a": 1, "b": 1}, [{k: d[k] for k in ("r", "J", "a", "b")} for d in exceptional])
        for detail in exceptional:
            self.assertEqual(detail["a"], detail["b"])
            self.assertEqual(detail["J"], [0] if detail["r"][0] in (2, 3) else [])
        for detail in report["details"]:
            self.assertLessEqual(detail["classes"], detail["bound"])

    def test_prop74_runs_the_oracle_on_every_sample(self) -> None:
        report = run_suite("prop74-reduce", seed=5, primes=(3,), max_f=2, samples=4, configs=5)
        self.assertTrue(report["passed"])
        self.assertEqual(len(report["details"]), 5)
        for detail in report["details"]:
            self.assertEqual(detail["oracle_checked"], detail["samples"])
            self.assertEqual(detail["samples"], 4)

    def test_rebalance_covers_three_embeddings(self) -> None:
        self.assertEqual(SUITES["rebalance"][3], 3)
        report = run_suite("rebalance", primes=(3,), max_f=3)
        self.assertTrue(report["passed"])
        self.assertEqual(report["counterexamples"], [])
        # three worked examples plus the exhaustive f <= 3 sweep
        single = run_suite("rebalance", primes=(3,), max_f=0)
        self.assertEqual(single["checked"], 3)
        self.assertGreater(report["checked"], single["checked"])

    def test_worker_pool_does_not_change_the_report(self) -> None:
        overrides = {"primes": (3,), "max_f": 2, "samples": 2, "configs": 4}
        serial = run_suite("prop74-reduce", seed=11, workers=1, **overrides)
        pooled = run_suite("prop74-reduce", seed=11, workers=2, **overrides)
        self.assertEqual(serial, pooled)

    def test_enumeration_guard(self) -> None:
        with self.assertRaises(ResourceError):
            run_suite("lemma73", config=KisinConfig(max_f=1), primes=(3,), max_f=2)
        with mock.patch.dict(os.environ, {MAX_F_ENV: "1"}):
            with self.assertRaises(ResourceError):
                run_suite("jmax", primes=(3,), max_f=2)


if __name__ == "__main__":
    unittest.main()
