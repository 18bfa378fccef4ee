from __future__ import annotations

import os
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import mock

from kisinweights.config import (
    MAX_F_ENV,
    SETTINGS_ENV,
    KisinConfig,
    enumeration_limit,
    load_config,
    resolve_config_path,
    save_config,
)


class ConfigTests(unittest.TestCase):
    def test_save_and_load_round_trip(self) -> None:
        with TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "nested" / "kisinweights.json"
            config = KisinConfig(max_f=6, default_trunc=16, seed=42, workers=3, samples_per_config=20, log_level="DEBUG")

            save_config(config_path, config)
            loaded = load_config(config_path)

            self.assertEqual(loaded, config)
            self.assertEqual(loaded.trunc_for(3), 16)

    def test_missing_or_broken_files_give_defaults(self) -> None:
        with TemporaryDirectory() as tmp:
            root = Path(tmp)
            self.assertEqual(load_config(root / "absent.json"), KisinConfig())
            (root / "broken.json").write_text("{not json", encoding="utf-8")
            self.assertEqual(load_config(root / "broken.json"), KisinConfig())
            (root / "list.json").write_text("[1, 2]", encoding="utf-8")
            self.assertEqual(load_config(root / "list.json"), KisinConfig())

    def test_unknown_keys_are_ignored(self) -> None:
        with TemporaryDirectory() as tmp:
            path = Path(tmp) / "settings.json"
            path.write_text('{"seed": 9, "theme": "dark"}', encoding="utf-8")
            loaded = load_config(path)
            self.assertEqual(loaded.seed, 9)
            self.assertFalse(hasattr(loaded, "theme"))

    def test_default_truncation_is_p_squared(self) -> None:
        self.assertEqual(KisinConfig().trunc_for(5), 25)

    def test_settings_path_from_environment(self) -> None:
        with TemporaryDirectory() as tmp:
            target = Path(tmp) / "custom.json"
            with mock.patch.dict(os.environ, {SETTINGS_ENV: str(target)}):
                self.assertEqual(resolve_config_path(), target)
            with mock.patch.dict(os.environ, {SETTINGS_ENV: "  "}):
                self.assertEqual(resolve_config_path().name, "kisinweights.json")

    def test_enumeration_limit(self) -> None:
        with mock.patch.dict(os.environ, {MAX_F_ENV: ""}):
            self.assertEqual(enumeration_limit(), 24)
            self.assertEqual(enumeration_limit(KisinConfig(max_f=5)), 5)
        with mock.patch.dict(os.environ, {MAX_F_ENV: "30"}):
            self.assertEqual(enumeration_limit(KisinConfig(max_f=5)), 30)
        with mock.patch.dict(os.environ, {MAX_F_ENV: "many"}):
            self.assertEqual(enumeration_limit(KisinConfig(max_f=5)), 5)


if __name__ == "__main__":
    unittest.main()
