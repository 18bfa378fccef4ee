from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path


SETTINGS_ENV = "KISIN_SETTINGS_PATH"
MAX_F_ENV = "KW_MAX_F"


@dataclass(slots=True)
class KisinConfig:
    # 2^f subset enumerations refuse larger f
    max_f: int = 24
    # 0 means p**2
    default_trunc: int = 0

    seed: int = 0
    workers: int = 1
    samples_per_config: int = 500
    min_configs: int = 50

    log_level: str = "INFO"

    def trunc_for(self, p: int) -> int:
        if self.default_trunc > 0:
            return self.default_trunc
        return p * p


def default_config_path() -> Path:
    return Path.cwd() / "kisinweights.json"


def resolve_config_path() -> Path:
    configured = os.environ.get(SETTINGS_ENV, "").strip()
    if configured:
        return Path(configured)
    return default_config_path()


def load_config(path: Path | None = None) -> KisinConfig:
    path = path or resolve_config_path()
    if not path.exists():
        return KisinConfig()

    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except Exception:
        return KisinConfig()
    if not isinstance(data, dict):
        return KisinConfig()

    config = KisinConfig()
    for key, value in data.items():
        if hasattr(config, key):
            setattr(config, key, value)
    return config


def save_config(path: Path, config: KisinConfig) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(asdict(config), ensure_ascii=False, indent=2),
        encoding="utf-8",
    )


def enumeration_limit(config: KisinConfig | None = None) -> int:
    configured = os.environ.get(MAX_F_ENV, "").strip()
    if configured:
        try:
            return int(configured)
        except ValueError:
            pass
    if config is None:
        return KisinConfig().max_f
    return int(config.max_f)
