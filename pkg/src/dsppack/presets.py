"""Named packing configurations used throughout the experiments."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError
from .packing import PackingConfig, config_from_dict, derive_layout


def int4() -> PackingConfig:
    return derive_layout([4, 4], [4, 4], 3, target="dsp48e2", name="int4")


def int8() -> PackingConfig:
    # one 8-bit activation against two 8-bit weights 18 bits apart
    return derive_layout([8], [8, 8], 2, target="dsp48e2", name="int8")


def intn_6lane() -> PackingConfig:
    # a spans bits 0..17, one bit too many for the signed 18-bit B port
    return derive_layout([4, 4, 4], [3, 3], 0, target="ideal", name="intn-6lane")


def overpack_6lane() -> PackingConfig:
    return derive_layout([4, 4, 4], [5, 5], -2, target="ideal", name="overpack-6lane")


def overpack_4bit(delta: int) -> PackingConfig:
    """Four 4-bit products at stride ``8 + delta`` on the physical block."""
    return derive_layout([4, 4], [4, 4], delta, target="dsp48e2",
                         name=f"fig8-overpack-delta{delta}")


PRESETS = {
    "int4": int4,
    "int8": int8,
    "intn-6lane": intn_6lane,
    "overpack-6lane": overpack_6lane,
    "fig8-overpack-delta-1": lambda: overpack_4bit(-1),
    "fig8-overpack-delta-2": lambda: overpack_4bit(-2),
    "fig8-overpack-delta-3": lambda: overpack_4bit(-3),
}

DENSITY_PRESETS = ("int4", "int8", "intn-6lane", "overpack-6lane")


def preset(name: str) -> PackingConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def load_config(ref: str) -> PackingConfig:
    """A preset name or a path to a JSON configuration document."""
    if ref in PRESETS:
        return preset(ref)
    path = Path(ref)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"no preset or file named {ref!r}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {ref}: {exc}") from None
    cfg = config_from_dict(doc)
    if not cfg.name:
        cfg = replace(cfg, name=path.stem)
    return cfg
