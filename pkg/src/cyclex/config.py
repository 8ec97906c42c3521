"""Run configuration: a key = value text file, every key overridable from the CLI."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .corpus import ElementPaths
from .expander import TABLE4_CONFIGS, ExpansionConfig
from .retrieval import DEFAULT_R

PATH_KEYS = ("nodes", "edges", "corpus", "queries", "output")


class ConfigError(ValueError):
    pass


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def parse_lengths(text: str) -> tuple[tuple[int, ...], ...]:
    """``2;3;2,3`` -> ((2,), (3,), (2, 3))."""
    groups = tuple(parse_int_list(g) for g in text.split(";") if g.strip())
    for g in groups:
        if not g or any(n < 2 for n in g):
            raise ConfigError(f"bad cycle length group {g!r}")
    return groups


@dataclass
class RunConfig:
    nodes: Path | None = None
    edges: Path | None = None
    corpus: Path | None = None
    queries: Path | None = None
    output: Path = Path("out")
    xml_name: str = ElementPaths.name
    xml_english: str = ElementPaths.english
    xml_comment: str = ElementPaths.comment
    r_values: tuple[int, ...] = DEFAULT_R
    rng_seed: int = 42
    restarts: int = 1
    max_len: int = 5
    lengths: tuple[tuple[int, ...], ...] = TABLE4_CONFIGS
    min_category_ratio: float = 0.0
    min_density: float = 0.0
    threads: int = field(default_factory=lambda: int(os.environ.get("CYCLEX_THREADS", "1") or 1))

    @property
    def element_paths(self) -> ElementPaths:
        return ElementPaths(self.xml_name, self.xml_english, self.xml_comment)

    def expansion_configs(self) -> list[ExpansionConfig]:
        return [ExpansionConfig(g, self.min_category_ratio, self.min_density) for g in self.lengths]

    def set(self, key: str, value: str, base: Path | None = None) -> None:
        key = key.strip().replace("-", "_")
        if key == "r":
            key = "r_values"
        names = {f.name for f in fields(self)}
        if key not in names:
            raise ConfigError(f"unknown config key {key!r}")
        value = value.strip()
        if key in PATH_KEYS:
            p = Path(value)
            if base is not None and not p.is_absolute():
                p = base / p
            setattr(self, key, p)
        elif key in ("rng_seed", "restarts", "max_len", "threads"):
            try:
                setattr(self, key, int(value))
            except ValueError:
                raise ConfigError(f"{key} must be an integer") from None
        elif key in ("min_category_ratio", "min_density"):
            try:
                setattr(self, key, float(value))
            except ValueError:
                raise ConfigError(f"{key} must be a number") from None
        elif key == "r_values":
            self.r_values = parse_int_list(value)
        elif key == "lengths":
            self.lengths = parse_lengths(value)
        else:
            setattr(self, key, value)

    def validate(self) -> None:
        if self.max_len < 2:
            raise ConfigError("max_len must be at least 2")
        if not self.r_values or min(self.r_values) < 1:
            raise ConfigError("r values must be positive")
        for value, name in ((self.min_category_ratio, "min_category_ratio"), (self.min_density, "min_density")):
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")

    def fingerprint(self) -> str:
        text = "\n".join(f"{f.name}={getattr(self, f.name)!s}" for f in fields(self) if f.name != "threads")
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def read_config(path: str | Path, config: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    config = config or RunConfig()
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        config.set(key, value, base=path.parent)
    return config
