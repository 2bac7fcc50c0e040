"""Run configuration: a small key-value config file plus flag overrides.

The file format is one ``key = value`` pair per line, ``#`` comments allowed.
Relative paths resolve against the config file's directory.  The canonical
serialization of the effective configuration is hashed into run metadata so
reports are traceable to their exact settings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError

_VALID_CUTOFFS = ("none", "threshold", "topk", "kmeans", "ideal")
_VALID_COMBINES = ("replace", "min", "max", "mean")


@dataclass(frozen=True)
class ScorerSpec:
    """Either a native rule scorer (``native:<hops>``) or an external score
    dump (``external:<path>``)."""

    kind: str
    hops: int = 0
    path: Path | None = None

    @classmethod
    def parse(cls, text: str, base: Path) -> "ScorerSpec":
        kind, _, arg = text.partition(":")
        if kind == "native":
            try:
                hops = int(arg)
            except ValueError:
                raise ConfigError(f"bad native scorer spec {text!r}") from None
            if hops not in (1, 2, 3):
                raise ConfigError(f"native scorer hops must be 1, 2 or 3 (got {hops})")
            return cls("native", hops=hops)
        if kind == "external":
            if not arg:
                raise ConfigError(f"external scorer spec {text!r} needs a path")
            return cls("external", path=_resolve(arg, base))
        raise ConfigError(f"unknown scorer spec {text!r}; use native:<hops> or external:<path>")

    def describe(self) -> str:
        if self.kind == "native":
            return f"native:{self.hops}"
        return f"external:{self.path}"


def _resolve(value: str, base: Path) -> Path:
    path = Path(value)
    return path if path.is_absolute() else (base / path)


@dataclass(frozen=True)
class RunConfig:
    train: Path | None = None
    inference: Path | None = None
    test: Path | None = None
    dev: Path | None = None
    retriever: ScorerSpec = ScorerSpec("native", hops=2)
    reranker: ScorerSpec = ScorerSpec("native", hops=3)
    cutoff: str = "none"
    cutoff_theta: float | None = None  # fit on dev when absent
    cutoff_k: int = 40
    kmeans_k: int = 5
    kmeans_m: int = 3
    combine: str = "mean"
    combine_weight: float = 0.5
    negatives: int = 49
    seed: int = 0
    workers: int = 1
    out: Path = field(default_factory=lambda: Path("out"))
    min_support: int = 2
    max_paths: int = 100
    default_score: float = 0.0
    filtered: bool = True
    figures: bool = True
    mine_hops: int = 3
    analysis_top_n: int = 10
    analysis_k_values: tuple[int, ...] = (2, 3, 5)
    analysis_n_values: tuple[int, ...] = (10, 100, 1000)
    export_queries: int = 3

    def validate(self) -> None:
        if self.negatives < 1:
            raise ConfigError("negatives must be >= 1")
        if self.mine_hops not in (1, 2, 3):
            raise ConfigError("mine_hops must be 1, 2 or 3")
        if self.cutoff not in _VALID_CUTOFFS:
            raise ConfigError(f"cutoff must be one of {_VALID_CUTOFFS}")
        if self.combine not in _VALID_COMBINES:
            raise ConfigError(f"combine must be one of {_VALID_COMBINES}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.cutoff_theta is not None and not 0.0 <= self.cutoff_theta <= 1.0:
            raise ConfigError("cutoff_theta must lie in [0, 1]")
        if not 0.0 <= self.combine_weight <= 1.0:
            raise ConfigError("combine_weight must lie in [0, 1]")
        if not 0.0 <= self.default_score <= 1.0:
            raise ConfigError("default_score must lie in [0, 1]")
        for name in ("train", "inference", "test", "dev"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"{name} file not found: {path}")
        for spec in (self.retriever, self.reranker):
            if spec.kind == "external" and not Path(spec.path).is_file():
                raise FileNotFoundError(f"external score file not found: {spec.path}")

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"config key {name!r} is required for this command")

    def effective_text(self) -> str:
        """Canonical ``key = value`` serialization of every setting."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, ScorerSpec):
                rendered = value.describe()
            elif isinstance(value, tuple):
                rendered = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            elif value is None:
                rendered = ""
            else:
                rendered = str(value)
            lines.append(f"{f.name} = {rendered}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.effective_text().encode("utf-8")).hexdigest()[:12]


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"bad boolean for {key!r}: {value!r}")


def _parse_int_tuple(value: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad integer list for {key!r}: {value!r}") from None


def parse_config_text(text: str, base: Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        pairs = parse_config_text(fh.read(), path.parent)
    return config_from_pairs(pairs, path.parent)


def config_from_pairs(pairs: dict[str, str], base: Path) -> RunConfig:
    config = RunConfig()
    updates: dict[str, object] = {}
    for key, value in pairs.items():
        if key in ("train", "inference", "test", "dev", "out"):
            updates[key] = _resolve(value, base)
        elif key in ("retriever", "reranker"):
            updates[key] = ScorerSpec.parse(value, base)
        elif key in ("cutoff", "combine"):
            updates[key] = value
        elif key in (
            "cutoff_k",
            "kmeans_k",
            "kmeans_m",
            "negatives",
            "seed",
            "workers",
            "min_support",
            "max_paths",
            "mine_hops",
            "analysis_top_n",
            "export_queries",
        ):
            try:
                updates[key] = int(value)
            except ValueError:
                raise ConfigError(f"bad integer for {key!r}: {value!r}") from None
        elif key in ("cutoff_theta", "combine_weight", "default_score"):
            try:
                updates[key] = float(value)
            except ValueError:
                raise ConfigError(f"bad float for {key!r}: {value!r}") from None
        elif key in ("filtered", "figures"):
            updates[key] = _parse_bool(value, key)
        elif key in ("analysis_k_values", "analysis_n_values"):
            updates[key] = _parse_int_tuple(value, key)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return replace(config, **updates)
