"""Run configuration: defaults < key=value config file < command-line flags."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .latent import DEFAULT_CONCEPTS
from .secure_knn import R_MAX, T_MAX


@dataclass(frozen=True)
class RunConfig:
    n1: int = DEFAULT_CONCEPTS
    n2: int = 100
    k: int = 10
    r_max: float = R_MAX
    t_max: float = T_MAX
    seed: int | None = None
    corpus: str | None = None
    corpus_format: str = "jsonl"
    embeddings: str | None = None
    key: str | None = None
    index: str | None = None
    bundle: str | None = None
    payloads: str | None = None
    trapdoor: str | None = None
    queries: str | None = None
    queries_format: str = "jsonl"
    queries_renumber: bool = False
    qrels: str | None = None

    def __post_init__(self):
        if self.n1 < 1:
            raise ValueError(f"n1 must be >= 1, got {self.n1}")
        if self.n2 < 0:
            raise ValueError(f"n2 must be >= 0, got {self.n2}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.r_max > 0 or self.t_max < 0:
            raise ValueError("r_max must be positive and t_max non-negative")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError("missing required setting(s): " + ", ".join(missing))

    def merged(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELDS[name].type
    if "bool" in kind:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {raw!r}")
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key=value")
        name, raw = (s.strip() for s in line.split("=", 1))
        name = name.replace("-", "_")
        if name not in _FIELDS:
            raise ValueError(f"{source}:{lineno}: unknown setting {name!r}")
        values[name] = _coerce(name, raw)
    return values


def load_config(path=None, **overrides) -> RunConfig:
    base = {}
    if path is not None:
        base = parse_config_text(Path(path).read_text(), str(path))
    base.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**base)
