"""Run configuration: a flat key=value file plus command-line overrides."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .analysis.kernel import G_TAGS
from .analysis.window import WINDOWS
from .eigenform import SUPPORTED_WEIGHTS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    weight: int = 12
    ell: int = 1
    alpha_re: float = 0.0
    alpha_im: float = 0.0
    x_grid: tuple[float, ...] = (250.0, 500.0, 1000.0, 2000.0)
    window: str = "bump"
    g_variant: str = "unit"
    prime_cutoff: int = 10**6
    accel_depth: int = 1
    workers: int = 1
    cache_dir: str = ""
    out: str = ""
    seed: int = 0
    derivative: bool = False
    n_max: int = 0  # 0 means "derive from the other settings"

    def __post_init__(self):
        if self.weight not in SUPPORTED_WEIGHTS:
            raise ConfigError(f"unsupported weight {self.weight}; supported: {SUPPORTED_WEIGHTS}")
        if self.ell < 1 or self.ell % 2 == 0:
            raise ConfigError("ell must be odd and positive")
        if self.window not in WINDOWS:
            raise ConfigError(f"unknown window {self.window!r}")
        if self.g_variant not in G_TAGS:
            raise ConfigError(f"unknown G variant {self.g_variant!r}")
        if self.prime_cutoff < 3 or self.accel_depth < 0 or self.workers < 1 or self.n_max < 0:
            raise ConfigError("prime_cutoff >= 3, accel_depth >= 0, workers >= 1, n_max >= 0 required")
        if any(x <= 0 for x in self.x_grid) or list(self.x_grid) != sorted(set(self.x_grid)):
            raise ConfigError("x_grid must be positive and strictly increasing")

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    def emit(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    def updated(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if kind.startswith("tuple"):
            return parse_grid(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_grid(raw: str) -> tuple[float, ...]:
    parts = [p for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty X grid")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad X grid {raw!r}") from exc


def parse(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return replace(base or RunConfig(), **values)


def load(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
