"""Flat, typed ``key = value`` experiment configuration.

One setting per line, ``#`` starts a comment.  Keys are dotted paths into the
sections ``train``, ``data``, ``metrics`` and ``run``; every key has a default,
and the resolved copy written next to the results lists all of them, so a
results directory always records the exact settings that produced it.

Example::

    train.method = ebgan
    train.c1 = 2
    train.disc_hidden = 128
    data.n_per_component = 200
    run.seeds = 0, 1, 2
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable

from .data import LatentSpec, MixtureSpec
from .numerics import ParameterError
from .objectives import PhiKind, PriorSpec
from .samplers import StepSchedule
from .trainer import TrainConfig


class ConfigError(ParameterError):
    """Invalid configuration; ``path`` names the offending key."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass(frozen=True)
class MetricSpec:
    min_fraction: float = 0.02
    radius_quantile: float = 0.95
    fake_per_generator: int = 1000
    window_lo: int = 1500
    window_hi: int = 2500
    band_lo: float = 0.45
    band_hi: float = 0.55

    def __post_init__(self):
        if not 0 < self.min_fraction < 1 or not 0 < self.radius_quantile < 1:
            raise ParameterError("min_fraction and radius_quantile must lie in (0, 1)")
        if self.fake_per_generator < 1:
            raise ParameterError("fake_per_generator must be >= 1")
        if self.window_lo > self.window_hi:
            raise ParameterError("window_lo must not exceed window_hi")
        if self.band_lo > self.band_hi:
            raise ParameterError("band_lo must not exceed band_hi")


@dataclass(frozen=True)
class ExperimentConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    data: MixtureSpec = field(default_factory=MixtureSpec)
    metrics: MetricSpec = field(default_factory=MetricSpec)
    seeds: tuple[int, ...] = (0,)
    out_dir: str = "results"

    def train_for_seed(self, seed: int) -> TrainConfig:
        return replace(self.train, seed=seed)


# ---- value codecs -------------------------------------------------------------

def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _int(s: str) -> int:
    v = float(s) if any(c in s for c in ".eE") else int(s)
    if int(v) != v:
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _ints(s: str) -> tuple[int, ...]:
    parts = [p for p in s.replace(",", " ").split() if p]
    return tuple(_int(p) for p in parts)


def _str(s: str) -> str:
    return s.strip()


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(str(x) for x in v)
    if isinstance(v, PhiKind):
        return v.value
    return str(v)


# key -> (parser, getter from ExperimentConfig)
_Getter = Callable[[ExperimentConfig], Any]
_TRAIN_SCALARS = {
    "method": _str, "J_g": _int, "n": _int, "iterations": _int, "phi3": _str,
    "eps": float, "eps_t0": float, "eps_decay": float, "eps_per_datum": _bool,
    "alpha": float, "rho": float, "tau": float, "disc_hidden": _ints, "gen_hidden": _ints,
    "gen_output": _str, "init_std": float, "init_scheme": _str, "shared_z": _bool, "standardize": _bool,
    "disc_lr": float, "gen_lr": float, "adam_beta1": float, "adam_beta2": float,
    "metric_every": _int, "eval_size": _int,
}
_TRAIN_NESTED = {
    "c1": (float, "sched", "c1"), "c2": (float, "sched", "c2"), "zeta1": (float, "sched", "zeta1"),
    "prior_zeta2": (float, "prior", "zeta2"),
    "d_z": (_int, "latent", "d_z"), "latent_distribution": (_str, "latent", "distribution"),
}
_SECTIONS = {
    "data": (MixtureSpec, {f.name: (float if f.type in ("float", float) else _int) for f in fields(MixtureSpec)}),
    "metrics": (MetricSpec, {f.name: (float if f.type in ("float", float) else _int) for f in fields(MetricSpec)}),
}


def _schema() -> dict[str, Any]:
    keys: dict[str, Any] = {}
    for name, parse in _TRAIN_SCALARS.items():
        if any(f.name == name for f in fields(TrainConfig)):
            keys[f"train.{name}"] = parse
    for name, (parse, _, _) in _TRAIN_NESTED.items():
        keys[f"train.{name}"] = parse
    for sec, (_, parsers) in _SECTIONS.items():
        for name, parse in parsers.items():
            keys[f"{sec}.{name}"] = parse
    keys["run.seeds"] = _ints
    keys["run.out_dir"] = _str
    return keys


SCHEMA = _schema()


def to_flat(cfg: ExperimentConfig) -> dict[str, str]:
    """Every schema key with its value as text, in schema order."""
    out: dict[str, str] = {}
    for key in SCHEMA:
        sec, name = key.split(".", 1)
        if sec == "train":
            if name in _TRAIN_NESTED:
                _, obj, attr = _TRAIN_NESTED[name]
                v = getattr(getattr(cfg.train, obj), attr)
            else:
                v = getattr(cfg.train, name)
        elif sec == "run":
            v = cfg.seeds if name == "seeds" else cfg.out_dir
        else:
            v = getattr(getattr(cfg, sec), name)
        out[key] = _fmt(v)
    return out


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {line.strip()!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, f"unknown key ({source}:{lineno})")
        if key in raw:
            raise ConfigError(key, f"set twice ({source}:{lineno})")
        raw[key] = value
    return raw


def build(overrides: dict[str, str]) -> ExperimentConfig:
    """Apply textual overrides to the defaults; every value and section is validated."""
    flat = to_flat(ExperimentConfig())
    for key, value in overrides.items():
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key")
        flat[key] = value
    typed: dict[str, Any] = {}
    for key, text in flat.items():
        try:
            typed[key] = SCHEMA[key](text)
        except ValueError as e:
            raise ConfigError(key, str(e)) from None

    def section(prefix: str) -> dict[str, Any]:
        return {k.split(".", 1)[1]: v for k, v in typed.items() if k.startswith(prefix + ".")}

    tr = section("train")
    nested: dict[str, dict[str, Any]] = {"sched": {}, "prior": {}, "latent": {}}
    for name, (_, obj, attr) in _TRAIN_NESTED.items():
        nested[obj][attr] = tr.pop(name)
    parts: dict[str, Any] = {}
    for obj, cls in (("sched", StepSchedule), ("prior", PriorSpec), ("latent", LatentSpec)):
        keys = {attr: name for name, (_, o, attr) in _TRAIN_NESTED.items() if o == obj}
        parts[obj] = _construct(cls, nested[obj], "train", keys)
    train_cfg = _construct(TrainConfig, {**tr, **parts}, "train")
    sections = {sec: _construct(cls, section(sec), sec) for sec, (cls, _) in _SECTIONS.items()}
    run = section("run")
    if not run["seeds"]:
        raise ConfigError("run.seeds", "at least one seed required")
    if not run["out_dir"]:
        raise ConfigError("run.out_dir", "must not be empty")
    return ExperimentConfig(train_cfg, sections["data"], sections["metrics"], run["seeds"], run["out_dir"])


def _construct(cls, kwargs: dict[str, Any], prefix: str, keys: dict[str, str] | None = None):
    try:
        return cls(**kwargs)
    except (ParameterError, ValueError) as e:
        msg = str(e)
        # constructors name the offending field in their message; turn that into a path
        names = sorted((n for n in kwargs if msg.startswith(n + " ") or f" {n}=" in msg or f"{n} " in msg),
                       key=len, reverse=True)
        if not names and len(kwargs) == 1:
            names = list(kwargs)
        if not names:
            raise ConfigError(prefix, msg) from None
        key = (keys or {}).get(names[0], names[0])
        raise ConfigError(f"{prefix}.{key}", msg) from None


def loads(text: str, source: str = "<config>") -> ExperimentConfig:
    return build(parse_text(text, source))


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as f:
        return loads(f.read(), str(path))


def dumps(cfg: ExperimentConfig) -> str:
    lines = ["# resolved experiment configuration (all keys, defaults included)"]
    lines += [f"{k} = {v}" for k, v in to_flat(cfg).items()]
    return "\n".join(lines) + "\n"


def dump(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(cfg))
