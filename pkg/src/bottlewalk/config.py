"""Experiment configuration: INI parsing, validation, overrides, hashing.

One config file drives one experiment.  Sections and keys are whitelisted;
anything unrecognized is a hard error so that typos cannot silently fall
back to defaults.  The effective configuration (after command-line
overrides) is serialized canonically and hashed, and that hash is embedded
in every report the run produces.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

from .errors import ConfigError
from .fixtures import get_fixture
from .graphs import DEFAULT_VERTEX_BUDGET, ParadigmParams
from .harness import AnalysisParams
from .exact import EXACT_VERTEX_BUDGET
from .mc import RngConfig

_SCHEMA: dict[str, tuple[str, ...]] = {
    "paradigm": (
        "fixture", "paradigm", "k", "growth", "tree_mass", "core_depth",
        "core_lines", "copies", "core_size", "s_exp", "p_exp", "t_exp",
        "family", "vertex_budget",
    ),
    "walk": ("laziness",),
    "analysis": ("epsilon", "gamma", "delta", "slack", "return_law_scale", "exact_budget"),
    "mc": ("samples", "seed", "threads", "step_cap", "backend"),
    "output": ("directory", "prefix"),
}


@dataclass
class ExperimentConfig:
    """Validated settings for one run, plus the raw values they came from."""

    fixture: str | None = None
    paradigm: int | None = None
    params: ParadigmParams | None = None
    family: list[int] | None = None
    laziness: float = 0.5
    analysis: AnalysisParams = field(default_factory=AnalysisParams)
    exact_budget: int = EXACT_VERTEX_BUDGET
    samples: int = 10_000
    rng: RngConfig = field(default_factory=RngConfig)
    step_cap: int | None = None
    directory: str = "out"
    prefix: str = "run"
    values: dict[str, str] = field(default_factory=dict)

    def hash(self) -> str:
        """sha256 over the canonical key=value lines of the effective config."""
        lines = [f"{key}={self.values[key]}" for key in sorted(self.values)]
        return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def _parse_growth(text: str):
    if text in ("scaled", "doubling"):
        return text
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ConfigError(
            f"paradigm.growth must be 'scaled', 'doubling' or comma-separated "
            f"integers, got {text!r}"
        ) from None


def _convert(key: str, text: str, kind):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def _int_list(key: str, text: str) -> list[int]:
    return [_convert(key, tok.strip(), int) for tok in text.split(",") if tok.strip()]


def read_ini(path) -> dict[str, str]:
    """Flatten an INI file into 'section.key' -> raw string, validating names."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except configparser.Error as err:
        raise ConfigError(f"malformed config {path}: {err}") from None
    values: dict[str, str] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            values[f"{section}.{key}"] = raw.strip()
    return values


def apply_overrides(values: dict[str, str], overrides) -> dict[str, str]:
    """Apply 'section.key=value' pairs on top of file values."""
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        key, _, val = item.partition("=")
        key = key.strip()
        section, _, name = key.partition(".")
        if section not in _SCHEMA or name not in _SCHEMA.get(section, ()):
            raise ConfigError(f"unknown config key {key}")
        out[key] = val.strip()
    return out


def _require_range(key: str, value, lo, hi, *, lo_open=False, hi_open=False):
    ok_lo = value > lo if lo_open else value >= lo
    ok_hi = value < hi if hi_open else value <= hi
    if not (ok_lo and ok_hi):
        raise ConfigError(f"{key}={value} outside the documented range")
    return value


def from_values(values: dict[str, str]) -> ExperimentConfig:
    """Build a validated ExperimentConfig from flattened raw values."""
    cfg = ExperimentConfig(values=dict(values))

    def get(key, kind, default=None):
        if key not in values:
            return default
        if kind is bool:
            return values[key].lower() in ("1", "true", "yes", "on")
        return _convert(key, values[key], kind)

    cfg.fixture = values.get("paradigm.fixture")
    cfg.paradigm = get("paradigm.paradigm", int)
    cfg.family = (
        _int_list("paradigm.family", values["paradigm.family"])
        if "paradigm.family" in values
        else None
    )
    if cfg.fixture is not None:
        fx = get_fixture(cfg.fixture)  # unknown names fail here
        cfg.laziness = fx.laziness
        cfg.params = fx.params
        if fx.analysis is not None:
            cfg.analysis = fx.analysis
    if cfg.paradigm is not None:
        if cfg.fixture is not None:
            raise ConfigError("paradigm.fixture and paradigm.paradigm are exclusive")
        if cfg.paradigm not in (1, 2, 3):
            raise ConfigError(f"paradigm.paradigm must be 1, 2 or 3, got {cfg.paradigm}")
        if "paradigm.k" not in values:
            raise ConfigError("paradigm.k is required when paradigm.paradigm is set")
        kwargs = dict(
            k=get("paradigm.k", int),
            growth=_parse_growth(values.get("paradigm.growth", "doubling")),
            tree_mass=get("paradigm.tree_mass", int),
            core_depth=get("paradigm.core_depth", int),
            core_lines=get("paradigm.core_lines", int, 1),
            copies=get("paradigm.copies", int),
            core_size=get("paradigm.core_size", int),
            s_exp=get("paradigm.s_exp", float, 1.0),
            p_exp=get("paradigm.p_exp", float, 0.25),
            t_exp=get("paradigm.t_exp", float, 1.0),
            vertex_budget=get("paradigm.vertex_budget", int, DEFAULT_VERTEX_BUDGET),
        )
        try:
            cfg.params = ParadigmParams(**kwargs)
        except ValueError as err:
            raise ConfigError(str(err)) from None

    if "walk.laziness" in values:
        cfg.laziness = _require_range(
            "walk.laziness", get("walk.laziness", float), 0.0, 1.0, hi_open=True
        )

    base = cfg.analysis
    if cfg.params is not None and cfg.fixture is None:
        base = AnalysisParams(gamma=cfg.params.gamma(), delta=cfg.params.delta())
    epsilon = get("analysis.epsilon", float, base.epsilon)
    if epsilon is not None:
        _require_range("analysis.epsilon", epsilon, 0.0, 1.0, lo_open=True, hi_open=True)
    gamma = get("analysis.gamma", float, base.gamma)
    delta = get("analysis.delta", float, base.delta)
    if gamma <= 0 or delta <= 0:
        raise ConfigError("analysis.gamma and analysis.delta must be positive")
    slack = get("analysis.slack", float, base.slack)
    _require_range("analysis.slack", slack, 0.0, 1.0, lo_open=True)
    cfg.analysis = AnalysisParams(
        epsilon=epsilon,
        gamma=gamma,
        delta=delta,
        return_law_scale=get("analysis.return_law_scale", float, base.return_law_scale),
        s_exp=cfg.params.s_exp if cfg.params is not None else base.s_exp,
        slack=slack,
    )
    cfg.exact_budget = get("analysis.exact_budget", int, EXACT_VERTEX_BUDGET)

    cfg.samples = _require_range("mc.samples", get("mc.samples", int, 10_000), 1, 10**9)
    threads = _require_range("mc.threads", get("mc.threads", int, 1), 1, 4096)
    cfg.rng = RngConfig(
        seed=get("mc.seed", int, 2026),
        threads=threads,
        backend=values.get("mc.backend"),
    )
    cfg.step_cap = get("mc.step_cap", int)

    cfg.directory = values.get("output.directory", "out")
    cfg.prefix = values.get("output.prefix", "run")
    return cfg


def load_config(path, overrides=()) -> ExperimentConfig:
    return from_values(apply_overrides(read_ini(path), overrides))
