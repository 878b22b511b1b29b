"""Experiment config files: TOML with a strict, documented schema.

Top level:
    experiment = "sample" | "split" | "advantage" | "test" | "hidden"
               | "sweep" | "verdict"
    seed = <int>                      (optional here; CLI --seed overrides)

    [model]      kind plus its parameters (see MODEL_FIELDS)
    [sample]     law = "planted" | "null"
    [split]      kind = "gaussian" (kappa) | "bernoulli" (a, b)
    [advantage]  method, degrees = [..], trials, plus method parameters
    [test]       estimator, kappa / retention, trials_p, trials_q, c,
                 pilot_trials, threshold ("lemma" or a number)
    [hidden]     m, trials, trials_h0, eps_trials, z_threshold
    [sweep]      parameter, values = [..]  (over the [test] block)
    [verdict]    adv_sq, runtime_exponent, dimension, degree,
                 heuristic_constant, type1_accuracy, epsilon,
                 type1_floor, slack

Unknown fields are rejected (UnknownField, with the line and column of the
offending key when it can be located in the source text).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from .errors import ConfigError, UnknownField
from .models import (
    AngularSync, ModelSpec, MultiLayerSBM, OrthSync, PlantedDenseSubgraph,
    PlantedSubmatrix, SBM,
)

EXPERIMENTS = ("sample", "split", "advantage", "test", "hidden", "sweep",
               "verdict")

MODEL_FIELDS = {
    "planted_submatrix": {"n", "lam", "rho"},
    "planted_dense_subgraph": {"n", "rho", "p0", "p1"},
    "sbm": {"n", "q", "d", "lam"},
    "angular_sync": {"n", "L", "lam"},
    "orth_sync": {"n", "d", "lam"},
    "multilayer_sbm": {"n", "q", "L", "rho", "d_layers", "lam_layers"},
}

_SECTION_FIELDS = {
    "model": None,  # validated against MODEL_FIELDS[kind]
    "sample": {"law", "include_latent"},
    "split": {"kind", "kappa", "a", "b", "law"},
    "advantage": {"method", "degrees", "trials"},
    "test": {"estimator", "kappa", "retention", "trials_p", "trials_q", "c",
             "pilot_trials", "threshold"},
    "hidden": {"m", "trials", "trials_h0", "eps_trials", "z_threshold"},
    "sweep": {"parameter", "values"},
    "verdict": {"adv_sq", "runtime_exponent", "dimension", "degree",
                "heuristic_constant", "type1_accuracy", "epsilon",
                "type1_floor", "slack"},
}

_TOP_FIELDS = {"experiment", "seed", "out"} | set(_SECTION_FIELDS)

_SECTIONS_BY_EXPERIMENT = {
    "sample": {"model", "sample"},
    "split": {"model", "sample", "split"},
    "advantage": {"model", "advantage"},
    "test": {"model", "split", "test"},
    "hidden": {"model", "hidden"},
    "sweep": {"model", "split", "test", "sweep"},
    "verdict": {"verdict"},
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    raw_text: str
    sections: dict[str, dict] = field(default_factory=dict)
    out: str | None = None

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def model_spec(self) -> ModelSpec:
        m = dict(self.section("model"))
        kind = m.pop("kind", None)
        classes = {
            "planted_submatrix": PlantedSubmatrix,
            "planted_dense_subgraph": PlantedDenseSubgraph,
            "sbm": SBM,
            "angular_sync": AngularSync,
            "orth_sync": OrthSync,
            "multilayer_sbm": MultiLayerSBM,
        }
        if kind not in classes:
            raise ConfigError(f"model.kind must be one of {sorted(classes)}")
        if kind == "multilayer_sbm":
            m["d_layers"] = tuple(m.get("d_layers", ()))
            m["lam_layers"] = tuple(m.get("lam_layers", ()))
        try:
            return classes[kind](**m)
        except TypeError as exc:
            raise ConfigError(f"bad model parameters: {exc}") from exc


def _locate(text: str, key: str):
    """Best-effort (line, column) of a bare key in the source text."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0]
        idx = stripped.find(key)
        if idx >= 0 and "=" in stripped[idx:]:
            return lineno, idx + 1
    return None, None


def _reject_unknown(text: str, table: dict, allowed: set, where: str):
    for key in table:
        if key not in allowed:
            line, col = _locate(text, key)
            loc = f" (line {line}, column {col})" if line else ""
            raise UnknownField(f"unknown field '{key}' in {where}{loc}")


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc

    _reject_unknown(text, doc, _TOP_FIELDS, "top level")
    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, "
                          f"got {experiment!r}")
    needed = _SECTIONS_BY_EXPERIMENT[experiment]
    sections = {}
    for name, block in doc.items():
        if name in ("experiment", "seed", "out"):
            continue
        if not isinstance(block, dict):
            raise ConfigError(f"'{name}' must be a table")
        if name not in needed:
            raise UnknownField(f"section [{name}] is not used by "
                               f"experiment '{experiment}'")
        if name == "model":
            kind = block.get("kind")
            if kind not in MODEL_FIELDS:
                raise ConfigError(
                    f"model.kind must be one of {sorted(MODEL_FIELDS)}")
            _reject_unknown(text, block, MODEL_FIELDS[kind] | {"kind"},
                            "[model]")
        else:
            _reject_unknown(text, block, _SECTION_FIELDS[name], f"[{name}]")
        sections[name] = dict(block)

    missing = needed - set(sections)
    if missing:
        raise ConfigError(f"experiment '{experiment}' needs sections: "
                          f"{sorted(missing)}")
    _validate_values(experiment, sections)
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    return ExperimentConfig(experiment=experiment, seed=seed, raw_text=text,
                            sections=sections, out=doc.get("out"))


def _require_positive_int(sections, section, key, allow_zero=False):
    if key not in sections.get(section, {}):
        return
    v = sections[section][key]
    lo = 0 if allow_zero else 1
    if not isinstance(v, int) or v < lo:
        raise ConfigError(f"{section}.{key} must be an integer >= {lo}, got {v!r}")


def _validate_values(experiment: str, sections: dict):
    for sec, key in (("advantage", "trials"), ("test", "trials_p"),
                     ("test", "trials_q"), ("hidden", "trials"),
                     ("hidden", "m"), ("hidden", "trials_h0"),
                     ("hidden", "eps_trials"), ("test", "pilot_trials")):
        _require_positive_int(sections, sec, key,
                              allow_zero=key in ("trials_q", "pilot_trials",
                                                 "eps_trials"))
    if "advantage" in sections:
        degrees = sections["advantage"].get("degrees")
        if not isinstance(degrees, list) or not degrees or \
                not all(isinstance(d, int) and d >= 0 for d in degrees):
            raise ConfigError("advantage.degrees must be a nonempty list of "
                              "nonnegative integers")
    if "sweep" in sections:
        values = sections["sweep"].get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values must be a nonempty list")
        if not isinstance(sections["sweep"].get("parameter"), str):
            raise ConfigError("sweep.parameter must be a string")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
