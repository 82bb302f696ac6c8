"""Run configuration: a single versioned JSON document.

The schema is strict: unknown keys are rejected with the offending key
named, every mode carries exactly one of beta or lambda (lambda is
converted once on load) and exactly one of omega or material.  Writing
is canonical (sorted keys, two-space indent, trailing newline) so a
write - read - write cycle is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import KittelMaterial, ModeSpec, lambda_to_beta
from .errors import ConfigError, InvalidSystem, NegativeCoupling
from .sweep import SystemTemplate, TemplateMagnon, ThicknessModel
from .synth import NoiseSpec

SCHEMA_VERSION = 1


def _expect_keys(obj: dict, context: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{context}: expected a key/value table, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {', '.join(map(repr, unknown))}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigError(f"{context}: missing key(s) {', '.join(map(repr, missing))}")


def _number(obj: dict, context: str, key: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{context}: {key!r} must be a finite number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid: count points from start to stop inclusive."""

    start: float
    stop: float
    count: int

    def to_array(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ModeConfig:
    label: str
    alpha: float
    beta: float
    omega: float | None  # fixed-frequency mode (the resonator)
    material: KittelMaterial | None  # field-driven mode (a magnon)


@dataclass(frozen=True)
class FitConfig:
    method: str  # "map" or "branches"
    free: tuple[dict, ...]  # raw parameter entries, resolved by the CLI
    n_ridges: int | None
    min_separation: float | None


@dataclass(frozen=True)
class ThicknessConfig:
    model: ThicknessModel
    thicknesses: tuple[float, ...]
    crosslink_slope: float
    crosslink_intercept: float
    varied: str
    linked: str | None


@dataclass(frozen=True)
class RunConfig:
    version: int
    modes: tuple[ModeConfig, ...]
    couplings: tuple[tuple[str, str, float], ...]
    field_grid: GridSpec
    freq_grid: GridSpec
    noise: NoiseSpec | None
    fit: FitConfig | None
    thickness: ThicknessConfig | None
    display_scale: float

    def template(self) -> SystemTemplate:
        """Sweepable template: one resonator, the rest magnons."""
        resonator = None
        magnons: list[TemplateMagnon] = []
        for mode in self.modes:
            if mode.omega is not None:
                resonator = ModeSpec(label=mode.label, omega=mode.omega,
                                     alpha=mode.alpha, beta=mode.beta)
            else:
                magnons.append(TemplateMagnon(label=mode.label, alpha=mode.alpha,
                                              beta=mode.beta, material=mode.material))
        couplings = {(a, b): g for a, b, g in self.couplings}
        return SystemTemplate(resonator=resonator, magnons=tuple(magnons), couplings=couplings)

    def material_modes(self) -> dict[str, KittelMaterial]:
        return {m.label: m.material for m in self.modes if m.material is not None}


# ── Parsing ────────────────────────────────────────────────────────────


def _parse_mode(entry: dict, context: str) -> ModeConfig:
    _expect_keys(entry, context, ("label", "alpha"), ("beta", "lambda", "omega", "material"))
    label = entry["label"]
    if not isinstance(label, str) or not label:
        raise ConfigError(f"{context}: 'label' must be a nonempty string")
    alpha = _number(entry, context, "alpha")
    has_beta, has_lambda = "beta" in entry, "lambda" in entry
    if has_beta == has_lambda:
        raise ConfigError(f"{context}: give exactly one of 'beta' or 'lambda'")
    beta = _number(entry, context, "beta") if has_beta else lambda_to_beta(_number(entry, context, "lambda"))
    has_omega, has_material = "omega" in entry, "material" in entry
    if has_omega == has_material:
        raise ConfigError(f"{context}: give exactly one of 'omega' or 'material'")
    omega = None
    material = None
    if has_omega:
        omega = _number(entry, context, "omega")
    else:
        raw = entry["material"]
        _expect_keys(raw, f"{context}.material", ("gamma", "four_pi_m"))
        material = KittelMaterial(gamma=_number(raw, f"{context}.material", "gamma"),
                                  four_pi_m=_number(raw, f"{context}.material", "four_pi_m"))
    return ModeConfig(label=label, alpha=alpha, beta=beta, omega=omega, material=material)


def _parse_grid(entry: dict, context: str) -> GridSpec:
    _expect_keys(entry, context, ("start", "stop", "count"))
    start = _number(entry, context, "start")
    stop = _number(entry, context, "stop")
    count = entry["count"]
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError(f"{context}: 'count' must be an integer >= 1, got {count!r}")
    if count == 1:
        if start != stop:
            raise ConfigError(f"{context}: a single-point grid needs start == stop")
    elif not start < stop:
        raise ConfigError(f"{context}: 'start' must be below 'stop'")
    return GridSpec(start=start, stop=stop, count=count)


def _parse_fit(entry: dict, labels: set[str]) -> FitConfig:
    _expect_keys(entry, "fit", ("method", "free"), ("n_ridges", "min_separation"))
    method = entry["method"]
    if method not in ("map", "branches"):
        raise ConfigError(f"fit: 'method' must be 'map' or 'branches', got {method!r}")
    raw_free = entry["free"]
    if not isinstance(raw_free, list):
        raise ConfigError("fit: 'free' must be a list of parameter entries")
    for k, item in enumerate(raw_free):
        _expect_keys(item, f"fit.free[{k}]", ("name", "lower", "upper"), ("initial",))
        name = item["name"]
        if not isinstance(name, str):
            raise ConfigError(f"fit.free[{k}]: 'name' must be a string")
        for label in name.split(":")[1:]:
            if label not in labels:
                raise ConfigError(f"fit.free[{k}]: {name!r} names unknown mode {label!r}")
        _number(item, f"fit.free[{k}]", "lower")
        _number(item, f"fit.free[{k}]", "upper")
        if "initial" in item:
            _number(item, f"fit.free[{k}]", "initial")
    n_ridges = entry.get("n_ridges")
    if n_ridges is not None and (isinstance(n_ridges, bool) or not isinstance(n_ridges, int) or n_ridges < 1):
        raise ConfigError(f"fit: 'n_ridges' must be an integer >= 1, got {n_ridges!r}")
    min_separation = None
    if "min_separation" in entry:
        min_separation = _number(entry, "fit", "min_separation")
        if min_separation <= 0:
            raise ConfigError("fit: 'min_separation' must be > 0")
    return FitConfig(method=method, free=tuple(dict(item) for item in raw_free),
                     n_ridges=n_ridges, min_separation=min_separation)


def _parse_thickness(entry: dict, labels: set[str]) -> ThicknessConfig:
    _expect_keys(entry, "thickness",
                 ("slope", "intercept", "t_min", "t_max", "thicknesses", "crosslink", "varied"),
                 ("linked",))
    model = ThicknessModel(slope=_number(entry, "thickness", "slope"),
                           intercept=_number(entry, "thickness", "intercept"),
                           t_min=_number(entry, "thickness", "t_min"),
                           t_max=_number(entry, "thickness", "t_max"))
    raw_t = entry["thicknesses"]
    if not isinstance(raw_t, list) or not raw_t:
        raise ConfigError("thickness: 'thicknesses' must be a nonempty list")
    thicknesses = []
    for value in raw_t:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"thickness: bad thickness value {value!r}")
        thicknesses.append(float(value))
    crosslink = entry["crosslink"]
    _expect_keys(crosslink, "thickness.crosslink", ("slope", "intercept"))
    varied = entry["varied"]
    linked = entry.get("linked")
    for name in (varied, linked) if linked is not None else (varied,):
        if name not in labels:
            raise ConfigError(f"thickness: unknown mode label {name!r}")
    return ThicknessConfig(
        model=model,
        thicknesses=tuple(thicknesses),
        crosslink_slope=_number(crosslink, "thickness.crosslink", "slope"),
        crosslink_intercept=_number(crosslink, "thickness.crosslink", "intercept"),
        varied=varied,
        linked=linked,
    )


def parse_config(document: str) -> RunConfig:
    """RunConfig from JSON text; every schema violation is a ConfigError."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from None
    _expect_keys(raw, "config", ("version", "modes", "couplings", "field_grid", "freq_grid"),
                 ("noise", "fit", "thickness", "display_scale"))
    version = raw["version"]
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config: unsupported version {version!r} (this build reads {SCHEMA_VERSION})")
    raw_modes = raw["modes"]
    if not isinstance(raw_modes, list) or not raw_modes:
        raise ConfigError("config: 'modes' must be a nonempty list")
    try:
        modes = tuple(_parse_mode(m, f"modes[{k}]") for k, m in enumerate(raw_modes))
    except InvalidSystem as exc:
        raise ConfigError(str(exc)) from None
    labels = {m.label for m in modes}
    if len(labels) != len(modes):
        raise ConfigError("config: mode labels must be unique")
    fixed = [m for m in modes if m.omega is not None]
    if len(fixed) != 1:
        raise ConfigError(f"config: exactly one fixed-frequency mode required, got {len(fixed)}")
    raw_couplings = raw["couplings"]
    if not isinstance(raw_couplings, list):
        raise ConfigError("config: 'couplings' must be a list")
    couplings = []
    for k, item in enumerate(raw_couplings):
        _expect_keys(item, f"couplings[{k}]", ("pair", "g"))
        pair = item["pair"]
        if (not isinstance(pair, list) or len(pair) != 2
                or any(not isinstance(x, str) for x in pair)):
            raise ConfigError(f"couplings[{k}]: 'pair' must be two mode labels")
        for name in pair:
            if name not in labels:
                raise ConfigError(f"couplings[{k}]: unknown mode label {name!r}")
        couplings.append((pair[0], pair[1], _number(item, f"couplings[{k}]", "g")))
    try:
        noise = None
        if "noise" in raw:
            _expect_keys(raw["noise"], "noise", ("sigma", "seed"))
            seed = raw["noise"]["seed"]
            if isinstance(seed, bool) or not isinstance(seed, int):
                raise ConfigError(f"noise: 'seed' must be an integer, got {seed!r}")
            noise = NoiseSpec(sigma=_number(raw["noise"], "noise", "sigma"), seed=seed)
        fit = _parse_fit(raw["fit"], labels) if "fit" in raw else None
        thickness = _parse_thickness(raw["thickness"], labels) if "thickness" in raw else None
        display_scale = 1.0
        if "display_scale" in raw:
            display_scale = _number(raw, "config", "display_scale")
            if display_scale <= 0:
                raise ConfigError("config: 'display_scale' must be > 0")
        config = RunConfig(version=version, modes=modes, couplings=tuple(couplings),
                           field_grid=_parse_grid(raw["field_grid"], "field_grid"),
                           freq_grid=_parse_grid(raw["freq_grid"], "freq_grid"),
                           noise=noise, fit=fit, thickness=thickness, display_scale=display_scale)
        config.template()  # surface template-level problems as early as possible
    except (InvalidSystem, NegativeCoupling) as exc:
        raise ConfigError(str(exc)) from None
    return config


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


# ── Canonical writing ──────────────────────────────────────────────────


def config_to_dict(config: RunConfig) -> dict:
    out: dict = {
        "version": config.version,
        "display_scale": config.display_scale,
        "modes": [],
        "couplings": [
            {"pair": [a, b], "g": g} for a, b, g in config.couplings
        ],
        "field_grid": {"start": config.field_grid.start, "stop": config.field_grid.stop,
                       "count": config.field_grid.count},
        "freq_grid": {"start": config.freq_grid.start, "stop": config.freq_grid.stop,
                      "count": config.freq_grid.count},
    }
    for mode in config.modes:
        entry: dict = {"label": mode.label, "alpha": mode.alpha, "beta": mode.beta}
        if mode.omega is not None:
            entry["omega"] = mode.omega
        else:
            entry["material"] = {"gamma": mode.material.gamma, "four_pi_m": mode.material.four_pi_m}
        out["modes"].append(entry)
    if config.noise is not None:
        out["noise"] = {"sigma": config.noise.sigma, "seed": config.noise.seed}
    if config.fit is not None:
        fit: dict = {"method": config.fit.method, "free": [dict(f) for f in config.fit.free]}
        if config.fit.n_ridges is not None:
            fit["n_ridges"] = config.fit.n_ridges
        if config.fit.min_separation is not None:
            fit["min_separation"] = config.fit.min_separation
        out["fit"] = fit
    if config.thickness is not None:
        t = config.thickness
        block: dict = {
            "slope": t.model.slope, "intercept": t.model.intercept,
            "t_min": t.model.t_min, "t_max": t.model.t_max,
            "thicknesses": list(t.thicknesses),
            "crosslink": {"slope": t.crosslink_slope, "intercept": t.crosslink_intercept},
            "varied": t.varied,
        }
        if t.linked is not None:
            block["linked"] = t.linked
        out["thickness"] = block
    return out


def dump_config(config: RunConfig) -> str:
    """Canonical JSON text (sorted keys, two-space indent, newline end)."""
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n"


def save_config(config: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(dump_config(config))
