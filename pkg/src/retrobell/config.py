"""Plain-text run configuration: INI-style sections, strict key checking.

Sections are {spin, packets, scenario, ensemble, output}; every key has a
default, and unknown sections or keys are hard errors so typos cannot pass
silently. Angles are given in degrees. Diagnostics carry the offending line
number where one can be located.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .ensemble import ExperimentConfig, WingParams
from .packets import EvolutionMode
from .relativity import Cylinder, RocketRoundTrip, Scenario, make_round_trip
from .spin import Direction


class ConfigError(Exception):
    """Invalid run configuration; message carries file/line where known."""


_SCHEMA: dict[str, tuple[str, ...]] = {
    "spin": (
        "r_theta_deg",
        "r_phi_deg",
        "e_theta_deg",
        "e_phi_deg",
        "a_deg",
        "a_prime_deg",
        "b_deg",
        "b_prime_deg",
    ),
    "packets": (
        "g",
        "mode",
        "kick",
        "rocket_sigma0",
        "rocket_p0",
        "rocket_mass",
        "rocket_kick",
        "earth_sigma0",
        "earth_p0",
        "earth_mass",
        "earth_kick",
    ),
    "scenario": ("kind", "circumference", "speed", "v_max", "ramp", "cruise"),
    "ensemble": ("trials", "seed", "overlap_threshold", "dt", "workers"),
    "output": ("bins", "keep_every"),
}

_SCENARIO_KEYS = {
    "cylinder": ("kind", "circumference", "speed"),
    "round_trip": ("kind", "v_max", "ramp", "cruise"),
}


@dataclass(frozen=True)
class RunSettings:
    """Everything a command needs: the experiment plus run/output options."""

    experiment: ExperimentConfig
    dt: float
    workers: int
    bins: int
    keep_every: int
    chsh_directions: Optional[tuple[Direction, Direction, Direction, Direction]]

    def with_overrides(
        self, seed: Optional[int] = None, trials: Optional[int] = None
    ) -> "RunSettings":
        exp = self.experiment
        if seed is not None:
            exp = replace(exp, seed=seed)
        if trials is not None:
            exp = replace(exp, trials=trials)
        return replace(self, experiment=exp)


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif key is not None and current == section:
            name = line.split("=", 1)[0].strip()
            if name == key:
                return lineno
    return None


class _Loader:
    def __init__(self, path: Path, text: str):
        self.path = path
        self.text = text
        self.cp = configparser.ConfigParser(
            delimiters=("=",), inline_comment_prefixes=("#",), interpolation=None
        )
        try:
            self.cp.read_string(text, source=str(path))
        except configparser.Error as exc:
            lineno = getattr(exc, "lineno", None)
            anchor = f"{path}:{lineno}: " if lineno else f"{path}: "
            raise ConfigError(anchor + exc.message.splitlines()[0]) from exc

    def fail(self, msg: str, section: str, key: Optional[str] = None) -> ConfigError:
        lineno = _line_of(self.text, section, key)
        anchor = f"{self.path}:{lineno}: " if lineno else f"{self.path}: "
        return ConfigError(anchor + msg)

    def check_keys(self) -> None:
        for section in self.cp.sections():
            if section not in _SCHEMA:
                raise self.fail(f"unknown section [{section}]", section)
            for key in self.cp[section]:
                if key not in _SCHEMA[section]:
                    raise self.fail(
                        f"unknown key {key!r} in section [{section}]", section, key
                    )

    def get(self, section: str, key: str, cast, default):
        if not self.cp.has_option(section, key):
            return default
        raw = self.cp.get(section, key)
        try:
            return cast(raw)
        except ValueError as exc:
            raise self.fail(
                f"bad value {raw!r} for {key} ({exc})", section, key
            ) from exc

    def has(self, section: str, key: str) -> bool:
        return self.cp.has_option(section, key)


def _angle(deg: float) -> Direction:
    return Direction(math.radians(deg))


def _build_scenario(loader: _Loader) -> Scenario:
    kind = loader.get("scenario", "kind", str, "cylinder").strip()
    if kind not in _SCENARIO_KEYS:
        raise loader.fail(
            f"scenario kind must be 'cylinder' or 'round_trip', got {kind!r}",
            "scenario",
            "kind",
        )
    if loader.cp.has_section("scenario"):
        for key in loader.cp["scenario"]:
            if key not in _SCENARIO_KEYS[kind]:
                raise loader.fail(
                    f"key {key!r} does not apply to scenario kind {kind!r}",
                    "scenario",
                    key,
                )
    try:
        if kind == "cylinder":
            return Cylinder(
                circumference=loader.get("scenario", "circumference", float, 6.0),
                speed=loader.get("scenario", "speed", float, 0.6),
            )
        return RocketRoundTrip.of(
            make_round_trip(
                v_max=loader.get("scenario", "v_max", float, 0.6),
                ramp=loader.get("scenario", "ramp", float, 0.0),
                cruise=loader.get("scenario", "cruise", float, 10.0),
            )
        )
    except ValueError as exc:
        raise loader.fail(str(exc), "scenario") from exc


def _build_mode(loader: _Loader) -> EvolutionMode:
    name = loader.get("packets", "mode", str, "translation_only").strip()
    try:
        if name == "impulsive_kick":
            return EvolutionMode.impulsive_kick(loader.get("packets", "kick", float, 1.0))
        return EvolutionMode(name)
    except ValueError as exc:
        raise loader.fail(str(exc), "packets", "mode") from exc


def _build_wing(loader: _Loader, prefix: str) -> WingParams:
    try:
        return WingParams(
            sigma0=loader.get("packets", f"{prefix}_sigma0", float, 1.0),
            p0=loader.get("packets", f"{prefix}_p0", float, 0.0),
            mass=loader.get("packets", f"{prefix}_mass", float, 1.0),
            kick=loader.get("packets", f"{prefix}_kick", float, None),
        )
    except ValueError as exc:
        raise loader.fail(str(exc), "packets") from exc


def _build_chsh(loader: _Loader):
    keys = ("a_deg", "a_prime_deg", "b_deg", "b_prime_deg")
    present = [k for k in keys if loader.has("spin", k)]
    if not present:
        return None
    if len(present) != 4:
        missing = [k for k in keys if k not in present]
        raise loader.fail(
            f"CHSH needs all four angles; missing {', '.join(missing)}", "spin"
        )
    try:
        return tuple(_angle(loader.get("spin", k, float, 0.0)) for k in keys)
    except ValueError as exc:
        raise loader.fail(str(exc), "spin") from exc


def load_settings(path) -> RunSettings:
    """Parse and validate a run configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    loader = _Loader(path, path.read_text())
    loader.check_keys()

    try:
        r = Direction(
            math.radians(loader.get("spin", "r_theta_deg", float, 0.0)),
            math.radians(loader.get("spin", "r_phi_deg", float, 0.0)),
        )
        e = Direction(
            math.radians(loader.get("spin", "e_theta_deg", float, 0.0)),
            math.radians(loader.get("spin", "e_phi_deg", float, 0.0)),
        )
    except ValueError as exc:
        raise loader.fail(str(exc), "spin") from exc

    try:
        experiment = ExperimentConfig(
            r=r,
            e=e,
            g=loader.get("packets", "g", float, 1.0),
            mode=_build_mode(loader),
            rocket=_build_wing(loader, "rocket"),
            earth=_build_wing(loader, "earth"),
            scenario=_build_scenario(loader),
            trials=loader.get("ensemble", "trials", int, 10_000),
            seed=loader.get("ensemble", "seed", int, 0),
            overlap_threshold=loader.get("ensemble", "overlap_threshold", float, 0.1),
        )
    except ValueError as exc:
        raise loader.fail(str(exc), "ensemble") from exc

    dt = loader.get("ensemble", "dt", float, 1e-3)
    workers = loader.get("ensemble", "workers", int, 1)
    bins = loader.get("output", "bins", int, 80)
    keep_every = loader.get("output", "keep_every", int, 1)
    if dt <= 0.0:
        raise loader.fail("dt must be positive", "ensemble", "dt")
    if workers < 1:
        raise loader.fail("workers must be at least 1", "ensemble", "workers")
    if bins < 1:
        raise loader.fail("bins must be at least 1", "output", "bins")
    if keep_every < 1:
        raise loader.fail("keep_every must be at least 1", "output", "keep_every")

    return RunSettings(
        experiment=experiment,
        dt=dt,
        workers=workers,
        bins=bins,
        keep_every=keep_every,
        chsh_directions=_build_chsh(loader),
    )


def echo_dict(settings: RunSettings) -> dict:
    """Resolved configuration as a plain dictionary (for summaries/manifests)."""
    exp = settings.experiment
    scenario: dict[str, object]
    if isinstance(exp.scenario, Cylinder):
        scenario = {
            "kind": "cylinder",
            "circumference": exp.scenario.circumference,
            "speed": exp.scenario.speed,
        }
    else:
        scenario = {"kind": "round_trip", "duration": exp.scenario.rocket.duration}
    out = {
        "spin": {
            "r_theta_deg": math.degrees(exp.r.theta),
            "r_phi_deg": math.degrees(exp.r.phi),
            "e_theta_deg": math.degrees(exp.e.theta),
            "e_phi_deg": math.degrees(exp.e.phi),
        },
        "packets": {
            "g": exp.g,
            "mode": exp.mode.kind,
            "kick": exp.mode.kick,
            "rocket": {"sigma0": exp.rocket.sigma0, "p0": exp.rocket.p0, "mass": exp.rocket.mass},
            "earth": {"sigma0": exp.earth.sigma0, "p0": exp.earth.p0, "mass": exp.earth.mass},
        },
        "scenario": scenario,
        "ensemble": {
            "trials": exp.trials,
            "seed": exp.seed,
            "overlap_threshold": exp.overlap_threshold,
            "dt": settings.dt,
            "workers": settings.workers,
        },
        "output": {"bins": settings.bins, "keep_every": settings.keep_every},
    }
    return out
