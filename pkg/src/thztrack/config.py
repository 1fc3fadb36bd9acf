"""INI run configuration: strict parsing, exact rendering, typed builders.

Sections mirror the simulation parameter table: [array], [link], [scenario],
[optimizer], [codebook], [event_based], [output]. Fields carrying dB units are
suffixed _dbm / _dbmhz. Unknown sections or keys are rejected, every known key
is required, and parse(render(config)) reproduces the configuration exactly.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields

from .channel import ArrayConfig, LinkBudget, achievable_rate
from .codebook import CodebookGrid
from .optimizer import ObjectiveSpec, PsoConfig, pso_bounds
from .tracking import EventBasedParams, Scenario
from .geometry import path_to_interval
from .seeding import derive_seed


class ConfigError(Exception):
    """Configuration file could not be parsed or validated."""


@dataclass(frozen=True)
class ArraySection:
    n_antennas: int = 128
    carrier_freq_hz: float = 220e9


@dataclass(frozen=True)
class LinkSection:
    tx_power_dbm: float = 40.0
    noise_psd_dbmhz: float = -174.0
    bandwidth_hz: float = 10e9
    absorption_coeff_per_m: float = 0.0


@dataclass(frozen=True)
class ScenarioSection:
    perpendicular_distance_m: float = 100.0
    start_angle_rad: float = 0.0
    end_angle_rad: float = 0.3
    velocity_mps: float = 20.0
    sensing_period_s: float = 0.165
    time_step_s: float = 0.00165


@dataclass(frozen=True)
class OptimizerSection:
    alpha: float = 10.0
    r_min_bps: float | None = None  # None means "auto": 10% of the aligned start rate
    n_quad: int = 64
    n_particles: int = 40
    n_iterations: int = 100
    inertia: float = 0.7298
    cognitive: float = 1.4962
    social: float = 1.4962
    seed: int = 1234567


@dataclass(frozen=True)
class CodebookSection:
    # theta_hi exceeds sin(end angle): the last sensing periods predict a full
    # period past the end of the motion range, so beam centres overshoot it.
    theta_step: float = 0.01
    delta_step: float = 0.002
    theta_lo: float = 0.0
    theta_hi: float = 0.37
    delta_max: float = 0.084
    path: str = "codebook.json"


@dataclass(frozen=True)
class EventSection:
    slot_s: float = 0.05
    rw_var: float = 25.0
    weight: float = 0.1


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    delimiter: str = ","


@dataclass(frozen=True)
class RunConfig:
    array: ArraySection = field(default_factory=ArraySection)
    link: LinkSection = field(default_factory=LinkSection)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    codebook: CodebookSection = field(default_factory=CodebookSection)
    event_based: EventSection = field(default_factory=EventSection)
    output: OutputSection = field(default_factory=OutputSection)


_SECTIONS = {
    "array": ArraySection,
    "link": LinkSection,
    "scenario": ScenarioSection,
    "optimizer": OptimizerSection,
    "codebook": CodebookSection,
    "event_based": EventSection,
    "output": OutputSection,
}


def default_config() -> RunConfig:
    """The shipped defaults: the reference simulation parameter set."""
    return RunConfig()


# keys not listed here parse as float; r_min_bps also accepts the word "auto"
_INT_KEYS = {"n_antennas", "n_quad", "n_particles", "n_iterations", "seed"}
_STR_KEYS = {"path", "directory", "delimiter"}


def _parse_value(section: str, key: str, raw: str):
    raw = raw.strip()
    if key == "r_min_bps" and raw == "auto":
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _STR_KEYS:
            return raw
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")

    built = {}
    for section, cls in _SECTIONS.items():
        if not parser.has_section(section):
            raise ConfigError(f"missing section [{section}]")
        known = {f.name for f in fields(cls)}
        values = {}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = _parse_value(section, key, raw)
        for key in known:
            if key not in values:
                raise ConfigError(f"missing key {key!r} in section [{section}]")
        try:
            built[section] = cls(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid values in section [{section}]: {exc}") from exc
    return RunConfig(
        array=built["array"],
        link=built["link"],
        scenario=built["scenario"],
        optimizer=built["optimizer"],
        codebook=built["codebook"],
        event_based=built["event_based"],
        output=built["output"],
    )


def parse_config_file(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path!r}: {exc}") from exc
    return parse_config(text)


def _render_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        raise ConfigError("boolean config values are not supported")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(config: RunConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for section, cls in _SECTIONS.items():
        data = getattr(config, section)
        parser[section] = {
            f.name: _render_value(getattr(data, f.name)) for f in fields(cls)
        }
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Builders from a parsed configuration to the typed simulation objects.
# ---------------------------------------------------------------------------


def build_array(config: RunConfig) -> ArrayConfig:
    return ArrayConfig(
        n_antennas=config.array.n_antennas,
        carrier_freq=config.array.carrier_freq_hz,
    )


def build_budget(config: RunConfig) -> LinkBudget:
    return LinkBudget.from_db(
        tx_power_dbm=config.link.tx_power_dbm,
        noise_psd_dbmhz=config.link.noise_psd_dbmhz,
        bandwidth_hz=config.link.bandwidth_hz,
        absorption_coeff_per_m=config.link.absorption_coeff_per_m,
    )


def resolve_r_min(config: RunConfig) -> float:
    """Explicit threshold, or 10% of the aligned-MRT rate at the start pose."""
    if config.optimizer.r_min_bps is not None:
        return config.optimizer.r_min_bps
    cfg = build_array(config)
    budget = build_budget(config)
    distance = config.scenario.perpendicular_distance_m / math.cos(
        config.scenario.start_angle_rad
    )
    aligned = achievable_rate(float(cfg.n_antennas), distance, budget, cfg)
    return 0.1 * aligned


def build_scenario(config: RunConfig, velocity: float | None = None) -> Scenario:
    sc = config.scenario
    return Scenario(
        cfg=build_array(config),
        budget=build_budget(config),
        perpendicular_distance=sc.perpendicular_distance_m,
        start_angle=sc.start_angle_rad,
        end_angle=sc.end_angle_rad,
        velocity=sc.velocity_mps if velocity is None else velocity,
        tau=sc.sensing_period_s,
        time_step=sc.time_step_s,
        r_min=resolve_r_min(config),
    )


def build_pso(config: RunConfig, seed: int | None = None) -> PsoConfig:
    opt = config.optimizer
    return PsoConfig(
        bounds=pso_bounds(build_array(config)),
        n_particles=opt.n_particles,
        n_iterations=opt.n_iterations,
        inertia=opt.inertia,
        cognitive=opt.cognitive,
        social=opt.social,
        seed=opt.seed if seed is None else seed,
    )


def build_grid(config: RunConfig) -> CodebookGrid:
    cbs = config.codebook
    return CodebookGrid(
        theta_step=cbs.theta_step,
        delta_step=cbs.delta_step,
        theta_range=(cbs.theta_lo, cbs.theta_hi),
        delta_max=cbs.delta_max,
    )


def build_objective_template(config: RunConfig) -> ObjectiveSpec:
    """Template spec for codebook builds; state and interval get replaced per cell."""
    scenario = build_scenario(config)
    state = scenario.state_at(0.0)
    return ObjectiveSpec(
        state=state,
        tau=scenario.tau,
        interval=path_to_interval(state, scenario.tau, scenario.geom),
        budget=scenario.budget,
        cfg=scenario.cfg,
        r_min=scenario.r_min,
        alpha=config.optimizer.alpha,
        n_quad=config.optimizer.n_quad,
        geom=scenario.geom,
    )


def build_event_params(config: RunConfig, seed: int | None = None) -> EventBasedParams:
    base = config.optimizer.seed if seed is None else seed
    return EventBasedParams(
        slot=config.event_based.slot_s,
        rw_var=config.event_based.rw_var,
        weight=config.event_based.weight,
        seed=derive_seed("event", base),
    )
