"""Run configuration: schema, validation and YAML parsing.

A configuration file is a YAML mapping with the sections shown below;
``swarmfv check CONFIG`` prints the derived stability budget for one.

.. code-block:: yaml

    label: test1                 # optional run name
    grid:
      origin: [-0.5, -0.5]
      extent: [1.0, 1.0]         # exactly one of extent / steps
      cells: [50, 50]
    potentials:                  # omitted slots default to zero
      intra1: {kind: newtonian, scale: 0.1}
      intra2: {kind: newtonian, scale: 0.1}
      cross:  {kind: newtonian, scale: 1.0}
    mobility: 0.3                # coupling strength in [0, 1)
    initial:
      species1: {kind: dirac, location: [0.0, 0.0], mass: 1.0}
      species2: {kind: uniform_ball, center: [0.2, 0.2], radius: 0.1, normalize: true}
    time:
      dt: 0.005                  # exactly one of dt / cfl_fraction
      t_final: 1.0
    velocity:                    # optional
      path: fast                 # direct | fast | both
      volume_weighted: true
    output:                      # optional
      directory: out/test1
      snapshot_every: 20         # steps between snapshots, 0 = endpoints only
      diagnostics_every: 1
    invariants:
      policy: warn               # warn | fatal | off

Parsing is strict: unknown keys anywhere are rejected, and a fixed ``dt``
that exceeds the certified CFL budget fails at parse time, before any
stepping happens.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .errors import ConfigurationError
from .initial import InitialMeasure
from .mesh import Grid
from .potentials import Potential
from .scheme import CFL_SLACK, CflFraction, DtPolicy, FixedDt, cfl_max_dt
from .velocity import VELOCITY_PATHS

INVARIANT_POLICIES = ("warn", "fatal", "off")


@dataclass(frozen=True)
class SimConfig:
    """A fully validated run configuration."""

    grid: Grid
    intra1: Potential
    intra2: Potential
    cross: Potential
    mobility: float
    initial1: InitialMeasure
    initial2: InitialMeasure
    dt_policy: DtPolicy
    t_final: float
    velocity_path: str = "fast"
    volume_weighted: bool = True
    snapshot_every: int = 0
    diagnostics_every: int = 1
    invariant_policy: str = "warn"
    output_dir: str | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.mobility < 1.0:
            raise ConfigurationError(f"mobility must lie in [0, 1), got {self.mobility}")
        if not self.t_final >= 0.0:
            raise ConfigurationError(f"t_final must be nonnegative, got {self.t_final}")
        if self.velocity_path not in VELOCITY_PATHS:
            raise ConfigurationError(
                f"velocity path must be one of {VELOCITY_PATHS}, got {self.velocity_path!r}"
            )
        if self.invariant_policy not in INVARIANT_POLICIES:
            raise ConfigurationError(
                f"invariant policy must be one of {INVARIANT_POLICIES}, "
                f"got {self.invariant_policy!r}"
            )
        if self.snapshot_every < 0:
            raise ConfigurationError(
                f"snapshot_every must be nonnegative, got {self.snapshot_every}"
            )
        if self.diagnostics_every < 1:
            raise ConfigurationError(
                f"diagnostics_every must be at least 1, got {self.diagnostics_every}"
            )

    @property
    def quadrature_weight(self) -> float:
        """Per-cell weight of the convolution quadrature."""
        return self.grid.cell_volume if self.volume_weighted else 1.0

    def certified_bounds(self) -> tuple[float, float, float]:
        """Sampled-and-certified gradient bounds of the three potentials."""
        return (
            self.intra1.certify_lipschitz_bound(),
            self.intra2.certify_lipschitz_bound(),
            self.cross.certify_lipschitz_bound(),
        )

    def cfl_limit(self) -> float:
        return cfl_max_dt(self.grid, *self.certified_bounds())


def _as_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigurationError(f"{path} must be a mapping, got {type(value).__name__}")
    return value


def _take(mapping: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    unknown = set(mapping) - set(required) - set(optional)
    if unknown:
        raise ConfigurationError(f"{path} has unknown keys {sorted(unknown)}")
    missing = [key for key in required if key not in mapping]
    if missing:
        raise ConfigurationError(f"{path} is missing required keys {missing}")


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path} must be a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{path} must be an integer, got {value!r}")
    return int(value)


def _as_vector(value, path: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigurationError(f"{path} must be a non-empty list of numbers, got {value!r}")
    return tuple(_as_float(item, f"{path}[{i}]") for i, item in enumerate(value))


def _parse_grid(section, path: str) -> Grid:
    section = _as_mapping(section, path)
    _take(section, path, ("origin", "cells"), ("extent", "steps"))
    origin = _as_vector(section["origin"], f"{path}.origin")
    cells_raw = section["cells"]
    if not isinstance(cells_raw, (list, tuple)) or not cells_raw:
        raise ConfigurationError(f"{path}.cells must be a non-empty list of integers")
    cells = tuple(_as_int(n, f"{path}.cells[{i}]") for i, n in enumerate(cells_raw))
    has_extent = "extent" in section
    has_steps = "steps" in section
    if has_extent == has_steps:
        raise ConfigurationError(f"{path} needs exactly one of 'extent' or 'steps'")
    try:
        if has_extent:
            extent = _as_vector(section["extent"], f"{path}.extent")
            return Grid.from_extent(origin, extent, cells)
        steps = _as_vector(section["steps"], f"{path}.steps")
        return Grid(origin, cells, steps)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def _parse_potential(section, path: str) -> Potential:
    section = _as_mapping(section, path)
    _take(section, path, ("kind",), ("scale",))
    kind = section["kind"]
    scale = _as_float(section.get("scale", 1.0), f"{path}.scale")
    try:
        return Potential(str(kind), scale)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def _parse_measure(section, path: str, top_level: bool = True) -> InitialMeasure:
    section = _as_mapping(section, path)
    kind = section.get("kind")
    if kind is None:
        raise ConfigurationError(f"{path} is missing required key 'kind'")
    normalize_keys = ("normalize",) if top_level else ()
    try:
        if kind == "dirac":
            _take(section, path, ("kind", "location"), ("mass",) + normalize_keys)
            return InitialMeasure(
                "dirac",
                mass=_as_float(section.get("mass", 1.0), f"{path}.mass"),
                location=_as_vector(section["location"], f"{path}.location"),
                normalize=bool(section.get("normalize", False)),
            )
        if kind == "uniform_ball":
            _take(section, path, ("kind", "center", "radius"), ("mass",) + normalize_keys)
            return InitialMeasure(
                "uniform_ball",
                mass=_as_float(section.get("mass", 1.0), f"{path}.mass"),
                center=_as_vector(section["center"], f"{path}.center"),
                radius=_as_float(section["radius"], f"{path}.radius"),
                normalize=bool(section.get("normalize", False)),
            )
        if kind == "uniform_box":
            _take(section, path, ("kind", "lower", "upper"), ("mass",) + normalize_keys)
            return InitialMeasure(
                "uniform_box",
                mass=_as_float(section.get("mass", 1.0), f"{path}.mass"),
                lower=_as_vector(section["lower"], f"{path}.lower"),
                upper=_as_vector(section["upper"], f"{path}.upper"),
                normalize=bool(section.get("normalize", False)),
            )
        if kind == "sum":
            _take(section, path, ("kind", "components"), normalize_keys)
            components_raw = section["components"]
            if not isinstance(components_raw, list) or not components_raw:
                raise ConfigurationError(f"{path}.components must be a non-empty list")
            components = tuple(
                _parse_measure(item, f"{path}.components[{i}]", top_level=False)
                for i, item in enumerate(components_raw)
            )
            return InitialMeasure(
                "sum", components=components, normalize=bool(section.get("normalize", False))
            )
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    raise ConfigurationError(f"{path}.kind {kind!r} is not a known measure kind")


def _parse_dt_policy(section, path: str) -> tuple[DtPolicy, float]:
    section = _as_mapping(section, path)
    _take(section, path, ("t_final",), ("dt", "cfl_fraction"))
    has_dt = "dt" in section
    has_fraction = "cfl_fraction" in section
    if has_dt == has_fraction:
        raise ConfigurationError(f"{path} needs exactly one of 'dt' or 'cfl_fraction'")
    t_final = _as_float(section["t_final"], f"{path}.t_final")
    try:
        if has_dt:
            policy: DtPolicy = FixedDt(_as_float(section["dt"], f"{path}.dt"))
        else:
            policy = CflFraction(_as_float(section["cfl_fraction"], f"{path}.cfl_fraction"))
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return policy, t_final


def parse_config_dict(data: dict, *, enforce_cfl: bool = True) -> SimConfig:
    """Validate a configuration mapping and return a SimConfig."""
    data = _as_mapping(data, "config")
    _take(
        data,
        "config",
        ("grid", "mobility", "initial", "time"),
        ("label", "potentials", "velocity", "output", "invariants"),
    )
    grid = _parse_grid(data["grid"], "grid")

    potentials = _as_mapping(data.get("potentials", {}), "potentials")
    _take(potentials, "potentials", (), ("intra1", "intra2", "cross"))
    zero = Potential("zero")
    intra1 = _parse_potential(potentials["intra1"], "potentials.intra1") if "intra1" in potentials else zero
    intra2 = _parse_potential(potentials["intra2"], "potentials.intra2") if "intra2" in potentials else zero
    cross = _parse_potential(potentials["cross"], "potentials.cross") if "cross" in potentials else zero

    initial = _as_mapping(data["initial"], "initial")
    _take(initial, "initial", ("species1", "species2"))
    initial1 = _parse_measure(initial["species1"], "initial.species1")
    initial2 = _parse_measure(initial["species2"], "initial.species2")

    dt_policy, t_final = _parse_dt_policy(data["time"], "time")

    velocity = _as_mapping(data.get("velocity", {}), "velocity")
    _take(velocity, "velocity", (), ("path", "volume_weighted"))
    path = str(velocity.get("path", "fast"))
    volume_weighted = velocity.get("volume_weighted", True)
    if not isinstance(volume_weighted, bool):
        raise ConfigurationError("velocity.volume_weighted must be a boolean")

    output = _as_mapping(data.get("output", {}), "output")
    _take(output, "output", (), ("directory", "snapshot_every", "diagnostics_every"))
    snapshot_every = _as_int(output.get("snapshot_every", 0), "output.snapshot_every")
    diagnostics_every = _as_int(output.get("diagnostics_every", 1), "output.diagnostics_every")
    output_dir = output.get("directory")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigurationError("output.directory must be a string")

    invariants = _as_mapping(data.get("invariants", {}), "invariants")
    _take(invariants, "invariants", (), ("policy",))
    invariant_policy = str(invariants.get("policy", "warn"))

    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise ConfigurationError("label must be a string")

    config = SimConfig(
        grid=grid,
        intra1=intra1,
        intra2=intra2,
        cross=cross,
        mobility=_as_float(data["mobility"], "mobility"),
        initial1=initial1,
        initial2=initial2,
        dt_policy=dt_policy,
        t_final=t_final,
        velocity_path=path,
        volume_weighted=volume_weighted,
        snapshot_every=snapshot_every,
        diagnostics_every=diagnostics_every,
        invariant_policy=invariant_policy,
        output_dir=output_dir,
        label=label,
    )
    if enforce_cfl and isinstance(dt_policy, FixedDt):
        limit = config.cfl_limit()
        if dt_policy.dt > limit * (1.0 + CFL_SLACK):
            raise ConfigurationError(
                f"time.dt = {dt_policy.dt} exceeds the CFL budget {limit} "
                f"for this grid and these potentials"
            )
    return config


def parse_config(source: str | Path | dict, *, enforce_cfl: bool = True) -> SimConfig:
    """Parse a configuration from a YAML file path or an already-loaded mapping."""
    if isinstance(source, dict):
        return parse_config_dict(source, enforce_cfl=enforce_cfl)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config file {path} is not valid YAML: {exc}") from exc
    return parse_config_dict(data, enforce_cfl=enforce_cfl)


def list_scenarios() -> list[str]:
    """Names of the configuration files shipped with the package."""
    root = importlib.resources.files("swarmfv") / "scenarios"
    return sorted(item.name[: -len(".yaml")] for item in root.iterdir() if item.name.endswith(".yaml"))


def load_scenario(name: str, *, enforce_cfl: bool = True) -> SimConfig:
    """Load a shipped scenario by name (see ``list_scenarios``)."""
    resource = importlib.resources.files("swarmfv") / "scenarios" / f"{name}.yaml"
    if not resource.is_file():
        raise ConfigurationError(
            f"unknown scenario {name!r}; shipped scenarios: {list_scenarios()}"
        )
    data = yaml.safe_load(resource.read_text())
    return parse_config_dict(data, enforce_cfl=enforce_cfl)


def resolve_config(source: str, *, enforce_cfl: bool = True) -> SimConfig:
    """Interpret ``source`` as a config file path or a shipped scenario name."""
    if Path(source).exists():
        return parse_config(source, enforce_cfl=enforce_cfl)
    names = list_scenarios()
    if source in names:
        return load_scenario(source, enforce_cfl=enforce_cfl)
    raise ConfigurationError(
        f"{source!r} is neither an existing config file nor one of the "
        f"shipped scenarios {names}"
    )


def refine_config(config: SimConfig, factor: int) -> SimConfig:
    """Halve the mesh ``factor`` times worth: multiply cells by ``factor``.

    The domain is unchanged, a fixed dt is divided by ``factor`` (keeping the
    CFL ratio), and file output is disabled on the refined copy.
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError(f"refinement factor must be a positive integer, got {factor}")
    factor = int(factor)
    extent = tuple(n * h for n, h in zip(config.grid.cells, config.grid.steps))
    grid = Grid.from_extent(
        config.grid.origin, extent, tuple(n * factor for n in config.grid.cells)
    )
    if isinstance(config.dt_policy, FixedDt):
        dt_policy: DtPolicy = FixedDt(config.dt_policy.dt / factor)
    else:
        dt_policy = config.dt_policy
    return replace(config, grid=grid, dt_policy=dt_policy, output_dir=None, snapshot_every=0)
