"""Run configuration: a flat dotted-key text format, fail-closed.

Example::

    # decaying micropolar run
    grid.n = 32            # points per axis (even, >= 4)
    grid.L = 50.2654824574 # box period, length units
    params.mu = 0.6        # kinematic viscosity
    params.gamma = 0.3     # spin viscosity
    params.chi = 0.5       # vortex viscosity (>= 0)
    ic.kind = random_solenoidal
    ic.peak = 0.5          # spectrum peak, 1/length
    ic.amplitude = 1.0     # L2 norm of each initial field
    ic.seed = 42
    stepper.dt = 0.02      # time step
    stepper.t_end = 12.0   # stop time
    stepper.cfl_safety = 0.5
    output.cadence = 10    # steps per diagnostics row
    output.dir = out/chi05
    output.checkpoint_every = 200   # steps; 0 disables periodic checkpoints

Unknown keys are errors: a typo in a viscosity name must not silently turn
into a default.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .dynamics import InitialCondition, StepperConfig
from .fields import PhysicalParams
from .grid import Grid, make_grid


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class OutputConfig:
    cadence: int
    directory: Path
    checkpoint_every: int = 0

    def __post_init__(self) -> None:
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")
        if self.checkpoint_every < 0:
            raise ValueError(
                f"checkpoint_every must be >= 0, got {self.checkpoint_every}"
            )


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    params: PhysicalParams
    ic: InitialCondition
    stepper: StepperConfig
    output: OutputConfig


_SCHEMA: dict[str, tuple[type, bool]] = {
    # key: (type, required)
    "grid.n": (int, True),
    "grid.L": (float, True),
    "params.mu": (float, True),
    "params.gamma": (float, True),
    "params.chi": (float, True),
    "ic.kind": (str, True),
    "ic.peak": (float, True),
    "ic.amplitude": (float, True),
    "ic.seed": (int, False),
    "stepper.dt": (float, True),
    "stepper.t_end": (float, True),
    "stepper.cfl_safety": (float, False),
    "stepper.dealias": (bool, False),
    "output.cadence": (int, True),
    "output.dir": (str, True),
    "output.checkpoint_every": (int, False),
}

_DEFAULTS = {
    "ic.seed": 0,
    "stepper.cfl_safety": 0.5,
    "stepper.dealias": True,
    "output.checkpoint_every": 0,
}


def _convert(raw: str, target: type, line: int, key: str):
    if target is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}", line, key)
    if target is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"expected an integer, got {raw!r}", line, key)
    if target is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"expected a number, got {raw!r}", line, key)
    return raw


def parse_config_text(text: str) -> RunConfig:
    """Parse and validate a config; raises ConfigError with line/field info."""
    values: dict[str, object] = {}
    seen_lines: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(
                f"duplicate key (first set on line {seen_lines[key]})", lineno, key
            )
        if not raw_value:
            raise ConfigError("empty value", lineno, key)
        values[key] = _convert(raw_value, _SCHEMA[key][0], lineno, key)
        seen_lines[key] = lineno

    for key, (_, required) in _SCHEMA.items():
        if required and key not in values:
            raise ConfigError("required key missing", key=key)
        if key not in values:
            values[key] = _DEFAULTS[key]

    try:
        grid = make_grid(values["grid.n"], values["grid.L"])
        params = PhysicalParams(
            mu=values["params.mu"],
            gamma=values["params.gamma"],
            chi=values["params.chi"],
        )
        ic = InitialCondition(
            kind=values["ic.kind"],
            peak_wavenumber=values["ic.peak"],
            amplitude=values["ic.amplitude"],
            seed=values["ic.seed"],
        )
        stepper = StepperConfig(
            dt=values["stepper.dt"],
            t_end=values["stepper.t_end"],
            cfl_safety=values["stepper.cfl_safety"],
            dealias=values["stepper.dealias"],
        )
        output = OutputConfig(
            cadence=values["output.cadence"],
            directory=Path(values["output.dir"]),
            checkpoint_every=values["output.checkpoint_every"],
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return RunConfig(grid=grid, params=params, ic=ic, stepper=stepper, output=output)


def parse_config(path: str | Path) -> RunConfig:
    return parse_config_text(Path(path).read_text())
