"""Run configuration: YAML parsing, validation, defaults and serialization.

Every frequency in a config file is a plain frequency in MHz and is
multiplied by 2*pi internally (angular rad/us); times are in us. An empty
file yields the reference parameter set (Omega_max/2pi = 17 MHz,
Delta_max/2pi = 23 MHz, T_tot = 0.594 us, tau = 0.0945 us,
phase2_fraction = 0.1). Validation errors carry the line of the offending
key.
"""
from __future__ import annotations

import hashlib
import io
import re
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import yaml

from .model import DriveMode, ModelParams
from .propagate import PropagationConfig, default_config_for_mode
from .pulses import DETUNING_SHAPES, PulseParams

TWO_PI = 2.0 * np.pi


class ConfigError(ValueError):
    """Invalid configuration; message carries a line anchor when available."""


@dataclass(frozen=True)
class PulseSection:
    omega_max_mhz: float = 17.0
    delta_max_mhz: float = 23.0
    total_time_us: float = 0.594
    width_us: float = 0.0945
    phase2_fraction: float = 0.1
    reference_time_us: float = 0.594
    detuning_shape: str = "sine"


@dataclass(frozen=True)
class ModelSection:
    blockade_mhz: float = 500.0
    ecd_frequency_mhz: float = 300.0
    drive_mode: str = "ecd-only"


@dataclass(frozen=True)
class PropagationSection:
    steps_per_fastest_period: int = 64
    method: str = "midpoint"
    convergence_target: float | None = None  # None -> per-mode default
    max_doublings: int = 8


@dataclass(frozen=True)
class SweepSection:
    total_times_us: tuple = (0.2, 0.3, 0.4, 0.5, 0.6)
    blockades_mhz: tuple = (20.0, 100.0, 300.0, 500.0)
    case: str = "bell"


@dataclass(frozen=True)
class QptSection:
    enabled: bool = True
    target_convention: str = "protocol"


@dataclass(frozen=True)
class QecSection:
    enabled: bool = True
    ecd_frequency_mhz: float = 350.0


@dataclass(frozen=True)
class RunConfig:
    pulses: PulseSection = field(default_factory=PulseSection)
    model: ModelSection = field(default_factory=ModelSection)
    propagation: PropagationSection = field(default_factory=PropagationSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    qpt: QptSection = field(default_factory=QptSection)
    qec: QecSection = field(default_factory=QecSection)
    output_directory: str = "out"
    pulse_samples: int = 2000
    trajectory_samples: int = 200
    seed: int = 0

    # --- conversions to physical objects ---------------------------------

    def pulse_params(self, total_time_us: float | None = None) -> PulseParams:
        p = self.pulses
        return PulseParams(
            omega_max=TWO_PI * p.omega_max_mhz,
            delta_max=TWO_PI * p.delta_max_mhz,
            total_time=total_time_us if total_time_us is not None else p.total_time_us,
            width=p.width_us,
            phase2_fraction=p.phase2_fraction,
            reference_time=p.reference_time_us,
        )

    def model_params(
        self,
        blockade_mhz: float | None = None,
        ecd_frequency_mhz: float | None = None,
        drive_mode: str | None = None,
    ) -> ModelParams:
        m = self.model
        return ModelParams(
            blockade=TWO_PI * (blockade_mhz if blockade_mhz is not None else m.blockade_mhz),
            ecd_frequency=TWO_PI
            * (ecd_frequency_mhz if ecd_frequency_mhz is not None else m.ecd_frequency_mhz),
            drive_mode=DriveMode(drive_mode if drive_mode is not None else m.drive_mode),
        )

    def propagation_config(self, drive_mode: DriveMode | None = None) -> PropagationConfig:
        pr = self.propagation
        mode = drive_mode if drive_mode is not None else DriveMode(self.model.drive_mode)
        kwargs = dict(
            steps_per_fastest_period=pr.steps_per_fastest_period,
            method=pr.method,
            max_doublings=pr.max_doublings,
        )
        if pr.convergence_target is not None:
            kwargs["convergence_target"] = pr.convergence_target
        return default_config_for_mode(mode, **kwargs)


_SECTIONS = {
    "pulses": PulseSection,
    "model": ModelSection,
    "propagation": PropagationSection,
    "sweep": SweepSection,
    "qpt": QptSection,
    "qec": QecSection,
}
_TOP_SCALARS = {
    "output_directory",
    "pulse_samples",
    "trajectory_samples",
    "seed",
}


def _mark(node) -> str:
    return f"line {node.start_mark.line + 1}"


def _check_mapping(node, where: str):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{_mark(node)}: {where} must be a mapping")


def parse_config(path) -> RunConfig:
    """Parse and validate a YAML config file; empty file -> full defaults."""
    with open(path) as fh:
        text = fh.read()
    return parse_config_text(text)


def parse_config_text(text: str) -> RunConfig:
    root = yaml.compose(io.StringIO(text))
    if root is None:
        cfg = RunConfig()
    else:
        cfg = _config_from_node(root)
    _validate(cfg)
    return cfg


_SCI_NOTATION = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)[eE][+-]?\d+$")


def _scalar_value(node):
    if isinstance(node, yaml.ScalarNode):
        value = yaml.safe_load(node.value if node.value != "" else "null")
    else:
        value = yaml.safe_load(yaml.serialize(node))
    # YAML 1.1 reads bare scientific notation like 1e-7 as a string
    if isinstance(value, str) and _SCI_NOTATION.match(value):
        return float(value)
    return value


def _config_from_node(root) -> RunConfig:
    _check_mapping(root, "top level")
    cfg = RunConfig()
    for key_node, val_node in root.value:
        key = key_node.value
        if key in _SECTIONS:
            _check_mapping(val_node, f"section '{key}'")
            section_cls = _SECTIONS[key]
            known = set(section_cls.__dataclass_fields__)
            updates = {}
            for k_node, v_node in val_node.value:
                k = k_node.value
                if k not in known:
                    raise ConfigError(
                        f"{_mark(k_node)}: unknown key '{k}' in section '{key}'"
                    )
                value = _scalar_value(v_node)
                if isinstance(value, list):
                    value = tuple(value)
                updates[k] = value
            cfg = replace(cfg, **{key: replace(getattr(cfg, key), **updates)})
        elif key in _TOP_SCALARS:
            cfg = replace(cfg, **{key: _scalar_value(val_node)})
        else:
            raise ConfigError(f"{_mark(key_node)}: unknown key '{key}'")
    return cfg


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _validate(cfg: RunConfig):
    p = cfg.pulses
    _require(p.omega_max_mhz > 0, "pulses.omega_max_mhz must be positive")
    _require(p.delta_max_mhz > 0, "pulses.delta_max_mhz must be positive")
    _require(p.total_time_us > 0, "pulses.total_time_us must be positive")
    _require(p.width_us > 0, "pulses.width_us must be positive")
    _require(0 < p.phase2_fraction < 1, "pulses.phase2_fraction must lie in (0, 1)")
    _require(p.reference_time_us > 0, "pulses.reference_time_us must be positive")
    _require(
        p.detuning_shape in DETUNING_SHAPES,
        f"pulses.detuning_shape must be one of {DETUNING_SHAPES}",
    )
    m = cfg.model
    _require(m.blockade_mhz >= 0, "model.blockade_mhz must be non-negative")
    _require(m.ecd_frequency_mhz > 0, "model.ecd_frequency_mhz must be positive")
    modes = [d.value for d in DriveMode]
    _require(m.drive_mode in modes, f"model.drive_mode must be one of {modes}")
    pr = cfg.propagation
    _require(
        pr.steps_per_fastest_period >= 16,
        "propagation.steps_per_fastest_period must be >= 16",
    )
    _require(pr.method in ("midpoint", "compose4"),
             "propagation.method must be 'midpoint' or 'compose4'")
    if pr.convergence_target is not None:
        _require(pr.convergence_target > 0,
                 "propagation.convergence_target must be positive")
    _require(pr.max_doublings >= 1, "propagation.max_doublings must be >= 1")
    sw = cfg.sweep
    _require(len(sw.total_times_us) > 0, "sweep.total_times_us must be non-empty")
    _require(len(sw.blockades_mhz) > 0, "sweep.blockades_mhz must be non-empty")
    _require(all(t > 0 for t in sw.total_times_us),
             "sweep.total_times_us entries must be positive")
    _require(all(v >= 0 for v in sw.blockades_mhz),
             "sweep.blockades_mhz entries must be non-negative")
    _require(sw.case in ("bell",), "sweep.case must be 'bell'")
    _require(cfg.qpt.target_convention in ("protocol", "canonical"),
             "qpt.target_convention must be 'protocol' or 'canonical'")
    _require(cfg.qec.ecd_frequency_mhz > 0, "qec.ecd_frequency_mhz must be positive")
    _require(cfg.pulse_samples >= 2, "pulse_samples must be >= 2")
    _require(cfg.trajectory_samples >= 1, "trajectory_samples must be >= 1")


def serialize_config(cfg: RunConfig) -> str:
    """Canonical YAML form; parse(serialize(cfg)) == cfg."""
    data = asdict(cfg)
    for name in ("total_times_us", "blockades_mhz"):
        data["sweep"][name] = list(data["sweep"][name])
    return yaml.safe_dump(data, sort_keys=True, default_flow_style=False)


def config_hash(cfg: RunConfig) -> str:
    """sha256 of the canonical serialization, for output provenance."""
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()
