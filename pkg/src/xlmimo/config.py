"""INI configuration files.

The schema maps the simulation parameter names one-to-one to keys (see
README).  Sections: [scenario] static world, [training] overhead model,
[aging] CSI delay model, [scheduler] algorithm knobs, [sweep] experiment
plan.  Unknown sections or keys are errors; `--set section.key=value`
overrides are type-checked against the same schema.
"""
import configparser

import numpy as np

from .errors import ConfigError
from .experiment import SweepPlan
from .scenario import ScenarioConfig
from .scheduling import MODES, SchedulerConfig


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_pair(text):
    parts = [float(p) for p in text.replace(",", " ").split()]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {text!r}")
    return (parts[0], parts[1])


def _parse_modes(text):
    modes = tuple(p.strip() for p in text.split(",") if p.strip())
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return modes


def _parse_grid(text):
    return tuple(float(p) for p in text.replace(",", " ").split())


def _parse_optional_float(text):
    lowered = text.strip().lower()
    if lowered in ("", "none"):
        return None
    return float(text)


# section -> key -> (target dataclass field, parser)
SCHEMA = {
    "scenario": {
        "num_users": ("num_users", int),
        "num_antennas": ("num_antennas", int),
        "specular_paths": ("specular_paths", int),
        "wavelength_m": ("wavelength", float),
        "antenna_spacing_m": ("antenna_spacing", _parse_optional_float),
        "power_ratio": ("power_ratio", float),
        "angular_range_rad": ("angular_range", _parse_pair),
        "distance_range_m": ("distance_range", _parse_pair),
        "angular_std_dev_deg": ("angular_spread_deg", float),
        "spread_mapping": ("spread_mapping", str),
        "noise_power_w": ("noise_power", float),
        "tx_power_w": ("tx_power", float),
        "constant_amplitude": ("constant_amplitude", _parse_optional_float),
        "reflection_loss_range": ("reflection_loss_range", _parse_pair),
        "inter_block": ("inter_block", str),
        "kappa_mode": ("kappa_mode", str),
        "kappa_reference": ("kappa_reference", float),
    },
    "training": {
        "coherence_block_len": ("coherence_block_len", int),
        "per_user_training": ("per_user_training", int),
        "overhead_aware": ("overhead_aware", _parse_bool),
    },
    "aging": {
        "sampling_freq_hz": ("sampling_freq_hz", float),
        "csi_delay_samples": ("csi_delay_samples", float),
        "user_speed_kmh": ("user_speed_kmh", float),
    },
    "scheduler": {
        "mode": ("mode", str),
        "candidate_policy": ("candidate_policy", str),
        "candidate_size": ("candidate_size", int),
        "candidate_threshold": ("candidate_threshold", float),
        "sus_epsilon": ("sus_epsilon", float),
    },
    "sweep": {
        "modes": ("modes", _parse_modes),
        "snr_grid_db": ("snr_grid_db", _parse_grid),
        "realizations": ("realizations", int),
        "parallelism": ("parallelism", int),
        "master_seed": ("master_seed", int),
    },
}

_SCENARIO_SECTIONS = ("scenario", "training", "aging")


def _parse_sections(parser):
    values = {section: {} for section in SCHEMA}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
            target, parse = SCHEMA[section][key]
            try:
                values[section][target] = parse(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {exc}") from exc
    return values


def apply_overrides(parser, overrides):
    """Apply ``section.key=value`` strings, validating names against the schema."""
    for item in overrides or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        lhs, value = item.split("=", 1)
        section, key = lhs.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown override key '{section}.{key}'")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)


def load_config(path, overrides=None):
    """Parse a config file into (ScenarioConfig, SchedulerConfig, SweepPlan|None)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    apply_overrides(parser, overrides)
    values = _parse_sections(parser)

    scenario_kwargs = {}
    for section in _SCENARIO_SECTIONS:
        for field_name, value in values[section].items():
            if field_name != "overhead_aware":
                scenario_kwargs[field_name] = value
    scenario = ScenarioConfig(**scenario_kwargs)

    scheduler_kwargs = dict(values["scheduler"])
    scheduler_kwargs["per_user_training"] = scenario.per_user_training
    scheduler_kwargs["coherence_block_len"] = scenario.coherence_block_len
    scheduler_kwargs["overhead_aware"] = values["training"].get("overhead_aware", False)
    try:
        scheduler = SchedulerConfig(**scheduler_kwargs)
    except ConfigError:
        raise
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

    plan = None
    if values["sweep"]:
        sweep_kwargs = dict(values["sweep"])
        if "modes" not in sweep_kwargs or "snr_grid_db" not in sweep_kwargs:
            raise ConfigError("[sweep] requires 'modes' and 'snr_grid_db'")
        try:
            plan = SweepPlan(scenario_config=scenario, scheduler_config=scheduler,
                             **sweep_kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return scenario, scheduler, plan


def snr_to_noise(scenario, snr_db):
    """Noise power realizing an SNR in dB at the configured transmit power."""
    return scenario.tx_power / (10.0 ** (np.asarray(snr_db, dtype=float) / 10.0))
