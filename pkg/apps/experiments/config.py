"""
Run configuration: built-in defaults, overridden by a config file, overridden
by command-line flags.

A config file is either key=value text (read with python-dotenv) or a JSON
result envelope, whose ``config_echo`` reproduces the run that wrote it.
"""
import json
import logging

from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

from django.conf import settings
from dotenv import dotenv_values

from apps.experiments.serializers import RunConfigSerializer, SYNTHETIC_PATTERN, parse_grid
from apps.propagator.structures import IntegratorConfig, LimitPolicy
from apps.utils.exceptions import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    level: int
    b: float
    g: float
    tau: float
    gamma: float
    gammas: tuple
    T: float
    tau0: float
    tolerance: float
    probability_tolerance: float
    time_scale: float
    max_rungs: int
    endpoint_samples: int
    step_tolerance: float
    max_step: float
    phase_per_step: float
    threshold: float
    grid: str
    corrupt_partner: bool
    full_matrix: bool
    via_reduction: bool
    a1: str
    a0: int
    n: int
    synthetic: str
    workers: int
    output_format: str
    output_path: str

    @property
    def a1_fraction(self):
        return Fraction(self.a1)

    @property
    def grid_ranges(self):
        if not self.grid:
            return None
        ranges = parse_grid(self.grid)
        return ranges['t'], ranges['tau']

    @property
    def synthetic_rate(self):
        if not self.synthetic:
            return None
        return float(SYNTHETIC_PATTERN.match(self.synthetic)['rate'])

    def integrator_config(self):
        return IntegratorConfig(
            step_tolerance=self.step_tolerance,
            max_step=self.max_step,
            phase_per_step=self.phase_per_step,
        )

    def limit_policy(self):
        return LimitPolicy(
            tolerance=self.probability_tolerance,
            time_scale=self.time_scale,
            max_rungs=self.max_rungs,
            endpoint_samples=self.endpoint_samples,
            config=self.integrator_config(),
        )

    def echo(self):
        echo = asdict(self)
        echo['gammas'] = list(self.gammas)
        return echo


FIELD_NAMES = {field.name.lower(): field.name for field in fields(RunConfig)}

BASE_DEFAULTS = {
    'model': 'lz',
    'level': 0,
    'b': 1.0,
    'g': 0.0,
    'tau': 1.0,
    'gamma': 0.5,
    'gammas': '',
    'T': 50.0,
    'tau0': 8.0,
    'tolerance': 1e-3,
    'threshold': 1e-10,
    'grid': '',
    'corrupt_partner': False,
    'full_matrix': False,
    'via_reduction': False,
    'a1': '-1',
    'a0': 1,
    'n': 10,
    'synthetic': '',
    'workers': 1,
    'output_format': 'json',
    'output_path': '',
}

COMMAND_DEFAULTS = {
    'simulate': {},
    'verify_integrability': {'model': 'three_level_tau', 'g': 1.0},
    'verify_deformation': {},
    'verify_functional': {'gammas': '0.25,0.5,1', 'tolerance': 5e-4},
    'fit_exponent': {'gammas': '0.1,0.2,0.4,0.8', 'tolerance': 0.01},
    'recurrence': {},
}


def numeric_defaults():
    """Integrator and limit settings from the LZ_* environment; echoed so a replay reuses them."""
    return {
        'probability_tolerance': settings.LZ_PROBABILITY_TOLERANCE,
        'time_scale': settings.LZ_TIME_SCALE,
        'max_rungs': settings.LZ_MAX_RUNGS,
        'endpoint_samples': settings.LZ_ENDPOINT_SAMPLES,
        'step_tolerance': settings.LZ_STEP_TOLERANCE,
        'max_step': settings.LZ_MAX_STEP,
        'phase_per_step': settings.LZ_PHASE_PER_STEP,
    }


def defaults_for(command):
    defaults = dict(BASE_DEFAULTS, **numeric_defaults())
    defaults.update(COMMAND_DEFAULTS.get(command, {}))
    return defaults


def read_config_file(path, command=None):
    """Config values from a key=value file or from a JSON envelope's config_echo."""
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"config file {path} does not exist")
    if path.suffix == '.json':
        try:
            envelope = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as exc:
            raise DomainError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(envelope, dict) or 'config_echo' not in envelope:
            raise DomainError(f"{path} is not a result envelope (no config_echo)")
        values = dict(envelope['config_echo'])
    else:
        values = {key: value for key, value in dotenv_values(path).items() if value is not None}

    resolved = {}
    for key, value in values.items():
        name = FIELD_NAMES.get(key.lower())
        if name is None:
            raise DomainError(f"unknown key {key!r} in config file {path}")
        resolved[name] = value
    echoed = resolved.pop('command', None)
    if command and echoed and echoed != command:
        logger.warning(f"Config file {path} was written by {echoed}; using its values for {command}")
    return resolved


def validation_message(errors):
    parts = []
    for field, messages in errors.items():
        if isinstance(messages, dict):
            messages = [validation_message(messages)]
        parts.append(f"{field}: {' '.join(str(message) for message in messages)}")
    return '; '.join(parts)


def resolve_config(command, options=None, config_file=None):
    """Layer flags over the config file over the defaults and validate the result."""
    layered = defaults_for(command)
    if config_file:
        layered.update(read_config_file(config_file, command))
    layered.update({key: value for key, value in (options or {}).items() if value is not None})
    layered['command'] = command

    serializer = RunConfigSerializer(data=layered)
    if not serializer.is_valid():
        raise DomainError(validation_message(serializer.errors))
    config = RunConfig(**serializer.validated_data)
    logger.debug(f"Resolved {command} config: {config.echo()}")
    return config
