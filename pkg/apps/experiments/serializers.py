import re

from fractions import Fraction

from rest_framework import serializers

from apps.experiments.models import ExperimentRun
from apps.hamiltonians.registry import get_family
from apps.utils.exceptions import UnknownFamilyError

COMMANDS = [choice for choice, _ in ExperimentRun.Command.choices]
SYNTHETIC_PATTERN = re.compile(r'^exp:(?P<rate>[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?)$')
GRID_PATTERN = re.compile(r'^(?P<axis>t|tau)=(?P<start>[^:]+):(?P<stop>[^:]+):(?P<step>[^:]+)$')


class FloatListField(serializers.Field):
    """Comma-separated text (command line, config file) or a JSON list."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            items = [item.strip() for item in data.split(',') if item.strip()]
        elif isinstance(data, (list, tuple)):
            items = data
        else:
            raise serializers.ValidationError(f"expected a list of numbers, got {data!r}")
        try:
            return tuple(float(item) for item in items)
        except (TypeError, ValueError):
            raise serializers.ValidationError(f"expected a list of numbers, got {data!r}")

    def to_representation(self, value):
        return list(value)


class RationalField(serializers.CharField):
    def to_internal_value(self, data):
        text = super().to_internal_value(str(data))
        try:
            Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise serializers.ValidationError(f"unparseable rational {text!r}")
        return text


def parse_grid(text):
    """'t=a:b:h,tau=c:d:k' -> {'t': (a, b, h), 'tau': (c, d, k)}."""
    ranges = {}
    for part in text.split(','):
        match = GRID_PATTERN.match(part.strip())
        if not match:
            raise serializers.ValidationError(f"bad grid component {part!r}, expected axis=start:stop:step")
        try:
            ranges[match['axis']] = tuple(float(match[key]) for key in ('start', 'stop', 'step'))
        except ValueError:
            raise serializers.ValidationError(f"bad number in grid component {part!r}")
    if set(ranges) != {'t', 'tau'}:
        raise serializers.ValidationError(f"grid needs both t and tau ranges, got {text!r}")
    return ranges


class RunConfigSerializer(serializers.Serializer):
    command = serializers.ChoiceField(choices=COMMANDS)
    model = serializers.CharField()
    level = serializers.IntegerField(min_value=0)
    b = serializers.FloatField()
    g = serializers.FloatField()
    tau = serializers.FloatField()
    gamma = serializers.FloatField()
    gammas = FloatListField()
    T = serializers.FloatField()
    tau0 = serializers.FloatField()
    tolerance = serializers.FloatField()
    probability_tolerance = serializers.FloatField()
    time_scale = serializers.FloatField()
    max_rungs = serializers.IntegerField(min_value=2)
    endpoint_samples = serializers.IntegerField(min_value=1)
    step_tolerance = serializers.FloatField()
    max_step = serializers.FloatField()
    phase_per_step = serializers.FloatField()
    threshold = serializers.FloatField()
    grid = serializers.CharField(allow_blank=True)
    corrupt_partner = serializers.BooleanField()
    full_matrix = serializers.BooleanField()
    via_reduction = serializers.BooleanField()
    a1 = RationalField()
    a0 = serializers.IntegerField()
    n = serializers.IntegerField()
    synthetic = serializers.CharField(allow_blank=True)
    workers = serializers.IntegerField(min_value=1)
    output_format = serializers.ChoiceField(choices=['json', 'csv'])
    output_path = serializers.CharField(allow_blank=True)

    def validate_tolerance(self, value):
        if not value > 0:
            raise serializers.ValidationError("must be positive")
        return value

    def validate_probability_tolerance(self, value):
        return self.validate_tolerance(value)

    def validate_threshold(self, value):
        return self.validate_tolerance(value)

    def validate_time_scale(self, value):
        return self.validate_tolerance(value)

    def validate_step_tolerance(self, value):
        return self.validate_tolerance(value)

    def validate_max_step(self, value):
        return self.validate_tolerance(value)

    def validate_phase_per_step(self, value):
        return self.validate_tolerance(value)

    def validate_synthetic(self, value):
        if value and not SYNTHETIC_PATTERN.match(value):
            raise serializers.ValidationError(f"expected exp:<rate>, got {value!r}")
        return value

    def validate_grid(self, value):
        if value:
            parse_grid(value)
        return value

    def validate(self, attrs):
        command = attrs['command']
        errors = {}
        if attrs['output_format'] == 'csv' and command != 'verify_functional':
            errors['output_format'] = "csv output is only defined for verify_functional sweeps"

        if command in ('simulate', 'verify_integrability'):
            try:
                family = get_family(attrs['model'])
            except UnknownFamilyError as exc:
                errors['model'] = str(exc)
            else:
                if command == 'simulate' and attrs['level'] >= family.dim:
                    errors['level'] = f"level {attrs['level']} is outside 0..{family.dim - 1} for {family.name}"
            if not attrs['b'] > 0:
                errors['b'] = "slope b must be positive"
            if not attrs['tau'] > 0:
                errors['tau'] = "tau must be positive"
        elif command == 'verify_deformation':
            if not attrs['tau0'] > 1:
                errors['tau0'] = f"tau0 must exceed the starting tau = 1, got {attrs['tau0']}"
            if not attrs['T'] > 0:
                errors['T'] = "T must be positive"
            if not attrs['gamma'] >= 0:
                errors['gamma'] = "gamma must be non-negative"
        elif command == 'verify_functional':
            if not attrs['gammas']:
                errors['gammas'] = "gamma grid is empty"
            elif min(attrs['gammas']) < 0:
                errors['gammas'] = f"gamma must be non-negative, got {list(attrs['gammas'])}"
            if not attrs['tau'] > 0:
                errors['tau'] = "tau must be positive"
        elif command == 'fit_exponent':
            gammas = attrs['gammas']
            if any(gamma <= 0 for gamma in gammas):
                errors['gammas'] = f"fit needs gamma > 0, got {list(gammas)}"
            elif len(set(gammas)) < 3:
                errors['gammas'] = f"fit needs at least 3 distinct gamma values, got {list(gammas)}"
        elif command == 'recurrence':
            if attrs['n'] < 1:
                errors['n'] = f"N must be at least 1, got {attrs['n']}"
            if attrs['a0'] not in (0, 1):
                errors['a0'] = f"a0 must be 0 or 1, got {attrs['a0']}"

        if errors:
            raise serializers.ValidationError(errors)
        return attrs
