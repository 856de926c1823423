import math

from dataclasses import asdict

import numpy as np

from apps.experiments.management.base import ExperimentCommand
from apps.functional.fitting import fit_exponent, fit_log_linear


class Command(ExperimentCommand):
    help = 'Fit p = exp(c gamma) to measured or synthetic survival probabilities'
    command_name = 'fit_exponent'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--gammas', help='comma-separated gamma values > 0')
        parser.add_argument('--synthetic', help='exp:<rate> fits exact exp(rate gamma) data instead')

    def run(self, config):
        gammas = np.array(config.gammas)
        if config.synthetic:
            target = config.synthetic_rate
            result = fit_log_linear(gammas, np.exp(target * gammas))
        else:
            target = -math.pi
            result = fit_exponent(gammas, config.limit_policy())
        deviation = result.c_estimate - target
        passed = abs(deviation) <= config.tolerance
        records = dict(
            asdict(result),
            standard_error=result.standard_error,
            target=target,
            deviation=deviation,
            deviation_from_minus_pi=result.c_estimate + math.pi,
            synthetic=bool(config.synthetic),
            tolerance=config.tolerance,
            passed=passed,
        )
        summary = (f"c = {result.c_estimate:.8f} +- {result.standard_error:.1e} (target {target:.8f}), "
                   f"residual norm {result.residual_norm:.3e}")
        return records, passed, summary
