from dataclasses import asdict

from apps.experiments.management.base import ExperimentCommand
from apps.flatland.deformation import deformation_experiment
from apps.hamiltonians.params import ModelParams


class Command(ExperimentCommand):
    help = 'Compare level-1 survival along the straight and the deformed path'
    command_name = 'verify_deformation'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--gamma', type=float)
        parser.add_argument('--tau0', type=float, help='height of the detour, above 1')
        parser.add_argument('--T', type=float, help='half width of the time window')

    def run(self, config):
        record = deformation_experiment(ModelParams.from_gamma(config.gamma), config.tau0, config.T,
                                        config.integrator_config())
        passed = record.passes(config.tolerance)
        records = dict(asdict(record), tolerance=config.tolerance, passed=passed)
        summary = (f"p(straight) = {record.p_horizontal:.10f}, p(deformed) = {record.p_deformed:.10f}, "
                   f"difference {record.difference:.3e}")
        return records, passed, summary
