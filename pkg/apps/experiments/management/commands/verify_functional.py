from apps.experiments.management.base import ExperimentCommand
from apps.experiments.output import sweep_row
from apps.functional.sweep import gamma_sweep


class Command(ExperimentCommand):
    help = 'Check p(2 gamma) = p(gamma)^2 over a gamma grid'
    command_name = 'verify_functional'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--gammas', help='comma-separated gamma values >= 0')
        parser.add_argument('--via-reduction', dest='via_reduction', action='store_true', default=None,
                            help='measure p(2 gamma) through the effective two-level model')
        parser.add_argument('--tau', type=float, help='tau of the reduction route')
        parser.add_argument('--workers', type=int, help='threads for independent gamma points')

    def run(self, config):
        sweep = gamma_sweep(
            config.gammas,
            config.limit_policy(),
            via_reduction=config.via_reduction,
            tau=config.tau,
            max_workers=config.workers,
        )
        rows = [sweep_row(record) for record in sweep]
        failures = [record for record in sweep if not record.ok]
        worst = max((abs(record.functional_residual) for record in sweep if record.ok), default=0.0)
        passed = not failures and worst <= config.tolerance
        records = {
            'rows': rows,
            'max_abs_residual': worst,
            'failures': len(failures),
            'tolerance': config.tolerance,
            'passed': passed,
        }
        summary = f"{len(rows)} gamma values, max |residual| {worst:.3e}, {len(failures)} failed"
        return records, passed, summary
