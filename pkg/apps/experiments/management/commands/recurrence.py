from apps.experiments.management.base import ExperimentCommand
from apps.functional.recurrence import solve_recurrence


class Command(ExperimentCommand):
    help = 'Exact Taylor coefficients of the analytic solutions of p(2x) = p(x)^2'
    command_name = 'recurrence'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--a1', help='rational seed, e.g. -1, 1/2 or -355/113 (use --a1=-1/3 for negative fractions)')
        parser.add_argument('--n', type=int, help='highest coefficient index N >= 1')
        parser.add_argument('--a0', type=int, help='0 or 1')

    def run(self, config):
        table = solve_recurrence(config.a1_fraction, config.n, config.a0)
        passed = table.all_match and table.satisfies_recurrence
        records = {
            'a1': table.a1,
            'a0': table.a0,
            'coefficients': table.coefficients,
            'closed_form_match': table.closed_form_match,
            'satisfies_recurrence': table.satisfies_recurrence,
            'passed': passed,
        }
        summary = ', '.join(f"a{n} = {coefficient}" for n, coefficient in enumerate(table.coefficients))
        return records, passed, summary
