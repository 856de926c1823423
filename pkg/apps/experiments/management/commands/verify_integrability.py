from apps.experiments.management.base import ExperimentCommand
from apps.flatland.curvature import corrupted_partner, curvature_check, grid_from_ranges, standard_grid
from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family


class Command(ExperimentCommand):
    help = 'Check [H, H\'] = 0 and dH/dtau = dH\'/dt on a (t, tau) grid'
    command_name = 'verify_integrability'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--model', help='family with a commuting partner')
        parser.add_argument('--b', type=float)
        parser.add_argument('--g', type=float)
        parser.add_argument('--grid', help='t=start:stop:step,tau=start:stop:step (inclusive)')
        parser.add_argument('--threshold', type=float, help='largest accepted residual')
        parser.add_argument('--corrupt-partner', dest='corrupt_partner', action='store_true', default=None,
                            help='negative control: break the partner before checking')

    def run(self, config):
        family = get_family(config.model)
        if config.corrupt_partner:
            family = corrupted_partner(family)
        grid = grid_from_ranges(*config.grid_ranges) if config.grid else standard_grid()
        report = curvature_check(family, grid, ModelParams(b=config.b, g=config.g))
        passed = report.passes(config.threshold)
        records = {
            'model': family.name,
            'points': len(report.grid),
            'threshold': config.threshold,
            'passed': passed,
            'grid': report.grid,
            'commutator_residuals': report.commutator_residuals,
            'compatibility_residuals': report.compatibility_residuals,
            'max_commutator': report.max_commutator,
            'max_compatibility': report.max_compatibility,
            'fd_points': report.fd_points,
            'fd_deviation': report.fd_deviation,
        }
        summary = (f"{family.name} on {len(report.grid)} points: max commutator {report.max_commutator:.3e}, "
                   f"max compatibility {report.max_compatibility:.3e}")
        return records, passed, summary
