from apps.experiments.management.base import ExperimentCommand
from apps.hamiltonians.params import ModelParams
from apps.hamiltonians.registry import get_family
from apps.propagator.evolution import evolve_window, transition_matrix
from apps.propagator.limits import survival_probability
from apps.propagator.structures import EvolutionWindow


class Command(ExperimentCommand):
    help = 'Infinite-time diabatic survival probability of a registered model'
    command_name = 'simulate'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--model', help='registered family name')
        parser.add_argument('--b', type=float)
        parser.add_argument('--g', type=float)
        parser.add_argument('--tau', type=float)
        parser.add_argument('--level', type=int, help='0-based diabatic level')
        parser.add_argument('--full-matrix', dest='full_matrix', action='store_true', default=None,
                            help='report the transition matrix over [-T, T] instead of the limit')
        parser.add_argument('--T', type=float, help='half window for --full-matrix')

    def run(self, config):
        family = get_family(config.model)
        params = ModelParams(b=config.b, g=config.g, tau=config.tau)
        base = {'model': family.name, 'b': params.b, 'g': params.g, 'tau': params.tau,
                'gamma': params.gamma, 'level': config.level}

        if config.full_matrix:
            window = EvolutionWindow.symmetric(config.T, config.tau)
            result = evolve_window(family, params, window, config.integrator_config())
            matrix = transition_matrix(result)
            p = matrix.survival(config.level)
            records = dict(
                base,
                T=config.T,
                p=p,
                transition_matrix=matrix.entries,
                row_defect=matrix.row_defect,
                col_defect=matrix.col_defect,
                unitarity_defect=result.unitarity_defect,
                steps=result.steps_taken,
            )
            return records, True, f"{family.name} on [-{config.T:g}, {config.T:g}]: p = {p:.10f}"

        estimate = survival_probability(family, params, config.level, config.limit_policy())
        records = dict(
            base,
            p=estimate.value,
            p_error=estimate.error,
            ladder=estimate.ladder,
            final_T=estimate.final_T,
            unitarity_defect=estimate.unitarity_defect,
        )
        return records, True, (f"{family.name}: p = {estimate.value:.10f} +- {estimate.error:.1e} "
                               f"at T = {estimate.final_T:.4g}")
