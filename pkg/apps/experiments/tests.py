import json
import math
import shutil
import tempfile

from io import StringIO
from pathlib import Path

from django.core.cache import cache
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from apps.experiments.config import resolve_config
from apps.experiments.models import ExperimentRun, SweepPoint
from apps.experiments.output import atomic_write, jsonable, render_sweep_csv
from apps.utils.exceptions import DomainError


class CommandTestCase(TestCase):
    def setUp(self):
        cache.clear()
        self.directory = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.directory, ignore_errors=True)
        override = override_settings(LZ_OUTPUT_DIR=str(self.directory))
        override.enable()
        self.addCleanup(override.disable)

    def run_command(self, name, **options):
        out = StringIO()
        options.setdefault('no_timestamp', True)
        call_command(name, stdout=out, **options)
        return out.getvalue()

    def assert_exit(self, code, name, **options):
        with self.assertRaises(CommandError) as caught:
            self.run_command(name, **options)
        self.assertEqual(caught.exception.returncode, code)
        return caught.exception

    def envelope(self, name):
        return json.loads((self.directory / f'{name}.json').read_text())


class SimulateCommandTests(CommandTestCase):
    def test_two_level_survival(self):
        output = self.run_command('simulate', model='lz', b=1.0, g=1.0)
        self.assertIn('p = 0.0432', output)
        envelope = self.envelope('simulate')
        self.assertAlmostEqual(envelope['records']['p'], 0.0432139182638, delta=2e-4)
        self.assertEqual(envelope['command'], 'simulate')
        self.assertNotIn('created_at', envelope)
        self.assertEqual(envelope['records']['final_T'], envelope['records']['ladder'][-1][0])
        run = ExperimentRun.objects.get()
        self.assertEqual(run.exit_code, 0)
        self.assertTrue(run.passed)

    def test_uncoupled(self):
        self.run_command('simulate', model='lz', b=1.0, g=0.0)
        self.assertAlmostEqual(self.envelope('simulate')['records']['p'], 1.0, places=12)

    def test_envelope_round_trip_keeps_numeric_settings(self):
        with override_settings(LZ_TIME_SCALE=30.0, LZ_ENDPOINT_SAMPLES=8, LZ_PHASE_PER_STEP=0.4):
            self.run_command('simulate', model='lz', b=1.0, g=0.5)
        first = self.envelope('simulate')
        self.assertEqual(first['config_echo']['time_scale'], 30.0)
        self.assertEqual(first['config_echo']['endpoint_samples'], 8)
        self.assertEqual(first['config_echo']['phase_per_step'], 0.4)
        cache.clear()
        replay = self.directory / 'replay.json'
        self.run_command('simulate', config_file=str(self.directory / 'simulate.json'), output_path=str(replay))
        second = json.loads(replay.read_text())
        self.assertEqual(second['records'], first['records'])
        self.assertEqual(second['config_echo']['time_scale'], 30.0)

    def test_numeric_settings_are_validated(self):
        config = self.directory / 'run.env'
        config.write_text('max_rungs=1\n')
        self.assert_exit(2, 'simulate', config_file=str(config))
        config.write_text('phase_per_step=0\n')
        self.assert_exit(2, 'simulate', config_file=str(config))

    def test_unknown_model_lists_registered_ones(self):
        error = self.assert_exit(2, 'simulate', model='nosuch')
        self.assertIn('nosuch', str(error))
        self.assertIn('lz', str(error))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_invalid_parameters(self):
        self.assert_exit(2, 'simulate', model='lz', b=-1.0, g=1.0)
        self.assert_exit(2, 'simulate', model='lz', level=5)
        self.assert_exit(2, 'simulate', model='lz', output_format='csv')

    def test_full_matrix(self):
        self.run_command('simulate', model='lz', b=1.0, g=0.5, full_matrix=True, T=20.0)
        records = self.envelope('simulate')['records']
        matrix = records['transition_matrix']
        self.assertEqual(len(matrix), 2)
        self.assertAlmostEqual(sum(matrix[0]), 1.0, places=8)
        self.assertLessEqual(records['unitarity_defect'], 1e-8)

    def test_timestamp_by_default(self):
        self.run_command('simulate', model='lz', g=0.0, no_timestamp=False)
        self.assertIn('created_at', self.envelope('simulate'))


class IntegrabilityCommandTests(CommandTestCase):
    def test_default_grid_passes(self):
        self.run_command('verify_integrability')
        records = self.envelope('verify_integrability')['records']
        self.assertEqual(records['points'], 88)
        self.assertLessEqual(records['max_commutator'], 1e-12)
        self.assertLessEqual(records['max_compatibility'], 1e-12)

    def test_explicit_grid(self):
        self.run_command('verify_integrability', grid='t=-5:5:1,tau=0.5:4:0.5')
        self.assertEqual(self.envelope('verify_integrability')['records']['points'], 88)
        self.run_command('verify_integrability', grid='t=0:0:1,tau=1:1:1')
        self.assertEqual(self.envelope('verify_integrability')['records']['points'], 1)

    def test_corrupted_partner_fails(self):
        self.assert_exit(1, 'verify_integrability', corrupt_partner=True)
        self.assertFalse(self.envelope('verify_integrability')['records']['passed'])
        self.assertEqual(ExperimentRun.objects.get().exit_code, 1)

    def test_bad_grid_and_unsupported_family(self):
        self.assert_exit(2, 'verify_integrability', grid='t=-5:5')
        self.assert_exit(2, 'verify_integrability', model='lz')


class DeformationCommandTests(CommandTestCase):
    def test_paths_agree(self):
        self.run_command('verify_deformation', gamma=0.5, tau0=8.0, T=50.0)
        records = self.envelope('verify_deformation')['records']
        self.assertLessEqual(abs(records['difference']), 1e-3)

    def test_uncoupled(self):
        self.run_command('verify_deformation', gamma=0.0, T=20.0)
        self.assertAlmostEqual(self.envelope('verify_deformation')['records']['difference'], 0.0, places=12)

    def test_detour_must_rise(self):
        error = self.assert_exit(2, 'verify_deformation', tau0=0.5)
        self.assertIn('tau0', str(error))


class FunctionalCommandTests(CommandTestCase):
    def test_sweep_csv(self):
        self.run_command('verify_functional', gammas='0.25,0.5,1', output_format='csv')
        text = (self.directory / 'verify_functional.csv').read_text()
        lines = text.split('\n')
        self.assertEqual(lines[0], 'gamma,p,p_error,p_double_gamma,residual')
        self.assertEqual(len(lines), 5)
        self.assertEqual(lines[-1], '')
        self.assertNotIn('\r', text)
        for line in lines[1:4]:
            residual = float(line.split(',')[-1])
            self.assertLessEqual(abs(residual), 5e-4)
        self.assertEqual(lines[1].split(',')[0], '0.25')
        self.assertEqual(SweepPoint.objects.count(), 3)
        self.assertEqual(list(SweepPoint.objects.values_list('position', flat=True)), [0, 1, 2])

    def test_zero_gamma(self):
        self.run_command('verify_functional', gammas='0')
        rows = self.envelope('verify_functional')['records']['rows']
        self.assertEqual(len(rows), 1)
        self.assertAlmostEqual(rows[0]['residual'], 0.0, places=14)

    def test_negative_gamma(self):
        self.assert_exit(2, 'verify_functional', gammas='-1')
        self.assert_exit(2, 'verify_functional', gammas='abc')

    def test_reduction_route(self):
        self.run_command('verify_functional', gammas='0.5', via_reduction=True, tau=4.0, tolerance=1e-3)
        row = self.envelope('verify_functional')['records']['rows'][0]
        self.assertEqual(row['route'], 'reduction')
        self.assertEqual(row['tau'], 4.0)

    def test_output_is_deterministic(self):
        target = self.directory / 'sweep.json'
        self.run_command('verify_functional', gammas='0,0.5', output_path=str(target))
        first = target.read_bytes()
        cache.clear()
        self.run_command('verify_functional', gammas='0,0.5', output_path=str(target))
        self.assertEqual(target.read_bytes(), first)

    def test_tolerance_failure(self):
        self.assert_exit(1, 'verify_functional', gammas='0.5', probability_tolerance=1e-2, tolerance=1e-12)

    def test_envelope_round_trip(self):
        self.run_command('verify_functional', gammas='0.25,0.5', workers=2)
        first = self.envelope('verify_functional')
        cache.clear()
        replay = self.directory / 'replay.json'
        self.run_command('verify_functional', config_file=str(self.directory / 'verify_functional.json'),
                         output_path=str(replay))
        second = json.loads(replay.read_text())
        self.assertEqual(second['records'], first['records'])
        self.assertEqual(second['config_echo']['gammas'], [0.25, 0.5])
        self.assertEqual(second['config_echo']['workers'], 2)


class FitCommandTests(CommandTestCase):
    def test_synthetic(self):
        self.run_command('fit_exponent', synthetic='exp:-2')
        records = self.envelope('fit_exponent')['records']
        self.assertAlmostEqual(records['c_estimate'], -2.0, places=9)
        self.assertTrue(records['synthetic'])

    def test_measured(self):
        self.run_command('fit_exponent', gammas='0.1,0.2,0.4,0.8')
        records = self.envelope('fit_exponent')['records']
        self.assertAlmostEqual(records['c_estimate'], -math.pi, delta=0.01)
        self.assertLessEqual(abs(records['deviation_from_minus_pi']), 0.01)
        self.assertGreater(records['standard_error'], 0.0)
        self.assertLess(records['standard_error'], 0.01)

    def test_insufficient_data(self):
        self.assert_exit(2, 'fit_exponent', gammas='0.1')
        self.assert_exit(2, 'fit_exponent', synthetic='gauss:1')


class RecurrenceCommandTests(CommandTestCase):
    def test_closed_form(self):
        self.run_command('recurrence', a1='-1', n=10)
        records = self.envelope('recurrence')['records']
        self.assertEqual(len(records['closed_form_match']), 11)
        self.assertTrue(all(records['closed_form_match']))
        self.assertEqual(records['coefficients'][:4], ['1', '-1', '1/2', '-1/6'])

    def test_zero_seed(self):
        self.run_command('recurrence', a1='0', n=10)
        self.assertEqual(self.envelope('recurrence')['records']['coefficients'][1:], ['0'] * 10)

    def test_bad_input(self):
        self.assert_exit(2, 'recurrence', n=0)
        self.assert_exit(2, 'recurrence', a1='one half')

    def test_config_file_and_flag_precedence(self):
        config = self.directory / 'run.env'
        config.write_text('a1=1/2\nn=3\ntolerance=0.5\n')
        self.run_command('recurrence', config_file=str(config), n=5)
        envelope = self.envelope('recurrence')
        self.assertEqual(envelope['config_echo']['a1'], '1/2')
        self.assertEqual(envelope['config_echo']['n'], 5)
        self.assertEqual(envelope['config_echo']['tolerance'], 0.5)
        self.assertEqual(len(envelope['records']['coefficients']), 6)

    def test_unknown_config_key(self):
        config = self.directory / 'run.env'
        config.write_text('colour=blue\n')
        self.assert_exit(2, 'recurrence', config_file=str(config))

    def test_envelope_round_trip(self):
        self.run_command('recurrence', a1='-355/113', n=12)
        first = self.envelope('recurrence')
        replay = self.directory / 'replay.json'
        self.run_command('recurrence', config_file=str(self.directory / 'recurrence.json'), output_path=str(replay))
        second = json.loads(replay.read_text())
        self.assertEqual(second['records'], first['records'])
        self.assertEqual(second['config_echo']['a1'], '-355/113')


class PlotCommandTests(CommandTestCase):
    def test_sweep_plot(self):
        self.run_command('verify_functional', gammas='0.25,0.5,1')
        target = self.directory / 'sweep.svg'
        output = self.run_command('plot', input_path=str(self.directory / 'verify_functional.json'),
                                  output_path=str(target), kind='sweep')
        self.assertIn('sweep plot with 3 points', output)
        svg = target.read_text()
        self.assertIn('<svg', svg)
        first = target.read_bytes()
        self.run_command('plot', input_path=str(self.directory / 'verify_functional.json'),
                         output_path=str(target), kind='sweep')
        self.assertEqual(target.read_bytes(), first)

    def test_residual_plot_of_curvature_report(self):
        self.run_command('verify_integrability')
        source = self.directory / 'verify_integrability.json'
        output = self.run_command('plot', input_path=str(source), kind='residual')
        self.assertIn('176 points', output)
        self.assertTrue(source.with_suffix('.residual.svg').is_file())

    def test_convergence_plot(self):
        self.run_command('simulate', model='lz', g=0.7)
        self.run_command('plot', input_path=str(self.directory / 'simulate.json'), kind='convergence')
        self.assertTrue((self.directory / 'simulate.convergence.svg').is_file())

    def test_mismatch_and_empty(self):
        self.run_command('recurrence')
        source = str(self.directory / 'recurrence.json')
        with self.assertRaises(CommandError) as caught:
            call_command('plot', input_path=source, kind='sweep', stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)

        empty = self.directory / 'empty.json'
        empty.write_text(json.dumps({'command': 'verify_functional', 'records': {}}))
        with self.assertRaises(CommandError) as caught:
            call_command('plot', input_path=str(empty), kind='sweep', stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)


class OutputTests(CommandTestCase):
    def test_csv_rendering(self):
        rows = [{'gamma': 0.1, 'p': 1 / 3, 'p_error': None, 'p_double_gamma': 0.5, 'residual': -1e-20}]
        self.assertEqual(
            render_sweep_csv(rows),
            'gamma,p,p_error,p_double_gamma,residual\n0.1,0.333333333333,nan,0.5,-1e-20\n',
        )

    def test_jsonable(self):
        self.assertEqual(jsonable({'x': (1.5, float('nan')), 'z': 1 + 2j}), {'x': [1.5, None], 'z': {'real': 1.0, 'imag': 2.0}})

    def test_atomic_write_replaces(self):
        target = self.directory / 'nested' / 'out.txt'
        atomic_write(target, 'one')
        atomic_write(target, 'two')
        self.assertEqual(target.read_text(), 'two')
        self.assertEqual([path.name for path in target.parent.iterdir()], ['out.txt'])

    def test_resolve_config_rejects_invalid_values(self):
        with self.assertRaises(DomainError):
            resolve_config('verify_deformation', {'T': -1.0})

    def test_run_keeps_its_points(self):
        self.run_command('verify_functional', gammas='0')
        run = ExperimentRun.objects.get()
        self.assertEqual(run.command, ExperimentRun.Command.VERIFY_FUNCTIONAL)
        self.assertEqual(run.points.count(), 1)
        self.assertEqual(run.points.get().gamma, 0.0)
