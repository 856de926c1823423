import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('command', models.CharField(choices=[('simulate', 'Simulate'), ('verify_integrability', 'Verify integrability'), ('verify_deformation', 'Verify deformation'), ('verify_functional', 'Verify functional equation'), ('fit_exponent', 'Fit exponent'), ('recurrence', 'Recurrence')], max_length=32)),
                ('config', models.JSONField()),
                ('payload', models.JSONField()),
                ('exit_code', models.PositiveSmallIntegerField(default=0)),
                ('output_path', models.CharField(blank=True, max_length=500)),
                ('tool_version', models.CharField(max_length=20)),
            ],
            options={
                'abstract': False,
                'get_latest_by': 'created_at',
                'indexes': [models.Index(fields=['command', 'created_at'], name='experiments_command_7c1f0e_idx')],
            },
        ),
        migrations.CreateModel(
            name='SweepPoint',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('position', models.PositiveIntegerField()),
                ('gamma', models.FloatField()),
                ('p', models.FloatField(null=True)),
                ('p_error', models.FloatField(null=True)),
                ('p_double_gamma', models.FloatField(null=True)),
                ('residual', models.FloatField(null=True)),
                ('route', models.CharField(max_length=16)),
                ('tau', models.FloatField(null=True)),
                ('error', models.TextField(blank=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='points', to='experiments.experimentrun')),
            ],
            options={
                'abstract': False,
                'get_latest_by': 'created_at',
                'ordering': ['run', 'position'],
                'constraints': [models.UniqueConstraint(fields=('run', 'position'), name='unique_sweep_position')],
            },
        ),
    ]
