from django.db import models
from apps.utils.base_model import AbstractBaseModel


class ExperimentRun(AbstractBaseModel):
    """
    One invocation of a command: the resolved configuration, the records it
    produced and the exit code it finished with.
    """

    class Command(models.TextChoices):
        SIMULATE = 'simulate', 'Simulate'
        VERIFY_INTEGRABILITY = 'verify_integrability', 'Verify integrability'
        VERIFY_DEFORMATION = 'verify_deformation', 'Verify deformation'
        VERIFY_FUNCTIONAL = 'verify_functional', 'Verify functional equation'
        FIT_EXPONENT = 'fit_exponent', 'Fit exponent'
        RECURRENCE = 'recurrence', 'Recurrence'

    command = models.CharField(max_length=32, choices=Command.choices)
    config = models.JSONField()
    payload = models.JSONField()
    exit_code = models.PositiveSmallIntegerField(default=0)
    output_path = models.CharField(max_length=500, blank=True)
    tool_version = models.CharField(max_length=20)

    class Meta(AbstractBaseModel.Meta):
        indexes = [models.Index(fields=['command', 'created_at'], name='experiments_command_7c1f0e_idx')]

    @property
    def passed(self):
        return self.exit_code == 0

    def __str__(self):
        return f"{self.command} run {self.id} (exit {self.exit_code})"


class SweepPoint(AbstractBaseModel):
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='points')
    position = models.PositiveIntegerField()
    gamma = models.FloatField()
    p = models.FloatField(null=True)
    p_error = models.FloatField(null=True)
    p_double_gamma = models.FloatField(null=True)
    residual = models.FloatField(null=True)
    route = models.CharField(max_length=16)
    tau = models.FloatField(null=True)
    error = models.TextField(blank=True)

    class Meta(AbstractBaseModel.Meta):
        ordering = ['run', 'position']
        constraints = [
            models.UniqueConstraint(fields=['run', 'position'], name='unique_sweep_position'),
        ]

    def __str__(self):
        return f"gamma={self.gamma} of run {self.run_id}"
