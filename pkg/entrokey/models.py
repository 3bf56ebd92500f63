"""
Run registry.

Each pipeline run leaves a manifest.json in its output directory; when
run recording is enabled the same information is mirrored here so runs
can be browsed and compared in the admin.
"""

from django.db import models


class PipelineRun(models.Model):
    """One invocation of the full pipeline."""

    class Status(models.TextChoices):
        RUNNING = 'RUNNING', 'Running'
        OK = 'OK', 'Completed'
        FAILED = 'FAILED', 'Failed'

    output_dir = models.CharField(max_length=500)
    config_hash = models.CharField(max_length=64, help_text="SHA-256 of the validated run configuration")
    seed = models.DecimalField(max_digits=20, decimal_places=0, help_text="Global seed (64-bit unsigned)")
    status = models.CharField(max_length=10, choices=Status.choices, default=Status.RUNNING)
    failed_stage = models.CharField(max_length=30, blank=True)
    message = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'Pipeline Run'
        verbose_name_plural = 'Pipeline Runs'
        indexes = [
            models.Index(fields=['config_hash']),
        ]

    def __str__(self):
        return f"{self.output_dir} [{self.status}]"


class RunArtifact(models.Model):
    """A file written by a pipeline stage, with its content hash."""
    run = models.ForeignKey(
        PipelineRun,
        on_delete=models.CASCADE,
        related_name='artifacts'
    )
    stage = models.CharField(max_length=30)
    path = models.CharField(max_length=500, help_text="Path relative to the run output directory")
    sha256 = models.CharField(max_length=64)
    size = models.PositiveBigIntegerField(default=0)

    class Meta:
        ordering = ['run', 'id']
        verbose_name = 'Run Artifact'
        verbose_name_plural = 'Run Artifacts'
        constraints = [
            models.UniqueConstraint(
                fields=['run', 'path'],
                name='unique_artifact_per_run'
            )
        ]

    def __str__(self):
        return f"{self.stage}: {self.path}"
