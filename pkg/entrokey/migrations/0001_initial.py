# Generated by Django 5.2.10 on 2026-10-18 16:40

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='PipelineRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('output_dir', models.CharField(max_length=500)),
                ('config_hash', models.CharField(help_text='SHA-256 of the validated run configuration', max_length=64)),
                ('seed', models.DecimalField(decimal_places=0, help_text='Global seed (64-bit unsigned)', max_digits=20)),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('OK', 'Completed'), ('FAILED', 'Failed')], default='RUNNING', max_length=10)),
                ('failed_stage', models.CharField(blank=True, max_length=30)),
                ('message', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Pipeline Run',
                'verbose_name_plural': 'Pipeline Runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['config_hash'], name='entrokey_pi_config__6d1f2e_idx')],
            },
        ),
        migrations.CreateModel(
            name='RunArtifact',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('stage', models.CharField(max_length=30)),
                ('path', models.CharField(help_text='Path relative to the run output directory', max_length=500)),
                ('sha256', models.CharField(max_length=64)),
                ('size', models.PositiveBigIntegerField(default=0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='artifacts', to='entrokey.pipelinerun')),
            ],
            options={
                'verbose_name': 'Run Artifact',
                'verbose_name_plural': 'Run Artifacts',
                'ordering': ['run', 'id'],
                'constraints': [models.UniqueConstraint(fields=('run', 'path'), name='unique_artifact_per_run')],
            },
        ),
    ]
