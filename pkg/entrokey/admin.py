"""
Django Admin configuration for the run registry.
"""

from django.contrib import admin
from .models import PipelineRun, RunArtifact


class RunArtifactInline(admin.TabularInline):
    model = RunArtifact
    extra = 0
    readonly_fields = ['stage', 'path', 'sha256', 'size']


@admin.register(PipelineRun)
class PipelineRunAdmin(admin.ModelAdmin):
    list_display = ['output_dir', 'status', 'failed_stage', 'seed', 'created_at', 'finished_at']
    list_filter = ['status', 'created_at']
    search_fields = ['output_dir', 'config_hash', 'message']
    ordering = ['-created_at']
    date_hierarchy = 'created_at'
    inlines = [RunArtifactInline]


@admin.register(RunArtifact)
class RunArtifactAdmin(admin.ModelAdmin):
    list_display = ['run', 'stage', 'path', 'sha256', 'size']
    list_filter = ['stage']
    search_fields = ['path', 'sha256']
    raw_id_fields = ['run']
