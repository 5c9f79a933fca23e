from django.contrib import admin
from waves.models import EnergySample, ExperimentRun, SnapshotRecord, StationaryRecord


class SnapshotRecordInline(admin.TabularInline):
    """
    Inline for displaying the snapshot index within the ExperimentRun admin.
    """
    model = SnapshotRecord
    extra = 0  # No extra empty forms
    can_delete = True  # Deleting a record also removes its file
    readonly_fields = ['label', 'time_tag', 'path', 'energy']


class ExperimentRunAdmin(admin.ModelAdmin):
    """
    Admin interface for recorded runs.
    """
    inlines = [SnapshotRecordInline]
    list_display = ('id', 'kind', 'status', 'created_at', 'finished_at', 'max_energy_drift')
    list_filter = ('kind', 'status')
    search_fields = ['id', 'config_hash', 'output_dir']
    readonly_fields = ('config_hash', 'created_at', 'finished_at', 'event_time', 'max_energy_drift')


class EnergySampleAdmin(admin.ModelAdmin):
    list_display = ['run', 'label', 't', 'energy']
    list_filter = ['label']
    search_fields = ['run__id']


class StationaryRecordAdmin(admin.ModelAdmin):
    """
    Admin interface for the stationary family table.
    """
    list_display = ['m', 'k', 's_k', 'c_k', 'energy_direct', 'energy_scaled', 'pohozaev_gap']
    list_filter = ['m']
    readonly_fields = ['computed_at']


admin.site.register(ExperimentRun, ExperimentRunAdmin)
admin.site.register(EnergySample, EnergySampleAdmin)
admin.site.register(StationaryRecord, StationaryRecordAdmin)
