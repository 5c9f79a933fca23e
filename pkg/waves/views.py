from rest_framework import viewsets
from rest_framework.decorators import action
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from waves.models import ExperimentRun, StationaryRecord
from waves.serializers import (
    EnergySampleSerializer,
    ExperimentRunSerializer,
    SnapshotRecordSerializer,
    StationaryRecordSerializer,
)


class ExperimentRunViewSet(viewsets.ReadOnlyModelViewSet):
    """
    ViewSet for browsing recorded runs.
    - Supports filtering by `kind` and `status` query parameters.
    - Exposes the energy log and the snapshot index of a run as nested actions.
    """
    queryset = ExperimentRun.objects.all()
    serializer_class = ExperimentRunSerializer
    permission_classes = [IsAuthenticated]

    def get_queryset(self):
        """
        Narrows the runs to the requested kind and status, when given.
        """
        queryset = super().get_queryset()
        kind = self.request.query_params.get('kind')
        if kind:
            queryset = queryset.filter(kind=kind)
        run_status = self.request.query_params.get('status')
        if run_status:
            queryset = queryset.filter(status=run_status)
        return queryset

    @action(detail=True, methods=['get'], url_path='energy-log')
    def energy_log(self, request, pk=None):
        """
        Energy samples of the run, optionally restricted to one trajectory `label`.
        """
        samples = self.get_object().energy_samples.all()
        label = request.query_params.get('label')
        if label:
            samples = samples.filter(label=label)
        return Response(EnergySampleSerializer(samples, many=True).data)

    @action(detail=True, methods=['get'])
    def snapshots(self, request, pk=None):
        """
        Snapshot files written for the run.
        """
        records = self.get_object().snapshots.all()
        return Response(SnapshotRecordSerializer(records, many=True).data)


class StationaryRecordViewSet(viewsets.ReadOnlyModelViewSet):
    """
    ViewSet for the stored stationary family; `?m=` selects the nonlinearity power.
    """
    queryset = StationaryRecord.objects.all()
    serializer_class = StationaryRecordSerializer
    permission_classes = [IsAuthenticated]

    def get_queryset(self):
        queryset = super().get_queryset()
        m = self.request.query_params.get('m')
        if m and m.isdigit():
            queryset = queryset.filter(m=int(m))
        return queryset
