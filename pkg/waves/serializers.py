import math

from rest_framework import serializers

from waves.initial_data import DATA_KINDS, GAUSSIAN, RADIATION_REBUILT, STATIONARY_K, support_radius
from waves.models import EnergySample, ExperimentRun, SnapshotRecord, StationaryRecord
from waves.nonlinear_wave import EvolutionConfig

KIND_FIELDS = {
    GAUSSIAN: ('amplitude', 'center', 'width', 'velocity'),
    RADIATION_REBUILT: ('amplitude', 'center', 'width'),
    STATIONARY_K: ('k', 'sign', 'perturbation'),
}


class GaussianBumpSerializer(serializers.Serializer):
    """
    Serializer for a Gaussian bump, used as data on its own or as a perturbation of Q_k.
    """
    amplitude = serializers.FloatField(default=1.0)
    center = serializers.FloatField(default=3.0, min_value=1.0)
    width = serializers.FloatField(default=1.0)
    velocity = serializers.FloatField(default=0.0)

    def validate_width(self, value):
        if value <= 0:
            raise serializers.ValidationError("width must be positive.")
        return value


class DataRecipeSerializer(GaussianBumpSerializer):
    """
    Serializer for an initial-data recipe. Only the keys relevant to the kind are kept.
    """
    kind = serializers.ChoiceField(
        choices=DATA_KINDS,
        error_messages={
            'invalid_choice': f'"{{input}}" is not a valid data kind; admissible kinds: {", ".join(DATA_KINDS)}.',
        },
    )
    k = serializers.IntegerField(default=0, min_value=0, max_value=8)  # Index of the stationary solution
    sign = serializers.ChoiceField(choices=[1, -1], default=1)
    perturbation = GaussianBumpSerializer(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        """
        Drops the parameters that do not belong to the requested kind.
        """
        kind = attrs['kind']
        recipe = {'kind': kind}
        for key in KIND_FIELDS[kind]:
            value = attrs.get(key)
            recipe[key] = dict(value) if isinstance(value, dict) else value
        return recipe


class ExperimentParametersSerializer(serializers.Serializer):
    """
    Serializer for the command-specific parameters of a configuration. Every field has a default.
    """
    lambda_grid = serializers.ListField(child=serializers.FloatField(), default=list)
    family_k_max = serializers.IntegerField(default=4, min_value=0, max_value=8)
    workers = serializers.IntegerField(default=None, allow_null=True, min_value=1)
    radius = serializers.FloatField(default=1.0, min_value=1.0)
    radii = serializers.ListField(child=serializers.FloatField(min_value=1.0), default=lambda: [1.0, 2.0, 5.0])
    times = serializers.ListField(child=serializers.FloatField(min_value=0.0), default=lambda: [0.0, 1.0, 2.0, 5.0, 10.0])
    k = serializers.IntegerField(default=0, min_value=0, max_value=8)
    delta_fraction = serializers.FloatField(default=1e-2)  # delta as a fraction of ||Q_k||
    epsilon_fraction = serializers.FloatField(default=None, allow_null=True)  # None means 10 * delta
    directions = serializers.IntegerField(default=5, min_value=1)
    seed = serializers.IntegerField(default=0, min_value=0)
    t_extract = serializers.FloatField(default=None, allow_null=True)  # None means the final time
    time_offset = serializers.FloatField(default=0.0, min_value=0.0)
    k_max = serializers.IntegerField(default=4, min_value=0, max_value=8)  # Stationary family size
    r_tab_max = serializers.FloatField(default=1e3, min_value=10.0)

    def validate_lambda_grid(self, value):
        if any(amplitude <= 0 for amplitude in value):
            raise serializers.ValidationError("amplitudes must be positive.")
        return sorted(value)

    def validate_delta_fraction(self, value):
        if value <= 0:
            raise serializers.ValidationError("delta_fraction must be positive.")
        return value

    def validate(self, attrs):
        epsilon = attrs.get('epsilon_fraction')
        if epsilon is not None and epsilon <= attrs['delta_fraction']:
            raise serializers.ValidationError({'epsilon_fraction': "epsilon_fraction must exceed delta_fraction."})
        return attrs


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Serializer for a full experiment configuration: evolution parameters, data recipe and
    command-specific parameters. `domain_end` defaults to the smallest causally admissible
    value on the grid; an explicit smaller value is rejected with that bound.
    """
    m = serializers.IntegerField(default=3, min_value=3)
    dr = serializers.FloatField(default=1e-3)
    t_final = serializers.FloatField(default=10.0, min_value=0.0)
    domain_end = serializers.FloatField(default=None, allow_null=True)
    snapshot_stride = serializers.IntegerField(default=100, min_value=1)
    blowup_threshold = serializers.FloatField(default=1e6)
    energy_tolerance = serializers.FloatField(default=1e-4)
    data = DataRecipeSerializer()
    experiment = ExperimentParametersSerializer()

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.minimal_domain_end = None

    def to_internal_value(self, data):
        # nested defaults only apply when the block is present
        if isinstance(data, dict) and data.get('experiment') is None:
            data = {**data, 'experiment': {}}
        return super().to_internal_value(data)

    def validate_dr(self, value):
        if not 0 < value <= 0.1:
            raise serializers.ValidationError("dr must lie in (0, 0.1].")
        return value

    def validate_blowup_threshold(self, value):
        if value <= 0:
            raise serializers.ValidationError("blowup_threshold must be positive.")
        return value

    def validate_energy_tolerance(self, value):
        if value <= 0:
            raise serializers.ValidationError("energy_tolerance must be positive.")
        return value

    def validate(self, attrs):
        """
        Resolves domain_end against the causal bound support + t_final + 2 dr, rounded up to the grid.
        """
        dr = attrs['dr']
        bound = attrs['t_final'] + support_radius(attrs['data']) + 2.0 * dr
        minimal = 1.0 + math.ceil((bound - 1.0) / dr - 1e-9) * dr
        self.minimal_domain_end = minimal
        requested = attrs.get('domain_end')
        if requested is None:
            attrs['domain_end'] = minimal
        elif requested < bound - 1e-12:
            raise serializers.ValidationError({
                'domain_end': f"domain_end={requested!r} is below the causal bound; "
                              f"the minimal admissible domain_end is {minimal!r}.",
            })
        else:
            attrs['domain_end'] = 1.0 + round((requested - 1.0) / dr) * dr
        return attrs

    def evolution_config(self):
        """
        EvolutionConfig built from the validated data.
        """
        data = self.validated_data
        return EvolutionConfig(
            m=data['m'],
            dr=data['dr'],
            t_final=data['t_final'],
            domain_end=data['domain_end'],
            snapshot_stride=data['snapshot_stride'],
            blowup_threshold=data['blowup_threshold'],
            energy_tolerance=data['energy_tolerance'],
        )


class StationaryRecordSerializer(serializers.ModelSerializer):
    """
    Serializer for the StationaryRecord model.
    """
    class Meta:
        model = StationaryRecord
        fields = ['id', 'm', 'k', 's_k', 'c_k', 'energy_direct', 'energy_scaled', 'pohozaev_gap', 'r_tab_max',
                  'computed_at']


class EnergySampleSerializer(serializers.ModelSerializer):
    class Meta:
        model = EnergySample
        fields = ['label', 't', 'energy']


class SnapshotRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = SnapshotRecord
        fields = ['id', 'label', 'time_tag', 'path', 'energy']


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Serializer for the ExperimentRun model, with the number of stored snapshots.
    """
    snapshot_count = serializers.IntegerField(source='snapshots.count', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'kind', 'status', 'config', 'config_hash', 'output_dir', 'created_at', 'finished_at',
                  'event_time', 'max_energy_drift', 'summary', 'snapshot_count']
        read_only_fields = fields
