import uuid

from django.core.exceptions import ValidationError
from django.db import models
from django.utils import timezone
from django.utils.translation import gettext_lazy as _

from waves.io_persist import LabJSONEncoder, config_hash


class StationaryRecord(models.Model):
    """
    Model representing one computed member Q_k of the stationary family for a given nonlinearity power.
    """
    m = models.PositiveSmallIntegerField(default=3)  # Nonlinearity |u|^(2m) u
    k = models.PositiveSmallIntegerField()  # Number of sign changes
    s_k = models.FloatField()  # (k+1)-th zero of h
    c_k = models.FloatField()  # Harmonic tail coefficient, r Q_k -> c_k
    energy_direct = models.FloatField()
    energy_scaled = models.FloatField()
    pohozaev_gap = models.FloatField()
    r_tab_max = models.FloatField(default=1e3)  # Right end of the tabulated window
    computed_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['m', 'k']
        constraints = [
            models.UniqueConstraint(fields=['m', 'k'], name='unique_stationary_per_m_k'),
        ]

    def __str__(self):
        return f"Q_{self.k} (m={self.m})"

    def clean(self):
        """
        The two energy evaluations of the same profile must agree in sign.
        """
        if self.energy_direct * self.energy_scaled < 0:
            raise ValidationError({'energy_scaled': _("Direct and scaled energies have opposite signs.")})


class ExperimentRun(models.Model):
    """
    Model representing one invocation of a lab command together with its resolved configuration.
    """
    STATIONARY = 'stationary'
    LINEAR_DEMO = 'linear_demo'
    EVOLVE = 'evolve'
    RESOLUTION = 'resolution'
    VIRIAL = 'virial'
    SWEEP = 'sweep'
    ONE_PASS = 'one_pass'
    CHANNELS = 'channels'
    KIND_CHOICES = [
        (STATIONARY, 'Stationary family'),
        (LINEAR_DEMO, 'Linear demo'),
        (EVOLVE, 'Nonlinear evolution'),
        (RESOLUTION, 'Soliton resolution'),
        (VIRIAL, 'Virial series'),
        (SWEEP, 'Dichotomy sweep'),
        (ONE_PASS, 'One-pass exit'),
        (CHANNELS, 'Energy channels'),
    ]

    PENDING = 'pending'
    COMPLETED = 'completed'
    BLOW_UP = 'blow_up'
    NUMERICAL_FAILURE = 'numerical_failure'
    UNDECIDED = 'undecided'
    FAILED = 'failed'
    STATUS_CHOICES = [
        (PENDING, 'Pending'),
        (COMPLETED, 'Completed'),
        (BLOW_UP, 'Blow-up'),
        (NUMERICAL_FAILURE, 'Numerical failure'),
        (UNDECIDED, 'Undecided'),
        (FAILED, 'Failed'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default=PENDING)
    config = models.JSONField(default=dict)  # Fully resolved configuration
    config_hash = models.CharField(max_length=64, blank=True)  # SHA-256 of the canonical config, filled on save
    output_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)
    event_time = models.FloatField(null=True, blank=True)  # Time of the terminal event of the last trajectory
    max_energy_drift = models.FloatField(null=True, blank=True)
    summary = models.JSONField(default=dict, blank=True, encoder=LabJSONEncoder)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.kind} - {self.id}"

    def clean(self):
        """
        A stored hash must match the stored configuration.
        """
        if self.config_hash and self.config_hash != config_hash(self.config):
            raise ValidationError({'config_hash': _("The hash does not match the stored configuration.")})

    def finish(self, status, summary=None):
        """
        Marks the run as finished with the given status and stores its summary.
        """
        self.status = status
        self.finished_at = timezone.now()
        if summary is not None:
            self.summary = summary
        self.save(update_fields=['status', 'finished_at', 'summary'])


class EnergySample(models.Model):
    """
    Model representing one entry of a trajectory's energy log.
    """
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='energy_samples')
    label = models.CharField(max_length=40, default='main')  # Trajectory within the run (e.g. forward/backward)
    t = models.FloatField()
    energy = models.FloatField()

    class Meta:
        ordering = ['label', 't']
        constraints = [
            models.UniqueConstraint(fields=['run', 'label', 't'], name='unique_energy_sample_per_time'),
        ]

    def __str__(self):
        return f"{self.run_id} {self.label} t={self.t}: {self.energy}"


class SnapshotRecord(models.Model):
    """
    Model indexing a snapshot CSV written for a run.
    """
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='snapshots')
    label = models.CharField(max_length=40, default='main')
    time_tag = models.FloatField()
    path = models.CharField(max_length=500)
    energy = models.FloatField()

    class Meta:
        ordering = ['label', 'time_tag']

    def __str__(self):
        return self.path
