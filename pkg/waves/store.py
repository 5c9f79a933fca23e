"""
Registry writes: every command invocation is an ExperimentRun row, trajectories append
their energy logs and snapshot indexes atomically.
"""
import logging
import os

from django.conf import settings
from django.db import transaction

from waves import io_persist
from waves.models import EnergySample, ExperimentRun, SnapshotRecord, StationaryRecord
from waves.nonlinear_wave import EventKind

logger = logging.getLogger(__name__)

EVENT_STATUS = {
    EventKind.COMPLETED: ExperimentRun.COMPLETED,
    EventKind.BLOW_UP: ExperimentRun.BLOW_UP,
    EventKind.NUMERICAL_FAILURE: ExperimentRun.NUMERICAL_FAILURE,
}


def start_run(kind, config, output_dir=None):
    """
    Creates the registry row of a new run and its output directory.
    """
    run = ExperimentRun(kind=kind, config=config)
    run.output_dir = output_dir or os.path.join(settings.WAVE_LAB_OUTPUT_DIR, f"{kind}-{run.id}")
    os.makedirs(run.output_dir, exist_ok=True)
    run.save()
    logger.info("Started %s run %s in %s", kind, run.id, run.output_dir)
    return run


def record_trajectory(run, trajectory, output_dir=None, label='main', write_snapshots=True):
    """
    Writes the snapshot CSVs and the energy log of a trajectory, then appends the
    matching rows and updates the run in one transaction.
    """
    output_dir = output_dir or run.output_dir
    m = trajectory.config.m
    snapshots = []
    for index, (snapshot, (_, energy)) in enumerate(zip(trajectory.snapshots, trajectory.energy_log)):
        path = os.path.join(output_dir, f"{label}_snapshot_{index:05d}.csv")
        if write_snapshots:
            io_persist.write_snapshot(snapshot, path, m=m)
        snapshots.append(SnapshotRecord(run=run, label=label, time_tag=snapshot.time_tag, path=path, energy=energy))
    io_persist.write_energy_log(trajectory, os.path.join(output_dir, f"{label}_energy.csv"))

    drift = trajectory.max_energy_drift()
    with transaction.atomic():
        locked = ExperimentRun.objects.select_for_update().get(pk=run.pk)
        EnergySample.objects.bulk_create(
            [EnergySample(run=locked, label=label, t=t, energy=energy) for t, energy in trajectory.energy_log]
        )
        if write_snapshots:
            SnapshotRecord.objects.bulk_create(snapshots)
        locked.max_energy_drift = max(drift, locked.max_energy_drift or 0.0)
        locked.event_time = trajectory.event.time
        locked.status = EVENT_STATUS[trajectory.event.kind]
        locked.save(update_fields=['max_energy_drift', 'event_time', 'status'])
    run.refresh_from_db()
    logger.info("Recorded %s snapshots of run %s (%s, drift %.3e)", len(snapshots), run.id, label, drift)
    return run


def record_stationary(profile, energies):
    """
    Upserts the StationaryRecord of a profile; `energies` holds energy_direct, energy_scaled and pohozaev_gap.
    """
    record, created = StationaryRecord.objects.update_or_create(
        m=profile.m,
        k=profile.k,
        defaults={
            's_k': profile.s_k,
            'c_k': profile.c_k,
            'r_tab_max': profile.r_tab_max,
            'energy_direct': energies['energy_direct'],
            'energy_scaled': energies['energy_scaled'],
            'pohozaev_gap': energies['pohozaev_gap'],
        },
    )
    logger.debug("%s %s", "Created" if created else "Updated", record)
    return record
