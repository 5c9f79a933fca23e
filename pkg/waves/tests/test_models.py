import os

import numpy as np
from django.core.exceptions import ValidationError
from django.db import IntegrityError
from django.test import TestCase

from waves import io_persist, store
from waves.emden_fowler import stationary_family
from waves.models import EnergySample, ExperimentRun, SnapshotRecord, StationaryRecord
from waves.tests.setup_test import OutputDirMixin, short_trajectory


class ExperimentRunModelTests(OutputDirMixin, TestCase):
    """
    Tests for the ExperimentRun model and its signal receivers.
    """

    def setUp(self):
        super().setUp()
        self.config = {'m': 3, 'dr': 0.01, 'data': {'kind': 'gaussian'}}
        self.run = ExperimentRun.objects.create(kind=ExperimentRun.EVOLVE, config=self.config)

    def test_hash_filled_on_save(self):
        """
        Test that the pre_save receiver stamps the configuration hash.
        """
        self.assertEqual(self.run.config_hash, io_persist.config_hash(self.config))
        self.assertEqual(self.run.status, ExperimentRun.PENDING)

    def test_hash_follows_config_changes(self):
        self.run.config = {**self.config, 'dr': 0.02}
        self.run.save()
        self.run.refresh_from_db()
        self.assertEqual(self.run.config_hash, io_persist.config_hash(self.run.config))

    def test_clean_rejects_mismatched_hash(self):
        self.run.config_hash = '0' * 64
        with self.assertRaises(ValidationError):
            self.run.clean()

    def test_finish_stores_status_and_summary(self):
        self.run.finish(ExperimentRun.COMPLETED, {'drift': np.float64(1e-6), 'count': np.int64(4)})
        self.run.refresh_from_db()
        self.assertEqual(self.run.status, ExperimentRun.COMPLETED)
        self.assertIsNotNone(self.run.finished_at)
        self.assertEqual(self.run.summary, {'drift': 1e-6, 'count': 4})

    def test_snapshot_file_removed_with_record(self):
        """
        Test that deleting a SnapshotRecord removes its CSV.
        """
        # Given: a record pointing at an existing file
        path = os.path.join(self.output_root, 'orphan.csv')
        with open(path, 'w') as handle:
            handle.write('r,u,ut\n')
        record = SnapshotRecord.objects.create(run=self.run, time_tag=0.0, path=path, energy=0.0)

        # When: deleting it
        record.delete()

        # Then: the file is gone
        self.assertFalse(os.path.exists(path))


class StoreTests(OutputDirMixin, TestCase):
    """
    Tests for the registry writes in waves.store.
    """

    @classmethod
    def setUpTestData(cls):
        cls.trajectory = short_trajectory()

    def test_start_run_creates_directory(self):
        run = store.start_run(ExperimentRun.VIRIAL, {'m': 3})
        self.assertTrue(os.path.isdir(run.output_dir))
        self.assertTrue(run.output_dir.startswith(self.output_root))
        self.assertIn(str(run.id), run.output_dir)

    def test_record_trajectory(self):
        """
        Test that snapshots and energies are written to disk and indexed in the registry.
        """
        # Given: a new run
        run = store.start_run(ExperimentRun.EVOLVE, {'m': 3})

        # When: recording a completed trajectory
        store.record_trajectory(run, self.trajectory)

        # Then: one row per snapshot, readable files and an updated run
        self.assertEqual(run.status, ExperimentRun.COMPLETED)
        self.assertEqual(run.event_time, self.trajectory.event.time)
        self.assertEqual(run.max_energy_drift, self.trajectory.max_energy_drift())
        self.assertEqual(EnergySample.objects.filter(run=run).count(), len(self.trajectory.energy_log))
        records = list(run.snapshots.all())
        self.assertEqual(len(records), len(self.trajectory.snapshots))
        stored = io_persist.read_snapshot(records[-1].path)
        np.testing.assert_array_equal(stored.u, self.trajectory.snapshots[-1].u)
        self.assertTrue(os.path.exists(os.path.join(run.output_dir, 'main_energy.csv')))

    def test_labels_keep_trajectories_apart(self):
        run = store.start_run(ExperimentRun.CHANNELS, {'m': 3})
        store.record_trajectory(run, self.trajectory, label='forward')
        store.record_trajectory(run, self.trajectory, label='backward', write_snapshots=False)
        self.assertEqual(run.energy_samples.filter(label='backward').count(), len(self.trajectory.energy_log))
        self.assertEqual(run.snapshots.count(), len(self.trajectory.snapshots))
        self.assertFalse(os.path.exists(os.path.join(run.output_dir, 'backward_snapshot_00000.csv')))

    def test_duplicate_energy_sample_rejected(self):
        run = store.start_run(ExperimentRun.EVOLVE, {'m': 3})
        EnergySample.objects.create(run=run, t=0.0, energy=1.0)
        with self.assertRaises(IntegrityError):
            EnergySample.objects.create(run=run, t=0.0, energy=2.0)


class StationaryRecordTests(TestCase):
    """
    Tests for the stored stationary family.
    """

    def setUp(self):
        self.profile = stationary_family(3, 0)[0]
        self.energies = {'energy_direct': 1.0, 'energy_scaled': 1.0, 'pohozaev_gap': 0.0}

    def test_record_stationary_upserts(self):
        store.record_stationary(self.profile, self.energies)
        store.record_stationary(self.profile, {**self.energies, 'energy_scaled': 1.5})
        self.assertEqual(StationaryRecord.objects.count(), 1)
        record = StationaryRecord.objects.get(m=3, k=0)
        self.assertEqual(record.energy_scaled, 1.5)
        self.assertEqual(record.c_k, self.profile.c_k)
        self.assertEqual(str(record), 'Q_0 (m=3)')

    def test_clean_rejects_opposite_energies(self):
        record = StationaryRecord(m=3, k=1, s_k=1.0, c_k=1.0, energy_direct=1.0, energy_scaled=-1.0, pohozaev_gap=0.0)
        with self.assertRaises(ValidationError):
            record.clean()

    def test_unique_per_m_and_k(self):
        StationaryRecord.objects.create(m=3, k=2, s_k=1.0, c_k=1.0, energy_direct=1.0, energy_scaled=1.0, pohozaev_gap=0.0)
        with self.assertRaises(IntegrityError):
            StationaryRecord.objects.create(m=3, k=2, s_k=2.0, c_k=1.0, energy_direct=1.0, energy_scaled=1.0,
                                            pohozaev_gap=0.0)
