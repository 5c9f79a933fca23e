# Generated by Django 4.2.5 on 2026-10-18 09:00

from django.db import migrations, models
import django.db.models.deletion
import uuid
import waves.io_persist


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('kind', models.CharField(choices=[('stationary', 'Stationary family'), ('linear_demo', 'Linear demo'), ('evolve', 'Nonlinear evolution'), ('resolution', 'Soliton resolution'), ('virial', 'Virial series'), ('sweep', 'Dichotomy sweep'), ('one_pass', 'One-pass exit'), ('channels', 'Energy channels')], max_length=20)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('completed', 'Completed'), ('blow_up', 'Blow-up'), ('numerical_failure', 'Numerical failure'), ('undecided', 'Undecided'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('config', models.JSONField(default=dict)),
                ('config_hash', models.CharField(blank=True, max_length=64)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('event_time', models.FloatField(blank=True, null=True)),
                ('max_energy_drift', models.FloatField(blank=True, null=True)),
                ('summary', models.JSONField(blank=True, default=dict, encoder=waves.io_persist.LabJSONEncoder)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='StationaryRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('m', models.PositiveSmallIntegerField(default=3)),
                ('k', models.PositiveSmallIntegerField()),
                ('s_k', models.FloatField()),
                ('c_k', models.FloatField()),
                ('energy_direct', models.FloatField()),
                ('energy_scaled', models.FloatField()),
                ('pohozaev_gap', models.FloatField()),
                ('r_tab_max', models.FloatField(default=1000.0)),
                ('computed_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'ordering': ['m', 'k'],
            },
        ),
        migrations.CreateModel(
            name='SnapshotRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(default='main', max_length=40)),
                ('time_tag', models.FloatField()),
                ('path', models.CharField(max_length=500)),
                ('energy', models.FloatField()),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='snapshots', to='waves.experimentrun')),
            ],
            options={
                'ordering': ['label', 'time_tag'],
            },
        ),
        migrations.CreateModel(
            name='EnergySample',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(default='main', max_length=40)),
                ('t', models.FloatField()),
                ('energy', models.FloatField()),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='energy_samples', to='waves.experimentrun')),
            ],
            options={
                'ordering': ['label', 't'],
            },
        ),
        migrations.AddConstraint(
            model_name='stationaryrecord',
            constraint=models.UniqueConstraint(fields=('m', 'k'), name='unique_stationary_per_m_k'),
        ),
        migrations.AddConstraint(
            model_name='energysample',
            constraint=models.UniqueConstraint(fields=('run', 'label', 't'), name='unique_energy_sample_per_time'),
        ),
    ]
