import logging
import os

from django.db.models.signals import post_delete, pre_save
from django.dispatch import receiver

from waves.io_persist import config_hash
from waves.models import ExperimentRun, SnapshotRecord

logger = logging.getLogger(__name__)


@receiver(pre_save, sender=ExperimentRun)
def fill_config_hash(sender, instance, **kwargs):
    """
    Signal receiver that stamps a run with the hash of its configuration before it is saved.
    """
    instance.config_hash = config_hash(instance.config)


@receiver(post_delete, sender=SnapshotRecord)
def remove_snapshot_file(sender, instance, **kwargs):
    """
    Signal receiver that removes the snapshot CSV once its record is deleted.
    """
    if instance.path and os.path.exists(instance.path):
        os.remove(instance.path)
        logger.debug("Removed snapshot file %s", instance.path)
