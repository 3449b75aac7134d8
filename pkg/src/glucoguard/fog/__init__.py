"""Sub-package with the fog preprocessing stage between devices and the ledger."""
from glucoguard.fog.data import Feature, RawReading, Source, VitalsSample  # noqa
from glucoguard.fog.preprocess import preprocess_batch  # noqa

__author__ = "glucoguard"
