"""Sub-package generating synthetic vitals calibrated to the reference dataset statistics."""
from glucoguard.datagen.dataset import Dataset, read_csv, write_csv  # noqa
from glucoguard.datagen.generator import GeneratorConfig, generate_dataset  # noqa
from glucoguard.datagen.summary import format_stats, summarize  # noqa

__author__ = "glucoguard"
