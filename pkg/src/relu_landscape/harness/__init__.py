"""Experiment pipelines, configuration and report export."""
from .config import DEFAULTS, load_file, resolve
from .experiments import RUNNERS, derive_seed, run
from .export import write_outputs

__all__ = ["DEFAULTS", "RUNNERS", "derive_seed", "load_file", "resolve", "run", "write_outputs"]
