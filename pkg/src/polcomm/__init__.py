"""Political communication space collection, simulation and monitoring."""

from importlib import resources
from pathlib import Path

from .model import (
    Config,
    Registry,
    load_config,
    load_registry,
    load_registry_dir,
    registry_summary,
    save_registry,
    validate_registry,
)
from .selectors import classify, compile_selectors, match_text

__all__ = [
    "Config",
    "Registry",
    "classify",
    "compile_selectors",
    "data_path",
    "fixture_registry",
    "load_config",
    "load_registry",
    "load_registry_dir",
    "match_text",
    "registry_summary",
    "save_registry",
    "validate_registry",
]

__version__ = "0.1.0"


def data_path(name: str = "") -> Path:
    """Path to a shipped data file (appendix selector lists, sample registry)."""
    base = resources.files(__package__) / "data"
    return Path(str(base / name if name else base))


def fixture_registry(collection_period=None) -> Registry:
    """The shipped synthetic sample registry used across tests and demos."""
    sample = data_path("sample")
    if collection_period is None:
        return load_registry_dir(sample)
    return load_registry_dir(sample, collection_period)
