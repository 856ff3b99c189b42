"""degennes package initialization."""

from .pipeline.pipeline import SpectralPipeline
from .storage.report_storage import (
    load_report,
    persist_report,
    save_report_to_csv,
    save_report_to_json,
)

__all__ = [
    "SpectralPipeline",
    "load_report",
    "persist_report",
    "save_report_to_csv",
    "save_report_to_json",
]
