"""Frozen-backbone image embedding extraction into the DALB container."""

__version__ = "0.1.0"

from .dalb import write_dalb
from .extract import ExtractionJob, extract
