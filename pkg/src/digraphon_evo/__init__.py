"""Evolving digraphs: lazy range trees, a square-root grid store, preferential
attachment by duplication, step digraphons, and a CRP block model."""

from .grid_store import GridStore, Segment
from .range_engine import RangeTree

__all__ = ["GridStore", "RangeTree", "Segment"]
