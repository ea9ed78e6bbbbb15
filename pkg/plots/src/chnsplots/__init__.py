"""Post-processing and figure rendering for CHNS solver output files."""

__version__ = "0.1.0"

from .snapshot_io import Snapshot, read_snapshot, write_snapshot, serialize
from .render import render_snapshot, render_timeseries, render_field

__all__ = ["Snapshot", "read_snapshot", "write_snapshot", "serialize",
           "render_snapshot", "render_timeseries", "render_field",
           "__version__"]
