"""Figure rendering for fedsysid experiment CSVs.

Consumes the experiment harness's CSV schema — and nothing else: no imports
from the simulation/estimation library, no recomputation of experiments.
"""

from .csvdata import (
    CSV_HEADER,
    GROUP_COLUMNS,
    EmptyDataError,
    Row,
    SchemaError,
    load_rows,
)
from .render import KINDS, RenderResult, render, save

__all__ = [
    "CSV_HEADER",
    "GROUP_COLUMNS",
    "EmptyDataError",
    "KINDS",
    "RenderResult",
    "Row",
    "SchemaError",
    "load_rows",
    "render",
    "save",
]
