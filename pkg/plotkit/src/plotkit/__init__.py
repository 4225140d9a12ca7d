"""Figure rendering for metrosim CSV datasets (read-only over the CSV schema)."""

from .render import FigureSpec, RenderResult, preset_spec, render
from .schema import SchemaError, Table, load_table

__version__ = "0.1.0"
