"""Figure rendering for the ninekf CSV outputs.

Consumes only the documented CSV schemas (trace, truth and compare-summary
files); it has no dependency on the estimator package itself.
"""
from .schema import SchemaError
from .traces import TraceBundle, render_traces
from .rmse import render_rmse

__all__ = ["SchemaError", "TraceBundle", "render_traces", "render_rmse"]
