"""Figure rendering for delta-shell decay outputs.

Pure post-processing: reads the CSV files exported by the model CLI (plus
their ``.run.json`` sidecars for lifetimes and time scales) and renders
deterministic matplotlib figures.  No model computation happens here.
"""

from .schema import SchemaError, load_survival, load_experiment, load_sidecar
from .figures import PlotSpec, render, FIGURE_KINDS

__version__ = "0.1.0"
