"""Figures from fractrans run directories (series.csv + summary.json).

Strictly a consumer of the documented CSV/JSON contracts: nothing is
recomputed from simulation state, and input directories are never written.
"""

__version__ = "0.1.0"

from .reader import (MissingColumnError, NoDataError, RunData,
                     SchemaMismatchError, load_run)

__all__ = ["MissingColumnError", "NoDataError", "RunData",
           "SchemaMismatchError", "load_run", "__version__"]
