"""Extremes of multi-day rainfall: windowed minima, extremal index and covariate-linked GEV fits."""

__version__ = "0.1.0"

from .exceptions import ConvergenceError, DataValidationError, ExtremesError, InfeasibleError, ParseError
from .extremal import ExtremalIndex, ferro_segers
from .fitting import FitResult, GEVRegressor, fit_mle
from .functionals import WindowedMinimum, build_block_maxima_table, windowed_min
from .gev import GevParams, LinkModel
from .ingest import load_dataset
from .model_select import LadderSelector, build_ladder, select

__all__ = [
    "ConvergenceError",
    "DataValidationError",
    "ExtremalIndex",
    "ExtremesError",
    "FitResult",
    "GEVRegressor",
    "GevParams",
    "InfeasibleError",
    "LadderSelector",
    "LinkModel",
    "ParseError",
    "WindowedMinimum",
    "build_block_maxima_table",
    "build_ladder",
    "ferro_segers",
    "fit_mle",
    "load_dataset",
    "select",
    "windowed_min",
]
