"""Weak-form sparse identification of PDEs from gridded data."""

from .data import Field, Grid, NoiseSpec, add_noise, load_dataset, save_dataset
from .errors import (
    ConfigError,
    DatasetError,
    InvalidSupportError,
    PipelineError,
    WeakPDEError,
)
from .library import ModelLibrary, polynomial_library
from .metrics import TruthModel, e_2, e_inf, tpr
from .mstls import SparseSolution, ThresholdGrid, default_lambda_grid, least_squares, mstls_fixed, mstls_search
from .pipeline import DiscoveryConfig, DiscoveryReport, discover, parse_config, sweep
from .scaling import ScaleSet, compute_scales, scaled_system, unscale
from .testfn import get_test_fcns
from .weakform import LinearSystem, assemble, subsample_query_points

__version__ = "0.1.0"
