"""Ternary CART: decision trees that flag boundary-uncertain predictions."""

from .core import ClassDistribution, Ternary, ZoneParams, ternary_and, zone_classify
from .data import Dataset, load_csv, load_diabetes, stratified_kfold
from .delta import DeltaKind, DeltaMethod
from .metrics import MetricsReport, compute_metrics
from .predict import Prediction, PredictionBatch, RoutingMode, predict_batch
from .splitter import Criterion
from .tree import Architecture, FitParams, FittedTree, fit, fit_dataset

__version__ = "0.1.0"

__all__ = [
    "Architecture",
    "ClassDistribution",
    "Criterion",
    "Dataset",
    "DeltaKind",
    "DeltaMethod",
    "FitParams",
    "FittedTree",
    "MetricsReport",
    "Prediction",
    "PredictionBatch",
    "RoutingMode",
    "Ternary",
    "ZoneParams",
    "compute_metrics",
    "fit",
    "fit_dataset",
    "load_csv",
    "load_diabetes",
    "predict_batch",
    "stratified_kfold",
    "ternary_and",
    "zone_classify",
]
