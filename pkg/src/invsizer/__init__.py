"""Inverse sizing of analog and RF circuits: map target performance to device parameters."""
from .errors import (ConvergenceFailure, DatasetTooSmall, DimensionMismatch, EmptyDataset,
                     EmptyRecords, EmptyTrainingSet, InvSizerError, NonFiniteLoss, NonPhysical,
                     ParseError, SchemaMismatch, ShapeMismatch)
from .schema import CircuitId, CircuitSchema, builtin_schema

__version__ = "0.1.0"

__all__ = ["CircuitId", "CircuitSchema", "ConvergenceFailure", "DatasetTooSmall",
           "DimensionMismatch", "EmptyDataset", "EmptyRecords", "EmptyTrainingSet", "InvSizerError",
           "NonFiniteLoss", "NonPhysical", "ParseError", "SchemaMismatch", "ShapeMismatch",
           "builtin_schema", "__version__"]
