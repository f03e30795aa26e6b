"""Conjugate Bayesian model (CBM) encoding of high-cardinality categorical features."""

from .conjugate import (
    BetaParams, DirichletParams, NIGParams,
    beta_moments, beta_prior_from_target, beta_update,
    dirichlet_moments, dirichlet_prior_from_target, dirichlet_update,
    nig_moments, nig_prior_from_target, nig_update,
)
from .data import (
    IngestOptions, ScalerParams, kfold_indices, read_csv, scaler_fit, scaler_transform,
    train_test_split,
)
from .encoder import CbmEncoder, FittedColumnEncoding, fit, fit_transform, load, save
from .types import (
    MISSING, CategoricalColumn, ColumnSchema, Dataset, EncodedMatrix, TaskKind, encoded_width,
)

__version__ = "0.1.0"
