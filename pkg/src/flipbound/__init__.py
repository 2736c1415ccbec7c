"""Flip probabilities under random projection, structure-aware
generalization bounds for the zero-one loss, and a bound-minimizing
linear classifier."""

from .bounds import (
    BoundBreakdown,
    MarginProfile,
    bound_compressive_exact,
    bound_compressive_margin,
    bound_compressive_split,
    bound_dataspace,
    bound_dataspace_pointwise_k,
    bound_ensemble_exploss,
    bound_ensemble_margin,
    bound_ldm,
    ensemble_margin_cosines,
    gaussian_width_mc,
    margin_profile,
    shift_condition,
    sufficient_k_margin,
    sufficient_k_multiclass,
    sufficient_k_width,
)
from .data import Dataset, ExperimentReport, gen_two_gaussians, load_csv, save_csv
from .errors import (
    DataError,
    DegenerateInputError,
    FlipboundError,
    InvalidParameterError,
    UnboundedConditionError,
)
from .estimators import (
    FlipLossClassifier,
    LowDimERMClassifier,
    LqLogisticClassifier,
    RandomProjector,
)
from .flipkernel import (
    Angle,
    FlipEval,
    FlipMethod,
    flip_chernoff,
    flip_exact,
    flip_probability,
    lipschitz_constant,
    loss,
    loss_derivative,
)
from .model import LinearModel, load_model, save_model
from .optimizer import (
    TrainConfig,
    gradients,
    objective,
    train_bound_minimizer,
    train_erm_lowdim,
    train_lq_logistic,
)
from .projection import ProjectedDataset, ProjectionSpec, mc_flip_rate, project, sample_matrix

__version__ = "0.1.0"
