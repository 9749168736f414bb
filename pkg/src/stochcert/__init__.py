"""Robustness certificates and analyses for Monte-Carlo stochastic classifiers.

Attacks are computed on one drawn realization set of a stochastic model and
evaluated on another; this package provides the closed-form certificates for
that setting, the statistical machinery around them, and a desk-scale
experiment harness.
"""

from .analysis import (
    AngleReport,
    CltFit,
    ExtremeCount,
    GradientStats,
    VarianceReport,
    angle_distribution,
    clt_scaling_check,
    extreme_prediction_count,
    gradient_norm_stats,
    paired_one_sided_p,
    prediction_variance,
    prop_norm_bounds,
)
from .attacks import (
    AttackResult,
    AttackSpec,
    effective_length,
    fgm_l2,
    fgsm_linf,
    pgd,
    project_l2_ball,
    run_attack,
)
from .certify import (
    Certificate,
    ClassCondition,
    RobustnessEstimate,
    boundary_line_search,
    cosine_alignment,
    deterministic_distance,
    empirical_lipschitz,
    linear_certificate,
    r_linear,
    r_smooth,
    robustness_probability,
    smooth_certificate,
)
from .datasets import Dataset, DatasetSpec, gen_dataset
from .harness import (
    ExperimentConfig,
    ExperimentRecord,
    build_model,
    config_from_dict,
    emit,
    load_config,
    load_records,
    run_sweep,
)
from .kernels import backend as kernel_backend
from .models import (
    McPrediction,
    NoiseSpec,
    SampleSet,
    SmoothedModel,
    StochasticModel,
    TrainOptions,
    TrainResult,
    load_model,
    make_linear_gaussian,
    make_quadratic,
    mc_loss_gradient,
    mc_margin_gradient,
    mc_output_gradient,
    mc_predict,
    quadratic_smoothness,
    sample_params,
    save_model,
    smooth_predict,
    train,
)
from .numerics import (
    Architecture,
    LossHead,
    MarginHead,
    OutputHead,
    Seed,
    central_diff,
    finite_diff,
    forward,
    grad_input,
    loss_eval,
    seed_rng,
    softmax,
    split_seed,
)

__version__ = "0.1.0"
