"""Symmetric margin losses for balanced-error and ranking optimization
from contaminated labels: a loss zoo with calibration metadata, exact
risk decompositions on finite distributions, contamination sampling, and
a small deterministic training stack.
"""

__version__ = "0.1.0"

from .amsgrad import AmsGradState, GradientError, init_state
from .calibration import (
    CalibrationReport,
    EtaPoint,
    RankFunctionTable,
    auc_consistency_probe,
    check_calibration,
    conditional_minimizer,
    counterexample_table,
    eta_recovery_probe,
    excess_risk_bound,
    flat_except_unit_loss,
    pairwise_discrete_auc_risk,
)
from .corruption import BudgetError, LabeledPool, corrupt
from .data import (
    Dataset,
    ParseError,
    gen_gaussians,
    parse_csv,
    parse_libsvm,
    split,
    standardize,
    to_libsvm,
)
from .losses import (
    Loss,
    ZOO_NAMES,
    loss_descriptor,
    loss_grad,
    make_loss,
    parse_loss_descriptor,
    symmetry_defect,
    zoo,
)
from .mlp import GradAccum, Mlp, backward_margin, forward, init_mlp
from .risks import (
    DiscreteDist,
    NoiseSpec,
    RiskDecomposition,
    auc_corr_risk,
    auc_risk,
    ber_corr_risk,
    ber_risk,
    empirical_auc_corr,
    empirical_ber_corr,
    verify_auc_decomposition,
    verify_ber_decomposition,
)
from .training import (
    EpochRecord,
    ExperimentConfig,
    OptimizerParams,
    eval_auc,
    eval_bac,
    train,
)
