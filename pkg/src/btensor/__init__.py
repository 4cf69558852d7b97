"""Dense tensor algebra with shape-aligned (trailing-ones) broadcasting.

Public surface: the tensor core (:mod:`btensor.tensor`), the aligned operator
family (:mod:`btensor.ops`), closed-form least squares (:mod:`btensor.lstsq`),
the three-factor decomposition (:mod:`btensor.decomposition`), CP/Tucker
baselines (:mod:`btensor.baselines`), BTF serialization (:mod:`btensor.btf`),
and the synthetic benchmark (:mod:`btensor.experiment`).
"""
from .tensor import (
    BroadcastError,
    DenseTensor,
    ShapeError,
    bc,
    broadcast_compatible,
    fold,
    make_tensor,
    normalize_orders,
    permute,
    reshape_group,
    unfold,
)
from .ops import (
    BroadcastOpKind,
    DivisionError,
    broadcast_apply,
    bdifference,
    bdivide,
    bproduct,
    bsum,
    frobenius_norm,
    hadamard,
    marginalize,
    mode_sum,
)
from .lstsq import (
    ModePartition,
    SingularProblemError,
    classify_modes,
    ls_solve_general,
    ls_solve_general_ridge,
    ls_solve_third_order,
)
from .decomposition import (
    BDFactors,
    FitConfig,
    FitTrace,
    bd_als,
    bd_param_count,
    bd_update_factor,
    reconstruct,
    snr_db,
    sum_bd_hals,
)
from .baselines import CPModel, TuckerModel, cp_als, param_count, tucker_hooi
from .btf import BtfFormatError, read_btf, write_btf
from .experiment import (
    CSV_HEADER,
    ExperimentConfig,
    ExperimentReport,
    ReportRow,
    generate_synthetic,
    run_experiment,
    write_report,
)

__version__ = "0.1.0"
