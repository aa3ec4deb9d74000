"""PINNs for PDEs driven by Dirac-delta point sources.

The pieces: kernel-smoothed point sources with a width schedule, near/far
domain-split residual losses combined by lower-bound-constrained uncertainty
weighting, multi-scale sine networks, and analytic/FDTD reference solutions
for three benchmarks (steady Poisson, 2-D TE Maxwell pulse, Barry-Mercer
poroelastic injection).
"""

from .config import RunConfig, parse_config_text, render_config, resolve_config
from .engine import DerivativeBundle, Var, backward
from .errors import (
    ConfigError,
    DivergenceError,
    FormatError,
    GeometryError,
    NumericError,
    UnsupportedPrimitiveError,
)
from .fdtd import FdtdGrid, FdtdResult, fdtd_run
from .losses import (
    TERM_ORDER,
    LossTerms,
    WeightingConfig,
    compute_terms,
    fixed_total,
    uncertainty_total,
)
from .metrics import relative_l2, wavefront_radius
from .network import MultiScaleSiren, NetConfig, default_scales
from .problems import (
    PROBLEM_NAMES,
    BarryMercerInjection,
    MaxwellPulse2D,
    PoissonPointSource,
    make_problem,
    seconds_to_nondim,
    si_pulse_width,
)
from .sampling import BatchSizes, Domain, SampleBatch, sample_batch
from .series import (
    ReferenceField,
    barry_mercer_eval_mesh,
    barry_mercer_series,
    poisson_eval_mesh,
    poisson_series,
)
from .source import KERNELS, PointSource, WidthSchedule
from .training import (
    MetricsRecord,
    TrainConfig,
    TrainResult,
    load_checkpoint,
    predict,
    read_metrics,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BarryMercerInjection",
    "BatchSizes",
    "ConfigError",
    "DerivativeBundle",
    "DivergenceError",
    "Domain",
    "FdtdGrid",
    "FdtdResult",
    "FormatError",
    "GeometryError",
    "KERNELS",
    "LossTerms",
    "MaxwellPulse2D",
    "MetricsRecord",
    "MultiScaleSiren",
    "NetConfig",
    "NumericError",
    "PROBLEM_NAMES",
    "PointSource",
    "PoissonPointSource",
    "ReferenceField",
    "RunConfig",
    "SampleBatch",
    "TERM_ORDER",
    "TrainConfig",
    "TrainResult",
    "UnsupportedPrimitiveError",
    "Var",
    "WeightingConfig",
    "WidthSchedule",
    "backward",
    "barry_mercer_eval_mesh",
    "barry_mercer_series",
    "compute_terms",
    "default_scales",
    "fdtd_run",
    "fixed_total",
    "load_checkpoint",
    "make_problem",
    "parse_config_text",
    "poisson_eval_mesh",
    "poisson_series",
    "predict",
    "read_metrics",
    "relative_l2",
    "render_config",
    "resolve_config",
    "save_checkpoint",
    "seconds_to_nondim",
    "si_pulse_width",
    "train",
    "uncertainty_total",
    "wavefront_radius",
]
