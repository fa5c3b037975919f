"""Beta linear failure rate (BLFR) lifetime distribution.

Density, distribution, quantile and hazard functions, series expansions and
moments, a reproducible sampler, maximum-likelihood fitting of the BLFR
family and its six sub-models, goodness-of-fit and model-selection tools,
and a Monte Carlo study engine. The numerical kernels come from a compiled
extension when available and from a pure-Python mirror otherwise; see
``blfr.backend``.
"""

from importlib import metadata as _metadata

from . import _backend
from .data import Dataset, aarset, ingest_data, parse_text
from .distribution import (
    BLFR,
    EXP,
    FAMILIES,
    GE,
    GLFR,
    GR,
    LFR,
    RAYLEIGH,
    BlfrParams,
    Family,
    HazardShape,
    Mode,
    blfr_cdf,
    blfr_hazard,
    blfr_logpdf,
    blfr_mode,
    blfr_pdf,
    blfr_quantile,
    blfr_sf,
    classify_hazard_shape,
    lfr_cdf,
    lfr_pdf,
    lfr_quantile,
)
from .estimation import FitOptions, FitResult, confidence_intervals, fit, loglik, observed_info, score
from .exceptions import (
    BlfrError,
    ConvergenceError,
    DomainError,
    GeneratorFault,
    NonConvergenceError,
    OptimizerFailure,
)
from .expansions import cdf_hypergeometric, cdf_series, moment_series, p_coeff, pdf_series, raw_moment, w_coeff
from .gof import (
    GofReport,
    LrTestResult,
    ad_statistic,
    cm_statistic,
    compare_models,
    gof_report,
    information_criteria,
    ks_test,
    lr_test,
    ttt_signature,
    ttt_transform,
)
from .sampling import RngState, derive_seed, sample_beta, sample_blfr, sample_gamma
from .study import StudyConfig, StudyResult, emit_study_table, load_study_table, run_study

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:
    __version__ = "0.0.0"

backend = _backend.NAME
