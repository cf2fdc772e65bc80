"""Frequency decomposition of annual series and panel regressions.

Library layout:

* ``series``     core containers, demeaning, aggregation, correlograms
* ``lowfreq``    cosine-projection / smoother / boosted / predictive filters
* ``fracuc``     fractional unobserved-components model and its ML fit
* ``factors``    principal-component factor models and common/idio splits
* ``panel``      FE / AFE / interactive-effects panel regressions
* ``inference``  clustered, HAC and fixed-design bootstrap uncertainty
* ``tsreg``      single-unit regressions and estimate densities
* ``montecarlo`` filter-accuracy and panel-coverage simulation studies
* ``ingest``     fixed-width climate records, CSV panels, dataset assembly
* ``cli``        the ``freqpanel`` command-line front door
"""

from .series import (
    Correlogram,
    Decomposition,
    Panel,
    TimeSeries,
    autocorrelation,
    demean_pre_cutoff,
    weighted_aggregate,
)
from .lowfreq import (
    bhp_decompose,
    decompose_panel,
    default_q,
    hp_decompose,
    jh_decompose,
    mw_basis,
    mw_decompose,
    mw_periodicity,
)
from .fracuc import (
    UcFit,
    UcParams,
    fracdiff_coeffs,
    ma_inverse_coeffs,
    simulate_uc,
    uc_filter,
    uc_fit,
    uc_loglik,
)
from .factors import (
    CommonIdiosyncraticSplit,
    FactorModel,
    LowfreqFactors,
    common_idio_split,
    first_pc,
    lowfreq_factor_model,
)
from .panel import (
    MarginalEffects,
    PanelEstimate,
    PanelSpec,
    afe_estimate,
    build_panel_spec,
    estimate_panel,
    fe_estimate,
    ife_estimate,
    long_run_effect,
    nonlinear_estimate,
)
from .inference import (
    VarianceEstimate,
    cluster_se_oneway,
    cluster_se_twoway,
    default_bandwidth,
    fixed_design_bootstrap,
    newey_west_se,
)
from .tsreg import DensityResult, TsEstimate, ts_estimate, unit_density
from .montecarlo import (
    FilterCalibration,
    McConfig,
    McReport,
    PanelCalibration,
    default_filter_calibration,
    default_panel_calibration,
    mc_filter_rmse,
    mc_panel,
)
from .ingest import (
    AssembledDataset,
    assemble_dataset,
    build_growth,
    parse_nclimdiv,
    read_long_csv,
    read_weights_csv,
    write_long_csv,
    write_nclimdiv,
)

__version__ = "0.1.0"
