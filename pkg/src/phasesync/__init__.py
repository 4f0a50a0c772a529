"""Time-varying phase synchronization analysis for monthly panel data.

Workflow: load or generate a panel of monthly series, band-pass each
member to the business-cycle band, take the analytic signal, and score
every pair's phase difference with a moving synchronization index; the
panel-level summary is the fraction of pairs locked above a threshold at
each month. See the pipeline module for the one-call entry point and the
cli module for the batch interface.
"""

from ._kernels import active_backend, warm_up
from .analytic import AnalyticSeries, analytic_signal, hilbert
from .errors import ContractError, DegeneratePhaseError, IngestionError, PhaseSyncError
from .panel import (
    FilterBand,
    Month,
    Panel,
    RecessionCalendar,
    TimeSeries,
    band_from_periods,
    load_panel_csv,
    load_recession_csv,
    periods_of_band,
    round_half_up,
    write_panel_csv,
)
from .pipeline import (
    PipelineConfig,
    RegimeAnnotation,
    ResultMeta,
    SyncResult,
    annotate_recessions,
    normalize_di,
    ratio_above,
    run_pipeline,
    write_metadata,
)
from .spectral import (
    FourierCoefficients,
    bandpass,
    detrend_linear,
    fourier_analyze,
    trim_edges,
)
from .sync import SyncSeries, phase_difference, sync_index_full, sync_index_windowed
from .synthetic import DETUNE_WALK_STEP, RegimeSpec, gen_regime_panel, gen_sine

__version__ = "0.1.0"

__all__ = [
    "AnalyticSeries",
    "ContractError",
    "DegeneratePhaseError",
    "DETUNE_WALK_STEP",
    "FilterBand",
    "FourierCoefficients",
    "IngestionError",
    "Month",
    "Panel",
    "PhaseSyncError",
    "PipelineConfig",
    "RecessionCalendar",
    "RegimeAnnotation",
    "RegimeSpec",
    "ResultMeta",
    "SyncResult",
    "SyncSeries",
    "TimeSeries",
    "active_backend",
    "analytic_signal",
    "annotate_recessions",
    "band_from_periods",
    "bandpass",
    "detrend_linear",
    "fourier_analyze",
    "gen_regime_panel",
    "gen_sine",
    "hilbert",
    "load_panel_csv",
    "load_recession_csv",
    "normalize_di",
    "periods_of_band",
    "phase_difference",
    "ratio_above",
    "round_half_up",
    "run_pipeline",
    "sync_index_full",
    "sync_index_windowed",
    "trim_edges",
    "warm_up",
    "write_metadata",
    "write_panel_csv",
    "__version__",
]
