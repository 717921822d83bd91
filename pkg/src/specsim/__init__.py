"""Neutral-host spectrum coordination: demand estimation, FR/PR/CS policies,
a windowed simulation engine and CSV/SVG reporting."""

from .config import PRESETS, ParseError, Preset, UnknownPreset, get_preset, parse_config
from .demand import map_load_to_spectrum, mno_load, sample_mno_load, sample_si1_load
from .engine import (
    PolicySpec,
    ScenarioConfig,
    UnknownAxis,
    allocate_window,
    run_experiment,
    run_sweep,
    run_window,
)
from .metrics import DeviationSummary, EmptyTable, deviation, render_summary_chart, summarize, write_csv
from .model import (
    AllocationResult,
    DemandVector,
    MnoProfile,
    ServiceClass,
    ShareProfile,
    Si1TrafficModel,
    SpecSimError,
    SpectrumPool,
    ValidationError,
)
from .policies import allocate_cs, allocate_fr, allocate_pr_inter, allocate_pr_intra, classify_case

__version__ = "0.1.0"
