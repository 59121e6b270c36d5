"""Spatiotemporal extremes of carbon flux anomalies."""

from ._stx import (
    ConfigError,
    CorruptionError,
    DomainError,
    Error,
    FormatError,
    Grid,
    ValidationError,
    __version__,
    cell_area,
    component_stats,
    compute_anomalies,
    label_components,
    month_seconds,
    natural_cutoff,
    percentile,
    powerlaw_fit,
    read_grid,
    run_pipeline,
    ssa_decompose,
    threshold_mask,
    tls_fit,
    write_grid,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
