"""Acoustic-emission blind source separation, delay estimation and location."""

import json as _json

from ._aebss import (  # noqa: F401
    BandGeometry,
    DegenerateError,
    DimensionError,
    DivergenceError,
    Error,
    FormatError,
    IllConditionedError,
    MissingSourceError,
    ParameterError,
    PrototypeSet,
    apply_filter_matrix,
    build_prototypes,
    cross_correlation,
    delay_for_position,
    delay_from_ccf,
    delays_from_mixing,
    find_highest_peak,
    generate_source,
    grnn_locate,
    remove_mean,
)
from ._aebss import run_ica as _run_ica
from ._aebss import run_pipeline as _run_pipeline


def run_ica(x, sample_rate, config=None):
    """Separate the rows of ``x`` (channels x samples).

    ``config`` is a dict using the same keys as the ICA config JSON.
    """
    return _run_ica(x, sample_rate, _json.dumps(config) if config else "")


def run_pipeline(scenario, seed=None):
    """Run synth, ccf, separate and locate on a scenario dict; returns the report dict."""
    text = scenario if isinstance(scenario, str) else _json.dumps(scenario)
    return _json.loads(_run_pipeline(text, seed))
