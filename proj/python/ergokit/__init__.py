"""Deterministic averaging experiments over group actions.

Thin python layer over the compiled extension: run bundled presets or
configuration files, then read the emitted CSV series back with exact
rationals preserved as ``fractions.Fraction``.
"""

import csv
from fractions import Fraction
from pathlib import Path

try:
    from ._ergokit import (  # installed package layout
        ConfigError,
        HypothesisError,
        InequalityFailure,
        folner_defect,
        fuzz,
        preset_config,
        presets,
        quotient_measure,
        run,
        uniform_defect,
    )
except ImportError:  # build-tree layout: extension next to the package on sys.path
    from _ergokit import (
        ConfigError,
        HypothesisError,
        InequalityFailure,
        folner_defect,
        fuzz,
        preset_config,
        presets,
        quotient_measure,
        run,
        uniform_defect,
    )

__all__ = [
    "ConfigError",
    "HypothesisError",
    "InequalityFailure",
    "folner_defect",
    "fuzz",
    "preset_config",
    "presets",
    "quotient_measure",
    "read_series",
    "run",
    "uniform_defect",
]


def _cell(text):
    """Exact cells ("p/q" or plain integers) become Fraction, floats stay float."""
    if "/" in text:
        return Fraction(text)
    try:
        return Fraction(int(text))
    except ValueError:
        return float(text)


def read_series(path):
    """Read an emitted series CSV into a list of row dicts.

    The first two columns are always the window index ``n`` and its measure
    ``mu``; the remaining columns are the series values.
    """
    rows = []
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        for raw in reader:
            rows.append({key: _cell(value) for key, value in raw.items()})
    return rows
