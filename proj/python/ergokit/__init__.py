"""Python access to the ergokit core.

Report, summary and config documents come back as dicts; matrices are
lists of rows.
"""

import json

from ._ergokit import (
    ErgokitError,
    __version__,
    bekk_degeneracy,
    builtin_names,
    frobenius_norm,
    matrix_col_sum_norm,
    operator_norm,
    psd_sqrt,
    vector_s_norm,
)
from . import _ergokit


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def abs_moment(noise="expol2", dim=2, s=1.0, method="quadrature", samples=1_000_000, seed=7):
    return json.loads(_ergokit.abs_moment(noise, dim, s, method, samples, seed))


def builtin_config(name):
    return json.loads(_ergokit.builtin_config(name))


def check(config):
    """Structural checks, drift envelope, gamma and verdict for a config dict or JSON text."""
    return json.loads(_ergokit.check(_text(config)))


def simulate(config, threads=1):
    """Ensemble summary; kept paths appear under "paths"."""
    return json.loads(_ergokit.simulate(_text(config), threads))


__all__ = [
    "ErgokitError",
    "__version__",
    "abs_moment",
    "bekk_degeneracy",
    "builtin_config",
    "builtin_names",
    "check",
    "frobenius_norm",
    "matrix_col_sum_norm",
    "operator_norm",
    "psd_sqrt",
    "simulate",
    "vector_s_norm",
]
