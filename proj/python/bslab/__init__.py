"""Python access to the bslab checks."""

import json

from ._bslab import (
    DomainError,
    NumericalFailure,
    UsageError,
    davies_radius,
    dirac_constants,
    enclosure_region,
    frank_threshold,
    green1d,
    green3d,
    green_h3,
    kato_l3_threshold,
    matrix_polar,
    run_json,
    version,
)


def run(subcommand, potential="", params=None, **kw):
    """Run a subcommand (lab, s1d, e3d, h3, dirac); returns (exit_code, report dict).

    params values may be numbers or strings such as "4i".
    """
    p = {str(k): str(v) for k, v in (params or {}).items()}
    code, text = run_json(subcommand, potential, p, **kw)
    return code, json.loads(text)


__all__ = [
    "DomainError",
    "NumericalFailure",
    "UsageError",
    "davies_radius",
    "dirac_constants",
    "enclosure_region",
    "frank_threshold",
    "green1d",
    "green3d",
    "green_h3",
    "kato_l3_threshold",
    "matrix_polar",
    "run",
    "run_json",
    "version",
]
