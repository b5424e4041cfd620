"""SGD laboratory: noise oracles, assumption checks and limit diagnostics."""

import json

from ._sgdlab import (
    AssumptionError,
    Config,
    ConfigError,
    IoError,
    catalog,
    check_assumptions,
    conditional_value,
    derivative,
    load_config,
    lojasiewicz,
    moment_bounds,
    parse_config,
    run,
    sample_gradient,
    value,
    verify_oracle,
)
from ._sgdlab import table_json as _table_json


def table(config, force=False, workers=0):
    """Outcome table over the config's x0 x level grid, as a dict."""
    return json.loads(_table_json(config, force, workers))


__all__ = [
    "AssumptionError",
    "Config",
    "ConfigError",
    "IoError",
    "catalog",
    "check_assumptions",
    "conditional_value",
    "derivative",
    "load_config",
    "lojasiewicz",
    "moment_bounds",
    "parse_config",
    "run",
    "sample_gradient",
    "table",
    "value",
    "verify_oracle",
]
