# SPDX-License-Identifier: Apache-2.0
"""Cell-free massive MIMO AP-selection simulator."""

from ._cfmimo import (
    ConfigError,
    ExperimentConfig,
    InvalidAction,
    MdpEnvironment,
    empirical_cdf,
    jain_index,
    load_config,
    parse_config,
    run,
    select,
    simplified_sinr,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "InvalidAction",
    "MdpEnvironment",
    "empirical_cdf",
    "jain_index",
    "load_config",
    "parse_config",
    "run",
    "select",
    "simplified_sinr",
]
