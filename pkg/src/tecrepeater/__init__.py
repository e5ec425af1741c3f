"""Key-rate analysis of one-way quantum repeater chains built from
teleportation-based error-correction (TEC) stations.

The package computes per-station syndrome statistics for the (n, m) parity
block code, composes them along a chain of stations in the fine-grained and
coarse-grained scenarios, and compares the results with the repeaterless
PLOB and TGW bounds.
"""

from tecrepeater.core import (
    ChannelParams,
    CodeParams,
    ErrorPair,
    binary_entropy,
    binomial,
    compose_errors,
    iterate_error,
    multinomial,
)
from tecrepeater.patterns import PatternClass, enumerate_classes
from tecrepeater.station import StationStats, StationTable, build_station_table
from tecrepeater.chain import ChainSpec, RateResult, chain_rate, cg_rate
from tecrepeater.bounds import direct_rate, plob, tgw

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "ChannelParams",
    "CodeParams",
    "ErrorPair",
    "PatternClass",
    "RateResult",
    "StationStats",
    "StationTable",
    "binary_entropy",
    "binomial",
    "build_station_table",
    "cg_rate",
    "chain_rate",
    "compose_errors",
    "direct_rate",
    "enumerate_classes",
    "iterate_error",
    "multinomial",
    "plob",
    "tgw",
]
