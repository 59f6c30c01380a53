"""Named benchmark parameter sets.

Four standard test cases spanning long-dated/high-correlation, long-dated
low mean reversion, fast mean reversion with low vol-of-vol, and
high long-run variance with carry.  Rates are stored as decimals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError
from .model import ModelParams


@dataclass(frozen=True)
class CasePreset:
    """A model parameter set with its test maturity, strike, and reference price."""

    name: str
    model: ModelParams
    maturity: float
    strike: float
    reference_price: float


CASE_PRESETS: dict[str, CasePreset] = {
    "I": CasePreset(
        "I",
        ModelParams(s0=100.0, v0=0.04, kappa=0.5, theta=0.04, xi=1.0, rho=-0.9),
        maturity=10.0,
        strike=100.0,
        reference_price=13.08467014,
    ),
    "II": CasePreset(
        "II",
        ModelParams(s0=100.0, v0=0.04, kappa=0.3, theta=0.04, xi=0.9, rho=-0.5),
        maturity=15.0,
        strike=100.0,
        reference_price=16.64922292,
    ),
    "III": CasePreset(
        "III",
        ModelParams(
            s0=100.0, v0=0.010201, kappa=6.21, theta=0.019, xi=0.61, rho=-0.7, r=0.0319
        ),
        maturity=1.0,
        strike=100.0,
        reference_price=6.80611331,
    ),
    "IV": CasePreset(
        "IV",
        ModelParams(s0=100.0, v0=0.04, kappa=4.0, theta=0.25, xi=1.0, rho=-0.5, r=0.01, q=0.02),
        maturity=1.0,
        strike=120.0,
        reference_price=9.02491348,
    ),
}


def get_case(name: str) -> CasePreset:
    """Look up a preset by name ("I" through "IV"), case-insensitively."""
    key = name.strip().upper()
    if key not in CASE_PRESETS:
        raise ConfigurationError(
            f"unknown case {name!r}; choose from {', '.join(CASE_PRESETS)}"
        )
    return CASE_PRESETS[key]
