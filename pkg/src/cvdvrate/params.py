"""Physical parameter records shared by every pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class TmsvParam:
    """Squeezing parameter of a two-mode squeezed vacuum, 0 <= chi < 1."""

    chi: float

    def __post_init__(self):
        if not 0.0 <= self.chi < 1.0:
            raise ValueError(f"chi must lie in [0, 1), got {self.chi}")

    @property
    def mean_photons(self) -> float:
        """Mean photon number of either arm."""
        return self.chi**2 / (1.0 - self.chi**2)

    @property
    def squeezing_r(self) -> float:
        """Squeezing parameter r with chi = tanh(r)."""
        return math.atanh(self.chi)


@dataclass(frozen=True)
class ChannelSpec:
    """A fibre span: length, attenuation and signal speed."""

    length_km: float
    attenuation_db_per_km: float = 0.2
    light_speed_km_per_s: float = 2.0e5

    def __post_init__(self):
        if self.length_km < 0:
            raise ValueError("length_km must be nonnegative")
        if self.attenuation_db_per_km <= 0:
            raise ValueError("attenuation_db_per_km must be positive")
        if self.light_speed_km_per_s <= 0:
            raise ValueError("light_speed_km_per_s must be positive")

    @property
    def transmittance(self) -> float:
        return 10.0 ** (-self.attenuation_db_per_km * self.length_km / 10.0)

    @property
    def travel_time_s(self) -> float:
        """One-way signalling time across the span."""
        return self.length_km / self.light_speed_km_per_s

    def split(self, parts: int) -> "ChannelSpec":
        """The span cut into ``parts`` equal segments (returns one segment)."""
        return ChannelSpec(
            self.length_km / parts,
            self.attenuation_db_per_km,
            self.light_speed_km_per_s,
        )


def as_chi(chi: TmsvParam | float) -> TmsvParam:
    return chi if isinstance(chi, TmsvParam) else TmsvParam(float(chi))
