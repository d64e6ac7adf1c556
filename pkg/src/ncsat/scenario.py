"""Experiment description and the two built-in scenario presets."""

from __future__ import annotations

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .channel import GEO_ALTITUDE, LinkGeometry, ura_positions
from .constellation import UserConstellationSet, assign_rotations, uniform_rotations

LEO_ALTITUDE = 600_000.0


class ScenarioConfig(BaseModel):
    """Full description of one BER experiment.

    Sweep axes are ``n_ele`` (array side, R = n_ele**2) and ``snr_db`` (per-user,
    per-antenna SNR; ``.inf`` means noiseless). User positions are
    ``[lat, lon]`` pairs in degrees relative to the sub-satellite point.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    num_users: int = Field(ge=1)
    psk_order: int = Field(default=2, ge=2)
    rotation_rule: Literal["auto", "uniform"] = "auto"
    rotations: Optional[list[float]] = None
    powers: Optional[list[float]] = None
    n_ele: list[int] = Field(min_length=1)
    snr_db: list[float] = Field(min_length=1)
    rician_factor: float = Field(default=0.0, ge=0)
    phase_noise_bound: float = Field(default=0.0, ge=0)
    doppler_drift: float = 0.0
    sat_altitude: float = Field(default=GEO_ALTITUDE, gt=0)
    user_positions_deg: list[tuple[float, float]]
    tx_gain: Optional[list[float]] = None
    wavelength: float = Field(default=0.15, gt=0)
    element_spacing: float = Field(default=0.5, gt=0)
    frame_length: int = Field(default=100, ge=1)
    frames_per_point: int = Field(default=200, ge=1)
    channel_mode: Literal["normalized", "link-budget"] = "normalized"
    master_seed: int = Field(default=0, ge=0)

    @field_validator("psk_order")
    @classmethod
    def _power_of_two(cls, v):
        if v & (v - 1):
            raise ValueError("psk_order must be a power of two for Gray bit mapping")
        return v

    @field_validator("n_ele")
    @classmethod
    def _positive_sides(cls, v):
        if any(n < 1 for n in v):
            raise ValueError("every n_ele entry must be >= 1")
        return v

    @field_validator("snr_db")
    @classmethod
    def _no_nan(cls, v):
        if any(math.isnan(s) or s == -math.inf for s in v):
            raise ValueError("snr_db entries must be numbers or .inf")
        return v

    @field_validator("user_positions_deg")
    @classmethod
    def _latitudes(cls, v):
        for lat, _ in v:
            if abs(lat) > 90:
                raise ValueError(f"latitude {lat} outside [-90, 90]")
        return v

    @model_validator(mode="after")
    def _per_user_lengths(self):
        J = self.num_users
        for key in ("user_positions_deg", "rotations", "powers", "tx_gain"):
            value = getattr(self, key)
            if value is not None and len(value) != J:
                raise ValueError(f"{key} has {len(value)} entries but num_users is {J}")
        for key in ("powers", "tx_gain"):
            value = getattr(self, key)
            if value is not None and any(not (p >= 0 and math.isfinite(p)) for p in value):
                raise ValueError(f"{key} entries must be finite and >= 0")
        return self

    # -- derived objects -------------------------------------------------

    def resolved_rotations(self) -> list[float]:
        if self.rotations is not None:
            return list(self.rotations)
        rule = assign_rotations if self.rotation_rule == "auto" else uniform_rotations
        return rule(self.num_users, self.psk_order)

    def resolved_powers(self) -> list[float]:
        return list(self.powers) if self.powers is not None else [1.0] * self.num_users

    def resolved_tx_gain(self) -> tuple[float, ...]:
        return tuple(self.tx_gain) if self.tx_gain is not None else (1.0,) * self.num_users

    def constellation_set(self) -> UserConstellationSet:
        return UserConstellationSet.from_rotations(
            self.psk_order, self.resolved_rotations(), self.resolved_powers()
        )

    def links(self) -> list[LinkGeometry]:
        return [
            LinkGeometry(self.sat_altitude, np.radians(lat), np.radians(lon), self.wavelength)
            for lat, lon in self.user_positions_deg
        ]

    def array(self, n_ele: int):
        return ura_positions(n_ele, self.element_spacing, self.wavelength)

    def points(self) -> list[tuple[int, float]]:
        """Sweep points in emission order: n_ele outer, snr_db inner."""
        return [(n, s) for n in self.n_ele for s in self.snr_db]


def preset_vsat_geo() -> ScenarioConfig:
    """Two VSATs on a GEO uplink, LoS-dominant channel.

    The terminals are placed far apart on the Earth disk; closer terminals see
    nearly identical LoS steering vectors at GEO range and cannot be separated
    by the correlation statistic at these array sizes.
    """
    return ScenarioConfig(
        name="vsat_geo",
        num_users=2,
        psk_order=2,
        n_ele=[4, 8, 12, 16, 24, 32],
        snr_db=[-10.0, -5.0, 0.0, 5.0],
        rician_factor=1.0,
        phase_noise_bound=0.1,
        doppler_drift=0.0,
        sat_altitude=GEO_ALTITUDE,
        user_positions_deg=[(20.0, -20.0), (-20.0, 20.0)],
    )


def preset_mega_leo() -> ScenarioConfig:
    """Four ground terminals sharing one LEO beam, multipath channel with residual Doppler."""
    return ScenarioConfig(
        name="mega_leo",
        num_users=4,
        psk_order=2,
        n_ele=[8, 16, 24, 32],
        snr_db=[-10.0, -5.0, 0.0, 5.0],
        rician_factor=0.0,
        phase_noise_bound=0.1,
        doppler_drift=0.01,
        sat_altitude=LEO_ALTITUDE,
        user_positions_deg=[(2.0, 2.0), (2.0, -2.0), (-2.0, 2.0), (-2.0, -2.0)],
    )


PRESETS = {"vsat_geo": preset_vsat_geo, "mega_leo": preset_mega_leo}


def get_preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
