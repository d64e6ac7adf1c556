"""Satellite channel synthesis: slant range, free-space loss, URA steering, Rician mixing.

Geometry conventions: the satellite sits above the sub-satellite point
(lat 0, lon 0). ECEF axes are x through (0, 0), y through (0, 90E) and z through
the north pole. The planar array faces nadir; its in-plane axes are east (ECEF
y) and north (ECEF z), and the third array-frame axis points toward nadir, so a
user at the sub-satellite point lies on boresight ``(0, 0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidDirectionError, InvalidGeometryError

EARTH_RADIUS = 6_371_000.0
GEO_ALTITUDE = 35_786_000.0
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayGeometry:
    n_ele: int
    spacing: float
    wavelength: float
    positions: np.ndarray  # (R, 2) metres, rows ordered x-major

    @property
    def num_antennas(self) -> int:
        return self.n_ele * self.n_ele


def ura_positions(n_ele: int, spacing_wavelengths: float = 0.5, wavelength: float = 0.15) -> ArrayGeometry:
    """Centered ``n_ele x n_ele`` grid with pitch ``spacing_wavelengths * wavelength``."""
    if n_ele < 1:
        raise InvalidGeometryError(f"n_ele must be >= 1, got {n_ele}")
    if spacing_wavelengths <= 0 or wavelength <= 0:
        raise InvalidGeometryError("spacing and wavelength must be positive")
    pitch = spacing_wavelengths * wavelength
    offsets = (np.arange(n_ele) - (n_ele - 1) / 2) * pitch
    xx, yy = np.meshgrid(offsets, offsets, indexing="ij")
    positions = np.stack([xx.ravel(), yy.ravel()], axis=1)
    positions.setflags(write=False)
    return ArrayGeometry(int(n_ele), float(spacing_wavelengths), float(wavelength), positions)


def central_angle(user_lat: float, user_lon: float) -> float:
    """Great-circle angle between (lat, lon) and the sub-satellite point (0, 0)."""
    # haversine form of the spherical law of cosines, accurate near zero
    h = math.sin(user_lat / 2) ** 2 + math.cos(user_lat) * math.sin(user_lon / 2) ** 2
    return 2 * math.asin(min(1.0, math.sqrt(h)))


def slant_range(
    sat_altitude: float, user_lat: float, user_lon: float, earth_radius: float = EARTH_RADIUS
) -> float:
    """Satellite-to-user distance from the law of cosines on the central angle.

    Evaluated as ``h^2 + 4*Re*(Re+h)*sin^2(gamma/2)``, which equals
    ``Re^2 + (Re+h)^2 - 2*Re*(Re+h)*cos(gamma)`` but returns exactly ``h`` at
    the sub-satellite point.
    """
    if sat_altitude <= 0:
        raise InvalidGeometryError(f"satellite altitude must be positive, got {sat_altitude}")
    if abs(user_lat) > math.pi / 2:
        raise InvalidGeometryError(f"latitude out of range: {user_lat}")
    gamma = central_angle(user_lat, user_lon)
    r_sat = earth_radius + sat_altitude
    d2 = sat_altitude**2 + 4 * earth_radius * r_sat * math.sin(gamma / 2) ** 2
    return math.sqrt(d2)


def path_loss(wavelength: float, distance: float) -> float:
    """Free-space power gain ``(lambda / (4*pi*d))**2`` (linear, <= 1 for d >= lambda/4pi)."""
    if not (wavelength > 0 and distance > 0):
        raise InvalidGeometryError(
            f"wavelength and distance must be positive, got {wavelength}, {distance}"
        )
    return (wavelength / (4 * math.pi * distance)) ** 2


@dataclass(frozen=True)
class LinkGeometry:
    sat_altitude: float
    user_lat: float
    user_lon: float
    wavelength: float = 0.15
    earth_radius: float = EARTH_RADIUS

    def __post_init__(self):
        if self.wavelength <= 0:
            raise InvalidGeometryError("wavelength must be positive")
        # range checks live in slant_range
        slant_range(self.sat_altitude, self.user_lat, self.user_lon, self.earth_radius)

    @property
    def slant_range(self) -> float:
        return slant_range(self.sat_altitude, self.user_lat, self.user_lon, self.earth_radius)

    @property
    def direction(self) -> np.ndarray:
        """Unit vector from the satellite toward the user, in the array frame."""
        re = self.earth_radius
        sat = np.array([re + self.sat_altitude, 0.0, 0.0])
        cl = math.cos(self.user_lat)
        user = re * np.array(
            [cl * math.cos(self.user_lon), cl * math.sin(self.user_lon), math.sin(self.user_lat)]
        )
        v = user - sat
        v = v / np.linalg.norm(v)
        return np.array([v[1], v[2], -v[0]])

    @property
    def path_loss(self) -> float:
        return path_loss(self.wavelength, self.slant_range)


def _check_direction(direction) -> np.ndarray:
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (3,) or abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise InvalidDirectionError(f"direction must be a unit 3-vector, got {direction}")
    return direction


def steering_coeff(element_position, direction, wavelength: float) -> complex:
    """Isotropic-element steering phase ``exp(i*2*pi/lambda * p . u_inplane)``."""
    direction = _check_direction(direction)
    p = np.asarray(element_position, dtype=float)
    return complex(np.exp(1j * 2 * np.pi / wavelength * (p @ direction[:2])))


def steering_vector(array: ArrayGeometry, direction) -> np.ndarray:
    direction = _check_direction(direction)
    return np.exp(1j * 2 * np.pi / array.wavelength * (array.positions @ direction[:2]))


def rician_weights(rician_factor: float) -> tuple[float, float]:
    """(LoS, NLoS) amplitude weights ``sqrt(L/(L+1))``, ``sqrt(1/(L+1))``."""
    if rician_factor < 0 or math.isnan(rician_factor):
        raise ValueError(f"Rician factor must be >= 0, got {rician_factor}")
    if math.isinf(rician_factor):
        return 1.0, 0.0
    return math.sqrt(rician_factor / (rician_factor + 1)), math.sqrt(1 / (rician_factor + 1))


@dataclass(frozen=True)
class ChannelParams:
    tx_gain: tuple[float, ...]
    rician_factor: float = 0.0
    phase_noise_bound: float = 0.0
    normalize: bool = True

    def __post_init__(self):
        rician_weights(self.rician_factor)
        if self.phase_noise_bound < 0:
            raise ValueError("phase_noise_bound must be >= 0")
        if any(g < 0 for g in self.tx_gain):
            raise ValueError("tx_gain entries must be >= 0")


@dataclass(frozen=True)
class ChannelMatrix:
    h: np.ndarray  # (R, J)
    params: ChannelParams

    @property
    def per_user_power(self) -> np.ndarray:
        return np.mean(np.abs(self.h) ** 2, axis=0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.h.shape

    def scale_columns(self, gains: Sequence[float]) -> "ChannelMatrix":
        """New matrix with column j multiplied by ``gains[j]`` (amplitude)."""
        g = np.asarray(gains, dtype=float)
        return ChannelMatrix(self.h * g[None, :], self.params)


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with total variance ``variance``."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z * math.sqrt(variance / 2)


def carrier_phase(distance: float, wavelength: float) -> complex:
    """``exp(-i*2*pi*d/lambda)`` with the cycle count reduced before exponentiation."""
    cycles = math.fmod(distance / wavelength, 1.0)
    return complex(np.exp(-2j * np.pi * cycles))


def draw_channel(
    array: ArrayGeometry,
    links: Sequence[LinkGeometry],
    params: ChannelParams,
    rng: np.random.Generator,
) -> ChannelMatrix:
    """Draw one block-fading realisation of the R x J uplink channel.

    ``h[i, j] = exp(-i(2*pi*d_j/lambda + phi_ij)) * a_j
    * (sqrt(L/(L+1)) * b_i(u_j) + sqrt(1/(L+1)) * alpha_ij)``

    with ``a_j = sqrt(G_j * P_loss(d_j))`` in link-budget mode and 1 when
    ``params.normalize`` is set. The NLoS term and the static phase offsets are
    drawn fresh on every call.
    """
    num_users = len(links)
    if len(params.tx_gain) != num_users:
        raise ValueError(f"tx_gain has {len(params.tx_gain)} entries for {num_users} users")
    R = array.num_antennas
    los_w, nlos_w = rician_weights(params.rician_factor)

    alpha = complex_gaussian(rng, (R, num_users))
    if params.phase_noise_bound > 0:
        phi = rng.uniform(-params.phase_noise_bound, params.phase_noise_bound, (R, num_users))
        rotation = np.exp(-1j * phi)
    else:
        rotation = np.ones((R, num_users), dtype=complex)

    h = np.empty((R, num_users), dtype=complex)
    for j, link in enumerate(links):
        if link.wavelength != array.wavelength:
            raise InvalidGeometryError("link and array wavelengths differ")
        d = link.slant_range
        amplitude = 1.0 if params.normalize else math.sqrt(params.tx_gain[j] * path_loss(link.wavelength, d))
        mix = alpha[:, j] * nlos_w
        if los_w:
            mix = mix + los_w * steering_vector(array, link.direction)
        h[:, j] = carrier_phase(d, link.wavelength) * amplitude * rotation[:, j] * mix
    h.setflags(write=False)
    return ChannelMatrix(h, params)


def expected_user_gain(link: LinkGeometry, tx_gain: float, normalize: bool) -> float:
    """Mean per-antenna channel power ``E|h_ij|^2`` for one user."""
    return 1.0 if normalize else tx_gain * link.path_loss
