"""Differential transmission and the non-coherent correlation receiver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelMatrix, complex_gaussian
from .constellation import (
    JointConstellation,
    PskConstellation,
    UserConstellationSet,
    demap_indices,
    indices_to_bits,
)
from .errors import InvalidSymbolError, ShapeError

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Frame:
    user_id: int
    info_indices: np.ndarray  # (N,) PSK indices
    info_symbols: np.ndarray  # (N,) s[1..N]
    tx_symbols: np.ndarray  # (N+1,) x[0..N]
    info_bits: np.ndarray  # (N * log2 M,)

    @property
    def length(self) -> int:
        return len(self.info_symbols)


@dataclass(frozen=True)
class ReceivedBlock:
    y: np.ndarray  # (R, N+1)
    noise_variance: float

    @property
    def num_antennas(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class DecisionSequence:
    z: np.ndarray  # (N,)
    combos: np.ndarray  # (N, J)
    per_user_bits: tuple[np.ndarray, ...]


def _require_unit(values: np.ndarray, what: str) -> None:
    if values.size and np.max(np.abs(np.abs(values) - 1.0)) > UNIT_TOL:
        raise InvalidSymbolError(f"{what} must have unit magnitude")


def diff_encode(info_symbols: Sequence[complex], reference: complex = 1.0) -> np.ndarray:
    """``x[0] = reference``, ``x[n] = x[n-1] * s[n]``."""
    s = np.asarray(info_symbols, dtype=complex).reshape(-1)
    ref = np.asarray([reference], dtype=complex)
    _require_unit(s, "information symbols")
    _require_unit(ref, "reference symbol")
    # cumprod applies the recursion left to right
    return np.cumprod(np.concatenate([ref, s]))


def make_frame(
    user_id: int,
    constellation: PskConstellation,
    num_symbols: int,
    rng: np.random.Generator,
    reference: complex = 1.0,
) -> Frame:
    """Draw ``num_symbols`` uniform PSK symbols and differentially encode them."""
    indices = rng.integers(0, constellation.order, num_symbols)
    return frame_from_indices(user_id, constellation, indices, reference)


def frame_from_indices(
    user_id: int, constellation: PskConstellation, indices, reference: complex = 1.0
) -> Frame:
    indices = np.asarray(indices, dtype=np.int64)
    symbols = constellation.points[indices]
    tx = diff_encode(symbols, reference)
    bits = indices_to_bits(indices, constellation.bits_per_symbol)
    return Frame(user_id, indices, symbols, tx, bits)


def transmit_through(
    frames: Sequence[Frame],
    channel: ChannelMatrix,
    noise_variance: float,
    doppler_drift: float = 0.0,
    rng: np.random.Generator | None = None,
) -> ReceivedBlock:
    """``y[:, n] = exp(i*delta*n) * H @ x[n] + w[:, n]``, w ~ CN(0, noise_variance)."""
    R, J = channel.shape
    if len(frames) != J:
        raise ShapeError(f"channel has {J} columns but {len(frames)} frames were given")
    lengths = {len(f.tx_symbols) for f in frames}
    if len(lengths) != 1:
        raise ShapeError(f"frames differ in length: {sorted(lengths)}")
    if noise_variance < 0:
        raise ValueError("noise_variance must be >= 0")
    x = np.stack([f.tx_symbols for f in frames])  # (J, N+1)
    y = channel.h @ x
    if doppler_drift:
        y = y * np.exp(1j * doppler_drift * np.arange(x.shape[1]))[None, :]
    if noise_variance > 0:
        if rng is None:
            raise ValueError("an rng is required when noise_variance > 0")
        y = y + complex_gaussian(rng, y.shape, noise_variance)
    return ReceivedBlock(y, float(noise_variance))


def rx_statistic(y_prev, y_curr) -> complex:
    """``(1/R) * sum_i conj(y_prev[i]) * y_curr[i]``."""
    y_prev = np.asarray(y_prev).reshape(-1)
    y_curr = np.asarray(y_curr).reshape(-1)
    if y_prev.shape != y_curr.shape:
        raise ShapeError(f"length mismatch: {y_prev.shape[0]} vs {y_curr.shape[0]}")
    return complex(np.vdot(y_prev, y_curr) / y_prev.shape[0])


def rx_statistics(y: np.ndarray) -> np.ndarray:
    """Correlation statistic for every consecutive slot pair of an (R, N+1) block."""
    y = np.asarray(y)
    if y.ndim != 2 or y.shape[1] < 2:
        raise ShapeError(f"expected an (R, N+1) block with N >= 1, got {y.shape}")
    return np.sum(np.conj(y[:, :-1]) * y[:, 1:], axis=0) / y.shape[0]


def detect_frame(
    block: ReceivedBlock, joint: JointConstellation, cset: UserConstellationSet
) -> DecisionSequence:
    """Demap each slot's statistic on the joint alphabet and Gray-decode per user."""
    joint.require_valid()
    if joint.orders != cset.orders:
        raise ShapeError("joint constellation does not match the user set")
    z = rx_statistics(block.y)
    combos = joint.combos[demap_indices(z, joint)]
    bits = tuple(
        indices_to_bits(combos[:, j], u.constellation.bits_per_symbol)
        for j, u in enumerate(cset.users)
    )
    return DecisionSequence(z, combos, bits)
