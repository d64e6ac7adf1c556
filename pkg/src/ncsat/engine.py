"""Monte Carlo BER engine.

Every frame gets its own generator seeded from
``SeedSequence(master_seed, spawn_key=(n_ele, snr_key, frame_index))`` where
``snr_key`` is the IEEE-754 bit pattern of ``snr_db``. Results therefore depend
only on the config and the point, never on how frames are split across
workers, and per-point error counts are integer sums.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel import (
    ArrayGeometry,
    ChannelParams,
    LinkGeometry,
    draw_channel,
    expected_user_gain,
)
from .constellation import JointConstellation, UserConstellationSet, build_joint
from .phy import detect_frame, make_frame, transmit_through
from .scenario import ScenarioConfig, get_preset, preset_mega_leo, preset_vsat_geo

__all__ = [
    "BerRecord",
    "run_point",
    "sweep",
    "find_min_antennas",
    "preset_vsat_geo",
    "preset_mega_leo",
    "get_preset",
    "frame_rng",
    "noise_variance_for",
]


@dataclass(frozen=True)
class BerRecord:
    n_ele: int
    R: int
    snr_db: float
    per_user_bit_errors: tuple[int, ...]
    per_user_bits: tuple[int, ...]
    frames_run: int
    master_seed: int

    def __post_init__(self):
        if self.R != self.n_ele**2:
            raise ValueError(f"R={self.R} does not equal n_ele**2={self.n_ele ** 2}")
        if len(self.per_user_bit_errors) != len(self.per_user_bits):
            raise ValueError("per-user error and bit counts differ in length")
        if any(e < 0 or e > b for e, b in zip(self.per_user_bit_errors, self.per_user_bits)):
            raise ValueError("bit error counts must lie in [0, bits]")

    @property
    def num_users(self) -> int:
        return len(self.per_user_bits)

    @property
    def per_user_ber(self) -> tuple[float, ...]:
        return tuple(e / b for e, b in zip(self.per_user_bit_errors, self.per_user_bits))

    @property
    def total_errors(self) -> int:
        return sum(self.per_user_bit_errors)

    @property
    def total_bits(self) -> int:
        return sum(self.per_user_bits)

    @property
    def aggregate_ber(self) -> float:
        return self.total_errors / self.total_bits

    def standard_error(self) -> float:
        """Binomial standard error of the aggregate BER."""
        p = self.aggregate_ber
        return math.sqrt(p * (1 - p) / self.total_bits)


def _snr_key(snr_db: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(snr_db) + 0.0))[0]


def frame_rng(master_seed: int, n_ele: int, snr_db: float, frame_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(n_ele), _snr_key(snr_db), int(frame_index))
    )
    return np.random.default_rng(seq)


def noise_variance_for(snr_db: float) -> float:
    """Noise power relative to unit reference received power; ``inf`` dB is noiseless."""
    if snr_db == math.inf:
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class _PointContext:
    master_seed: int
    n_ele: int
    snr_db: float
    array: ArrayGeometry
    links: tuple[LinkGeometry, ...]
    params: ChannelParams
    column_gains: np.ndarray
    detect_set: UserConstellationSet
    joint: JointConstellation
    noise_variance: float
    doppler_drift: float
    frame_length: int


def detection_set(config: ScenarioConfig) -> UserConstellationSet:
    """User set with the received-power weights the detector should assume.

    In link-budget mode the receiver gain is normalised to the users' mean
    expected channel power, so unequal path losses show up as unequal weights.
    """
    cset = config.constellation_set()
    if config.channel_mode == "normalized":
        return cset
    gains = _relative_gains(config)
    return cset.with_powers(cset.powers * gains)


def _expected_gains(config: ScenarioConfig) -> np.ndarray:
    return np.array(
        [
            expected_user_gain(link, gain, normalize=False)
            for link, gain in zip(config.links(), config.resolved_tx_gain())
        ]
    )


def _relative_gains(config: ScenarioConfig) -> np.ndarray:
    g = _expected_gains(config)
    return g / g.mean()


def _context(config: ScenarioConfig, n_ele: int, snr_db: float) -> _PointContext:
    normalize = config.channel_mode == "normalized"
    dset = detection_set(config)
    joint = build_joint(dset)
    joint.require_valid()
    powers = np.asarray(config.resolved_powers())
    if normalize:
        column_gains = np.sqrt(powers)
    else:
        column_gains = np.sqrt(powers / _expected_gains(config).mean())
    return _PointContext(
        master_seed=config.master_seed,
        n_ele=int(n_ele),
        snr_db=float(snr_db),
        array=config.array(n_ele),
        links=tuple(config.links()),
        params=ChannelParams(
            tx_gain=config.resolved_tx_gain(),
            rician_factor=config.rician_factor,
            phase_noise_bound=config.phase_noise_bound,
            normalize=normalize,
        ),
        column_gains=column_gains,
        detect_set=dset,
        joint=joint,
        noise_variance=noise_variance_for(snr_db),
        doppler_drift=config.doppler_drift,
        frame_length=config.frame_length,
    )


def _simulate_frame(ctx: _PointContext, frame_index: int) -> np.ndarray:
    rng = frame_rng(ctx.master_seed, ctx.n_ele, ctx.snr_db, frame_index)
    channel = draw_channel(ctx.array, ctx.links, ctx.params, rng).scale_columns(ctx.column_gains)
    frames = [
        make_frame(u.user_id, u.constellation, ctx.frame_length, rng) for u in ctx.detect_set.users
    ]
    block = transmit_through(frames, channel, ctx.noise_variance, ctx.doppler_drift, rng)
    decisions = detect_frame(block, ctx.joint, ctx.detect_set)
    return np.array(
        [np.count_nonzero(f.info_bits != b) for f, b in zip(frames, decisions.per_user_bits)],
        dtype=np.int64,
    )


def _run_chunk(ctx: _PointContext, start: int, stop: int) -> np.ndarray:
    errors = np.zeros(len(ctx.links), dtype=np.int64)
    for k in range(start, stop):
        errors += _simulate_frame(ctx, k)
    return errors


def _chunks(num_frames: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(num_frames / (4 * workers)))
    return [(a, min(a + size, num_frames)) for a in range(0, num_frames, size)]


def _record(config: ScenarioConfig, ctx: _PointContext, errors: np.ndarray) -> BerRecord:
    bits = tuple(
        config.frames_per_point * config.frame_length * u.constellation.bits_per_symbol
        for u in ctx.detect_set.users
    )
    return BerRecord(
        n_ele=ctx.n_ele,
        R=ctx.array.num_antennas,
        snr_db=ctx.snr_db,
        per_user_bit_errors=tuple(int(e) for e in errors),
        per_user_bits=bits,
        frames_run=config.frames_per_point,
        master_seed=config.master_seed,
    )


def _run_points(
    config: ScenarioConfig, points: Sequence[tuple[int, float]], workers: int
) -> list[BerRecord]:
    # contexts are built up front so a degenerate constellation fails before any trial
    contexts = [_context(config, n, s) for n, s in points]
    chunks = _chunks(config.frames_per_point, workers)
    totals = [np.zeros(config.num_users, dtype=np.int64) for _ in contexts]
    if workers <= 1:
        for ctx, total in zip(contexts, totals):
            total += _run_chunk(ctx, 0, config.frames_per_point)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                (i, pool.submit(_run_chunk, ctx, a, b))
                for i, ctx in enumerate(contexts)
                for a, b in chunks
            ]
            for i, fut in futures:
                totals[i] += fut.result()
    return [_record(config, ctx, total) for ctx, total in zip(contexts, totals)]


def run_point(config: ScenarioConfig, n_ele: int, snr_db: float, workers: int = 1) -> BerRecord:
    """Measure BER at one (array size, SNR) point over ``frames_per_point`` frames."""
    return _run_points(config, [(n_ele, snr_db)], workers)[0]


def sweep(config: ScenarioConfig, workers: int = 1) -> list[BerRecord]:
    """All points of ``n_ele x snr_db``, n_ele outer, in config list order."""
    return _run_points(config, config.points(), workers)


def find_min_antennas(
    config: ScenarioConfig,
    snr_db: float,
    target_ber: float,
    workers: int = 1,
    n_ele_values: Optional[Iterable[int]] = None,
) -> Optional[int]:
    """Smallest n_ele in the (ascending) list whose aggregate BER is <= target, else None."""
    if not 0 < target_ber < 0.5:
        raise ValueError(f"target_ber must lie in (0, 0.5), got {target_ber}")
    values = list(config.n_ele if n_ele_values is None else n_ele_values)
    if values != sorted(values):
        raise ValueError(f"n_ele list must be ascending, got {values}")
    # validate before the first trial
    build_joint(detection_set(config)).require_valid()
    for n in values:
        if run_point(config, n, snr_db, workers).aggregate_ber <= target_ber:
            return n
    return None
