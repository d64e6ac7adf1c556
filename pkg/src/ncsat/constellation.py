"""Per-user rotated PSK alphabets and their joint (superposition) constellation.

Each user transmits from its own rotated M-PSK alphabet. After the
differential correlation at the receiver, the users' symbols add up in the
constellation domain, so the receiver decides on the *joint* alphabet of all
weighted sums and splits the winning combination back into per-user indices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidOrderError, RejectedConstellationError

# Joint constellations with a smaller minimum distance are rejected.
MIN_DISTANCE_THRESHOLD = 1e-9
# Relative slack under which two candidate distances are treated as equal.
TIE_TOLERANCE = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PskConstellation:
    order: int
    rotation: float
    points: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))


def make_psk(order: int, rotation: float = 0.0) -> PskConstellation:
    """Return the M-PSK alphabet ``exp(i(2*pi*m/M + rotation))``, m = 0..M-1."""
    if int(order) != order or order < 2:
        raise InvalidOrderError(f"PSK order must be an integer >= 2, got {order!r}")
    order = int(order)
    rotation = float(rotation) % (2 * np.pi)
    m = np.arange(order)
    points = np.exp(1j * (2 * np.pi * m / order + rotation))
    return PskConstellation(order=order, rotation=rotation, points=_frozen(points))


def assign_rotations(num_users: int, order: int) -> list[float]:
    """Default per-user rotations for ``num_users`` users sharing ``order``-PSK.

    User j (0-based) is rotated by ``2*pi*j / (M*K)`` where K is the smallest
    power of two >= J. For J in {1, 2, 4, 8, ...} the users' alphabets
    interleave into one uniform (M*J)-PSK; for other J they occupy a subset of
    a uniform (M*K)-PSK, which keeps the joint constellation collision free
    (a uniform 6-PSK union for three BPSK users has coinciding sums).
    """
    if num_users < 1:
        raise ValueError(f"num_users must be >= 1, got {num_users}")
    if order < 2:
        raise InvalidOrderError(f"PSK order must be >= 2, got {order}")
    slots = 1 << (num_users - 1).bit_length()
    return [2 * np.pi * j / (order * slots) for j in range(num_users)]


def uniform_rotations(num_users: int, order: int) -> list[float]:
    """Rotations ``2*pi*j / (M*J)``; the union is always a uniform (M*J)-PSK.

    Degenerate for some J (e.g. three BPSK users); callers should validate the
    resulting joint constellation.
    """
    if num_users < 1:
        raise ValueError(f"num_users must be >= 1, got {num_users}")
    if order < 2:
        raise InvalidOrderError(f"PSK order must be >= 2, got {order}")
    return [2 * np.pi * j / (order * num_users) for j in range(num_users)]


@dataclass(frozen=True)
class UserEntry:
    user_id: int
    constellation: PskConstellation
    power: float = 1.0


@dataclass(frozen=True)
class UserConstellationSet:
    users: tuple[UserEntry, ...]

    def __post_init__(self):
        ids = [u.user_id for u in self.users]
        if ids != list(range(len(ids))):
            raise ValueError(f"user ids must be contiguous from 0, got {ids}")
        if not ids:
            raise ValueError("a constellation set needs at least one user")
        for u in self.users:
            if not (u.power >= 0 and math.isfinite(u.power)):
                raise ValueError(f"user {u.user_id}: power must be finite and >= 0")

    @classmethod
    def from_rotations(
        cls,
        order: int | Sequence[int],
        rotations: Sequence[float],
        powers: Sequence[float] | None = None,
    ) -> "UserConstellationSet":
        n = len(rotations)
        orders = [order] * n if np.isscalar(order) else list(order)
        powers = [1.0] * n if powers is None else list(powers)
        if len(orders) != n or len(powers) != n:
            raise ValueError("orders, rotations and powers must have equal length")
        return cls(
            tuple(
                UserEntry(j, make_psk(m, r), float(p))
                for j, (m, r, p) in enumerate(zip(orders, rotations, powers))
            )
        )

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(u.constellation.order for u in self.users)

    @property
    def powers(self) -> np.ndarray:
        return np.array([u.power for u in self.users])

    def with_powers(self, powers: Sequence[float]) -> "UserConstellationSet":
        return UserConstellationSet(
            tuple(
                UserEntry(u.user_id, u.constellation, float(p))
                for u, p in zip(self.users, powers, strict=True)
            )
        )


@dataclass(frozen=True)
class JointConstellation:
    """All weighted sums of one symbol per user.

    ``combos[k]`` holds the per-user symbol indices of ``points[k]``; rows are
    in lexicographic order, which also makes them the tie-break order.
    """

    combos: np.ndarray
    points: np.ndarray
    min_distance: float
    orders: tuple[int, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def is_valid(self) -> bool:
        return self.min_distance >= MIN_DISTANCE_THRESHOLD

    def require_valid(self) -> None:
        if not self.is_valid:
            raise RejectedConstellationError(
                f"joint constellation is degenerate (min distance {self.min_distance:.3g})"
            )


def _min_pairwise_distance(points: np.ndarray) -> float:
    if len(points) < 2:
        return math.inf
    d = np.abs(points[:, None] - points[None, :])
    iu = np.triu_indices(len(points), k=1)
    return float(d[iu].min())


def build_joint(cset: UserConstellationSet) -> JointConstellation:
    orders = cset.orders
    combos = np.array(list(itertools.product(*(range(m) for m in orders))), dtype=np.int64)
    points = np.zeros(len(combos), dtype=complex)
    for j, u in enumerate(cset.users):
        points += u.power * u.constellation.points[combos[:, j]]
    return JointConstellation(
        combos=_frozen(combos),
        points=_frozen(points),
        min_distance=_min_pairwise_distance(points),
        orders=orders,
    )


def demap_indices(z: np.ndarray, joint: JointConstellation) -> np.ndarray:
    """Row index into ``joint.combos`` of the nearest joint point for each z."""
    joint.require_valid()
    z = np.asarray(z, dtype=complex).reshape(-1)
    d = np.abs(z[:, None] - joint.points[None, :])
    # distances within rounding of the minimum count as ties; argmax picks the
    # first such entry, i.e. the lowest lexicographic combo
    tol = TIE_TOLERANCE * (1.0 + np.abs(z))
    return np.argmax(d <= d.min(axis=1, keepdims=True) + tol[:, None], axis=1)


def demap_joint(z: complex, joint: JointConstellation) -> tuple[int, ...]:
    k = demap_indices(np.array([z]), joint)[0]
    return tuple(int(i) for i in joint.combos[k])


# Gray mapping on PSK index: symbol index m carries the bit label gray(m).


def gray_encode(m):
    m = np.asarray(m)
    return m ^ (m >> 1)


def gray_decode(g):
    g = np.asarray(g).copy()
    shift = g >> 1
    while np.any(shift):
        g ^= shift
        shift >>= 1
    return g


def indices_to_bits(indices: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    """Gray-labelled bits of each PSK index, MSB first, flattened."""
    labels = gray_encode(np.asarray(indices, dtype=np.int64))
    shifts = np.arange(bits_per_symbol - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def bits_to_indices(bits: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, bits_per_symbol)
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return gray_decode(bits @ weights)
