"""Frame-synchronous additive scrambler.

Standard frames scramble the 52-bit payload (slow control + data) as four
13-bit lanes, each XORed with the first 13 output bits of its own LFSR.
No-FEC frames XOR the 116-bit payload with one keystream from the lane-0
seed. Every frame restarts the registers, so a corrupted frame never
disturbs the next one, and a channel flip stays a single payload flip.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bits import as_bits

DEFAULT_POLY = 0x201B  # x^13 + x^4 + x^3 + x + 1
DEFAULT_SEEDS = (0x1D2B, 0x0B5E, 0x16F1, 0x0C37)

LANES = 4
LANE_BITS = 13
STANDARD_BITS = LANES * LANE_BITS  # 52
NOFEC_BITS = 116


class ScramblerConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScramblerConfig:
    poly: int = DEFAULT_POLY
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def __post_init__(self):
        if self.poly >> LANE_BITS != 1 or not self.poly & 1:
            raise ScramblerConfigError(
                f"polynomial {self.poly:#x} must have degree 13 and a constant term"
            )
        if len(self.seeds) != LANES:
            raise ScramblerConfigError(f"need {LANES} lane seeds, got {len(self.seeds)}")
        for s in self.seeds:
            if not 0 < s < 1 << LANE_BITS:
                raise ScramblerConfigError(f"seed {s:#x} must be a nonzero 13-bit value")
        if len(set(self.seeds)) != LANES:
            raise ScramblerConfigError("lane seeds must be distinct")


DEFAULT_CONFIG = ScramblerConfig()


def _taps(poly: int) -> list[int]:
    # a[n] = XOR of a[n - 13 + j] for each x^j term below the leading one
    return [LANE_BITS - 1 - j for j in range(LANE_BITS) if poly >> j & 1]


def keystream(seed: int, length: int, poly: int = DEFAULT_POLY) -> np.ndarray:
    """Fibonacci LFSR output bits.

    The register holds the last 13 outputs (bit 0 the newest); ``seed`` is
    its initial content. Each step emits the feedback bit and shifts it in.
    """
    if not 0 < seed < 1 << LANE_BITS:
        raise ScramblerConfigError(f"seed {seed:#x} must be a nonzero 13-bit value")
    taps = _taps(poly)
    state = seed
    out = np.empty(length, dtype=np.uint8)
    for i in range(length):
        fb = 0
        for t in taps:
            fb ^= state >> t
        fb &= 1
        out[i] = fb
        state = ((state << 1) | fb) & 0x1FFF
    return out


@lru_cache(maxsize=32)
def standard_mask(config: ScramblerConfig = DEFAULT_CONFIG) -> np.ndarray:
    mask = np.concatenate([keystream(s, LANE_BITS, config.poly) for s in config.seeds])
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=32)
def nofec_mask(config: ScramblerConfig = DEFAULT_CONFIG) -> np.ndarray:
    mask = keystream(config.seeds[0], NOFEC_BITS, config.poly)
    mask.flags.writeable = False
    return mask


def scramble52(payload, config: ScramblerConfig = DEFAULT_CONFIG) -> np.ndarray:
    return as_bits(payload, STANDARD_BITS) ^ standard_mask(config)


descramble52 = scramble52


def scramble116(payload, config: ScramblerConfig = DEFAULT_CONFIG) -> np.ndarray:
    return as_bits(payload, NOFEC_BITS) ^ nofec_mask(config)


descramble116 = scramble116
