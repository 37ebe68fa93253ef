"""Seeded error injection.

All randomness comes from a caller-supplied ``numpy.random.Generator``
(PCG64 via :func:`make_rng`), so every model is a pure function of its
input, its parameters and the seed.

The ``Awgn`` model is BPSK over AWGN with hard decisions. Hard-decision
BPSK is exactly a binary symmetric channel with flip probability
``Q(sqrt(2 R Eb/N0))``, so it is simulated as that BSC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def qfunc(x: float) -> float:
    """Standard normal upper tail P(N(0,1) > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def ebn0_to_p(ebn0_db: float, code_rate: float) -> float:
    if not 0 < code_rate <= 1:
        raise ValueError(f"code rate must be in (0, 1], got {code_rate}")
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    return qfunc(math.sqrt(2.0 * code_rate * 10.0 ** (ebn0_db / 10.0)))


@dataclass(frozen=True)
class Bsc:
    p: float

    def __post_init__(self):
        if not 0 <= self.p <= 0.5:
            raise ValueError(f"flip probability must be in [0, 0.5], got {self.p}")


@dataclass(frozen=True)
class Awgn:
    ebn0_db: float
    code_rate: float = 1.0

    def __post_init__(self):
        if not 0 < self.code_rate <= 1:
            raise ValueError(f"code rate must be in (0, 1], got {self.code_rate}")

    @property
    def p(self) -> float:
        return ebn0_to_p(self.ebn0_db, self.code_rate)


@dataclass(frozen=True)
class Burst:
    arrival_rate: float  # burst starts per 10^4 bits
    mean_len: float
    flip_prob_in_burst: float = 0.5

    def __post_init__(self):
        if not 0 <= self.arrival_rate <= 1e4:
            raise ValueError("arrival rate must be in [0, 10^4] per 10^4 bits")
        if self.mean_len < 1:
            raise ValueError(f"mean burst length must be >= 1, got {self.mean_len}")
        if not 0 <= self.flip_prob_in_burst <= 1:
            raise ValueError("in-burst flip probability must be in [0, 1]")


@dataclass(frozen=True)
class Composite:
    models: tuple


Model = Union[Bsc, Awgn, Burst, Composite]


@dataclass(frozen=True)
class ChannelConfig:
    model: Model
    seed: int = 0

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed)


def bsc_apply(stream, p: float, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Flip each bit independently with probability ``p``."""
    if not 0 <= p <= 0.5:
        raise ValueError(f"flip probability must be in [0, 0.5], got {p}")
    s = np.asarray(stream, dtype=np.uint8)
    if p == 0:
        return s.copy(), 0
    flips = rng.random(s.shape) < p
    return s ^ flips.astype(np.uint8), int(np.count_nonzero(flips))


def burst_at(stream, offset: int, length: int) -> tuple[np.ndarray, int]:
    """Flip exactly the bits ``offset .. offset+length-1``."""
    s = np.array(stream, dtype=np.uint8)
    if offset < 0 or length < 0 or offset + length > s.size:
        raise ValueError(f"burst [{offset}, {offset + length}) outside a {s.size}-bit stream")
    s[offset : offset + length] ^= 1
    return s, length


def burst_apply(stream, cfg: Burst, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Bernoulli burst arrivals with geometric lengths; overlapping bursts merge."""
    s = np.asarray(stream, dtype=np.uint8)
    flat = s.reshape(-1)
    n = flat.size
    if cfg.arrival_rate == 0 or n == 0:
        return s.copy(), 0
    starts = np.flatnonzero(rng.random(n) < cfg.arrival_rate / 1e4)
    lengths = rng.geometric(1.0 / cfg.mean_len, size=starts.size)
    edges = np.zeros(n + 1, dtype=np.int64)
    np.add.at(edges, starts, 1)
    np.add.at(edges, np.minimum(starts + lengths, n), -1)
    covered = np.cumsum(edges[:n]) > 0
    flips = covered & (rng.random(n) < cfg.flip_prob_in_burst)
    return (flat ^ flips.astype(np.uint8)).reshape(s.shape), int(np.count_nonzero(flips))


def apply(stream, model: Model, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    if isinstance(model, Bsc):
        return bsc_apply(stream, model.p, rng)
    if isinstance(model, Awgn):
        return bsc_apply(stream, model.p, rng)
    if isinstance(model, Burst):
        return burst_apply(stream, model, rng)
    if isinstance(model, Composite):
        original = np.asarray(stream, dtype=np.uint8)
        out = original
        for m in model.models:
            out, _ = apply(out, m, rng)
        # stages can cancel each other's flips; count the net difference
        return out, int(np.count_nonzero(out != original))
    raise TypeError(f"unknown channel model {model!r}")
