"""Header-pinned block interleaver for the 120-bit encoded frame.

The frame splits into two 60-bit halves. Bits 0-3 (the header) are fixed
points. The remaining 56 bits of half A (positions 4-59) are written
row-major into a 7x8 matrix and read column-major; half B (60-119) uses a
6x10 matrix the same way. ``perm[i]`` is the output position of input bit i.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .bits import as_bits

FRAME_BITS = 120
HALF = 60
HEADER_POSITIONS = (0, 1, 2, 3)


class InterleaveMapError(ValueError):
    pass


def _block_perm(base: int, rows: int, cols: int) -> dict[int, int]:
    return {base + r * cols + c: base + c * rows + r for r in range(rows) for c in range(cols)}


def default_perm() -> tuple[int, ...]:
    perm = list(range(FRAME_BITS))
    for src, dst in {**_block_perm(4, 7, 8), **_block_perm(HALF, 6, 10)}.items():
        perm[src] = dst
    return tuple(perm)


@dataclass(frozen=True)
class InterleaveMap:
    perm: tuple[int, ...]

    def __post_init__(self):
        p = self.perm
        if len(p) != FRAME_BITS or sorted(p) != list(range(FRAME_BITS)):
            raise InterleaveMapError("interleave table must be a permutation of 0..119")
        if any(p[i] != i for i in HEADER_POSITIONS):
            raise InterleaveMapError("header positions 0-3 must be fixed points")
        if any((i < HALF) != (p[i] < HALF) for i in range(FRAME_BITS)):
            raise InterleaveMapError("each 60-bit half must map onto itself")

    @cached_property
    def forward(self) -> np.ndarray:
        return np.asarray(self.perm, dtype=np.intp)

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.empty(FRAME_BITS, dtype=np.intp)
        inv[self.forward] = np.arange(FRAME_BITS)
        return inv

    @classmethod
    def from_file(cls, path: str | Path) -> InterleaveMap:
        values = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise InterleaveMapError(f"{path}:{lineno}: not an integer: {line!r}") from None
        return cls(tuple(values))

    def dump(self) -> str:
        return "".join(f"{p}\n" for p in self.perm)


DEFAULT_MAP = InterleaveMap(default_perm())
IDENTITY_MAP = InterleaveMap(tuple(range(FRAME_BITS)))


def interleave120(frame, imap: InterleaveMap = DEFAULT_MAP) -> np.ndarray:
    f = as_bits(frame, FRAME_BITS)
    out = np.empty_like(f)
    out[imap.forward] = f
    return out


def deinterleave120(frame, imap: InterleaveMap = DEFAULT_MAP) -> np.ndarray:
    return as_bits(frame, FRAME_BITS)[imap.forward]


def interleave_rows(frames: np.ndarray, imap: InterleaveMap = DEFAULT_MAP) -> np.ndarray:
    return frames[:, imap.inverse]


def deinterleave_rows(frames: np.ndarray, imap: InterleaveMap = DEFAULT_MAP) -> np.ndarray:
    return frames[:, imap.forward]


def block_error_counts(
    offset: int, length: int, imap: InterleaveMap = DEFAULT_MAP, skip=HEADER_POSITIONS
) -> np.ndarray:
    """Errors per 15-bit codeword left by a burst on interleaved positions
    ``offset .. offset+length-1`` after de-interleaving.

    Positions in ``skip`` are known to the receiver (the header) and are not
    counted.
    """
    hit = [q for q in range(offset, min(offset + length, FRAME_BITS)) if q not in skip]
    src = imap.inverse[hit] if hit else np.empty(0, dtype=np.intp)
    return np.bincount(src // 15, minlength=8)


def burst_tolerance(imap: InterleaveMap = DEFAULT_MAP, skip=HEADER_POSITIONS) -> int:
    """Largest L such that every burst of length <= L, at every offset inside
    the frame, leaves at most two unknown errors in each codeword."""
    for length in range(1, FRAME_BITS + 1):
        for offset in range(FRAME_BITS - length + 1):
            if block_error_counts(offset, length, imap, skip).max() > 2:
                return length - 1
    return FRAME_BITS
