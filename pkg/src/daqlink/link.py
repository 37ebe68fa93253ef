"""Gearbox (frame <-> 40-bit words <-> serial bits) and the frame aligner.

The aligner models the receiver's pattern search. It tracks a candidate
frame start ``c`` in absolute stream coordinates:

* HUNT: slide ``c`` one bit at a time until the four bits at ``c`` equal a
  header constant (``1010`` standard, ``0101`` no-FEC).
* CONFIRM: check for the same constant at ``c + 120*k``; 32 consecutive
  matches lock the link. Any miss returns to HUNT at ``c + 1``; received
  bits are buffered, so the slide re-examines data already seen.
* LOCKED: emit every 120-bit frame starting at the locked offset, beginning
  with the first confirmed one. A single header miss only bumps a counter;
  ``LOSS_OF_LOCK_MISSES`` consecutive misses drop back to HUNT at one bit
  past the first missing header.

Decisions depend only on stream positions, never on how the input is
chunked, so ``feed`` over a whole capture and ``step`` bit-by-bit yield the
same frames and the same lock latency.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .bits import as_bits
from .frame import HEADER_BITS, Mode, mode_of_header
from .interleave import FRAME_BITS

WORD_BITS = 40
WORDS_PER_FRAME = FRAME_BITS // WORD_BITS
CONFIRMATIONS = 32
LOSS_OF_LOCK_MISSES = 3

_NIBBLE_MODE = {0b1010: Mode.STANDARD, 0b0101: Mode.NOFEC}


def frame_to_words(frame) -> list[np.ndarray]:
    f = as_bits(frame, FRAME_BITS)
    return [f[i * WORD_BITS : (i + 1) * WORD_BITS].copy() for i in range(WORDS_PER_FRAME)]


def words_to_frame(words) -> np.ndarray:
    if len(words) != WORDS_PER_FRAME:
        raise ValueError(f"a frame is {WORDS_PER_FRAME} words, got {len(words)}")
    return np.concatenate([as_bits(w, WORD_BITS) for w in words])


def serialize(words: Iterable) -> np.ndarray:
    """MSB-first bit stream of the given 40-bit words, in order."""
    parts = [as_bits(w, WORD_BITS) for w in words]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.uint8)


def deserialize(stream) -> list[np.ndarray]:
    s = as_bits(stream)
    if s.size % WORD_BITS:
        raise ValueError(f"stream length {s.size} is not a multiple of {WORD_BITS}")
    return list(s.reshape(-1, WORD_BITS).copy())


class Phase(enum.Enum):
    HUNT = "hunt"
    CONFIRM = "confirm"
    LOCKED = "locked"


class AlignedFrame(NamedTuple):
    start: int  # absolute stream index of the frame's first bit
    mode: Mode
    bits: np.ndarray
    header_ok: bool


@dataclass(frozen=True)
class LockStatus:
    phase: Phase
    bit_offset: int | None
    frames_emitted: int
    mode: Mode | None = None
    lock_latency_bits: int | None = None
    header_misses: int = 0
    locks: int = 0


@dataclass
class FrameAligner:
    """Bit-slip frame aligner; one instance per received stream."""

    confirmations: int = CONFIRMATIONS
    loss_misses: int = LOSS_OF_LOCK_MISSES

    phase: Phase = field(default=Phase.HUNT, init=False)
    candidate: int = field(default=0, init=False)  # absolute start of candidate/locked frame
    confirm_count: int = field(default=0, init=False)
    mode: Mode | None = field(default=None, init=False)
    frames_emitted: int = field(default=0, init=False)
    header_misses: int = field(default=0, init=False)
    consecutive_misses: int = field(default=0, init=False)
    miss_run_start: int | None = field(default=None, init=False)
    lock_latency_bits: int | None = field(default=None, init=False)
    locks: int = field(default=0, init=False)
    received: int = field(default=0, init=False)

    def __post_init__(self):
        self._buf = np.zeros(8192, dtype=np.uint8)
        self._base = 0  # absolute index of _buf[0]
        self._len = 0

    # -- buffer ------------------------------------------------------------

    def _append(self, bits: np.ndarray) -> None:
        need = self._len + bits.size
        if need > self._buf.size:
            keep = self._keep_from() - self._base
            self._buf[: self._len - keep] = self._buf[keep : self._len]
            self._base += keep
            self._len -= keep
            need -= keep
            if need > self._buf.size:
                grown = np.zeros(max(need, 2 * self._buf.size), dtype=np.uint8)
                grown[: self._len] = self._buf[: self._len]
                self._buf = grown
        self._buf[self._len : self._len + bits.size] = bits
        self._len += bits.size
        self.received += bits.size

    def _keep_from(self) -> int:
        keep = self.candidate
        if self.miss_run_start is not None:
            keep = min(keep, self.miss_run_start)
        return max(self._base, keep)

    @property
    def _end(self) -> int:
        return self._base + self._len

    def _view(self, start: int, stop: int) -> np.ndarray:
        return self._buf[start - self._base : stop - self._base]

    def _nibble(self, pos: int) -> int:
        b = self._view(pos, pos + HEADER_BITS)
        return int(b[0]) << 3 | int(b[1]) << 2 | int(b[2]) << 1 | int(b[3])

    # -- state machine -----------------------------------------------------

    def step(self, bit: int) -> list[AlignedFrame]:
        return self.feed(np.array([bit], dtype=np.uint8))

    def feed(self, bits) -> list[AlignedFrame]:
        """Consume received bits; return frames emitted as a result."""
        self._append(as_bits(bits))
        out: list[AlignedFrame] = []
        while True:
            if self.phase is Phase.HUNT:
                if not self._hunt():
                    break
            elif self.phase is Phase.CONFIRM:
                if not self._confirm():
                    break
            elif not self._locked(out):
                break
        return out

    def _hunt(self) -> bool:
        last = self._end - HEADER_BITS  # last start whose header is complete
        if self.candidate > last:
            return False
        w = self._view(self.candidate, self._end).astype(np.int16)
        nib = (w[:-3] << 3) | (w[1:-2] << 2) | (w[2:-1] << 1) | w[3:]
        hits = np.flatnonzero((nib == 0b1010) | (nib == 0b0101))
        if hits.size == 0:
            self.candidate = last + 1
            return False
        self.candidate += int(hits[0])
        self.mode = _NIBBLE_MODE[int(nib[hits[0]])]
        self.phase = Phase.CONFIRM
        self.confirm_count = 0
        return True

    def _confirm(self) -> bool:
        want = 0b1010 if self.mode is Mode.STANDARD else 0b0101
        while self.confirm_count < self.confirmations:
            pos = self.candidate + FRAME_BITS * (self.confirm_count + 1)
            if pos + HEADER_BITS > self._end:
                return False
            if self._nibble(pos) != want:
                self.phase = Phase.HUNT
                self.candidate += 1
                self.mode = None
                return True
            self.confirm_count += 1
        self.phase = Phase.LOCKED
        self.locks += 1
        self.consecutive_misses = 0
        self.miss_run_start = None
        if self.lock_latency_bits is None:
            self.lock_latency_bits = self.candidate + FRAME_BITS * self.confirmations + HEADER_BITS
        return True

    def _locked(self, out: list[AlignedFrame]) -> bool:
        n = (self._end - self.candidate) // FRAME_BITS
        if n == 0:
            return False
        block = self._view(self.candidate, self.candidate + n * FRAME_BITS).reshape(n, FRAME_BITS).copy()
        want = self.mode.header
        ok = np.all(block[:, :HEADER_BITS] == want, axis=1)
        for i in range(n):
            start = self.candidate
            if ok[i]:
                self.consecutive_misses = 0
                self.miss_run_start = None
            else:
                self.header_misses += 1
                self.consecutive_misses += 1
                if self.miss_run_start is None:
                    self.miss_run_start = start
                if self.consecutive_misses >= self.loss_misses:
                    self.phase = Phase.HUNT
                    self.candidate = self.miss_run_start + 1
                    self.miss_run_start = None
                    self.consecutive_misses = 0
                    self.mode = None
                    return True
            out.append(AlignedFrame(start, self.mode, block[i], bool(ok[i])))
            self.frames_emitted += 1
            self.candidate += FRAME_BITS
        return True

    def lock_status(self) -> LockStatus:
        locked = self.phase is Phase.LOCKED
        return LockStatus(
            phase=self.phase,
            bit_offset=self.candidate % FRAME_BITS if locked else None,
            frames_emitted=self.frames_emitted,
            mode=self.mode if locked else None,
            lock_latency_bits=self.lock_latency_bits,
            header_misses=self.header_misses,
            locks=self.locks,
        )
