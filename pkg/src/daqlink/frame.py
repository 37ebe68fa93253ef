"""120-bit frame composition and decomposition.

Standard frame (TX order)::

    slow_control(4) ++ data(48)  --scramble52-->  52 bits
    header 1010 ++ 52 bits       = 56 bits = eight 7-bit messages
    message i = bits 7i..7i+6    --BCH(15,7)-->  codeword i at bits 15i..15i+14
    120 bits                     --interleave120-->  frame

The encoder is systematic and the interleaver pins positions 0-3, so the
header is readable on the line before any decoding. No-FEC frames are just
``0101 ++ scramble116(slow_control ++ data)``.

The receiver knows the header constant of the mode it is parsing. By default
(``header_aided=True``) it overwrites the four received header bits with
that constant before decoding codeword 0, so header hits never count
against the two-error budget of that codeword. Restored bits are reported
as corrections.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import fec
from .bits import as_bits, pack_rows, unpack_rows
from .interleave import DEFAULT_MAP, FRAME_BITS, InterleaveMap, deinterleave120, interleave120
from .scramble import (
    DEFAULT_CONFIG,
    NOFEC_BITS,
    STANDARD_BITS,
    ScramblerConfig,
    descramble52,
    descramble116,
    nofec_mask,
    scramble52,
    scramble116,
    standard_mask,
)

HEADER_BITS = 4
SLOW_CONTROL_BITS = 4
STANDARD_DATA_BITS = 48
NOFEC_DATA_BITS = 112
BLOCKS = 8

HEADER_STANDARD = np.array([1, 0, 1, 0], dtype=np.uint8)
HEADER_NOFEC = np.array([0, 1, 0, 1], dtype=np.uint8)


class Mode(str, enum.Enum):
    STANDARD = "standard"
    NOFEC = "nofec"

    @property
    def header(self) -> np.ndarray:
        return HEADER_STANDARD if self is Mode.STANDARD else HEADER_NOFEC

    @property
    def payload_bits(self) -> int:
        return STANDARD_BITS if self is Mode.STANDARD else NOFEC_BITS

    @property
    def data_bits(self) -> int:
        return STANDARD_DATA_BITS if self is Mode.STANDARD else NOFEC_DATA_BITS


def mode_of_header(header) -> Mode | None:
    h = np.asarray(header, dtype=np.uint8)
    if np.array_equal(h, HEADER_STANDARD):
        return Mode.STANDARD
    if np.array_equal(h, HEADER_NOFEC):
        return Mode.NOFEC
    return None


@dataclass(frozen=True)
class StandardPayload:
    slow_control: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "slow_control", as_bits(self.slow_control, SLOW_CONTROL_BITS))
        object.__setattr__(self, "data", as_bits(self.data, STANDARD_DATA_BITS))

    @property
    def bits(self) -> np.ndarray:
        return np.concatenate((self.slow_control, self.data))

    @classmethod
    def from_bits(cls, bits) -> StandardPayload:
        b = as_bits(bits, STANDARD_BITS)
        return cls(b[:SLOW_CONTROL_BITS], b[SLOW_CONTROL_BITS:])

    def __eq__(self, other):
        if not isinstance(other, StandardPayload):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class NoFecPayload:
    slow_control: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "slow_control", as_bits(self.slow_control, SLOW_CONTROL_BITS))
        object.__setattr__(self, "data", as_bits(self.data, NOFEC_DATA_BITS))

    @property
    def bits(self) -> np.ndarray:
        return np.concatenate((self.slow_control, self.data))

    @classmethod
    def from_bits(cls, bits) -> NoFecPayload:
        b = as_bits(bits, NOFEC_BITS)
        return cls(b[:SLOW_CONTROL_BITS], b[SLOW_CONTROL_BITS:])

    def __eq__(self, other):
        if not isinstance(other, NoFecPayload):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


class FrameState(enum.Enum):
    CLEAN = "clean"
    CORRECTED = "corrected"
    HEADER_MISMATCH = "header_mismatch"
    UNCORRECTABLE = "uncorrectable"


@dataclass(frozen=True)
class FrameStatus:
    corrected: int = 0
    uncorrectable: tuple[int, ...] = ()
    header_mismatch: bool = False
    header_errors: int = 0
    block_flips: tuple[int, ...] = field(default=(), compare=False)

    @property
    def state(self) -> FrameState:
        if self.uncorrectable:
            return FrameState.UNCORRECTABLE
        if self.header_mismatch:
            return FrameState.HEADER_MISMATCH
        if self.corrected:
            return FrameState.CORRECTED
        return FrameState.CLEAN

    @property
    def clean(self) -> bool:
        return self.state is FrameState.CLEAN


def _payload_bits(payload, mode: Mode) -> np.ndarray:
    if isinstance(payload, (StandardPayload, NoFecPayload)):
        expected = StandardPayload if mode is Mode.STANDARD else NoFecPayload
        if not isinstance(payload, expected):
            raise TypeError(f"{type(payload).__name__} cannot be sent in {mode.value} mode")
        return payload.bits
    return as_bits(payload, mode.payload_bits)


# -- single-frame reference path ------------------------------------------


def build_standard(
    payload,
    scrambler: ScramblerConfig = DEFAULT_CONFIG,
    imap: InterleaveMap = DEFAULT_MAP,
) -> np.ndarray:
    bits56 = np.concatenate((HEADER_STANDARD, scramble52(_payload_bits(payload, Mode.STANDARD), scrambler)))
    encoded = np.concatenate([fec.bch_encode(bits56[7 * i : 7 * i + 7]) for i in range(BLOCKS)])
    return interleave120(encoded, imap)


def parse_standard(
    frame,
    scrambler: ScramblerConfig = DEFAULT_CONFIG,
    imap: InterleaveMap = DEFAULT_MAP,
    header_aided: bool = True,
) -> tuple[StandardPayload, FrameStatus]:
    encoded = deinterleave120(as_bits(frame, FRAME_BITS), imap)
    header_errors = 0
    if header_aided:
        header_errors = int(np.count_nonzero(encoded[:HEADER_BITS] != HEADER_STANDARD))
        encoded[:HEADER_BITS] = HEADER_STANDARD
    messages = []
    flips = []
    for i in range(BLOCKS):
        outcome = fec.bch_decode(encoded[15 * i : 15 * i + 15])
        messages.append(outcome.message)
        flips.append(-1 if outcome.status is fec.DecodeStatus.UNCORRECTABLE else outcome.count)
    if header_errors and flips[0] >= 0:
        flips[0] += header_errors
    bits56 = np.concatenate(messages)
    status = FrameStatus(
        corrected=sum(f for f in flips if f > 0),
        uncorrectable=tuple(i for i, f in enumerate(flips) if f < 0),
        header_mismatch=not np.array_equal(bits56[:HEADER_BITS], HEADER_STANDARD),
        header_errors=header_errors,
        block_flips=tuple(flips),
    )
    payload = StandardPayload.from_bits(descramble52(bits56[HEADER_BITS:], scrambler))
    return payload, status


def build_nofec(payload, scrambler: ScramblerConfig = DEFAULT_CONFIG) -> np.ndarray:
    return np.concatenate((HEADER_NOFEC, scramble116(_payload_bits(payload, Mode.NOFEC), scrambler)))


def parse_nofec(frame, scrambler: ScramblerConfig = DEFAULT_CONFIG) -> tuple[NoFecPayload, FrameStatus]:
    f = as_bits(frame, FRAME_BITS)
    header_errors = int(np.count_nonzero(f[:HEADER_BITS] != HEADER_NOFEC))
    status = FrameStatus(header_mismatch=bool(header_errors), header_errors=header_errors)
    return NoFecPayload.from_bits(descramble116(f[HEADER_BITS:], scrambler)), status


# -- batch path -------------------------------------------------------------


@dataclass
class BatchStatus:
    """Per-frame decode results for a batch of ``n`` frames.

    ``block_flips[f, b]`` is the number of bits flipped in codeword ``b`` of
    frame ``f`` (header restorations included), or -1 if uncorrectable.
    """

    block_flips: np.ndarray  # (n, 8) int8
    header_errors: np.ndarray  # (n,) int
    header_mismatch: np.ndarray  # (n,) bool

    @property
    def corrected_blocks(self) -> int:
        return int(np.count_nonzero(self.block_flips > 0))

    @property
    def uncorrectable_blocks(self) -> int:
        return int(np.count_nonzero(self.block_flips < 0))

    def frame_status(self, i: int) -> FrameStatus:
        flips = self.block_flips[i].tolist()
        return FrameStatus(
            corrected=sum(f for f in flips if f > 0),
            uncorrectable=tuple(b for b, f in enumerate(flips) if f < 0),
            header_mismatch=bool(self.header_mismatch[i]),
            header_errors=int(self.header_errors[i]),
            block_flips=tuple(flips),
        )


def _check_rows(rows, width: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.uint8)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"expected an (n, {width}) bit array, got shape {arr.shape}")
    return arr


def build_standard_rows(
    payloads,
    scrambler: ScramblerConfig = DEFAULT_CONFIG,
    imap: InterleaveMap = DEFAULT_MAP,
) -> np.ndarray:
    p = _check_rows(payloads, STANDARD_BITS)
    n = p.shape[0]
    bits56 = np.empty((n, 56), dtype=np.uint8)
    bits56[:, :HEADER_BITS] = HEADER_STANDARD
    bits56[:, HEADER_BITS:] = p ^ standard_mask(scrambler)
    words = fec.encode_table()[pack_rows(bits56.reshape(n, BLOCKS, 7))]
    encoded = unpack_rows(words, 15).reshape(n, FRAME_BITS)
    return encoded[:, imap.inverse]


def parse_standard_rows(
    frames,
    scrambler: ScramblerConfig = DEFAULT_CONFIG,
    imap: InterleaveMap = DEFAULT_MAP,
    header_aided: bool = True,
) -> tuple[np.ndarray, BatchStatus]:
    f = _check_rows(frames, FRAME_BITS)
    n = f.shape[0]
    encoded = f[:, imap.forward]
    if header_aided:
        header_errors = np.count_nonzero(encoded[:, :HEADER_BITS] != HEADER_STANDARD, axis=1)
        encoded[:, :HEADER_BITS] = HEADER_STANDARD
    else:
        header_errors = np.zeros(n, dtype=np.int64)
    msg_table, flip_table = fec.decode_table()
    words = pack_rows(encoded.reshape(n, BLOCKS, 15))
    flips = flip_table[words].astype(np.int8)
    bits56 = unpack_rows(msg_table[words], 7).reshape(n, 56)
    ok0 = flips[:, 0] >= 0
    flips[ok0, 0] += header_errors[ok0].astype(np.int8)
    status = BatchStatus(
        block_flips=flips,
        header_errors=header_errors,
        header_mismatch=np.any(bits56[:, :HEADER_BITS] != HEADER_STANDARD, axis=1),
    )
    return bits56[:, HEADER_BITS:] ^ standard_mask(scrambler), status


def build_nofec_rows(payloads, scrambler: ScramblerConfig = DEFAULT_CONFIG) -> np.ndarray:
    p = _check_rows(payloads, NOFEC_BITS)
    out = np.empty((p.shape[0], FRAME_BITS), dtype=np.uint8)
    out[:, :HEADER_BITS] = HEADER_NOFEC
    out[:, HEADER_BITS:] = p ^ nofec_mask(scrambler)
    return out


def parse_nofec_rows(frames, scrambler: ScramblerConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, BatchStatus]:
    f = _check_rows(frames, FRAME_BITS)
    n = f.shape[0]
    header_errors = np.count_nonzero(f[:, :HEADER_BITS] != HEADER_NOFEC, axis=1)
    status = BatchStatus(
        block_flips=np.zeros((n, BLOCKS), dtype=np.int8),
        header_errors=header_errors,
        header_mismatch=header_errors > 0,
    )
    return f[:, HEADER_BITS:] ^ nofec_mask(scrambler), status


def build_rows(payloads, mode: Mode, scrambler=DEFAULT_CONFIG, imap=DEFAULT_MAP) -> np.ndarray:
    if Mode(mode) is Mode.STANDARD:
        return build_standard_rows(payloads, scrambler, imap)
    return build_nofec_rows(payloads, scrambler)


def parse_rows(frames, mode: Mode, scrambler=DEFAULT_CONFIG, imap=DEFAULT_MAP, header_aided=True):
    if Mode(mode) is Mode.STANDARD:
        return parse_standard_rows(frames, scrambler, imap, header_aided)
    return parse_nofec_rows(frames, scrambler)
