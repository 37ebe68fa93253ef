"""Bit-vector helpers.

Bits are carried as ``numpy.uint8`` arrays holding 0/1, index 0 first on the
wire. Integer conversions are MSB-first: bit 0 of a vector is the most
significant bit of the integer.
"""

from __future__ import annotations

import numpy as np

BitArray = np.ndarray


def as_bits(bits, width: int | None = None) -> BitArray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D bit vector, got shape {arr.shape}")
    if width is not None and arr.size != width:
        raise ValueError(f"expected {width} bits, got {arr.size}")
    if arr.size and arr.max() > 1:
        raise ValueError("bit vector contains values other than 0/1")
    return arr


def from_int(value: int, width: int) -> BitArray:
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def to_int(bits) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.uint8).tolist():
        out = (out << 1) | b
    return out


def from_str(text: str) -> BitArray:
    """Parse ``"1010 0110"`` style strings; whitespace and underscores ignored."""
    clean = text.replace(" ", "").replace("_", "")
    if set(clean) - {"0", "1"}:
        raise ValueError(f"not a bit string: {text!r}")
    return np.frombuffer(clean.encode(), dtype=np.uint8) - ord("0")


def to_str(bits) -> str:
    return "".join(str(b) for b in np.asarray(bits, dtype=np.uint8).tolist())


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis (MSB first) into integers; width must be <= 63."""
    bits = np.asarray(bits, dtype=np.int64)
    width = bits.shape[-1]
    weights = np.left_shift(np.int64(1), np.arange(width - 1, -1, -1, dtype=np.int64))
    return bits @ weights


def unpack_rows(values: np.ndarray, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_bytes(bits) -> bytes:
    """MSB-first packing; a trailing partial byte is zero-filled."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def bytes_to_bits(data: bytes) -> BitArray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def to_hex(bits) -> str:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.size % 4:
        raise ValueError("bit count must be a multiple of 4 for hex output")
    nibbles = pack_rows(arr.reshape(-1, 4))
    return "".join("0123456789abcdef"[n] for n in nibbles.tolist())


def from_hex(text: str, width: int | None = None) -> BitArray:
    text = text.strip().lower()
    try:
        nibbles = [int(c, 16) for c in text]
    except ValueError:
        raise ValueError(f"not a hex string: {text!r}") from None
    bits = unpack_rows(np.array(nibbles, dtype=np.int64), 4).reshape(-1)
    if width is not None and bits.size != width:
        raise ValueError(f"expected {width // 4} hex digits, got {len(text)}")
    return bits


def max_run(bits) -> int:
    """Length of the longest run of identical symbols."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.size == 0:
        return 0
    edges = np.flatnonzero(np.diff(arr)) + 1
    bounds = np.concatenate(([0], edges, [arr.size]))
    return int(np.diff(bounds).max())
