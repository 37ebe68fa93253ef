"""GF(2^4) arithmetic and the BCH(15,7,2) codec.

Polynomial convention used throughout: bit index ``j`` of a 15-bit codeword
(``j = 0`` is transmitted first) is the coefficient of ``x**(14 - j)``. With
MSB-first integer packing this means the packed integer *is* the polynomial,
bit ``k`` of the integer being the coefficient of ``x**k``.

The decoder follows the textbook algebraic route for t = 2: syndromes S1 and
S3, the Peterson closed-form locator, then a Chien search over all 15
positions. :func:`decode_table` caches that route over every 15-bit word so
the frame codec can decode whole batches with one lookup.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bits import as_bits, from_int, to_int

FIELD_POLY = 0b10011  # x^4 + x + 1
ALPHA = 0b0010

N = 15
K = 7
T = 2
GENERATOR = 0b111010001  # x^8 + x^7 + x^6 + x^4 + 1


def _build_tables() -> tuple[tuple[int, ...], tuple[int, ...]]:
    exp = [0] * 30
    log = [0] * 16
    x = 1
    for i in range(15):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x10:
            x ^= FIELD_POLY
    for i in range(15, 30):
        exp[i] = exp[i - 15]
    return tuple(exp), tuple(log)


EXP, LOG = _build_tables()


class Uncorrectable(Exception):
    """Raised by the locator or Chien search when the error weight exceeds t."""


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("no inverse of zero in GF(16)")
    return EXP[(15 - LOG[a]) % 15]


def gf_pow(a: int, e: int) -> int:
    if a == 0:
        return 0 if e else 1
    return EXP[(LOG[a] * e) % 15]


@dataclass(frozen=True)
class BchParams:
    n: int = N
    k: int = K
    t: int = T
    g: int = GENERATOR


BCH = BchParams()


@dataclass(frozen=True)
class Syndromes:
    s1: int
    s3: int

    @property
    def zero(self) -> bool:
        return self.s1 == 0 and self.s3 == 0


class DecodeStatus(enum.Enum):
    CLEAN = "clean"
    CORRECTED = "corrected"
    UNCORRECTABLE = "uncorrectable"


@dataclass(frozen=True)
class DecodeOutcome:
    message: np.ndarray
    status: DecodeStatus
    flips: tuple[int, ...] = ()

    @property
    def count(self) -> int:
        return len(self.flips)


def poly_mod(dividend: int, divisor: int) -> int:
    """Remainder of GF(2) polynomial division, both given as bit masks."""
    dlen = divisor.bit_length()
    while dividend.bit_length() >= dlen:
        dividend ^= divisor << (dividend.bit_length() - dlen)
    return dividend


def encode_int(message: int) -> int:
    shifted = message << (N - K)
    return shifted | poly_mod(shifted, GENERATOR)


def bch_encode(message) -> np.ndarray:
    """Systematic encode: bits 0-6 carry the message, bits 7-14 the parity."""
    m = as_bits(message, K)
    return from_int(encode_int(to_int(m)), N)


def syndromes_int(word: int) -> Syndromes:
    s1 = s3 = 0
    for k in range(N):
        if word >> k & 1:
            s1 ^= EXP[k]
            s3 ^= EXP[(3 * k) % 15]
    return Syndromes(s1, s3)


def bch_syndromes(received) -> Syndromes:
    return syndromes_int(to_int(as_bits(received, N)))


def bch_locator(s: Syndromes) -> tuple[int, ...]:
    """Peterson locator for t = 2, coefficients lowest degree first.

    ``(1,)`` means no error, ``(1, s1)`` one error, ``(1, s1, sigma2)`` two.
    """
    if s.s1 == 0:
        if s.s3 == 0:
            return (1,)
        raise Uncorrectable("S1 = 0 with S3 != 0")
    s1_cubed = gf_pow(s.s1, 3)
    if s.s3 == s1_cubed:
        return (1, s.s1)
    sigma2 = gf_mul(s.s3 ^ s1_cubed, gf_inv(s.s1))
    return (1, s.s1, sigma2)


def _poly_eval(coeffs: tuple[int, ...], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = gf_mul(acc, x) ^ c
    return acc


def chien_search(sigma: tuple[int, ...]) -> tuple[int, ...]:
    """Bit positions (0 = first transmitted) whose locator root is present.

    Position ``j`` carries ``x**(14 - j)``; its error locator is
    ``alpha**(14 - j)`` and the matching root of sigma is the inverse of that.
    """
    if not sigma or sigma[0] != 1:
        raise ValueError("locator must have constant term 1")
    degree = len(sigma) - 1
    while degree and sigma[degree] == 0:
        degree -= 1
    positions = tuple(
        j for j in range(N) if _poly_eval(sigma[: degree + 1], EXP[(15 - (14 - j)) % 15]) == 0
    )
    if len(positions) != degree:
        raise Uncorrectable(f"locator of degree {degree} has {len(positions)} roots")
    return positions


def decode_int(word: int) -> tuple[int, int]:
    """Algebraic decode of a packed word.

    Returns ``(message, flips)`` with ``flips = -1`` when uncorrectable; the
    message is then the raw systematic bits.
    """
    try:
        positions = chien_search(bch_locator(syndromes_int(word)))
    except Uncorrectable:
        return word >> (N - K), -1
    for j in positions:
        word ^= 1 << (14 - j)
    return word >> (N - K), len(positions)


def bch_decode(received) -> DecodeOutcome:
    r = as_bits(received, N)
    word = to_int(r)
    try:
        positions = chien_search(bch_locator(syndromes_int(word)))
    except Uncorrectable:
        return DecodeOutcome(r[:K].copy(), DecodeStatus.UNCORRECTABLE)
    fixed = r.copy()
    for j in positions:
        fixed[j] ^= 1
    status = DecodeStatus.CORRECTED if positions else DecodeStatus.CLEAN
    return DecodeOutcome(fixed[:K], status, positions)


@lru_cache(maxsize=None)
def encode_table() -> np.ndarray:
    """Codeword (packed) for each of the 128 messages."""
    table = np.array([encode_int(m) for m in range(1 << K)], dtype=np.int64)
    table.flags.writeable = False
    return table


@lru_cache(maxsize=None)
def decode_table() -> tuple[np.ndarray, np.ndarray]:
    """``(message, flips)`` arrays indexed by every packed 15-bit word."""
    msgs = np.empty(1 << N, dtype=np.int64)
    flips = np.empty(1 << N, dtype=np.int8)
    for w in range(1 << N):
        msgs[w], flips[w] = decode_int(w)
    msgs.flags.writeable = False
    flips.flags.writeable = False
    return msgs, flips
