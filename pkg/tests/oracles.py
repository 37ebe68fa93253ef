"""Independent reference computations used to derive expected test values.

Nothing here imports the package under test.
"""

from itertools import combinations

FIELD_POLY = 0b10011
GENERATOR = 0b111010001


def peasant_mul(a, b):
    """Shift-and-add multiply in GF(2)[x], reduced mod x^4 + x + 1."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a & 0x10:
            a ^= FIELD_POLY
    return acc


def long_division_remainder(dividend_bits, divisor_bits):
    """Schoolbook polynomial division on coefficient lists (highest power first)."""
    rem = list(dividend_bits)
    d = len(divisor_bits)
    for i in range(len(rem) - d + 1):
        if rem[i]:
            for j in range(d):
                rem[i + j] ^= divisor_bits[j]
    return rem[-(d - 1):]


G_BITS = [1, 1, 1, 0, 1, 0, 0, 0, 1]  # x^8 + x^7 + x^6 + x^4 + 1


def encode_oracle(msg7):
    parity = long_division_remainder(list(msg7) + [0] * 8, G_BITS)
    return list(msg7) + parity


def all_codewords():
    out = []
    for m in range(128):
        bits = [(m >> (6 - i)) & 1 for i in range(7)]
        out.append(tuple(encode_oracle(bits)))
    return out


def hamming(a, b):
    return sum(x != y for x, y in zip(a, b))


def nearest_codewords(word, codewords):
    """All codewords at minimum distance, and that distance."""
    dist = [hamming(word, c) for c in codewords]
    best = min(dist)
    return [c for c, d in zip(codewords, dist) if d == best], best


def alpha_power_eval(word_bits, power):
    """r(alpha^power), bit j carrying x^(14-j), by repeated peasant multiplication."""
    alpha_p = 1
    for _ in range(power):
        alpha_p = peasant_mul(alpha_p, 2)
    acc = 0
    for j, b in enumerate(word_bits):
        if b:
            term = 1
            for _ in range(14 - j):
                term = peasant_mul(term, alpha_p)
            acc ^= term
    return acc


def lfsr_recurrence(seed, length):
    """a[n] = a[n-9] ^ a[n-10] ^ a[n-12] ^ a[n-13]; seed bit k = a[-1-k]."""
    hist = [(seed >> (12 - i)) & 1 for i in range(13)]  # a[-13] .. a[-1]
    out = []
    for _ in range(length):
        n = len(hist)
        nxt = hist[n - 9] ^ hist[n - 10] ^ hist[n - 12] ^ hist[n - 13]
        hist.append(nxt)
        out.append(nxt)
    return out


def matrix_interleave_table():
    """Write rows / read columns, simulated on explicit matrices."""
    perm = list(range(120))

    def block(first, rows, cols):
        matrix = [[None] * cols for _ in range(rows)]
        src = iter(range(first, first + rows * cols))
        for r in range(rows):
            for c in range(cols):
                matrix[r][c] = next(src)
        out_pos = first
        for c in range(cols):
            for r in range(rows):
                perm[matrix[r][c]] = out_pos
                out_pos += 1

    block(4, 7, 8)
    block(60, 6, 10)
    return perm


def error_patterns(max_weight, n=15):
    for w in range(max_weight + 1):
        for pos in combinations(range(n), w):
            yield pos


def trapezoid_qfunc(x, upper=40.0, steps=400_000):
    import math

    if x < 0:
        return 1.0 - trapezoid_qfunc(-x, upper, steps)
    h = (upper - x) / steps
    f = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    total = 0.5 * (f(x) + f(upper))
    for i in range(1, steps):
        total += f(x + i * h)
    return total * h
