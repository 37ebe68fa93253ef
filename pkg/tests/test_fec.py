import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from daqlink import fec
from daqlink.bits import from_int, from_str, to_int, to_str

import oracles

CODEWORDS = oracles.all_codewords()


def flip(bits, positions):
    out = np.array(bits, dtype=np.uint8)
    for p in positions:
        out[p] ^= 1
    return out


# -- field ------------------------------------------------------------------


def test_gf_mul_examples():
    assert fec.gf_mul(0, 13) == 0
    assert fec.gf_mul(1, 9) == 9
    assert fec.gf_mul(0b1000, 0b0010) == 0b0011


def test_gf_mul_matches_peasant_oracle_exhaustively():
    for a in range(16):
        for b in range(16):
            assert fec.gf_mul(a, b) == oracles.peasant_mul(a, b), (a, b)


def test_gf_mul_commutative_and_closed():
    for a in range(1, 16):
        for b in range(1, 16):
            assert fec.gf_mul(a, b) == fec.gf_mul(b, a)
            assert fec.gf_mul(a, b) != 0


def test_alpha_is_primitive():
    powers = [fec.gf_pow(fec.ALPHA, k) for k in range(15)]
    assert sorted(powers) == list(range(1, 16))
    assert fec.gf_pow(fec.ALPHA, 15) == 1


def test_log_and_antilog_tables_are_inverse():
    for k in range(15):
        assert fec.LOG[fec.EXP[k]] == k
    for a in range(1, 16):
        assert fec.EXP[fec.LOG[a]] == a


def test_gf_inv():
    assert fec.gf_inv(1) == 1
    for a in range(1, 16):
        assert fec.gf_mul(a, fec.gf_inv(a)) == 1
    with pytest.raises(ZeroDivisionError, match="no inverse of zero"):
        fec.gf_inv(0)


# -- code parameters -----------------------------------------------------------


def test_generator_divides_x15_minus_1():
    assert fec.poly_mod((1 << 15) | 1, fec.GENERATOR) == 0
    assert fec.GENERATOR.bit_length() - 1 == fec.N - fec.K


def test_generator_is_lcm_of_minimal_polys():
    # roots of g are exactly alpha^i for i in the cyclotomic cosets of 1 and 3
    roots = set()
    for i in range(15):
        x = fec.EXP[i]
        acc = 0
        for k in range(9):
            if fec.GENERATOR >> k & 1:
                acc ^= fec.gf_pow(x, k)
        if acc == 0:
            roots.add(i)
    assert roots == {1, 2, 4, 8, 3, 6, 12, 9}


# -- encoder -------------------------------------------------------------------


def test_encode_zero():
    assert to_str(fec.bch_encode([0] * 7)) == "0" * 15


def test_encode_unit_message_parity():
    cw = fec.bch_encode(from_str("1000000"))
    assert to_str(cw[:7]) == "1000000"
    assert to_str(cw[7:]) == "11101000"
    assert oracles.encode_oracle([1, 0, 0, 0, 0, 0, 0])[7:] == [1, 1, 1, 0, 1, 0, 0, 0]


def test_encoder_matches_long_division_oracle_exhaustively():
    for m in range(128):
        assert tuple(fec.bch_encode(from_int(m, 7)).tolist()) == CODEWORDS[m]


def test_every_codeword_has_zero_syndromes():
    for m in range(128):
        s = fec.bch_syndromes(fec.bch_encode(from_int(m, 7)))
        assert s.zero


def test_minimum_distance_is_five():
    assert min(sum(c) for c in CODEWORDS[1:]) == 5


def test_encode_table_agrees():
    table = fec.encode_table()
    for m in range(128):
        assert to_int(CODEWORDS[m]) == table[m]


# -- syndromes / locator / Chien --------------------------------------------------


@pytest.mark.parametrize("j", range(15))
def test_single_flip_syndrome_is_alpha_power(j):
    r = flip([0] * 15, [j])
    s = fec.bch_syndromes(r)
    assert s.s1 == fec.EXP[14 - j]
    assert s.s1 == oracles.alpha_power_eval(r, 1)
    assert s.s3 == oracles.alpha_power_eval(r, 3)


def test_syndromes_depend_only_on_error_pattern(rng):
    for _ in range(300):
        c = CODEWORDS[rng.integers(128)]
        e = rng.integers(0, 2, 15, dtype=np.uint8)
        assert fec.bch_syndromes(np.array(c, dtype=np.uint8) ^ e) == fec.bch_syndromes(e)


def test_locator_no_error():
    assert fec.bch_locator(fec.Syndromes(0, 0)) == (1,)
    assert fec.chien_search((1,)) == ()


def test_locator_signals_uncorrectable():
    with pytest.raises(fec.Uncorrectable):
        fec.bch_locator(fec.Syndromes(0, 5))


@pytest.mark.parametrize("j", range(15))
def test_single_error_locator_root(j):
    sigma = fec.bch_locator(fec.bch_syndromes(flip([0] * 15, [j])))
    assert len(sigma) == 2
    assert fec.chien_search(sigma) == (j,)


def test_two_error_locators_exhaustive():
    for pos in oracles.error_patterns(2):
        if len(pos) != 2:
            continue
        sigma = fec.bch_locator(fec.bch_syndromes(flip([0] * 15, pos)))
        assert len(sigma) == 3 and sigma[2] != 0
        assert fec.chien_search(sigma) == pos


def test_chien_examples():
    sigma = fec.bch_locator(fec.bch_syndromes(flip([0] * 15, [14])))
    assert fec.chien_search(sigma) == (14,)
    sigma = fec.bch_locator(fec.bch_syndromes(flip([0] * 15, [2, 9])))
    assert fec.chien_search(sigma) == (2, 9)


def test_chien_rejects_root_count_mismatch():
    # find quadratics 1 + x + c x^2 that are irreducible over GF(16) by brute force
    irreducible = [
        c for c in range(1, 16)
        if all(1 ^ x ^ oracles.peasant_mul(c, oracles.peasant_mul(x, x)) for x in range(1, 16))
    ]
    assert irreducible
    for c in irreducible:
        with pytest.raises(fec.Uncorrectable):
            fec.chien_search((1, 1, c))


# -- decoder ---------------------------------------------------------------------


def test_decode_clean_exhaustive():
    for m in range(128):
        out = fec.bch_decode(CODEWORDS[m])
        assert out.status is fec.DecodeStatus.CLEAN
        assert to_int(out.message) == m
        assert out.count == 0


def test_decode_corrects_up_to_two_errors_exhaustive():
    for m in range(128):
        c = CODEWORDS[m]
        for pos in oracles.error_patterns(2):
            if not pos:
                continue
            out = fec.bch_decode(flip(c, pos))
            assert to_int(out.message) == m
            assert out.status is fec.DecodeStatus.CORRECTED
            assert out.flips == pos


def test_decoder_agrees_with_nearest_codeword_oracle_on_all_words():
    """Every 15-bit word: unique nearest codeword within distance 2 is found;
    otherwise the word is flagged, or corrected to a codeword <= 2 away."""
    codeword_set = set(CODEWORDS)
    for w in range(1 << 15):
        word = tuple((w >> (14 - i)) & 1 for i in range(15))
        near, dist = oracles.nearest_codewords(word, CODEWORDS)
        out = fec.bch_decode(word)
        if dist <= 2:
            assert len(near) == 1
            assert tuple(out.message.tolist()) == near[0][:7]
            assert out.count == dist
        else:
            assert out.status is fec.DecodeStatus.UNCORRECTABLE
            assert tuple(out.message.tolist()) == word[:7]
        if out.status is not fec.DecodeStatus.UNCORRECTABLE:
            fixed = list(word)
            for p in out.flips:
                fixed[p] ^= 1
            assert tuple(fixed) in codeword_set


def test_decode_table_matches_algebraic_path():
    msgs, flips = fec.decode_table()
    for w in range(0, 1 << 15, 7):
        out = fec.bch_decode(from_int(w, 15))
        assert msgs[w] == to_int(out.message)
        expected = -1 if out.status is fec.DecodeStatus.UNCORRECTABLE else out.count
        assert flips[w] == expected


@given(st.integers(0, 127), st.sets(st.integers(0, 14), min_size=3, max_size=6))
def test_heavy_errors_never_yield_a_non_codeword(m, positions):
    r = flip(CODEWORDS[m], sorted(positions))
    out = fec.bch_decode(r)
    if out.status is fec.DecodeStatus.UNCORRECTABLE:
        assert np.array_equal(out.message, r[:7])
    else:
        assert out.count <= 2
        assert fec.bch_syndromes(flip(r, out.flips)).zero


def test_decode_rejects_wrong_width():
    with pytest.raises(ValueError):
        fec.bch_decode([0] * 14)
