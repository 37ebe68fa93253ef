import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from daqlink import formats as fm
from daqlink import pipeline as pl
from daqlink.frame import Mode
from daqlink.scramble import DEFAULT_SEEDS


@given(st.binary(max_size=200), st.sampled_from(list(Mode)))
def test_payload_bytes_round_trip(data, mode):
    rows = fm.bytes_to_payloads(data, mode)
    per = fm.bytes_per_frame(mode)
    assert rows.shape == (-(-len(data) // per), mode.payload_bits)
    assert not rows[:, :4].any()
    assert fm.payloads_to_bytes(rows)[: len(data)] == data


def test_bytes_per_frame():
    assert fm.bytes_per_frame(Mode.STANDARD) == 6
    assert fm.bytes_per_frame(Mode.NOFEC) == 14
    assert fm.bytes_to_payloads(b"abcdef", "standard").shape == (1, 52)
    assert fm.bytes_to_payloads(b"abcdefg", "standard").shape == (2, 52)
    assert fm.bytes_to_payloads(b"", "standard").shape == (0, 52)
    assert fm.payloads_to_bytes(np.empty((0, 52))) == b""


def test_hex_round_trip(rng):
    frames = rng.integers(0, 2, (5, 120), dtype=np.uint8)
    text = fm.write_hex(frames, 29, "standard")
    assert text.splitlines()[-1] == "# bytes=29 mode=standard"
    assert all(len(line) == 30 for line in text.splitlines()[:-1])
    dump = fm.read_hex(text)
    assert np.array_equal(dump.frames, frames)
    assert dump.length == 29 and dump.mode is Mode.STANDARD


def test_hex_empty():
    dump = fm.read_hex("")
    assert dump.frames.shape == (0, 120)
    assert dump.length is None


def test_hex_errors_carry_line_numbers():
    good = "0" * 30
    with pytest.raises(fm.FormatError, match="line 3"):
        fm.read_hex(f"{good}\n{good}\n{'0' * 29}\n")
    with pytest.raises(fm.FormatError, match="line 2"):
        fm.read_hex(f"{good}\n{'g' * 30}\n")
    with pytest.raises(fm.FormatError, match="line 1"):
        fm.read_hex("# bytes=abc\n")


def record(**kw):
    base = dict(
        ebn0_db=3.0, p_channel=0.0228, mode="standard", frames=100, payload_bits=5200,
        pre_fec_ber=0.02, post_fec_ber=0.0351, fer=0.5, corrected_blocks=7,
        uncorrectable_blocks=2, seed=9,
    )
    base.update(kw)
    return pl.BerRecord(**base)


def test_csv_round_trip():
    recs = [record(), record(ebn0_db=None, mode="nofec", post_fec_ber=1 / 3)]
    text = fm.write_csv(recs, {"seed": 9})
    lines = text.splitlines()
    assert lines[0].startswith("# daqlink ")
    assert "rng=numpy.random.PCG64" in lines[1] and "seed=9" in lines[1]
    assert lines[2] == ",".join(fm.CSV_COLUMNS)
    assert fm.read_csv(text) == recs


def test_csv_nan_written():
    text = fm.write_csv([record(fer=math.nan)])
    assert ",nan," in text
    assert math.isnan(fm.read_csv(text)[0].fer)


def test_csv_bad_columns():
    with pytest.raises(fm.FormatError):
        fm.read_csv("a,b\n1,2\n")


def test_plot_data_blocks():
    recs = [record(), record(ebn0_db=4.0), record(mode="uncoded")]
    text = fm.write_plot_data(recs)
    blocks = text.split("\n\n\n")
    assert len(blocks) == 2
    assert blocks[0].splitlines() == ["# standard", "3.0 0.0351", "4.0 0.0351"]


def test_config_file(tmp_path):
    (tmp_path / "perm.txt").write_text("\n".join(map(str, range(120))))
    path = tmp_path / "link.conf"
    path.write_text(
        "# link settings\n"
        "scrambler_poly = 0x201B\n"
        "scrambler_seeds = 1, 2, 3, 0x10  # lanes\n"
        "interleave_table = perm.txt\n"
    )
    cfg = fm.read_config(path)
    assert cfg.scrambler().seeds == (1, 2, 3, 16)
    assert cfg.interleave_map().perm == tuple(range(120))
    assert fm.LinkConfig().scrambler().seeds == DEFAULT_SEEDS
    assert fm.LinkConfig().interleave_map() is None


@pytest.mark.parametrize(
    "body, match",
    [("nonsense\n", ":1:"), ("colour = red\n", "unknown key"), ("\nscrambler_poly = zz\n", ":2:")],
)
def test_config_errors(tmp_path, body, match):
    path = tmp_path / "bad.conf"
    path.write_text(body)
    with pytest.raises(fm.FormatError, match=match):
        fm.read_config(path)
