"""On-disk formats: frame hex dumps, BER CSV, plot data and the config file."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bits import bytes_to_bits, from_hex, to_hex
from .channel import RNG_ALGORITHM
from .frame import SLOW_CONTROL_BITS, Mode
from .interleave import FRAME_BITS, InterleaveMap
from .pipeline import BerRecord
from .scramble import DEFAULT_POLY, DEFAULT_SEEDS, ScramblerConfig

HEX_DIGITS = FRAME_BITS // 4

CSV_COLUMNS = (
    "ebn0_db",
    "p_channel",
    "mode",
    "frames",
    "payload_bits",
    "pre_fec_ber",
    "post_fec_ber",
    "fer",
    "corrected_blocks",
    "uncorrectable_blocks",
    "seed",
)


class FormatError(ValueError):
    pass


# -- payload bytes ----------------------------------------------------------


def bytes_per_frame(mode: Mode) -> int:
    return Mode(mode).data_bits // 8


def bytes_to_payloads(data: bytes, mode) -> np.ndarray:
    """Split bytes into payload rows; slow control is zero, last row zero-filled."""
    mode = Mode(mode)
    per = bytes_per_frame(mode)
    n = -(-len(data) // per)
    padded = data + bytes(n * per - len(data))
    rows = np.zeros((n, mode.payload_bits), dtype=np.uint8)
    if n:
        rows[:, SLOW_CONTROL_BITS:] = bytes_to_bits(padded).reshape(n, mode.data_bits)
    return rows


def payloads_to_bytes(rows) -> bytes:
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.size == 0:
        return b""
    return np.packbits(rows[:, SLOW_CONTROL_BITS:].reshape(-1)).tobytes()


# -- frame hex dump -----------------------------------------------------------


@dataclass
class HexDump:
    frames: np.ndarray  # (n, 120)
    length: int | None = None
    mode: Mode | None = None


def write_hex(frames, length: int | None = None, mode=None) -> str:
    out = io.StringIO()
    for row in np.asarray(frames, dtype=np.uint8).reshape(-1, FRAME_BITS):
        out.write(to_hex(row) + "\n")
    if length is not None:
        trailer = f"# bytes={length}"
        if mode is not None:
            trailer += f" mode={Mode(mode).value}"
        out.write(trailer + "\n")
    return out.getvalue()


def read_hex(text: str) -> HexDump:
    rows = []
    length = None
    mode = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, value = item.partition("=")
                try:
                    if key == "bytes":
                        length = int(value)
                    elif key == "mode":
                        mode = Mode(value)
                except ValueError:
                    raise FormatError(f"line {lineno}: bad trailer field {item!r}") from None
            continue
        if len(line) != HEX_DIGITS:
            raise FormatError(f"line {lineno}: expected {HEX_DIGITS} hex digits, got {len(line)}")
        try:
            rows.append(from_hex(line, FRAME_BITS))
        except ValueError:
            raise FormatError(f"line {lineno}: not a hex frame: {line!r}") from None
    frames = np.array(rows, dtype=np.uint8).reshape(-1, FRAME_BITS)
    return HexDump(frames, length, mode)


# -- BER CSV --------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def write_csv(records, header: dict | None = None) -> str:
    out = io.StringIO()
    out.write(f"# daqlink {__version__}\n")
    meta = {"rng": RNG_ALGORITHM, **(header or {})}
    out.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return out.getvalue()


def read_csv(text: str) -> list[BerRecord]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise FormatError(f"unexpected CSV columns {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(
            BerRecord(
                ebn0_db=float(row["ebn0_db"]) if row["ebn0_db"] else None,
                p_channel=float(row["p_channel"]),
                mode=row["mode"],
                frames=int(row["frames"]),
                payload_bits=int(row["payload_bits"]),
                pre_fec_ber=float(row["pre_fec_ber"]),
                post_fec_ber=float(row["post_fec_ber"]),
                fer=float(row["fer"]),
                corrected_blocks=int(row["corrected_blocks"]),
                uncorrectable_blocks=int(row["uncorrectable_blocks"]),
                seed=int(row["seed"]),
            )
        )
    return out


def write_plot_data(records) -> str:
    """Gnuplot data: one block per mode, ``x post_fec_ber`` per line."""
    blocks: dict[str, list[BerRecord]] = {}
    for r in records:
        blocks.setdefault(r.mode, []).append(r)
    out = io.StringIO()
    for i, (mode, rs) in enumerate(blocks.items()):
        if i:
            out.write("\n\n")
        out.write(f"# {mode}\n")
        for r in rs:
            x = r.ebn0_db if r.ebn0_db is not None else r.p_channel
            out.write(f"{_fmt(float(x))} {_fmt(r.post_fec_ber)}\n")
    return out.getvalue()


# -- config file ----------------------------------------------------------------


@dataclass
class LinkConfig:
    scrambler_poly: int = DEFAULT_POLY
    scrambler_seeds: tuple[int, ...] = DEFAULT_SEEDS
    interleave_table: Path | None = None

    def scrambler(self) -> ScramblerConfig:
        return ScramblerConfig(self.scrambler_poly, tuple(self.scrambler_seeds))

    def interleave_map(self) -> InterleaveMap | None:
        return InterleaveMap.from_file(self.interleave_table) if self.interleave_table else None


def parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v.strip(), 0) for v in text.split(",") if v.strip())


def read_config(path: str | Path) -> LinkConfig:
    """``key = value`` lines; ``#`` starts a comment."""
    cfg = LinkConfig()
    path = Path(path)
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        try:
            if key == "scrambler_poly":
                cfg.scrambler_poly = int(value, 0)
            elif key == "scrambler_seeds":
                cfg.scrambler_seeds = parse_int_list(value)
            elif key == "interleave_table":
                table = Path(value)
                cfg.interleave_table = table if table.is_absolute() else path.parent / table
            else:
                raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return cfg
