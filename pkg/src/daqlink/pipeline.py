"""End-to-end TX/RX chains, link metrics, BER sweeps and rate arithmetic."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import channel as ch
from .frame import Mode, build_rows, parse_rows
from .interleave import DEFAULT_MAP, FRAME_BITS, InterleaveMap
from .link import WORD_BITS, AlignedFrame, FrameAligner
from .scramble import DEFAULT_CONFIG, ScramblerConfig

CODE_RATE = Fraction(7, 15)
UNCODED = "uncoded"
SWEEP_MODES = ("standard", "nofec", UNCODED)


@dataclass(frozen=True)
class Codec:
    scrambler: ScramblerConfig = DEFAULT_CONFIG
    imap: InterleaveMap = DEFAULT_MAP
    header_aided: bool = True


DEFAULT_CODEC = Codec()


@dataclass
class LinkMetrics:
    frames_tx: int = 0
    frames_rx: int = 0
    pre_fec_bit_errors: int = 0
    post_fec_bit_errors: int = 0
    payload_bits: int = 0
    channel_bits: int = 0
    corrected_blocks: int = 0
    uncorrectable_blocks: int = 0
    header_mismatches: int = 0
    lock_latency_bits: int | None = None
    frame_errors: int = 0
    frames_lost: int = 0
    misaligned_frames: int = 0

    @property
    def pre_fec_ber(self) -> float:
        return self.pre_fec_bit_errors / self.channel_bits if self.channel_bits else math.nan

    @property
    def post_fec_ber(self) -> float:
        return self.post_fec_bit_errors / self.payload_bits if self.payload_bits else math.nan

    @property
    def fer(self) -> float:
        if not self.frames_tx:
            return math.nan
        return (self.frame_errors + self.frames_lost) / self.frames_tx

    @property
    def error_free(self) -> bool:
        return not (
            self.pre_fec_bit_errors
            or self.post_fec_bit_errors
            or self.uncorrectable_blocks
            or self.corrected_blocks
            or self.header_mismatches
            or self.frame_errors
            or self.frames_lost
            or self.misaligned_frames
        )

    def as_dict(self) -> dict:
        """Counters plus BERs; BERs are ``None`` when nothing was scored."""
        d = dataclasses.asdict(self)
        scored = self.frames_tx > 0
        for name in ("pre_fec_ber", "post_fec_ber", "fer"):
            value = getattr(self, name)
            d[name] = value if scored and not math.isnan(value) else None
        return d


# -- TX -----------------------------------------------------------------------


def _payload_rows(payloads, mode: Mode) -> np.ndarray:
    if isinstance(payloads, np.ndarray):
        rows = payloads
    else:
        items = list(payloads)
        if not items:
            return np.empty((0, mode.payload_bits), dtype=np.uint8)
        rows = np.stack([p.bits if hasattr(p, "bits") else np.asarray(p, dtype=np.uint8) for p in items])
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.ndim != 2 or rows.shape[1] != mode.payload_bits:
        raise ValueError(
            f"{mode.value} payloads must be {mode.payload_bits} bits wide, got shape {rows.shape}"
        )
    return rows


def tx_frames(payloads, mode, codec: Codec = DEFAULT_CODEC) -> np.ndarray:
    mode = Mode(mode)
    return build_rows(_payload_rows(payloads, mode), mode, codec.scrambler, codec.imap)


def tx_chain(
    payloads,
    mode,
    codec: Codec = DEFAULT_CODEC,
    bit_offset: int = 0,
    pad_seed: int = 0,
) -> np.ndarray:
    """Payloads -> frames -> 40-bit words -> serial stream.

    ``bit_offset`` prepends that many pseudo-random bits (seeded by
    ``pad_seed``) so the receiver has to find the frame boundary.
    """
    frames = tx_frames(payloads, mode, codec)
    words = frames.reshape(-1, WORD_BITS)
    stream = words.reshape(-1)
    if bit_offset:
        pad = ch.make_rng(pad_seed).integers(0, 2, bit_offset, dtype=np.uint8)
        stream = np.concatenate((pad, stream))
    return stream


# -- RX -----------------------------------------------------------------------


class Receiver:
    """Incremental receive chain: aligner (or known framing) + frame parser.

    With ``expected`` payloads the receiver also scores every delivered
    frame: it is matched to transmitted frame ``(start - stream_offset) / 120``
    and compared bit-for-bit before (re-encoded frame) and after decoding.
    """

    def __init__(
        self,
        codec: Codec = DEFAULT_CODEC,
        expected=None,
        expected_mode=None,
        stream_offset: int = 0,
        sync: str = "aligner",
        mode=None,
        keep_payloads: bool = True,
    ):
        if sync not in ("aligner", "genie"):
            raise ValueError(f"unknown sync {sync!r}")
        if sync == "genie" and mode is None:
            raise ValueError("genie sync needs the stream mode")
        self.codec = codec
        self.sync = sync
        self.mode = Mode(mode) if mode is not None else None
        self.stream_offset = stream_offset
        self.aligner = FrameAligner()
        self.metrics = LinkMetrics()
        self.keep_payloads = keep_payloads
        self.payloads: list[np.ndarray] = []
        self.starts: list[int] = []
        self.modes: list[Mode] = []
        self._expected = None
        self._expected_frames = None
        self._expected_mode = None
        self._delivered = None
        if expected is not None:
            em = Mode(expected_mode or mode or Mode.STANDARD)
            self._expected_mode = em
            self._expected = np.empty((0, em.payload_bits), dtype=np.uint8)
            self._delivered = np.zeros(0, dtype=bool)
            self.extend_expected(expected)
        self._genie_buf = np.empty(0, dtype=np.uint8)
        self._genie_next = stream_offset
        self._received = 0

    def extend_expected(self, payloads) -> None:
        """Append transmitted payloads (for scoring a stream fed in pieces)."""
        rows = _payload_rows(payloads, self._expected_mode)
        self._expected = np.concatenate((self._expected, rows))
        self._delivered = np.concatenate((self._delivered, np.zeros(len(rows), dtype=bool)))
        self._expected_frames = None
        self.metrics.frames_tx += len(rows)

    def _expected_frame_rows(self, idx: np.ndarray) -> np.ndarray:
        if self._expected_frames is None:
            self._expected_frames = build_rows(
                self._expected, self._expected_mode, self.codec.scrambler, self.codec.imap
            )
        return self._expected_frames[idx]

    def feed(self, bits) -> None:
        bits = np.asarray(bits, dtype=np.uint8)
        if self.sync == "aligner":
            self._consume(self.aligner.feed(bits))
            self.metrics.lock_latency_bits = self.aligner.lock_latency_bits
            return
        start = self._received
        self._received += bits.size
        skip = max(0, self._genie_next - start)
        self._genie_buf = np.concatenate((self._genie_buf, bits[skip:]))
        n = self._genie_buf.size // FRAME_BITS
        if n:
            rows = self._genie_buf[: n * FRAME_BITS].reshape(n, FRAME_BITS)
            starts = self._genie_next + FRAME_BITS * np.arange(n)
            self._genie_buf = self._genie_buf[n * FRAME_BITS :].copy()
            self._genie_next += n * FRAME_BITS
            self._score(rows, starts, self.mode)
        if self.metrics.lock_latency_bits is None:
            self.metrics.lock_latency_bits = self.stream_offset

    def _consume(self, frames: list[AlignedFrame]) -> None:
        i = 0
        while i < len(frames):
            j = i
            while j < len(frames) and frames[j].mode is frames[i].mode:
                j += 1
            group = frames[i:j]
            rows = np.stack([f.bits for f in group])
            starts = np.array([f.start for f in group], dtype=np.int64)
            self._score(rows, starts, group[0].mode)
            i = j

    def _score(self, rows: np.ndarray, starts: np.ndarray, mode: Mode) -> None:
        c = self.codec
        payloads, status = parse_rows(rows, mode, c.scrambler, c.imap, c.header_aided)
        m = self.metrics
        m.frames_rx += len(rows)
        m.corrected_blocks += status.corrected_blocks
        m.uncorrectable_blocks += status.uncorrectable_blocks
        m.header_mismatches += int(np.count_nonzero(status.header_mismatch))
        if self.keep_payloads:
            self.payloads.extend(payloads)
            self.starts.extend(starts.tolist())
            self.modes.extend([mode] * len(rows))
        if self._expected is None:
            m.payload_bits += payloads.size
            return
        rel = starts - self.stream_offset
        idx = rel // FRAME_BITS
        good = (
            (rel % FRAME_BITS == 0)
            & (idx >= 0)
            & (idx < len(self._expected))
            & (mode is self._expected_mode)
        )
        m.misaligned_frames += int(np.count_nonzero(~good))
        if not good.any():
            return
        idx = idx[good]
        diff = payloads[good] != self._expected[idx]
        m.post_fec_bit_errors += int(np.count_nonzero(diff))
        m.frame_errors += int(np.count_nonzero(diff.any(axis=1)))
        m.payload_bits += diff.size
        line = rows[good] != self._expected_frame_rows(idx)
        m.pre_fec_bit_errors += int(np.count_nonzero(line))
        m.channel_bits += line.size
        self._delivered[idx] = True

    def finish(self) -> LinkMetrics:
        if self._delivered is not None:
            self.metrics.frames_lost = int(np.count_nonzero(~self._delivered))
        return self.metrics


def rx_chain(
    stream,
    expected=None,
    *,
    mode=None,
    codec: Codec = DEFAULT_CODEC,
    sync: str = "aligner",
    stream_offset: int = 0,
) -> tuple[list[np.ndarray], LinkMetrics]:
    """Receive a serial stream; returns delivered payloads and metrics.

    The aligner needs 33 headers before it locks; once locked it delivers
    the confirmed frames too, so a clean stream of 33 or more frames comes
    back complete.
    """
    rx = Receiver(codec, expected, expected_mode=mode, stream_offset=stream_offset, sync=sync, mode=mode)
    rx.feed(stream)
    return rx.payloads, rx.finish()


# -- BER ----------------------------------------------------------------------


def rate_for_mode(mode: str) -> float:
    return float(CODE_RATE) if mode == "standard" else 1.0


@dataclass(frozen=True)
class BerRecord:
    ebn0_db: float | None
    p_channel: float
    mode: str
    frames: int
    payload_bits: int
    pre_fec_ber: float
    post_fec_ber: float
    fer: float
    corrected_blocks: int
    uncorrectable_blocks: int
    seed: int
    metrics: LinkMetrics | None = field(default=None, compare=False, repr=False)

    def post_fec_sigma(self) -> float:
        """Binomial standard error of ``post_fec_ber``."""
        p = self.post_fec_ber
        return math.sqrt(p * (1 - p) / self.payload_bits) if self.payload_bits else math.nan


def _model_p(model) -> tuple[float | None, float]:
    if isinstance(model, ch.Awgn):
        return model.ebn0_db, model.p
    if isinstance(model, ch.Bsc):
        return None, model.p
    if isinstance(model, ch.Composite):
        for m in model.models:
            if isinstance(m, (ch.Awgn, ch.Bsc)):
                return _model_p(m)
    return None, math.nan


CHUNK_FRAMES = 16384


def run_ber_point(
    cfg: ch.ChannelConfig,
    mode: str,
    n_frames: int,
    codec: Codec = DEFAULT_CODEC,
    sync: str = "genie",
) -> BerRecord:
    """Random payloads -> tx_chain -> channel -> rx_chain, scored.

    ``sync="genie"`` cuts frames at the known boundaries (FEC performance);
    ``sync="aligner"`` runs the frame aligner in the loop, so frames lost
    while unlocked are counted in ``fer``.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if mode not in SWEEP_MODES:
        raise ValueError(f"mode must be one of {SWEEP_MODES}, got {mode!r}")
    payload_ss, channel_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    payload_rng = np.random.Generator(np.random.PCG64(payload_ss))
    channel_rng = np.random.Generator(np.random.PCG64(channel_ss))
    ebn0, p = _model_p(cfg.model)

    if mode == UNCODED:
        errors = bits = frame_errors = 0
        for lo in range(0, n_frames, CHUNK_FRAMES):
            n = min(CHUNK_FRAMES, n_frames - lo)
            sent = payload_rng.integers(0, 2, (n, Mode.STANDARD.payload_bits), dtype=np.uint8)
            got, _ = ch.apply(sent, cfg.model, channel_rng)
            diff = got != sent
            errors += int(np.count_nonzero(diff))
            frame_errors += int(np.count_nonzero(diff.any(axis=1)))
            bits += diff.size
        ber = errors / bits
        return BerRecord(ebn0, p, mode, n_frames, bits, ber, ber, frame_errors / n_frames, 0, 0, cfg.seed)

    fmode = Mode(mode)
    total = LinkMetrics()
    rx = None
    for lo in range(0, n_frames, CHUNK_FRAMES):
        n = min(CHUNK_FRAMES, n_frames - lo)
        sent = payload_rng.integers(0, 2, (n, fmode.payload_bits), dtype=np.uint8)
        stream = tx_chain(sent, fmode, codec)
        noisy, _ = ch.apply(stream, cfg.model, channel_rng)
        if sync == "genie":
            rx = Receiver(codec, sent, expected_mode=fmode, sync="genie", mode=fmode, keep_payloads=False)
            rx.feed(noisy)
            _accumulate(total, rx.finish())
        else:
            # one aligner across chunks so lock state carries over
            if rx is None:
                empty = np.empty((0, fmode.payload_bits), dtype=np.uint8)
                rx = Receiver(codec, empty, expected_mode=fmode, keep_payloads=False)
            rx.extend_expected(sent)
            rx.feed(noisy)
    if sync != "genie":
        total = rx.finish()
    return BerRecord(
        ebn0_db=ebn0,
        p_channel=p,
        mode=mode,
        frames=n_frames,
        payload_bits=total.payload_bits,
        pre_fec_ber=total.pre_fec_ber,
        post_fec_ber=total.post_fec_ber,
        fer=total.fer,
        corrected_blocks=total.corrected_blocks,
        uncorrectable_blocks=total.uncorrectable_blocks,
        seed=cfg.seed,
        metrics=total,
    )


def _accumulate(total: LinkMetrics, part: LinkMetrics) -> None:
    for f in dataclasses.fields(LinkMetrics):
        if f.name == "lock_latency_bits":
            if total.lock_latency_bits is None:
                total.lock_latency_bits = part.lock_latency_bits
            continue
        setattr(total, f.name, getattr(total, f.name) + getattr(part, f.name))


def _run_point(args) -> BerRecord:
    return run_ber_point(*args)


def sweep(
    points,
    mode: str,
    n_frames: int,
    codec: Codec = DEFAULT_CODEC,
    sync: str = "genie",
    workers: int = 1,
) -> list[BerRecord]:
    """Independent ``run_ber_point`` per config, results in input order."""
    jobs = [(cfg, mode, n_frames, codec, sync) for cfg in points]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point, jobs))


def ebn0_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty grid {start}:{stop}:{step}")
    return [round(start + i * step, 10) for i in range(count)]


def ebn0_points(grid, mode: str, seed: int) -> list[ch.ChannelConfig]:
    """AWGN configs for a grid; point ``i`` gets seed ``seed + i``."""
    rate = rate_for_mode(mode)
    return [ch.ChannelConfig(ch.Awgn(e, rate), seed + i) for i, e in enumerate(grid)]


# -- rates --------------------------------------------------------------------


@dataclass(frozen=True)
class RateModel:
    frame_clock_hz: float = 40e6
    frame_bits: int = 120
    word_clock_hz: float = 120e6
    word_bits: int = 40

    @property
    def line_rate(self) -> float:
        fast = self.frame_clock_hz * self.frame_bits
        if fast != self.word_clock_hz * self.word_bits:
            raise ValueError("frame side and word side of the gearbox run at different rates")
        return fast


@dataclass(frozen=True)
class EfficiencyReport:
    line_rate_gbps: float
    standard_rate_gbps: float
    nofec_rate_gbps: float
    standard_efficiency_pct: float
    nofec_efficiency_pct: float
    code_rate: float

    def lines(self) -> list[str]:
        return [
            f"line rate            {self.line_rate_gbps:.2f} Gbps",
            f"standard data rate   {self.standard_rate_gbps:.2f} Gbps",
            f"no-FEC data rate     {self.nofec_rate_gbps:.2f} Gbps",
            f"standard efficiency  {self.standard_efficiency_pct:.2f} %",
            f"no-FEC efficiency    {self.nofec_efficiency_pct:.2f} %",
            f"BCH code rate        {self.code_rate:.3f}",
        ]


def efficiency_report(rates: RateModel = RateModel()) -> EfficiencyReport:
    line = rates.line_rate
    std = rates.frame_clock_hz * Mode.STANDARD.payload_bits
    nofec = rates.frame_clock_hz * Mode.NOFEC.payload_bits
    return EfficiencyReport(
        line_rate_gbps=line / 1e9,
        standard_rate_gbps=std / 1e9,
        nofec_rate_gbps=nofec / 1e9,
        standard_efficiency_pct=100 * std / line,
        nofec_efficiency_pct=100 * nofec / line,
        code_rate=float(CODE_RATE),
    )
