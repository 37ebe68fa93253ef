"""``daqlink`` command line.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 protocol/verification
failure (uncorrectable blocks, no lock, nothing decoded).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import channel as ch
from . import pipeline as pl
from .bits import bytes_to_bits
from .formats import (
    FormatError,
    LinkConfig,
    bytes_to_payloads,
    parse_int_list,
    payloads_to_bytes,
    read_config,
    read_hex,
    write_csv,
    write_hex,
    write_plot_data,
)
from .frame import Mode
from .interleave import DEFAULT_MAP
from .transport import listen, parse_addr, receive, send_stream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PROTOCOL = 3

log = logging.getLogger("daqlink")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            return pl.ebn0_grid(start, stop, step)
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"invalid grid {text!r}: {exc}") from None


def _codec(args) -> pl.Codec:
    cfg = read_config(args.config) if args.config else LinkConfig()
    if args.scrambler_poly is not None:
        cfg.scrambler_poly = int(args.scrambler_poly, 0)
    if args.scrambler_seeds is not None:
        cfg.scrambler_seeds = parse_int_list(args.scrambler_seeds)
    if args.interleave_table is not None:
        cfg.interleave_table = Path(args.interleave_table)
    try:
        scrambler = cfg.scrambler()
        imap = cfg.interleave_map() or DEFAULT_MAP
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return pl.Codec(scrambler, imap)


def _channel_model(args, mode: str):
    if args.model == "bsc":
        if args.p is None:
            raise UsageError("--model bsc needs --p")
        return ch.Bsc(args.p)
    if args.model == "awgn":
        if args.ebn0 is None:
            raise UsageError("--model awgn needs --ebn0")
        rate = args.code_rate if args.code_rate is not None else pl.rate_for_mode(mode)
        return ch.Awgn(args.ebn0, rate)
    return ch.Burst(args.burst_rate, args.burst_len, args.burst_flip)


# -- commands -------------------------------------------------------------------


def cmd_encode(args) -> int:
    codec = _codec(args)
    data = Path(args.input).read_bytes()
    rows = bytes_to_payloads(data, args.mode)
    frames = pl.tx_frames(rows, args.mode, codec)
    Path(args.output).write_text(write_hex(frames, len(data), args.mode))
    log.info("%d bytes -> %d %s frames", len(data), len(frames), args.mode)
    return EXIT_OK


def _summary(metrics: pl.LinkMetrics) -> str:
    return (
        f"frames={metrics.frames_rx} corrected_blocks={metrics.corrected_blocks} "
        f"uncorrectable_blocks={metrics.uncorrectable_blocks} "
        f"header_mismatches={metrics.header_mismatches}"
    )


def _payload_bytes(payloads) -> bytes:
    if not payloads:
        return b""
    if len({p.size for p in payloads}) == 1:
        return payloads_to_bytes(np.array(payloads, dtype=np.uint8).reshape(len(payloads), -1))
    return b"".join(payloads_to_bytes(p[None, :]) for p in payloads)


def cmd_decode(args) -> int:
    codec = _codec(args)
    raw = Path(args.input).read_bytes()
    length = args.length
    if args.raw:
        rx = pl.Receiver(codec)
        rx.feed(bytes_to_bits(raw))
        metrics = rx.finish()
        if rx.aligner.lock_latency_bits is None:
            Path(args.output).write_bytes(b"")
            print("daqlink: no frame lock in capture", file=sys.stderr)
            return EXIT_PROTOCOL
        data = _payload_bytes(rx.payloads)
    else:
        dump = read_hex(raw.decode("ascii", errors="replace"))
        mode = Mode(args.mode or (dump.mode.value if dump.mode else "standard"))
        if length is None:
            length = dump.length
        rx = pl.Receiver(codec, sync="genie", mode=mode)
        rx.feed(dump.frames.reshape(-1))
        metrics = rx.finish()
        data = _payload_bytes(rx.payloads)
    if length is not None:
        data = data[:length]
    Path(args.output).write_bytes(data)
    print(_summary(metrics), file=sys.stderr)
    return EXIT_PROTOCOL if metrics.uncorrectable_blocks else EXIT_OK


def _ber_header(args, **extra) -> dict:
    meta = {"seed": args.seed, "model": args.model, "frames": args.frames, "sync": args.sync}
    meta.update(extra)
    return meta


def _write_outputs(args, records, header) -> None:
    text = write_csv(records, header)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plot_data:
        Path(args.plot_data).write_text(write_plot_data(records))


def cmd_simulate(args) -> int:
    codec = _codec(args)
    records = []
    for mode in args.mode:
        cfg = ch.ChannelConfig(_channel_model(args, mode), args.seed)
        records.append(pl.run_ber_point(cfg, mode, args.frames, codec, args.sync))
    _write_outputs(args, records, _ber_header(args))
    return EXIT_OK


def cmd_sweep(args) -> int:
    codec = _codec(args)
    records = []
    for mode in args.mode:
        if args.model == "awgn":
            if args.ebn0 is None:
                raise UsageError("--model awgn needs --ebn0 START:STOP:STEP")
            grid = parse_grid(args.ebn0)
            rate = args.code_rate if args.code_rate is not None else pl.rate_for_mode(mode)
            points = [ch.ChannelConfig(ch.Awgn(e, rate), args.seed + i) for i, e in enumerate(grid)]
        elif args.model == "bsc":
            if args.p is None:
                raise UsageError("--model bsc needs --p P1,P2,...")
            points = [ch.ChannelConfig(ch.Bsc(p), args.seed + i) for i, p in enumerate(parse_grid(args.p))]
        else:
            rates = parse_grid(args.burst_rate)
            points = [
                ch.ChannelConfig(ch.Burst(r, args.burst_len, args.burst_flip), args.seed + i)
                for i, r in enumerate(rates)
            ]
        records.extend(pl.sweep(points, mode, args.frames, codec, args.sync, args.workers))
    _write_outputs(args, records, _ber_header(args))
    return EXIT_OK


def cmd_send(args) -> int:
    codec = _codec(args)
    data = Path(args.input).read_bytes()
    rows = bytes_to_payloads(data, args.mode)
    stream = pl.tx_chain(rows, args.mode, codec, bit_offset=args.bit_offset, pad_seed=args.pad_seed)
    if args.p:
        if args.seed is None:
            raise UsageError("--p needs --seed")
        stream, flips = ch.bsc_apply(stream, args.p, ch.make_rng(args.seed))
        log.info("channel flipped %d bits", flips)
    sent = send_stream(parse_addr(args.addr), stream)
    print(f"sent {len(rows)} frames ({sent} bytes)", file=sys.stderr)
    return EXIT_OK


def cmd_recv(args) -> int:
    codec = _codec(args)
    srv = listen(parse_addr(args.addr))
    host, port = srv.getsockname()[:2]
    print(f"listening on {host}:{port}", file=sys.stderr, flush=True)
    rx = pl.Receiver(codec)
    with srv:
        nbytes, error = receive(srv, rx)
    data = _payload_bytes(rx.payloads)
    if args.length is not None:
        data = data[: args.length]
    Path(args.output).write_bytes(data)
    status = rx.aligner.lock_status()
    report = {
        "bytes_received": nbytes,
        "locked": status.lock_latency_bits is not None,
        "bit_offset": status.bit_offset,
        **rx.metrics.as_dict(),
    }
    if error is not None:
        report["error"] = str(error)
    print(json.dumps(report, sort_keys=True, default=str))
    if error is not None:
        return EXIT_IO
    return EXIT_OK if report["locked"] else EXIT_PROTOCOL


def cmd_report(args) -> int:
    print("\n".join(pl.efficiency_report().lines()))
    return EXIT_OK


def cmd_dump_perm(args) -> int:
    text = _codec(args).imap.dump()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _modes(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    for m in modes:
        if m not in pl.SWEEP_MODES:
            raise argparse.ArgumentTypeError(f"unknown mode {m!r}")
    return modes


def _add_channel_args(p, grid: bool) -> None:
    p.add_argument("--model", choices=("bsc", "awgn", "burst"), default="awgn")
    if grid:
        p.add_argument("--ebn0", help="Eb/N0 grid START:STOP:STEP (dB)")
        p.add_argument("--p", help="BSC flip probabilities, comma separated")
        p.add_argument("--burst-rate", default="1", help="burst arrival rates per 1e4 bits, comma separated")
    else:
        p.add_argument("--ebn0", type=float, help="Eb/N0 in dB")
        p.add_argument("--p", type=float, help="BSC flip probability")
        p.add_argument("--burst-rate", type=float, default=1.0, help="burst starts per 1e4 bits")
    p.add_argument("--burst-len", type=float, default=8.0, help="mean burst length (bits)")
    p.add_argument("--burst-flip", type=float, default=0.5, help="flip probability inside a burst")
    p.add_argument("--code-rate", type=float, help="override the rate used in the Eb/N0 mapping")
    p.add_argument("--mode", type=_modes, default=["standard"], help="standard, nofec, uncoded (comma list)")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sync", choices=("genie", "aligner"), default="genie")
    p.add_argument("--out", help="CSV output (default stdout)")
    p.add_argument("--plot-data", help="also write gnuplot two-column data here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="daqlink", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"daqlink {__version__}")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--scrambler-poly", help="scrambler polynomial incl. x^13 term, e.g. 0x201B")
    parser.add_argument("--scrambler-seeds", help="four comma-separated 13-bit lane seeds")
    parser.add_argument("--interleave-table", help="file of 120 integers, one per line")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="raw bytes -> frame hex dump")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="standard")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="frame hex dump (or raw capture) -> bytes")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--raw", action="store_true", help="input is a serial byte capture; run the aligner")
    p.add_argument("--length", type=int, help="truncate output to this many bytes")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="one BER point")
    _add_channel_args(p, grid=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="BER sweep over a grid")
    _add_channel_args(p, grid=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("send", help="stream a file over TCP")
    p.add_argument("addr", help="HOST:PORT")
    p.add_argument("input")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="standard")
    p.add_argument("--bit-offset", type=int, default=0, help="prepend N pseudo-random bits")
    p.add_argument("--pad-seed", type=int, default=0)
    p.add_argument("--p", type=float, help="inline BSC impairment")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_send)

    p = sub.add_parser("recv", help="receive one TCP stream and decode it live")
    p.add_argument("addr", help="HOST:PORT to listen on (port 0 picks one)")
    p.add_argument("output")
    p.add_argument("--length", type=int)
    p.set_defaults(func=cmd_recv)

    p = sub.add_parser("report", help="throughput and efficiency table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dump-perm", help="print the interleaver table")
    p.add_argument("output", nargs="?")
    p.set_defaults(func=cmd_dump_perm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"daqlink: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"daqlink: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (OSError, UnicodeDecodeError) as exc:
        print(f"daqlink: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"daqlink: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
