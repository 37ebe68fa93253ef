"""Byte-stream socket emulation of the optical link.

The serial bit stream goes out as raw bytes, stream bit 0 in the MSB of
byte 0, with no wire framing of its own: finding the frames is the
receiver's aligner's job.
"""

from __future__ import annotations

import logging
import socket

from .bits import bits_to_bytes, bytes_to_bits
from .pipeline import Receiver

log = logging.getLogger(__name__)

CHUNK = 1 << 16


def parse_addr(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def send_stream(addr: tuple[str, int], stream, chunk: int = CHUNK) -> int:
    payload = bits_to_bytes(stream)
    with socket.create_connection(addr) as sock:
        for i in range(0, len(payload), chunk):
            sock.sendall(payload[i : i + chunk])
        sock.shutdown(socket.SHUT_WR)
    return len(payload)


def listen(addr: tuple[str, int]) -> socket.socket:
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    srv.bind(addr)
    srv.listen(1)
    return srv


def receive(srv: socket.socket, receiver: Receiver, chunk: int = CHUNK) -> tuple[int, OSError | None]:
    """Accept one connection and run ``receiver`` live until EOF.

    Returns the byte count and the connection error, if the peer reset.
    Whatever arrived before an error has already been processed.
    """
    conn, peer = srv.accept()
    log.info("connection from %s:%d", *peer)
    total = 0
    error = None
    with conn:
        while True:
            try:
                data = conn.recv(chunk)
            except OSError as exc:
                error = exc
                break
            if not data:
                break
            total += len(data)
            receiver.feed(bytes_to_bits(data))
    receiver.finish()
    return total, error
