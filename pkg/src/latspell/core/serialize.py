"""Binary model files.

Layout (all integers little-endian uint32, strings UTF-8):

    magic   b"FLLC"
    version u32 (currently 1)
    n_tensors, then per tensor:
        name_len, name, rank, dim_0..dim_{rank-1}, payload (float32 LE, C order)
    n_tables, then per table:
        name_len, name, n_strings, then per string: byte_len, bytes

Tensors are stored float32 and loaded back as float64 working copies.
Insertion order is preserved on both sides, so a save/load round trip is
byte-stable.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import ConfigError

MAGIC = b"FLLC"
VERSION = 1


def _u32(x: int) -> bytes:
    return struct.pack("<I", x)


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return _u32(len(raw)) + raw


def save_model(path, tensors: dict[str, np.ndarray], tables: dict[str, list[str]]) -> None:
    out = bytearray()
    out += MAGIC
    out += _u32(VERSION)
    out += _u32(len(tensors))
    for name, arr in tensors.items():
        a = np.ascontiguousarray(arr, dtype=np.float32)
        out += _pack_str(name)
        out += _u32(a.ndim)
        for d in a.shape:
            out += _u32(d)
        out += a.astype("<f4", copy=False).tobytes()
    out += _u32(len(tables))
    for name, strings in tables.items():
        out += _pack_str(name)
        out += _u32(len(strings))
        for s in strings:
            out += _pack_str(s)
    with open(path, "wb") as fh:
        fh.write(bytes(out))


class _Reader:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ConfigError(f"{self.path}: truncated model file")
        chunk = self.buf[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        n = self.u32()
        return self.take(n).decode("utf-8")


def load_model(path) -> tuple[dict[str, np.ndarray], dict[str, list[str]]]:
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read model file {path}: {e}") from e
    r = _Reader(buf, path)
    if r.take(4) != MAGIC:
        raise ConfigError(f"{path}: not a model file (bad magic)")
    version = r.u32()
    if version != VERSION:
        raise ConfigError(f"{path}: unsupported model version {version}")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(r.u32()):
        name = r.string()
        rank = r.u32()
        shape = tuple(r.u32() for _ in range(rank))
        count = 1
        for d in shape:
            count *= d
        payload = r.take(4 * count)
        arr = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float64)
        tensors[name] = arr
    tables: dict[str, list[str]] = {}
    for _ in range(r.u32()):
        name = r.string()
        tables[name] = [r.string() for _ in range(r.u32())]
    if r.pos != len(buf):
        raise ConfigError(f"{path}: {len(buf) - r.pos} trailing bytes after model payload")
    return tensors, tables
