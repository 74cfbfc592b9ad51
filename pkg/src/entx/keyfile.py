"""Bit-exact, versioned serialization of permutation sets and traces.

One record holds everything ``invert`` needs::

    magic[8] | version u16 | block_size u32 | count u32 | tail u8 |
    original_length u64 (bits) | maps | selections | crc32 u32

All integers are little-endian. Each map is its 0-based target array
in the narrowest of 8/16/32-bit unsigned cells that holds N-1; the m
arrays are concatenated in selection order. Selections are packed
log2(m) bits per chunk, most significant bit first within the packed
bytes, zero-padded to a byte boundary. The trailing CRC-32 covers
every preceding byte of the record.

Selections are stored verbatim rather than re-derived from a seed so
that transforms fed by non-replayable sources (live hardware
randomness) stay invertible.

A key file is one or more back-to-back records; single-stream
transforms write exactly one, stereo audio writes one per channel.
Writes go to a temporary file first and are renamed into place, so
readers never observe a partial file.
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib

import numpy as np

from .errors import KeyFileError
from .permutation import PermutationMap, PermutationSet
from .transform import (
    TAIL_DROP,
    TAIL_IDENTITY,
    TAIL_PAD,
    KeyTrace,
    selection_count,
)

MAGIC = b"ENTXKEY\x00"
VERSION = 1

_HEADER = struct.Struct("<8sHIIBQ")
_CRC = struct.Struct("<I")

_TAIL_CODES = {TAIL_IDENTITY: 0, TAIL_DROP: 1, TAIL_PAD: 2}
_TAIL_NAMES = {code: name for name, code in _TAIL_CODES.items()}


def index_width(block_size: int) -> int:
    """Bytes per stored map index: narrowest of 1/2/4 holding N-1."""
    if block_size <= 1 << 8:
        return 1
    if block_size <= 1 << 16:
        return 2
    return 4


def record_size(block_size: int, count: int, original_length: int, tail: str) -> int:
    """On-disk size of one record, in bytes."""
    k = count.bit_length() - 1
    chunks = selection_count(original_length, block_size, tail)
    return (
        _HEADER.size
        + count * block_size * index_width(block_size)
        + (chunks * k + 7) // 8
        + _CRC.size
    )


def encode_record(trace: KeyTrace) -> bytes:
    pset = trace.pset
    dtype = f"<u{index_width(pset.block_size)}"
    parts = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            pset.block_size,
            pset.count,
            _TAIL_CODES[trace.tail],
            trace.original_length,
        )
    ]
    for pmap in pset.maps:
        parts.append(pmap.targets.astype(dtype).tobytes())
    k = pset.selection_bits
    if k and trace.selections.size:
        shifts = np.arange(k - 1, -1, -1, dtype=np.uint64)
        bits = (
            (trace.selections.astype(np.uint64)[:, None] >> shifts) & 1
        ).astype(np.uint8)
        parts.append(np.packbits(bits.reshape(-1)).tobytes())
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


def decode_record(buf: bytes, offset: int = 0):
    """Parse one record; returns (trace, offset past the record)."""
    if len(buf) - offset < _HEADER.size:
        raise KeyFileError("key file is truncated (incomplete header)")
    magic, version, block_size, count, tail_code, original_length = _HEADER.unpack_from(
        buf, offset
    )
    if magic != MAGIC:
        raise KeyFileError("bad magic: not a key file")
    if version != VERSION:
        raise KeyFileError(f"unsupported key file version {version}")
    if tail_code not in _TAIL_NAMES:
        raise KeyFileError(f"unknown tail policy code {tail_code}")
    tail = _TAIL_NAMES[tail_code]
    if block_size < 2 or count < 1:
        raise KeyFileError("implausible block size or map count")
    total = record_size(block_size, count, original_length, tail)
    if len(buf) - offset < total:
        raise KeyFileError("key file is truncated (incomplete record)")
    record = buf[offset : offset + total]
    (stored_crc,) = _CRC.unpack_from(record, total - _CRC.size)
    if zlib.crc32(record[: total - _CRC.size]) != stored_crc:
        raise KeyFileError("checksum mismatch: key file is corrupt")

    width = index_width(block_size)
    pos = _HEADER.size
    maps_bytes = count * block_size * width
    raw = np.frombuffer(record[pos : pos + maps_bytes], dtype=f"<u{width}")
    pos += maps_bytes
    try:
        maps = tuple(
            PermutationMap(row) for row in raw.reshape(count, block_size)
        )
        pset = PermutationSet(block_size, maps)
    except ValueError as exc:
        raise KeyFileError(f"invalid stored permutation data: {exc}") from exc

    k = count.bit_length() - 1
    chunks = selection_count(original_length, block_size, tail)
    if k and chunks:
        sel_bytes = (chunks * k + 7) // 8
        packed = np.frombuffer(record[pos : pos + sel_bytes], dtype=np.uint8)
        bits = np.unpackbits(packed)[: chunks * k].reshape(chunks, k)
        weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
        selections = bits @ weights
    else:
        selections = np.zeros(chunks, dtype=np.int64)
    trace = KeyTrace(pset, selections, tail, original_length)
    return trace, offset + total


def save(path, trace: KeyTrace) -> None:
    """Write a single-record key file atomically."""
    save_records(path, [trace])


def load(path) -> KeyTrace:
    """Read a key file that must contain exactly one record."""
    records = load_records(path)
    if len(records) != 1:
        raise KeyFileError(f"expected one key record, found {len(records)}")
    return records[0]


def save_records(path, traces) -> None:
    """Write one record per trace, atomically (temp file then rename)."""
    data = b"".join(encode_record(t) for t in traces)
    write_bytes_atomic(path, data)


def load_records(path) -> list:
    with open(path, "rb") as fh:
        buf = fh.read()
    if not buf:
        raise KeyFileError("key file is empty")
    records = []
    offset = 0
    while offset < len(buf):
        trace, offset = decode_record(buf, offset)
        records.append(trace)
    return records


def write_bytes_atomic(path, data: bytes) -> None:
    """Write-temp-then-rename so readers never see a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".entx-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
