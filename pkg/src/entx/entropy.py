"""Randomness suppliers feeding matrix generation and per-chunk selection.

Every source is a single-consumer stream of bits, consumed most
significant bit first within each underlying byte. Bounded sources
(``FileSource`` without ``cycle``) raise ``EntropyExhaustedError`` the
moment a request cannot be met in full; nothing is consumed by a
failing request.

Bounded integers are drawn by rejection sampling on fixed-width bit
reads, so there is no modulo bias; power-of-two ranges never reject.
"""

from __future__ import annotations

import hashlib
import os
import struct

import numpy as np

from .errors import EntropyExhaustedError

_REFILL_BYTES = 1 << 16


class EntropySource:
    """Base bit stream. Subclasses implement ``_read_up_to``."""

    kind = "abstract"

    def __init__(self):
        self._pending = bytearray()
        self._bit_off = 0  # bits of _pending[0] already consumed
        self._consumed = 0

    @property
    def bits_consumed(self) -> int:
        return self._consumed

    @property
    def capacity_bits(self) -> float:
        """Total bits this source can ever supply (inf if unbounded)."""
        return float("inf")

    def _read_up_to(self, nbytes: int) -> bytes:
        """Return fresh bytes (possibly more than asked), b'' if dry.

        The concatenation of everything ever returned must not depend
        on how the requests are sized, or streaming replay breaks.
        """
        raise NotImplementedError

    def _available_bits(self) -> int:
        return len(self._pending) * 8 - self._bit_off

    def _ensure(self, nbits: int) -> None:
        while self._available_bits() < nbits:
            short = nbits - self._available_bits()
            want = max(_REFILL_BYTES, (short + 7) // 8)
            chunk = self._read_up_to(want)
            if not chunk:
                raise EntropyExhaustedError(
                    f"{self.kind} entropy source exhausted after "
                    f"{self._consumed} bits (needed {nbits} more)",
                    bits_consumed=self._consumed,
                )
            self._pending.extend(chunk)

    def _advance(self, nbits: int) -> None:
        self._bit_off += nbits
        drop, self._bit_off = divmod(self._bit_off, 8)
        if drop:
            del self._pending[:drop]
        self._consumed += nbits

    def next_bits(self, k: int) -> np.ndarray:
        """Return the next k bits as a uint8 array of 0/1 values."""
        if k < 0:
            raise ValueError("bit count must be non-negative")
        if k == 0:
            return np.empty(0, dtype=np.uint8)
        self._ensure(k)
        nbytes = (self._bit_off + k + 7) // 8
        unpacked = np.unpackbits(
            np.frombuffer(bytes(self._pending[:nbytes]), dtype=np.uint8)
        )
        bits = unpacked[self._bit_off : self._bit_off + k].copy()
        self._advance(k)
        return bits

    def take_int(self, k: int) -> int:
        """Read k bits and return their value, first bit most significant."""
        if k < 0:
            raise ValueError("bit count must be non-negative")
        if k == 0:
            return 0
        self._ensure(k)
        end = self._bit_off + k
        nbytes = (end + 7) // 8
        value = int.from_bytes(self._pending[:nbytes], "big")
        value >>= nbytes * 8 - end
        value &= (1 << k) - 1
        self._advance(k)
        return value

    def random_int(self, lo: int, hi: int) -> int:
        """Uniform integer on [lo, hi], both ends inclusive."""
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        if span == 1:
            return lo
        width = (span - 1).bit_length()
        while True:
            v = self.take_int(width)
            if v < span:
                return lo + v


class SystemSource(EntropySource):
    """Operating-system randomness; unbounded."""

    kind = "system"

    def _read_up_to(self, nbytes: int) -> bytes:
        return os.urandom(nbytes)


class SeededSource(EntropySource):
    """Deterministic stream expanded from a seed with SHAKE-256.

    Block i of the stream is shake_256(seed || i) squeezed to a fixed
    block length, so the stream is identical across runs and platforms.
    """

    kind = "deterministic-test"

    def __init__(self, seed):
        super().__init__()
        if isinstance(seed, int):
            seed = seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
        elif isinstance(seed, str):
            seed = bytes.fromhex(seed)
        self.seed = bytes(seed)
        self._block_index = 0

    def _read_up_to(self, nbytes: int) -> bytes:
        # Whole blocks only: the stream must be the same byte sequence
        # no matter how reads are sized.
        out = bytearray()
        while len(out) < nbytes:
            h = hashlib.shake_256(self.seed + struct.pack("<Q", self._block_index))
            out.extend(h.digest(_REFILL_BYTES))
            self._block_index += 1
        return bytes(out)


class BufferSource(EntropySource):
    """Finite entropy held in memory.

    Reaching the end raises ``EntropyExhaustedError`` unless ``cycle``
    is set, which insecurely rereads the buffer from the start.
    """

    kind = "buffer"

    def __init__(self, data: bytes, cycle: bool = False):
        super().__init__()
        self.data = bytes(data)
        self.cycle = bool(cycle)
        self._offset = 0

    @property
    def capacity_bits(self) -> float:
        if self.cycle and self.data:
            return float("inf")
        return len(self.data) * 8

    def _read_up_to(self, nbytes: int) -> bytes:
        if self._offset >= len(self.data):
            if not self.cycle or not self.data:
                return b""
            self._offset = 0
        chunk = self.data[self._offset : self._offset + nbytes]
        self._offset += len(chunk)
        return chunk


class FileSource(BufferSource):
    """Raw binary entropy file, e.g. captured QRNG output."""

    kind = "qrng-file"

    def __init__(self, path, cycle: bool = False):
        with open(path, "rb") as fh:
            data = fh.read()
        super().__init__(data, cycle=cycle)
        self.path = os.fspath(path)
