"""The entropy expansion engine.

The input bit-string is cut into contiguous N-bit chunks (N being the
permutation block size). For every chunk, log2(m) fresh bits are read
from the entropy source, most significant first, and the chunk is
permuted by the map they select out of the m-map set. Permuted chunks
are concatenated in order, so the output has the input's length
whenever the length is a multiple of N.

A final partial chunk is handled by the tail policy:

* ``identity``: passed through unpermuted (output size == input size,
  for every input length; the default);
* ``drop``: omitted, shortening the output;
* ``pad``: completed with zero bits, permuted like a full chunk, and
  emitted whole, lengthening the output.

Everything needed to undo a run is captured in a ``KeyTrace``: the
permutation set, the per-chunk selections, the tail policy and the
original bit length. ``invert`` replays the trace with inverted maps.

Chunk boundaries depend only on absolute bit offsets, so feeding the
engine one large buffer or many small ones produces identical output
given the same source; ``BitExpander`` is the incremental form and
``expand`` the one-shot convenience built on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import EntropySource
from .errors import EntropyExhaustedError
from .permutation import PermutationSet

TAIL_IDENTITY = "identity"
TAIL_DROP = "drop"
TAIL_PAD = "pad"
TAIL_POLICIES = (TAIL_IDENTITY, TAIL_DROP, TAIL_PAD)


@dataclass
class KeyTrace:
    """Everything required to invert one expansion pass."""

    pset: PermutationSet
    selections: np.ndarray
    tail: str
    original_length: int

    def __post_init__(self):
        self.selections = np.asarray(self.selections, dtype=np.int64)
        if self.tail not in TAIL_POLICIES:
            raise ValueError(f"unknown tail policy {self.tail!r}")
        if self.original_length < 0:
            raise ValueError("original_length must be non-negative")
        expected = selection_count(
            self.original_length, self.pset.block_size, self.tail
        )
        if self.selections.size != expected:
            raise ValueError(
                f"trace has {self.selections.size} selections, "
                f"expected {expected} for {self.original_length} bits"
            )
        if self.selections.size and (
            self.selections.min() < 0 or self.selections.max() >= self.pset.count
        ):
            raise ValueError("selection index out of range for the set")

    def __eq__(self, other):
        if not isinstance(other, KeyTrace):
            return NotImplemented
        return (
            self.pset == other.pset
            and self.tail == other.tail
            and self.original_length == other.original_length
            and np.array_equal(self.selections, other.selections)
        )


def selection_count(length_bits: int, block_size: int, tail: str) -> int:
    """Number of permuted chunks, hence selections, for a given length.

    The zero-padded tail chunk of the pad policy is permuted too, so it
    consumes one extra selection when the length is not chunk-aligned.
    """
    full, rem = divmod(length_bits, block_size)
    if tail == TAIL_PAD and rem:
        return full + 1
    return full


def _as_bits(bits) -> np.ndarray:
    arr = np.ascontiguousarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit streams must be 1-D arrays of 0/1 values")
    return arr


def _permute_rows(rows: np.ndarray, targets, selections: np.ndarray) -> np.ndarray:
    """Permute each row by its selected map's column gather."""
    out = np.empty_like(rows)
    if len(targets) == 1:
        out[:] = rows[:, targets[0]]
        return out
    for j, tgt in enumerate(targets):
        mask = selections == j
        if mask.any():
            out[mask] = rows[np.ix_(mask, tgt)]
    return out


class BitExpander:
    """Incremental expansion: feed bit buffers, then finish the tail.

    Selections are drawn from the source in chunk order as chunks
    complete, so any segmentation of the same input consumes the same
    bits and emits the same output.
    """

    def __init__(
        self,
        pset: PermutationSet,
        source: EntropySource,
        tail: str = TAIL_IDENTITY,
    ):
        if tail not in TAIL_POLICIES:
            raise ValueError(f"unknown tail policy {tail!r}")
        self.pset = pset
        self.source = source
        self.tail = tail
        self._targets = [m.targets for m in pset.maps]
        self._remainder = np.empty(0, dtype=np.uint8)
        self._selection_parts = []
        self._chunks_done = 0
        self._length = 0
        self._trace = None

    def _draw_selections(self, n: int) -> np.ndarray:
        k = self.pset.selection_bits
        if k == 0:
            sels = np.zeros(n, dtype=np.int64)
        else:
            try:
                raw = self.source.next_bits(n * k)
            except EntropyExhaustedError as exc:
                whole = 0
                if self.source.capacity_bits != float("inf"):
                    left = int(self.source.capacity_bits) - self.source.bits_consumed
                    whole = max(0, left) // k
                raise EntropyExhaustedError(
                    f"entropy source exhausted drawing the selection for "
                    f"chunk {self._chunks_done + whole}",
                    bits_consumed=exc.bits_consumed,
                ) from exc
            weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
            sels = raw.reshape(n, k) @ weights
        self._selection_parts.append(sels)
        self._chunks_done += n
        return sels

    def feed(self, bits) -> np.ndarray:
        """Absorb bits; return the permuted output of completed chunks."""
        if self._trace is not None:
            raise RuntimeError("expander already finished")
        bits = _as_bits(bits)
        self._length += bits.size
        if self._remainder.size:
            data = np.concatenate([self._remainder, bits])
        else:
            data = bits
        block = self.pset.block_size
        full = data.size // block
        self._remainder = data[full * block :].copy()
        if full == 0:
            return np.empty(0, dtype=np.uint8)
        sels = self._draw_selections(full)
        rows = data[: full * block].reshape(full, block)
        return _permute_rows(rows, self._targets, sels).reshape(-1)

    def finish(self) -> np.ndarray:
        """Apply the tail policy to leftover bits and seal the trace."""
        if self._trace is not None:
            raise RuntimeError("expander already finished")
        rem = self._remainder
        self._remainder = np.empty(0, dtype=np.uint8)
        if self.tail == TAIL_DROP or not rem.size:
            out = np.empty(0, dtype=np.uint8)
        elif self.tail == TAIL_IDENTITY:
            out = rem
        else:
            chunk = np.zeros(self.pset.block_size, dtype=np.uint8)
            chunk[: rem.size] = rem
            sel = int(self._draw_selections(1)[0])
            out = chunk[self._targets[sel]]
        selections = (
            np.concatenate(self._selection_parts)
            if self._selection_parts
            else np.empty(0, dtype=np.int64)
        )
        self._trace = KeyTrace(self.pset, selections, self.tail, self._length)
        return out

    @property
    def trace(self) -> KeyTrace:
        if self._trace is None:
            raise RuntimeError("finish() has not been called")
        return self._trace


def expand(
    bits,
    pset: PermutationSet,
    source: EntropySource,
    tail: str = TAIL_IDENTITY,
):
    """Expand a bit stream; returns (output bits, key trace)."""
    expander = BitExpander(pset, source, tail)
    body = expander.feed(bits)
    tail_bits = expander.finish()
    if tail_bits.size == 0:
        out = body
    elif body.size == 0:
        out = tail_bits
    else:
        out = np.concatenate([body, tail_bits])
    return out, expander.trace


def invert(bits, trace: KeyTrace):
    """Undo one expansion pass recorded in ``trace``.

    Under the identity and pad policies this restores the original
    stream bit for bit; under drop it restores the retained chunk-
    aligned prefix (the dropped tail is unrecoverable).
    """
    bits = _as_bits(bits)
    pset = trace.pset
    block = pset.block_size
    full, rem = divmod(trace.original_length, block)
    if trace.tail == TAIL_IDENTITY:
        expected = trace.original_length
    elif trace.tail == TAIL_DROP:
        expected = full * block
    else:
        expected = (full + (1 if rem else 0)) * block
    if bits.size != expected:
        raise ValueError(
            f"input has {bits.size} bits but the trace describes {expected}"
        )
    inv_targets = [m.inverted().targets for m in pset.maps]
    sels = trace.selections
    rows = bits[: full * block].reshape(full, block)
    body = _permute_rows(rows, inv_targets, sels[:full]).reshape(-1)
    if trace.tail == TAIL_IDENTITY:
        tail_bits = bits[full * block :]
    elif trace.tail == TAIL_DROP:
        tail_bits = np.empty(0, dtype=np.uint8)
    else:
        if rem:
            last = bits[full * block :][inv_targets[int(sels[full])]]
            tail_bits = last[:rem]
        else:
            tail_bits = np.empty(0, dtype=np.uint8)
    if tail_bits.size == 0:
        return body
    if body.size == 0:
        return np.asarray(tail_bits, dtype=np.uint8).copy()
    return np.concatenate([body, tail_bits])


def repeat_expand(
    bits,
    pset: PermutationSet,
    source: EntropySource,
    tail: str = TAIL_IDENTITY,
    times: int = 1,
):
    """Apply ``expand`` ``times`` times in a row with fresh selections.

    Returns the final output and the traces in application order; to
    undo, apply ``invert`` with the traces reversed.
    """
    if times < 1:
        raise ValueError("times must be at least 1")
    out = _as_bits(bits)
    traces = []
    for _ in range(times):
        out, trace = expand(out, pset, source, tail)
        traces.append(trace)
    return out, traces
