"""Sparse permutation matrices: generation, application, inversion.

An N-by-N permutation matrix has exactly one 1 per row and column, so
it is stored as the index array ``targets`` with ``targets[i]`` the
column of the 1 in row i (0-based). Multiplying a length-N vector by
the matrix is then a single gather, ``out[i] = block[targets[i]]``,
linear in N; the dense matrix is never materialized.

Generation walks a Fisher-Yates shuffle driven by an entropy source.
Two modes exist:

* ``unbiased`` (default): the swap partner at step i is drawn uniformly
  from the first i+1 slots, the textbook shuffle, making all N!
  permutations equiprobable given uniform source bits.
* ``paper-literal``: every swap partner is drawn uniformly from the
  full range. This variant is measurably non-uniform over the
  permutation space (some permutations are reachable by more draw
  sequences than others) and exists only for fidelity experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import EntropySource

MODE_UNBIASED = "unbiased"
MODE_PAPER_LITERAL = "paper-literal"
_MODES = (MODE_UNBIASED, MODE_PAPER_LITERAL)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PermutationMap:
    """One permutation, stored as its row-to-column index array."""

    targets: np.ndarray

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=np.intp)
        if targets.ndim != 1 or targets.size == 0:
            raise ValueError("targets must be a non-empty 1-D index array")
        if not np.array_equal(np.sort(targets), np.arange(targets.size)):
            raise ValueError("targets is not a bijection on 0..N-1")
        targets = targets.copy()
        targets.flags.writeable = False
        object.__setattr__(self, "targets", targets)

    @property
    def size(self) -> int:
        return self.targets.size

    def apply(self, block: np.ndarray) -> np.ndarray:
        """Permute a length-N vector: out[i] = block[targets[i]]."""
        block = np.asarray(block)
        if block.shape != (self.size,):
            raise ValueError(
                f"block length {block.shape} does not match map size {self.size}"
            )
        return block[self.targets]

    def inverted(self) -> "PermutationMap":
        """The inverse map: inv.targets[self.targets[i]] == i."""
        inv = np.empty(self.size, dtype=np.intp)
        inv[self.targets] = np.arange(self.size)
        return PermutationMap(inv)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.targets, np.arange(self.size)))

    def __eq__(self, other):
        if not isinstance(other, PermutationMap):
            return NotImplemented
        return np.array_equal(self.targets, other.targets)

    def __repr__(self):
        return f"PermutationMap(size={self.size})"


@dataclass(frozen=True, eq=False)
class PermutationSet:
    """m equal-size permutation maps forming the selectable key space.

    Both the block size N and the count m must be powers of two: a
    selection consumes exactly log2(m) bits, and N = 2**n mirrors an
    n-qubit operator.
    """

    block_size: int
    maps: tuple

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("a permutation set needs at least one map")
        if not _is_power_of_two(self.block_size) or self.block_size < 2:
            raise ValueError(f"block size {self.block_size} is not a power of two >= 2")
        if not _is_power_of_two(len(maps)):
            raise ValueError(f"map count {len(maps)} is not a power of two")
        for pmap in maps:
            if pmap.size != self.block_size:
                raise ValueError(
                    f"map size {pmap.size} differs from block size {self.block_size}"
                )
        object.__setattr__(self, "maps", maps)

    @property
    def count(self) -> int:
        return len(self.maps)

    @property
    def selection_bits(self) -> int:
        """Bits consumed to select one map: log2(count)."""
        return self.count.bit_length() - 1

    def inverted(self) -> "PermutationSet":
        return PermutationSet(self.block_size, tuple(m.inverted() for m in self.maps))

    def __eq__(self, other):
        if not isinstance(other, PermutationSet):
            return NotImplemented
        return self.block_size == other.block_size and self.maps == other.maps

    def __repr__(self):
        return f"PermutationSet(block_size={self.block_size}, count={self.count})"


def generate_permutation(
    size: int, source: EntropySource, mode: str = MODE_UNBIASED
) -> PermutationMap:
    """Generate one random permutation of the given size from a source.

    Bits are consumed in a fixed order so that a deterministic source
    reproduces the same map: unbiased mode draws one bounded integer
    per step from the last slot down to the second; paper-literal mode
    draws all N full-range integers first, then swaps from the top.
    """
    if size < 2:
        raise ValueError("permutation size must be at least 2")
    if mode not in _MODES:
        raise ValueError(f"unknown generation mode {mode!r}")
    perm = np.arange(size, dtype=np.intp)
    if mode == MODE_UNBIASED:
        for i in range(size - 1, 0, -1):
            j = source.random_int(0, i)
            perm[i], perm[j] = perm[j], perm[i]
    else:
        draws = [source.random_int(0, size - 1) for _ in range(size)]
        for i in range(size - 1, -1, -1):
            p = draws[i]
            perm[p], perm[i] = perm[i], perm[p]
    return PermutationMap(perm)


def generate_set(
    size: int,
    count: int,
    source: EntropySource,
    mode: str = MODE_UNBIASED,
) -> PermutationSet:
    """Generate ``count`` independent maps of the given size.

    Duplicates are permitted; nothing deduplicates the set.
    """
    if not _is_power_of_two(size) or size < 2:
        raise ValueError(f"block size {size} is not a power of two >= 2")
    if not _is_power_of_two(count):
        raise ValueError(f"map count {count} is not a power of two")
    maps = tuple(generate_permutation(size, source, mode) for _ in range(count))
    return PermutationSet(size, maps)


def apply_permutation(pmap: PermutationMap, block: np.ndarray) -> np.ndarray:
    return pmap.apply(block)


def invert_permutation(pmap: PermutationMap) -> PermutationMap:
    return pmap.inverted()


def identity_set(size: int, count: int = 1) -> PermutationSet:
    """A set of identity maps; transforms built on it are no-ops."""
    ident = PermutationMap(np.arange(size, dtype=np.intp))
    return PermutationSet(size, (ident,) * count)
