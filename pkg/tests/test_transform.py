import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entx import (
    TAIL_DROP,
    TAIL_IDENTITY,
    TAIL_PAD,
    BitExpander,
    BufferSource,
    EntropyExhaustedError,
    KeyTrace,
    PermutationMap,
    PermutationSet,
    SeededSource,
    expand,
    generate_set,
    identity_set,
    invert,
    repeat_expand,
    selection_count,
)


def rotation_set(block, count):
    maps = tuple(PermutationMap(np.roll(np.arange(block), r)) for r in range(count))
    return PermutationSet(block, maps)


def random_bits(seed, n):
    return SeededSource(seed).next_bits(n)


def test_single_identity_map_passes_input_through():
    pset = identity_set(8, 1)
    bits = random_bits(b"id", 100)
    out, trace = expand(bits, pset, SeededSource(0))
    assert np.array_equal(out, bits)
    assert trace.selections.tolist() == [0] * 12
    assert trace.original_length == 100


def test_selection_bits_pick_the_map():
    pset = rotation_set(8, 4)
    src = BufferSource(bytes([0b10000000]))  # first two bits: "10" -> map 2
    block = np.array([1, 0, 0, 0, 0, 0, 0, 0], dtype=np.uint8)
    out, trace = expand(block, pset, src)
    assert trace.selections.tolist() == [2]
    assert np.array_equal(out, pset.maps[2].apply(block))
    assert src.bits_consumed == 2


@pytest.mark.parametrize("tail", [TAIL_IDENTITY, TAIL_DROP, TAIL_PAD])
@pytest.mark.parametrize("length", [0, 1, 7, 8, 64, 65, 100, 1023])
def test_round_trip_all_tails(tail, length):
    bits = random_bits(length + 1, length)
    pset = generate_set(64, 4, SeededSource(b"rt-set"))
    out, trace = expand(bits, pset, SeededSource(b"rt-run"), tail)
    back = invert(out, trace)
    if tail == TAIL_DROP:
        assert np.array_equal(back, bits[: (length // 64) * 64])
    else:
        assert np.array_equal(back, bits)


@pytest.mark.parametrize(
    "tail,expected",
    [
        (TAIL_IDENTITY, 100),  # same size, always
        (TAIL_DROP, 64),       # partial chunk gone
        (TAIL_PAD, 128),       # padded to the next boundary
    ],
)
def test_output_lengths_by_tail(tail, expected):
    bits = random_bits(b"len", 100)
    pset = generate_set(64, 2, SeededSource(b"len-set"))
    out, trace = expand(bits, pset, SeededSource(b"len-run"), tail)
    assert out.size == expected
    assert trace.selections.size == selection_count(100, 64, tail)


def test_pad_tail_consumes_a_selection():
    assert selection_count(100, 64, TAIL_PAD) == 2
    assert selection_count(100, 64, TAIL_IDENTITY) == 1
    assert selection_count(128, 64, TAIL_PAD) == 2
    assert selection_count(0, 64, TAIL_PAD) == 0


@settings(max_examples=40, deadline=None)
@given(
    data=st.binary(min_size=0, max_size=200),
    block_pow=st.integers(3, 5),
    count_pow=st.integers(0, 2),
    tail=st.sampled_from([TAIL_IDENTITY, TAIL_DROP, TAIL_PAD]),
    cut=st.integers(0, 1600),
)
def test_round_trip_property(data, block_pow, count_pow, tail, cut):
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[: cut or None]
    pset = generate_set(1 << block_pow, 1 << count_pow, SeededSource(b"prop-set"))
    out, trace = expand(bits, pset, SeededSource(b"prop-run"), tail)
    back = invert(out, trace)
    keep = bits.size if tail != TAIL_DROP else (bits.size // pset.block_size) * pset.block_size
    assert np.array_equal(back, bits[:keep])


def test_identity_tail_preserves_size_for_every_length():
    pset = generate_set(32, 2, SeededSource(b"size-set"))
    for length in (0, 5, 31, 32, 33, 200):
        bits = random_bits(length, length)
        out, _ = expand(bits, pset, SeededSource(length), TAIL_IDENTITY)
        assert out.size == length


def test_per_chunk_population_is_preserved():
    pset = generate_set(64, 8, SeededSource(b"pop-set"))
    bits = random_bits(b"pop", 64 * 9 + 17)
    out, _ = expand(bits, pset, SeededSource(b"pop-run"))
    for j in range(9):
        a = bits[j * 64 : (j + 1) * 64]
        b = out[j * 64 : (j + 1) * 64]
        assert a.sum() == b.sum()


def test_flipping_one_input_bit_changes_exactly_one_output_bit():
    pset = generate_set(64, 8, SeededSource(b"loc-set"))
    bits = random_bits(b"loc", 64 * 6)
    flipped = bits.copy()
    flipped[137] ^= 1
    out_a, _ = expand(bits, pset, SeededSource(b"loc-run"))
    out_b, _ = expand(flipped, pset, SeededSource(b"loc-run"))
    diff = np.nonzero(out_a != out_b)[0]
    assert diff.size == 1
    assert diff[0] // 64 == 137 // 64  # stays inside its own chunk


def test_streaming_matches_one_shot():
    pset = generate_set(32, 4, SeededSource(b"stream-set"))
    bits = random_bits(b"stream", 1000)
    whole, trace_whole = expand(bits, pset, SeededSource(b"stream-run"))

    rng = np.random.default_rng(9)
    expander = BitExpander(pset, SeededSource(b"stream-run"))
    pieces = []
    pos = 0
    while pos < bits.size:
        step = int(rng.integers(0, 97))
        pieces.append(expander.feed(bits[pos : pos + step]))
        pos += step
    pieces.append(expander.finish())
    assert np.array_equal(np.concatenate(pieces), whole)
    assert expander.trace == trace_whole


def test_expander_finish_is_terminal():
    expander = BitExpander(identity_set(8), SeededSource(0))
    with pytest.raises(RuntimeError):
        expander.trace
    expander.feed(np.ones(4, dtype=np.uint8))
    expander.finish()
    with pytest.raises(RuntimeError):
        expander.feed(np.ones(4, dtype=np.uint8))
    with pytest.raises(RuntimeError):
        expander.finish()


def test_repeat_expand_round_trips_in_reverse():
    pset = generate_set(32, 4, SeededSource(b"rep-set"))
    bits = random_bits(b"rep", 777)
    out, traces = repeat_expand(bits, pset, SeededSource(b"rep-run"), TAIL_IDENTITY, 3)
    assert len(traces) == 3
    for trace in reversed(traces):
        out = invert(out, trace)
    assert np.array_equal(out, bits)


def test_repeat_once_equals_expand():
    pset = generate_set(32, 4, SeededSource(b"rep1-set"))
    bits = random_bits(b"rep1", 500)
    a, traces = repeat_expand(bits, pset, SeededSource(b"same"), TAIL_IDENTITY, 1)
    b, trace = expand(bits, pset, SeededSource(b"same"))
    assert np.array_equal(a, b)
    assert traces[0] == trace
    with pytest.raises(ValueError):
        repeat_expand(bits, pset, SeededSource(0), TAIL_IDENTITY, 0)


def test_empty_input_round_trips():
    pset = generate_set(16, 2, SeededSource(b"empty-set"))
    for tail in (TAIL_IDENTITY, TAIL_DROP, TAIL_PAD):
        out, trace = expand(np.empty(0, dtype=np.uint8), pset, SeededSource(1), tail)
        assert out.size == 0
        assert invert(out, trace).size == 0


def test_exhaustion_names_the_failing_chunk():
    pset = generate_set(8, 4, SeededSource(b"exh-set"))  # 2 selection bits per chunk
    bits = np.zeros(8 * 10, dtype=np.uint8)
    with pytest.raises(EntropyExhaustedError, match="chunk 4"):
        expand(bits, pset, BufferSource(bytes(1)))  # 8 bits: enough for 4 chunks


def test_invert_validates_lengths_and_selections():
    pset = generate_set(16, 4, SeededSource(b"val-set"))
    bits = random_bits(b"val", 100)
    out, trace = expand(bits, pset, SeededSource(b"val-run"))
    with pytest.raises(ValueError):
        invert(out[:-1], trace)
    bad = trace.selections.copy()
    bad[0] = 4  # out of range for m=4
    with pytest.raises(ValueError):
        KeyTrace(pset, bad, trace.tail, trace.original_length)
    with pytest.raises(ValueError):
        KeyTrace(pset, trace.selections[:-1], trace.tail, trace.original_length)
    with pytest.raises(ValueError):
        KeyTrace(pset, trace.selections, "truncate", trace.original_length)


def test_selection_draw_order_is_chunk_order():
    # 4 chunks at 2 bits each: stream 00 01 10 11 selects maps 0,1,2,3
    pset = rotation_set(8, 4)
    src = BufferSource(bytes([0b00011011]))
    bits = np.tile(np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=np.uint8), 4)
    out, trace = expand(bits, pset, src)
    assert trace.selections.tolist() == [0, 1, 2, 3]
    for j in range(4):
        chunk = bits[j * 8 : (j + 1) * 8]
        assert np.array_equal(out[j * 8 : (j + 1) * 8], pset.maps[j].apply(chunk))
