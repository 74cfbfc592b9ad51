import numpy as np
import pytest

from entx import (
    FormatError,
    PcmAudio,
    RasterImage,
    SeededSource,
    audio_to_bits,
    bits_to_audio,
    bits_to_bytes,
    bits_to_image,
    bytes_to_bits,
    expand,
    generate_set,
    image_to_bits,
    invert,
    read_ppm,
    read_wav,
    write_ppm,
    write_wav,
)
from entx.codecs import decode_ppm, decode_wav, encode_ppm, encode_wav


def test_byte_bit_examples():
    assert bytes_to_bits(b"A").tolist() == [0, 1, 0, 0, 0, 0, 0, 1]
    assert bytes_to_bits(b"").size == 0
    assert bits_to_bytes(np.empty(0, dtype=np.uint8)) == b""


def test_byte_round_trip():
    data = SeededSource(b"bytes").next_bits(8 * 500)
    raw = bits_to_bytes(data)
    assert np.array_equal(bytes_to_bits(raw), data)


def test_bits_to_bytes_needs_whole_bytes():
    with pytest.raises(ValueError):
        bits_to_bytes(np.ones(9, dtype=np.uint8))


def test_single_pixel_bit_layout():
    image = RasterImage(1, 1, 3, np.array([255, 0, 128], dtype=np.uint8))
    bits = image_to_bits(image)
    assert bits.tolist() == [1] * 8 + [0] * 8 + [1] + [0] * 7


def test_image_round_trip_through_bits():
    samples = (np.arange(60) * 7 % 256).astype(np.uint8)
    image = RasterImage(5, 4, 3, samples)
    again = bits_to_image(image_to_bits(image), 5, 4, 3)
    assert np.array_equal(again.samples, image.samples)


def test_bits_to_image_checks_dimensions():
    with pytest.raises(ValueError):
        bits_to_image(np.zeros(8, dtype=np.uint8), 2, 2, 3)
    with pytest.raises(ValueError):
        RasterImage(2, 2, 3, np.zeros(5, dtype=np.uint8))
    with pytest.raises(ValueError):
        RasterImage(2, 2, 5, np.zeros(20, dtype=np.uint8))


def test_ppm_p6_container_layout():
    image = RasterImage(2, 1, 3, np.array([1, 2, 3, 4, 5, 6], dtype=np.uint8))
    assert encode_ppm(image) == b"P6\n2 1\n255\n\x01\x02\x03\x04\x05\x06"


def test_ppm_p6_file_round_trip(tmp_path, detailed_image):
    path = tmp_path / "img.ppm"
    write_ppm(detailed_image, path)
    again = read_ppm(path)
    assert (again.width, again.height, again.channels) == (96, 64, 3)
    assert np.array_equal(again.samples, detailed_image.samples)


def test_ppm_header_comments_and_whitespace():
    raw = b"P6 # binary pixmap\n# comment line\n 2\t1 # dims\n255\n" + bytes(6)
    image = decode_ppm(raw)
    assert (image.width, image.height) == (2, 1)


def test_ppm_rgba_uses_arbitrary_map_variant(tmp_path):
    samples = (np.arange(2 * 3 * 4) % 256).astype(np.uint8)
    image = RasterImage(2, 3, 4, samples)
    raw = encode_ppm(image)
    assert raw.startswith(b"P7\nWIDTH 2\nHEIGHT 3\nDEPTH 4\nMAXVAL 255\n")
    again = decode_ppm(raw)
    assert again.channels == 4
    assert np.array_equal(again.samples, samples)


@pytest.mark.parametrize(
    "raw",
    [
        b"P5\n2 2\n255\n" + bytes(12),          # wrong magic
        b"P6\n2 2\n65535\n" + bytes(24),        # not 8-bit
        b"P6\n2 2\n255\n" + bytes(11),          # truncated raster
        b"P6\n2\n",                             # header cut short
        b"P7\nWIDTH 2\nHEIGHT 2\nDEPTH 4\nMAXVAL 255\n" + bytes(16),  # no ENDHDR
    ],
)
def test_bad_pixmaps_are_rejected(raw):
    with pytest.raises(FormatError):
        decode_ppm(raw)


def test_twos_complement_amplitudes():
    audio = PcmAudio(8000, np.array([-1, 0, -32768], dtype=np.int16))
    left, right = audio_to_bits(audio)
    assert right is None
    assert left[:16].tolist() == [1] * 16
    assert left[16:32].tolist() == [0] * 16
    assert left[32:48].tolist() == [1] + [0] * 15


def test_audio_bits_round_trip(stereo_audio):
    left, right = audio_to_bits(stereo_audio)
    again = bits_to_audio(left, right, stereo_audio.sample_rate)
    assert np.array_equal(again.left, stereo_audio.left)
    assert np.array_equal(again.right, stereo_audio.right)


def test_audio_bit_length_must_align():
    with pytest.raises(ValueError):
        bits_to_audio(np.zeros(17, dtype=np.uint8), None, 8000)


def test_stereo_channels_must_match_length():
    with pytest.raises(ValueError):
        PcmAudio(8000, np.zeros(4, dtype=np.int16), np.zeros(5, dtype=np.int16))


def test_wav_container_round_trip(tmp_path, stereo_audio):
    path = tmp_path / "clip.wav"
    write_wav(stereo_audio, path)
    again = read_wav(path)
    assert again.sample_rate == stereo_audio.sample_rate
    assert np.array_equal(again.left, stereo_audio.left)
    assert np.array_equal(again.right, stereo_audio.right)


def test_wav_mono_round_trip():
    mono = PcmAudio(44100, (np.arange(100) * 321 % 40000 - 20000).astype(np.int16))
    again = decode_wav(encode_wav(mono))
    assert again.channels == 1
    assert np.array_equal(again.left, mono.left)


def test_wav_rejects_non_pcm16():
    import io
    import wave

    sink = io.BytesIO()
    with wave.open(sink, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(1)  # 8-bit
        w.setframerate(8000)
        w.writeframes(bytes(16))
    with pytest.raises(FormatError):
        decode_wav(sink.getvalue())
    with pytest.raises(FormatError):
        decode_wav(b"definitely not RIFF")


def test_full_media_pipeline_is_lossless(tmp_path, detailed_image, stereo_audio):
    pset = generate_set(128, 4, SeededSource(b"media-set"))

    bits = image_to_bits(detailed_image)
    out, trace = expand(bits, pset, SeededSource(b"media-img"))
    restored = bits_to_image(invert(out, trace), 96, 64, 3)
    assert encode_ppm(restored) == encode_ppm(detailed_image)

    left, right = audio_to_bits(stereo_audio)
    out_l, trace_l = expand(left, pset, SeededSource(b"media-l"))
    out_r, trace_r = expand(right, pset, SeededSource(b"media-r"))
    restored = bits_to_audio(
        invert(out_l, trace_l), invert(out_r, trace_r), stereo_audio.sample_rate
    )
    assert encode_wav(restored) == encode_wav(stereo_audio)
