"""Convert between file formats and the bit streams the engine consumes.

Raw bytes become bits most significant bit first. Images contribute
their decoded 8-bit channel samples in raster order (top-left pixel
first); audio contributes each channel's 16-bit amplitudes in two's
complement, most significant bit first, one stream per channel. The
transform only ever sees decoded payloads, never container bytes.

Containers are deliberately lossless and simple: binary portable
pixmap (P6) for RGB, the arbitrary-map variant (P7/PAM) for RGBA, and
RIFF PCM WAV for 16-bit mono/stereo audio.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError


def bytes_to_bits(data) -> np.ndarray:
    """Unpack bytes into a uint8 0/1 array, MSB of each byte first."""
    arr = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(
        data, np.ndarray
    ) else np.ascontiguousarray(data, dtype=np.uint8)
    return np.unpackbits(arr)


def bits_to_bytes(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise ValueError(f"bit count {bits.size} is not a multiple of 8")
    return np.packbits(bits).tobytes()


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass
class RasterImage:
    """Decoded raster: 8-bit channel samples, row-major from top-left."""

    width: int
    height: int
    channels: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.channels not in (3, 4):
            raise ValueError("channels must be 3 (RGB) or 4 (RGBA)")
        self.samples = np.ascontiguousarray(self.samples, dtype=np.uint8).reshape(-1)
        expected = self.width * self.height * self.channels
        if self.samples.size != expected:
            raise ValueError(
                f"{self.samples.size} samples for a "
                f"{self.width}x{self.height}x{self.channels} image"
            )


def image_to_bits(image: RasterImage) -> np.ndarray:
    return np.unpackbits(image.samples)


def bits_to_image(bits, width: int, height: int, channels: int) -> RasterImage:
    bits = np.asarray(bits, dtype=np.uint8)
    expected = width * height * channels * 8
    if bits.size != expected:
        raise ValueError(
            f"{bits.size} bits cannot fill a {width}x{height}x{channels} image"
        )
    return RasterImage(width, height, channels, np.packbits(bits))


def _next_token(buf: bytes, pos: int):
    while pos < len(buf):
        c = buf[pos : pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < len(buf) and buf[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(buf) and buf[pos : pos + 1] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise FormatError("pixmap header ended prematurely")
    return buf[start:pos], pos


def _parse_p6(buf: bytes) -> RasterImage:
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(buf, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"bad pixmap header token {token!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"only 8-bit pixmaps are supported (maxval {maxval})")
    pos += 1  # single whitespace byte separates header from raster
    need = width * height * 3
    raster = buf[pos : pos + need]
    if len(raster) != need:
        raise FormatError("pixmap raster is truncated")
    return RasterImage(width, height, 3, np.frombuffer(raster, dtype=np.uint8))


def _parse_p7(buf: bytes) -> RasterImage:
    try:
        end = buf.index(b"ENDHDR\n")
    except ValueError:
        raise FormatError("arbitrary-map header has no ENDHDR") from None
    header = buf[:end].decode("ascii", "replace").splitlines()
    attrs = {}
    for line in header[1:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        attrs[key] = value.strip()
    try:
        width = int(attrs["WIDTH"])
        height = int(attrs["HEIGHT"])
        depth = int(attrs["DEPTH"])
        maxval = int(attrs["MAXVAL"])
    except (KeyError, ValueError):
        raise FormatError("arbitrary-map header is incomplete") from None
    if maxval != 255:
        raise FormatError(f"only 8-bit pixmaps are supported (maxval {maxval})")
    if depth not in (3, 4):
        raise FormatError(f"unsupported sample depth {depth}")
    raster = buf[end + len(b"ENDHDR\n") :]
    need = width * height * depth
    if len(raster) < need:
        raise FormatError("pixmap raster is truncated")
    return RasterImage(width, height, depth, np.frombuffer(raster[:need], dtype=np.uint8))


def decode_ppm(buf: bytes) -> RasterImage:
    """Parse a binary pixmap (P6) or arbitrary-map (P7) buffer."""
    if buf[:2] == b"P6":
        return _parse_p6(buf)
    if buf[:2] == b"P7":
        return _parse_p7(buf)
    raise FormatError("not a binary pixmap (expected P6 or P7 magic)")


def encode_ppm(image: RasterImage) -> bytes:
    if image.channels == 3:
        header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    else:
        header = (
            f"P7\nWIDTH {image.width}\nHEIGHT {image.height}\n"
            f"DEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n"
        ).encode("ascii")
    return header + image.samples.tobytes()


def read_ppm(path) -> RasterImage:
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())


def write_ppm(image: RasterImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_ppm(image))


# ---------------------------------------------------------------------------
# Audio
# ---------------------------------------------------------------------------


@dataclass
class PcmAudio:
    """16-bit PCM amplitudes; ``right`` is None for mono."""

    sample_rate: int
    left: np.ndarray = field(repr=False)
    right: np.ndarray | None = field(repr=False, default=None)

    def __post_init__(self):
        if self.sample_rate < 1:
            raise ValueError("sample rate must be positive")
        self.left = np.ascontiguousarray(self.left, dtype=np.int16)
        if self.right is not None:
            self.right = np.ascontiguousarray(self.right, dtype=np.int16)
            if self.right.size != self.left.size:
                raise ValueError("stereo channels must have equal length")

    @property
    def channels(self) -> int:
        return 1 if self.right is None else 2


def _samples_to_bits(samples: np.ndarray) -> np.ndarray:
    # Big-endian two's complement, so each amplitude lands MSB first.
    raw = np.frombuffer(samples.astype(">i2").tobytes(), dtype=np.uint8)
    return np.unpackbits(raw)


def _bits_to_samples(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 16:
        raise ValueError(f"bit count {bits.size} is not a multiple of 16")
    return np.frombuffer(np.packbits(bits).tobytes(), dtype=">i2").astype(np.int16)


def audio_to_bits(audio: PcmAudio):
    """Serialize each channel to its own bit stream; (left, right|None)."""
    left = _samples_to_bits(audio.left)
    right = _samples_to_bits(audio.right) if audio.right is not None else None
    return left, right


def bits_to_audio(left_bits, right_bits, sample_rate: int) -> PcmAudio:
    left = _bits_to_samples(left_bits)
    right = _bits_to_samples(right_bits) if right_bits is not None else None
    return PcmAudio(sample_rate, left, right)


def decode_wav(buf: bytes) -> PcmAudio:
    """Parse a RIFF PCM buffer (16-bit, mono or stereo)."""
    try:
        with wave.open(io.BytesIO(buf), "rb") as wav:
            if wav.getsampwidth() != 2:
                raise FormatError(
                    f"only 16-bit PCM is supported "
                    f"(sample width {wav.getsampwidth() * 8} bits)"
                )
            channels = wav.getnchannels()
            if channels not in (1, 2):
                raise FormatError(f"unsupported channel count {channels}")
            rate = wav.getframerate()
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise FormatError(f"bad RIFF PCM file: {exc}") from exc
    data = np.frombuffer(frames, dtype="<i2")
    if channels == 1:
        return PcmAudio(rate, data.astype(np.int16))
    return PcmAudio(rate, data[0::2].astype(np.int16), data[1::2].astype(np.int16))


def encode_wav(audio: PcmAudio) -> bytes:
    if audio.channels == 1:
        frames = audio.left.astype("<i2")
    else:
        frames = np.empty(audio.left.size * 2, dtype="<i2")
        frames[0::2] = audio.left
        frames[1::2] = audio.right
    sink = io.BytesIO()
    with wave.open(sink, "wb") as wav:
        wav.setnchannels(audio.channels)
        wav.setsampwidth(2)
        wav.setframerate(audio.sample_rate)
        wav.writeframes(frames.tobytes())
    return sink.getvalue()


def read_wav(path) -> PcmAudio:
    with open(path, "rb") as fh:
        return decode_wav(fh.read())


def write_wav(audio: PcmAudio, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav(audio))
