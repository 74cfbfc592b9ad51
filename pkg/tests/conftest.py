from pathlib import Path

import numpy as np
import pytest

from entx import PcmAudio, RasterImage

DATA_DIR = Path(__file__).parent / "data"
TEXT_NAMES = ("lighthouse", "orchard", "railway")


@pytest.fixture(scope="session")
def texts():
    """Three small ASCII English prose files, entropy roughly 4.3 each."""
    return {name: (DATA_DIR / f"{name}.txt").read_bytes() for name in TEXT_NAMES}


@pytest.fixture(scope="session")
def corpus_1mb(texts):
    """A 1 MiB low-entropy text built by cycling the prose fixtures."""
    base = b"".join(texts.values())
    return (base * (2**20 // len(base) + 1))[: 2**20]


def build_flat_image() -> RasterImage:
    """128x128 RGB in 2-row stripes of four extreme-density colors.

    Stripes are 768 bytes, so 256-byte chunks (N=2048 bits) always sit
    inside one color while 4096-byte chunks (N=32768) span several.
    """
    colors = np.array(
        [(0, 0, 0), (255, 255, 255), (0, 0, 255), (255, 255, 0)], dtype=np.uint8
    )
    stripe_rows = np.repeat(colors[np.arange(64) % 4], 2, axis=0)
    samples = np.repeat(stripe_rows[:, None, :], 128, axis=1).reshape(-1)
    return RasterImage(128, 128, 3, samples)


def build_detailed_image() -> RasterImage:
    """96x64 RGB with per-pixel variety (no flat regions)."""
    x, y = np.meshgrid(np.arange(96), np.arange(64))
    r = (x * 7 + y * 13) % 256
    g = (x * x + 3 * y) % 256
    b = (x * y + 29) % 256
    samples = np.stack([r, g, b], axis=-1).astype(np.uint8).reshape(-1)
    return RasterImage(96, 64, 3, samples)


def build_stereo_audio(n_samples: int = 5000) -> PcmAudio:
    t = np.arange(n_samples)
    left = ((t * 3571 + 17) % 65536 - 32768).astype(np.int16)
    right = (12000.0 * np.sin(t / 23.0)).astype(np.int16)
    return PcmAudio(22050, left, right)


@pytest.fixture
def flat_image():
    return build_flat_image()


@pytest.fixture
def detailed_image():
    return build_detailed_image()


@pytest.fixture
def stereo_audio():
    return build_stereo_audio()
