"""Invertible bit-block permutation transforms that raise measured byte
entropy, with a built-in five-metric randomness battery."""

from .analysis import (
    RandomnessReport,
    analyze,
    arithmetic_mean,
    chi_square,
    compare,
    format_comparison,
    format_report,
    monte_carlo_pi,
    serial_correlation,
    shannon_entropy,
)
from .codecs import (
    PcmAudio,
    RasterImage,
    audio_to_bits,
    bits_to_audio,
    bits_to_bytes,
    bits_to_image,
    bytes_to_bits,
    image_to_bits,
    read_ppm,
    read_wav,
    write_ppm,
    write_wav,
)
from .entropy import (
    BufferSource,
    EntropySource,
    FileSource,
    SeededSource,
    SystemSource,
)
from .errors import (
    EntropyExhaustedError,
    EntxError,
    FormatError,
    KeyFileError,
)
from .permutation import (
    MODE_PAPER_LITERAL,
    MODE_UNBIASED,
    PermutationMap,
    PermutationSet,
    apply_permutation,
    generate_permutation,
    generate_set,
    identity_set,
    invert_permutation,
)
from .transform import (
    TAIL_DROP,
    TAIL_IDENTITY,
    TAIL_PAD,
    TAIL_POLICIES,
    BitExpander,
    KeyTrace,
    expand,
    invert,
    repeat_expand,
    selection_count,
)

__version__ = "0.1.0"
