"""Command-line interface.

Commands:

* ``keygen``   generate a permutation set and store it as a key file
* ``expand``   transform a file, writing the output, the key file and
  a before/after randomness report
* ``invert``   undo a transform using its key file
* ``analyze``  print the five-metric randomness report for a file
* ``sweep``    run expansion over a grid of sizes/counts and/or
  repeated passes, emitting an entropy table

Exit codes: 0 success, 2 config, 3 io, 4 entropy-exhausted, 5 format.
"""

from __future__ import annotations

import argparse
import json
import os.path
import sys

import numpy as np

from . import analysis, codecs, keyfile
from .entropy import FileSource, SeededSource, SystemSource
from .errors import EntropyExhaustedError, FormatError, KeyFileError
from .permutation import MODE_PAPER_LITERAL, MODE_UNBIASED, generate_set
from .transform import TAIL_IDENTITY, TAIL_POLICIES, KeyTrace, expand, invert

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ENTROPY = 4
EXIT_FORMAT = 5

DEFAULT_SIZE = 256
DEFAULT_COUNT = 16

FORMATS = ("bytes", "image", "audio")


class ConfigError(ValueError):
    """Invalid flag combination or value."""


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def _int_list(text: str):
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_source_args(p: argparse.ArgumentParser):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--seed", metavar="HEX", help="deterministic test source")
    group.add_argument(
        "--entropy-file", metavar="PATH", help="raw binary entropy (e.g. QRNG capture)"
    )
    group.add_argument(
        "--system", action="store_true", help="operating-system randomness (default)"
    )
    p.add_argument(
        "--cycle",
        action="store_true",
        help="INSECURE: reuse the entropy file from the start when it runs out",
    )


def _add_transform_args(p: argparse.ArgumentParser):
    p.add_argument("--size", type=int, default=DEFAULT_SIZE, metavar="N",
                   help=f"permutation block size in bits (default {DEFAULT_SIZE})")
    p.add_argument("--count", type=int, default=DEFAULT_COUNT, metavar="M",
                   help=f"number of maps in the set (default {DEFAULT_COUNT})")
    p.add_argument("--mode", choices=(MODE_UNBIASED, MODE_PAPER_LITERAL),
                   default=MODE_UNBIASED, help="shuffle variant used for generation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entx",
        description="Raise a file's measured byte entropy with invertible "
        "bit-block permutations.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("keygen", help="generate a permutation set key file")
    _add_transform_args(p)
    _add_source_args(p)
    p.add_argument("--key", required=True, metavar="PATH", help="key file to write")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("expand", help="transform a file (size-preserving by default)")
    p.add_argument("input", metavar="INPUT")
    p.add_argument("--out", required=True, metavar="PATH", help="transformed output")
    p.add_argument("--key", required=True, metavar="PATH", help="key file to write")
    _add_transform_args(p)
    _add_source_args(p)
    p.add_argument("--tail", choices=TAIL_POLICIES, default=TAIL_IDENTITY,
                   help="handling of the final partial chunk")
    p.add_argument("--format", choices=FORMATS, default="bytes")
    p.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--json", action="store_true", help="structured report output")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("invert", help="undo a transform with its key file")
    p.add_argument("input", metavar="INPUT")
    p.add_argument("--out", required=True, metavar="PATH", help="restored output")
    p.add_argument("--key", required=True, metavar="PATH", help="key file to read")
    p.add_argument("--format", choices=FORMATS, default="bytes")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("analyze", help="five-metric randomness report for a file")
    p.add_argument("input", metavar="INPUT")
    p.add_argument("--format", choices=FORMATS, default="bytes")
    p.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--json", action="store_true", help="structured report output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="entropy across a size/count grid or repeated passes")
    p.add_argument("input", metavar="INPUT")
    _add_transform_args(p)
    _add_source_args(p)
    p.add_argument("--sizes", type=_int_list, metavar="LIST",
                   help="comma-separated block sizes to sweep")
    p.add_argument("--counts", type=_int_list, metavar="LIST",
                   help="comma-separated map counts to sweep")
    p.add_argument("--repeat", type=int, default=1, metavar="K",
                   help="successive applications per grid point")
    p.add_argument("--tail", choices=TAIL_POLICIES, default=TAIL_IDENTITY)
    p.add_argument("--format", choices=("bytes", "image"), default="bytes")
    p.add_argument("--report", metavar="PATH", help="write the table here instead of stdout")
    p.add_argument("--json", action="store_true", help="structured table output")
    p.set_defaults(func=cmd_sweep)

    return parser


def _require_power_of_two(name: str, value: int, minimum: int):
    if value < minimum or value & (value - 1):
        raise ConfigError(f"--{name} must be a power of two >= {minimum}, got {value}")


def _make_source(args):
    if args.cycle and not args.entropy_file:
        raise ConfigError("--cycle only applies to --entropy-file sources")
    if args.seed is not None:
        try:
            seed = bytes.fromhex(args.seed)
        except ValueError:
            raise ConfigError(f"--seed must be hex digits, got {args.seed!r}") from None
        return SeededSource(seed)
    if args.entropy_file:
        return FileSource(args.entropy_file, cycle=args.cycle)
    return SystemSource()


def _check_distinct(read_paths, write_paths):
    reads = {os.path.abspath(p) for p in read_paths if p}
    writes = [os.path.abspath(p) for p in write_paths if p]
    for w in writes:
        if w in reads:
            raise ConfigError(f"refusing to overwrite an input path: {w}")
    if len(set(writes)) != len(writes):
        raise ConfigError("output, key and report paths must be distinct")


# ---------------------------------------------------------------------------
# Format plumbing
# ---------------------------------------------------------------------------


def _read_streams(fmt: str, path):
    """Decode a file into its transformable bit streams plus rebuild info."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if fmt == "bytes":
        return [codecs.bytes_to_bits(raw)], {}
    if fmt == "image":
        image = codecs.decode_ppm(raw)
        return [codecs.image_to_bits(image)], {"image": image}
    audio = codecs.decode_wav(raw)
    left, right = codecs.audio_to_bits(audio)
    streams = [left] if right is None else [left, right]
    return streams, {"audio": audio}


def _encode_streams(fmt: str, streams, meta) -> bytes:
    if fmt == "bytes":
        return codecs.bits_to_bytes(streams[0])
    if fmt == "image":
        image = meta["image"]
        rebuilt = codecs.bits_to_image(
            streams[0], image.width, image.height, image.channels
        )
        return codecs.encode_ppm(rebuilt)
    audio = meta["audio"]
    right = streams[1] if len(streams) == 2 else None
    rebuilt = codecs.bits_to_audio(streams[0], right, audio.sample_rate)
    return codecs.encode_wav(rebuilt)


def _payload_bytes(streams) -> bytes:
    """The exact byte material the transform operates on."""
    return b"".join(codecs.bits_to_bytes(s) for s in streams)


def _emit(args, text: str):
    report_path = getattr(args, "report", None)
    if report_path:
        keyfile.write_bytes_atomic(report_path, text.encode("utf-8") + b"\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_keygen(args) -> int:
    _require_power_of_two("size", args.size, 8)
    _require_power_of_two("count", args.count, 1)
    source = _make_source(args)
    pset = generate_set(args.size, args.count, source, args.mode)
    trace = KeyTrace(pset, np.empty(0, dtype=np.int64), TAIL_IDENTITY, 0)
    keyfile.save(args.key, trace)
    print(
        f"wrote {args.key}: {args.count} maps of size {args.size} "
        f"({source.bits_consumed} entropy bits consumed)"
    )
    return EXIT_OK


def cmd_expand(args) -> int:
    _require_power_of_two("size", args.size, 8)
    _require_power_of_two("count", args.count, 1)
    if args.format != "bytes" and args.tail != TAIL_IDENTITY:
        raise ConfigError(
            "image and audio transforms must preserve size; use --tail identity"
        )
    _check_distinct([args.input], [args.out, args.key, args.report])

    streams, meta = _read_streams(args.format, args.input)
    source = _make_source(args)
    pset = generate_set(args.size, args.count, source, args.mode)
    set_bits = source.bits_consumed
    out_streams = []
    traces = []
    for stream in streams:
        out, trace = expand(stream, pset, source, args.tail)
        out_streams.append(out)
        traces.append(trace)
    selection_bits = source.bits_consumed - set_bits

    keyfile.write_bytes_atomic(args.out, _encode_streams(args.format, out_streams, meta))
    keyfile.save_records(args.key, traces)

    before = analysis.analyze(_payload_bytes(streams))
    after = analysis.analyze(_payload_bytes(out_streams))
    accounting = {
        "set_generation": set_bits,
        "selections": selection_bits,
        "total": source.bits_consumed,
    }
    if args.json:
        text = json.dumps(
            {
                "command": "expand",
                "size": args.size,
                "count": args.count,
                "tail": args.tail,
                "format": args.format,
                "before": before.to_dict(),
                "after": after.to_dict(),
                "comparison": [d.to_dict() for d in analysis.compare(before, after)],
                "entropy_bits_consumed": accounting,
            },
            indent=2,
        )
    else:
        text = "\n".join(
            [
                "== input ==",
                analysis.format_report(before),
                "",
                "== output ==",
                analysis.format_report(after),
                "",
                "== improvement ==",
                analysis.format_comparison(analysis.compare(before, after)),
                "",
                f"entropy bits consumed: {accounting['total']} "
                f"(set generation {accounting['set_generation']}, "
                f"selections {accounting['selections']})",
            ]
        )
    _emit(args, text)
    return EXIT_OK


def cmd_invert(args) -> int:
    _check_distinct([args.input, args.key], [args.out])
    traces = keyfile.load_records(args.key)
    streams, meta = _read_streams(args.format, args.input)
    if len(traces) != len(streams):
        raise ConfigError(
            f"key file holds {len(traces)} stream record(s) but the input "
            f"decodes into {len(streams)}"
        )
    restored = [invert(stream, trace) for stream, trace in zip(streams, traces)]
    keyfile.write_bytes_atomic(args.out, _encode_streams(args.format, restored, meta))
    return EXIT_OK


def cmd_analyze(args) -> int:
    streams, _ = _read_streams(args.format, args.input)
    report = analysis.analyze(_payload_bytes(streams))
    text = report.to_json() if args.json else analysis.format_report(report)
    _emit(args, text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sizes = args.sizes or [args.size]
    counts = args.counts or [args.count]
    for n in sizes:
        _require_power_of_two("sizes", n, 8)
    for m in counts:
        _require_power_of_two("counts", m, 1)
    if args.repeat < 1:
        raise ConfigError("--repeat must be at least 1")
    _check_distinct([args.input], [args.report])

    streams, _ = _read_streams(args.format, args.input)
    bits = streams[0]
    input_entropy = analysis.shannon_entropy(_payload_bytes(streams))
    source = _make_source(args)

    rows = []
    for size in sizes:
        for count in counts:
            pset = generate_set(size, count, source, args.mode)
            current = bits
            for pass_index in range(1, args.repeat + 1):
                current, _trace = expand(current, pset, source, args.tail)
                rows.append(
                    {
                        "size": size,
                        "count": count,
                        "pass": pass_index,
                        "entropy": analysis.shannon_entropy(
                            codecs.bits_to_bytes(current)
                        ),
                    }
                )

    if args.json:
        text = json.dumps({"input_entropy": input_entropy, "rows": rows}, indent=2)
    else:
        lines = [
            f"input entropy: {input_entropy:.6f} bits/byte",
            f"{'size':>6} {'count':>6} {'pass':>5} {'entropy':>10}",
        ]
        for row in rows:
            lines.append(
                f"{row['size']:>6} {row['count']:>6} {row['pass']:>5} "
                f"{row['entropy']:>10.6f}"
            )
        text = "\n".join(lines)
    _emit(args, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def _fail(category: str, exc: BaseException, code: int) -> int:
    print(f"entx: error: {category}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except EntropyExhaustedError as exc:
        return _fail("entropy-exhausted", exc, EXIT_ENTROPY)
    except (FormatError, KeyFileError) as exc:
        return _fail("format", exc, EXIT_FORMAT)
    except ValueError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except OSError as exc:
        return _fail("io", exc, EXIT_IO)


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
