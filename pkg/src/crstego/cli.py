"""Command-line entry point.

Exit codes: 0 ok, 2 configuration, 3 I/O, 4 infeasible payload, 5 codec
failure, 6 desynchronized receiver (wrong seed, key or parameters).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import bench
from .costs import COST_MODELS, cost_model, save_costmap
from .covers import FORMATS, GeneratorSpec, default_format, infer_format, load_cover, store_cover, synth_cover
from .errors import ConfigError, CRSError, StorageError, UnsupportedFormat
from .keystream import StegoKey
from .protocol import LENGTH_FIELD_BITS, Negotiated, embed_message, extract_message, frame_message, unframe_message
from .types import BitMessage, CoderConfig


def _nonce(text: str) -> int:
    try:
        v = int(text, 16) if text.lower().startswith("0x") else int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal or 0x-hex integer: {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("nonce must fit in 64 bits")
    return v


def _read(path) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from None


def _write(path, data: bytes):
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from None


def _load_spec(path) -> GeneratorSpec:
    return GeneratorSpec.from_json(_read(path).decode("utf-8", errors="replace"))


def _load_key(path, nonce) -> StegoKey:
    raw = _read(path)
    if len(raw) != 32:
        raise ConfigError(f"key file must hold exactly 32 bytes, found {len(raw)}")
    return StegoKey(raw, nonce)


def _source_cover(args):
    if args.spec:
        return synth_cover(_load_spec(args.spec))
    return load_cover(args.cover, args.cover_format)


def _out_format(path, cover, fmt):
    if fmt:
        return fmt
    try:
        return infer_format(path)
    except UnsupportedFormat:
        return default_format(cover)


def _params(args) -> Negotiated:
    return Negotiated(args.payload_bits, CoderConfig(args.beta, args.gamma),
                      args.margin_sigmas, args.margin_bits)


def cmd_gen_cover(args) -> int:
    cover = synth_cover(_load_spec(args.spec))
    fmt = _out_format(args.out, cover, args.format)
    store_cover(cover, args.out, fmt)
    print(hashlib.sha256(_read(args.out)).hexdigest())
    return 0


def cmd_costs(args) -> int:
    cover = _source_cover(args)
    try:
        save_costmap(cost_model(args.cost_model, cover), args.out)
    except OSError as e:
        raise StorageError(f"cannot write {args.out}: {e}") from None
    return 0


def cmd_embed(args) -> int:
    cover = _source_cover(args)
    key = _load_key(args.key, args.nonce)
    L = args.payload_bits
    data = _read(args.message)
    if args.embed_length:
        if L < LENGTH_FIELD_BITS:
            raise ConfigError(f"--embed-length needs a payload of at least {LENGTH_FIELD_BITS} bits")
        framed = frame_message(BitMessage.from_bytes(data))
        if len(framed) > L:
            raise ConfigError(f"message needs {len(framed)} bits with its length field, payload is {L}")
        bits = np.concatenate([framed.bits, np.zeros(L - len(framed), np.uint8)])
        plaintext = BitMessage(bits)
    else:
        if len(data) * 8 < L:
            raise ConfigError(f"message file holds {len(data)} bytes, need {(L + 7) // 8}")
        plaintext = BitMessage.from_bytes(data, L)
    costs = cost_model(args.cost_model, cover)
    res = embed_message(cover, costs, plaintext, key, _params(args), args.backend)
    store_cover(res.stego, args.out, _out_format(args.out, cover, args.format))
    print(f"consumed_bits={res.consumed_bits} determined_bits={res.determined_bits} "
          f"distortion={res.distortion:.6f} expected_distortion={res.expected_distortion:.6f} "
          f"entropy_bits={res.entropy_bits:.3f}")
    return 0


def cmd_extract(args) -> int:
    cover = _source_cover(args)
    loaded = load_cover(args.stego, args.format)
    if len(loaded) != len(cover):
        raise ConfigError(f"stego has {len(loaded)} samples, cover has {len(cover)}")
    # the receiver's cover fixes kind and range; the file supplies samples only
    stego = cover.with_samples(loaded.samples)
    key = _load_key(args.key, args.nonce)
    costs = cost_model(args.cost_model, cover)
    msg = extract_message(stego, cover, costs, key, _params(args), args.backend)
    if args.embed_length:
        msg = unframe_message(msg)
    _write(args.out, msg.to_bytes())
    return 0


def cmd_bench(args) -> int:
    if args.config:
        try:
            d = json.loads(_read(args.config))
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed bench config: {e}") from None
        config = bench.BenchConfig.from_dict(d)
    else:
        config = bench.default_config()
    reports, summary = bench.rate_distortion_bench(config)
    try:
        paths = bench.write_reports(args.out_dir, config, reports, summary)
    except OSError as e:
        raise StorageError(f"cannot write reports: {e}") from None
    for p in paths.values():
        print(p)
    return 0


def _add_cover_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--spec", help="generator spec JSON; the cover is synthesized from it")
    g.add_argument("--cover", help="cover file (PGM or raw PCM)")
    p.add_argument("--cover-format", choices=FORMATS,
                   help="format of --cover (default: from its extension)")


def _add_negotiated(p):
    p.add_argument("--key", required=True, help="file holding the 32-byte secret key")
    p.add_argument("--nonce", type=_nonce, default=0, help="64-bit nonce, decimal or 0x-hex (default 0)")
    p.add_argument("--payload-bits", type=int, required=True,
                   help="negotiated payload length L in bits")
    p.add_argument("--cost-model", choices=COST_MODELS, default="auto",
                   help="cost model (default auto: texture for images, residual for audio)")
    p.add_argument("--embed-length", action="store_true",
                   help="carry a 32-bit length prefix inside the L payload bits")
    p.add_argument("--beta", type=int, default=32, help="coder interval precision in bits (default 32)")
    p.add_argument("--gamma", type=int, default=16, help="probability quantization bits (default 16)")
    p.add_argument("--margin-sigmas", type=float, default=5.0,
                   help="safety margin in standard deviations of pattern self-information (default 5)")
    p.add_argument("--margin-bits", type=int, default=32,
                   help="additional fixed safety margin in bits (default 32)")
    p.add_argument("--backend", choices=("python", "cython"), default=None,
                   help="kernel backend (default: compiled when available)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crstego", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-cover", help="synthesize a cover from a generator spec")
    p.add_argument("--spec", required=True, help="generator spec JSON file")
    p.add_argument("--out", required=True, help="output cover path")
    p.add_argument("--format", choices=FORMATS, help="output format (default: from extension)")
    p.set_defaults(func=cmd_gen_cover)

    p = sub.add_parser("costs", help="export the cost map of a cover")
    _add_cover_source(p)
    p.add_argument("--cost-model", choices=COST_MODELS, default="auto", help="cost model")
    p.add_argument("--out", required=True, help="output cost-map path")
    p.set_defaults(func=cmd_costs)

    p = sub.add_parser("embed", help="hide a message in a cover")
    _add_cover_source(p)
    p.add_argument("--message", required=True, help="message file; its first L bits are sent")
    _add_negotiated(p)
    p.add_argument("--out", required=True, help="stego output path")
    p.add_argument("--format", choices=FORMATS, help="stego format (default: from extension or cover)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover a message from a stego file")
    p.add_argument("--stego", required=True, help="stego file")
    p.add_argument("--format", choices=FORMATS, help="stego format (default: from extension)")
    _add_cover_source(p)
    _add_negotiated(p)
    p.add_argument("--out", required=True, help="output message path (ceil(L/8) bytes)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("bench", help="run the rate-distortion sweep")
    p.add_argument("--config", help="bench config JSON (default: bundled config)")
    p.add_argument("--out-dir", required=True, help="directory for trials.csv, summary.json, config.json")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        return args.func(args)
    except CRSError as e:
        print(f"crstego: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"crstego: I/O error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
