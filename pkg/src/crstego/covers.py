"""Reproducible cover acquisition: a seeded procedural generator plus file I/O.

Formats: binary PGM (P5, maxval 255) for images and raw little-endian signed
mono PCM (8 or 16 bit) for audio, with the sample rate in a JSON sidecar
``<path>.json`` holding ``{"rate_hz": int}``.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InvalidSpec, ParseError, StorageError, UnsupportedFormat
from .keystream import key_from_seed, keystream_blocks
from .types import AudioKind, Cover, ImageKind

FORMATS = ("pgm", "pcm16", "pcm8")
BOX_RADIUS = 3


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    kind: str
    width: Optional[int] = None
    height: Optional[int] = None
    n: Optional[int] = None
    sample_rate_hz: Optional[int] = None
    smoothness: float = 0.5
    bit_depth: int = 8

    def __post_init__(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed < 1 << 64:
            raise InvalidSpec("seed: must be an integer in [0, 2**64)")
        if self.kind == "image":
            for f in ("width", "height"):
                v = getattr(self, f)
                if not isinstance(v, int) or v < 1:
                    raise InvalidSpec(f"{f}: image specs need a positive integer")
        elif self.kind == "audio":
            if not isinstance(self.n, int) or self.n < 1:
                raise InvalidSpec("n: audio specs need a positive integer sample count")
            if not isinstance(self.sample_rate_hz, int) or self.sample_rate_hz < 1:
                raise InvalidSpec("sample_rate_hz: audio specs need a positive integer")
        else:
            raise InvalidSpec(f"kind: expected 'image' or 'audio', got {self.kind!r}")
        if not isinstance(self.smoothness, (int, float)) or not 0 <= self.smoothness <= 1:
            raise InvalidSpec("smoothness: must be a number in [0, 1]")
        if self.bit_depth not in (8, 16):
            raise InvalidSpec("bit_depth: must be 8 or 16")

    @property
    def length(self) -> int:
        return self.width * self.height if self.kind == "image" else self.n

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "GeneratorSpec":
        if not isinstance(d, dict):
            raise InvalidSpec("spec must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"{sorted(extra)[0]}: unknown field")
        for f in ("seed", "kind"):
            if f not in d:
                raise InvalidSpec(f"{f}: required field missing")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidSpec(f"malformed JSON: {e}") from None
        return cls.from_dict(d)


def _box_sum(a, axis):
    r = BOX_RADIUS
    pad = [(0, 0)] * a.ndim
    pad[axis] = (r, r)
    p = np.pad(a, pad, mode="symmetric")
    c = np.cumsum(p, axis=axis)
    zero = np.zeros_like(np.take(c, [0], axis=axis))
    c = np.concatenate([zero, c], axis=axis)
    m = a.shape[axis]
    return np.take(c, np.arange(2 * r + 1, 2 * r + 1 + m), axis=axis) - \
        np.take(c, np.arange(0, m), axis=axis)


def synth_cover(spec: GeneratorSpec) -> Cover:
    """Deterministic cover from a generator spec.

    Keystream noise, uniform over the value range, is blended with its
    separable box-smoothed version; ``smoothness`` is the blend weight in
    1/256 steps. All arithmetic is integer.
    """
    n = spec.length
    b = spec.bit_depth
    raw = np.frombuffer(keystream_blocks(key_from_seed(spec.seed), 0, (n + 3) // 4),
                        dtype="<u2")[:n].astype(np.int64)
    noise = raw >> (16 - b)
    taps = 2 * BOX_RADIUS + 1
    if spec.kind == "image":
        noise = noise.reshape(spec.height, spec.width)
        smooth = _box_sum(_box_sum(noise, 1), 0) // (taps * taps)
    else:
        smooth = _box_sum(noise, 0) // taps
    alpha = int(round(spec.smoothness * 256))
    x = (((256 - alpha) * noise + alpha * smooth + 128) >> 8).ravel()
    if spec.kind == "image":
        return Cover(x, 0, (1 << b) - 1, ImageKind(spec.width, spec.height))
    x = x - (1 << (b - 1))
    return Cover(x, -(1 << (b - 1)), (1 << (b - 1)) - 1, AudioKind(spec.sample_rate_hz))


def infer_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    mapping = {".pgm": "pgm", ".pcm": "pcm16", ".pcm16": "pcm16", ".s16": "pcm16",
               ".pcm8": "pcm8", ".s8": "pcm8"}
    if ext not in mapping:
        raise UnsupportedFormat(f"cannot infer cover format from extension {ext!r}")
    return mapping[ext]


def default_format(cover: Cover) -> str:
    if isinstance(cover.kind, ImageKind):
        return "pgm"
    return "pcm8" if cover.value_max <= 127 else "pcm16"


def _pgm_header(data: bytes):
    fields = ("magic", "width", "height", "maxval")
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < 4:
        while i < n and (data[i:i + 1].isspace() or data[i:i + 1] == b"#"):
            if data[i:i + 1] == b"#":
                while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                    i += 1
            else:
                i += 1
        if i >= n:
            raise ParseError(f"PGM header truncated: missing {fields[len(tokens)]}", i)
        start = i
        while i < n and not data[i:i + 1].isspace() and data[i:i + 1] != b"#":
            i += 1
        tokens.append((data[start:i], start))
    if i >= n or not data[i:i + 1].isspace():
        raise ParseError("PGM header truncated: missing whitespace after maxval", i)
    magic, off = tokens[0]
    if magic != b"P5":
        raise UnsupportedFormat(f"only binary PGM (P5) is supported, got {magic!r}")
    vals = []
    for (tok, off), name in zip(tokens[1:], fields[1:]):
        if not tok.isdigit():
            raise ParseError(f"PGM {name} is not a number: {tok!r}", off)
        vals.append(int(tok))
    return vals, i + 1


def load_cover(path, fmt: Optional[str] = None) -> Cover:
    fmt = fmt or infer_format(path)
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unknown cover format {fmt!r}")
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from None
    if fmt == "pgm":
        (w, h, maxval), off = _pgm_header(data)
        if maxval != 255:
            raise UnsupportedFormat(f"only maxval 255 is supported, got {maxval}")
        if w < 1 or h < 1:
            raise ParseError("PGM dimensions must be positive", off)
        if len(data) - off != w * h:
            raise ParseError(f"PGM raster holds {len(data) - off} bytes, expected {w * h}",
                             len(data))
        px = np.frombuffer(data, dtype=np.uint8, offset=off)
        return Cover(px, 0, 255, ImageKind(w, h))
    width = 2 if fmt == "pcm16" else 1
    if len(data) % width:
        raise ParseError(f"{fmt} file has odd byte length {len(data)}", len(data) - 1)
    if not data:
        raise ParseError("empty PCM file", 0)
    x = np.frombuffer(data, dtype="<i2" if width == 2 else "i1")
    rate = 0
    side = str(path) + ".json"
    if os.path.exists(side):
        try:
            with open(side) as f:
                rate = int(json.load(f)["rate_hz"])
        except (ValueError, KeyError, TypeError) as e:
            raise ParseError(f"bad sidecar {side}: {e}", 0) from None
    lo, hi = (-32768, 32767) if width == 2 else (-128, 127)
    return Cover(x, lo, hi, AudioKind(rate))


def encode_cover(cover: Cover, fmt: Optional[str] = None) -> bytes:
    fmt = fmt or default_format(cover)
    s = cover.samples
    if fmt == "pgm":
        if not isinstance(cover.kind, ImageKind):
            raise UnsupportedFormat("PGM needs an image cover")
        if s.min() < 0 or s.max() > 255:
            raise UnsupportedFormat("PGM output supports 8-bit samples only")
        header = b"P5\n%d %d\n255\n" % (cover.kind.width, cover.kind.height)
        return header + s.astype(np.uint8).tobytes()
    if fmt == "pcm16":
        if s.min() < -32768 or s.max() > 32767:
            raise UnsupportedFormat("samples exceed 16-bit range")
        return s.astype("<i2").tobytes()
    if fmt == "pcm8":
        if s.min() < -128 or s.max() > 127:
            raise UnsupportedFormat("samples exceed signed 8-bit range")
        return s.astype("i1").tobytes()
    raise UnsupportedFormat(f"unknown cover format {fmt!r}")


def store_cover(cover: Cover, path, fmt: Optional[str] = None) -> None:
    fmt = fmt or infer_format(path)
    data = encode_cover(cover, fmt)
    try:
        with open(path, "wb") as f:
            f.write(data)
        if fmt != "pgm" and isinstance(cover.kind, AudioKind):
            with open(str(path) + ".json", "w") as f:
                json.dump({"rate_hz": cover.kind.sample_rate_hz}, f)
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from None
