"""Keyed, seekable pseudorandom bit streams.

Each 64-bit block is ``BLAKE2b(counter)`` keyed with the 256-bit secret and
personalized with the stream domain and nonce, so any block can be produced
independently of its predecessors.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .types import BitMessage

DOMAINS = ("encrypt", "pad", "sample", "cover")
BLOCK_BITS = 64


@dataclass(frozen=True)
class StegoKey:
    key: bytes
    nonce: int = 0
    stream_domain: str = "encrypt"

    def __post_init__(self):
        if len(self.key) != 32:
            raise ConfigError("key must be exactly 32 bytes")
        if not 0 <= self.nonce < 1 << 64:
            raise ConfigError("nonce must fit in 64 bits")
        if self.stream_domain not in DOMAINS:
            raise ConfigError(f"unknown stream domain {self.stream_domain!r}")

    def for_domain(self, domain: str) -> "StegoKey":
        return StegoKey(self.key, self.nonce, domain)

    def _hasher(self):
        person = self.stream_domain.encode().ljust(8, b"\0") + struct.pack("<Q", self.nonce)
        return hashlib.blake2b(key=self.key, digest_size=8, person=person)


def key_from_seed(seed: int) -> StegoKey:
    """Derive the generator key that a 64-bit cover seed stands for."""
    if not 0 <= seed < 1 << 64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    k = hashlib.blake2b(struct.pack("<Q", seed), digest_size=32, person=b"crs-seed").digest()
    return StegoKey(k, 0, "cover")


def keystream_blocks(key: StegoKey, first_block: int, count: int) -> bytes:
    """``count`` consecutive 8-byte blocks starting at block index ``first_block``."""
    base = key._hasher()
    out = bytearray(8 * count)
    pack = struct.Struct("<Q").pack
    for i in range(count):
        h = base.copy()
        h.update(pack(first_block + i))
        out[8 * i: 8 * i + 8] = h.digest()
    return bytes(out)


def keystream_bits(key: StegoKey, offset: int, count: int) -> np.ndarray:
    """Bits ``offset .. offset+count`` of the stream, MSB-first within each block."""
    if count < 0 or offset < 0:
        raise ConfigError("offset and count must be nonnegative")
    if count == 0:
        return np.zeros(0, dtype=np.uint8)
    first = offset // BLOCK_BITS
    last = (offset + count - 1) // BLOCK_BITS
    raw = np.frombuffer(keystream_blocks(key, first, last - first + 1), dtype=np.uint8)
    bits = np.unpackbits(raw)
    start = offset - first * BLOCK_BITS
    return bits[start: start + count].copy()


def keystream_uint64(key: StegoKey, first_block: int, count: int) -> np.ndarray:
    return np.frombuffer(keystream_blocks(key, first_block, count), dtype=">u8").astype(np.uint64)


def keystream_uniform(key: StegoKey, first_block: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) with 53 random bits each, one block per value."""
    w = keystream_uint64(key, first_block, count)
    return (w >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def encrypt(message: BitMessage, key: StegoKey) -> BitMessage:
    """XOR with the encrypt-domain stream; applying it twice is the identity."""
    s = keystream_bits(key.for_domain("encrypt"), 0, len(message))
    bits = np.bitwise_xor(message.bits, s)
    if message.state == "plaintext":
        return BitMessage(bits, state="encrypted")
    if message.state == "encrypted":
        return BitMessage(bits, state="plaintext")
    raise ConfigError("cannot re-encrypt a padded message")


decrypt = encrypt


def pad_to(message: BitMessage, key: StegoKey, total_bits: int) -> BitMessage:
    """Append pad-domain keystream bits so the message is ``total_bits`` long."""
    if message.state != "encrypted":
        raise ConfigError("only encrypted messages can be padded")
    L = len(message)
    if total_bits < L:
        raise ConfigError(f"total_bits {total_bits} < message length {L}")
    pad = keystream_bits(key.for_domain("pad"), 0, total_bits - L)
    return BitMessage(np.concatenate([message.bits, pad]), plaintext_len=L,
                      state="encrypted_padded")


def truncate(message: BitMessage) -> BitMessage:
    return BitMessage(message.head(), state="encrypted")
