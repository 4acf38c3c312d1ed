import hashlib
import struct

import numpy as np
import pytest

from crstego import keystream as ks
from crstego.errors import ConfigError
from crstego.keystream import (
    StegoKey,
    decrypt,
    encrypt,
    key_from_seed,
    keystream_bits,
    keystream_uniform,
    pad_to,
    truncate,
)
from crstego.types import BitMessage

KEY = StegoKey(bytes(range(32)), nonce=5)


def test_block_matches_direct_blake2b():
    person = b"encrypt\0" + struct.pack("<Q", 5)
    want = hashlib.blake2b(struct.pack("<Q", 3), key=bytes(range(32)), digest_size=8,
                           person=person).digest()
    got = np.packbits(keystream_bits(KEY, 3 * 64, 64)).tobytes()
    assert got == want


def test_empty_and_consistency():
    assert keystream_bits(KEY, 0, 0).size == 0
    whole = keystream_bits(KEY, 0, 128)
    assert np.array_equal(np.concatenate([keystream_bits(KEY, 0, 64), keystream_bits(KEY, 64, 64)]), whole)
    assert np.array_equal(keystream_bits(KEY, 37, 50), whole[37:87])


def test_nonces_decorrelate():
    a = keystream_bits(StegoKey(bytes(32), 1), 0, 10_000)
    b = keystream_bits(StegoKey(bytes(32), 2), 0, 10_000)
    assert 0.48 <= (a != b).mean() <= 0.52
    assert 0.48 <= a.mean() <= 0.52


def test_domains_are_separate():
    a = keystream_bits(KEY.for_domain("encrypt"), 0, 256)
    b = keystream_bits(KEY.for_domain("pad"), 0, 256)
    assert not np.array_equal(a, b)


def test_encrypt_zero_message_is_keystream():
    z = BitMessage(np.zeros(300, np.uint8))
    e = encrypt(z, KEY)
    assert e.state == "encrypted"
    assert np.array_equal(e.bits, keystream_bits(KEY.for_domain("encrypt"), 0, 300))


def test_encrypt_xor_table(monkeypatch):
    monkeypatch.setattr(ks, "keystream_bits", lambda key, off, n: np.array([0, 1, 0, 1, 0, 1, 0, 1], np.uint8)[:n])
    e = encrypt(BitMessage([1, 0, 1, 1, 0, 0, 1, 0]), KEY)
    assert e.bits.tolist() == [1, 1, 1, 0, 0, 1, 1, 1]


def test_decrypt_inverts():
    m = BitMessage(np.random.default_rng(0).integers(0, 2, 999).astype(np.uint8))
    back = decrypt(encrypt(m, KEY), KEY)
    assert back == m


def test_pad_examples():
    e = encrypt(BitMessage(np.ones(40, np.uint8)), KEY)
    same = pad_to(e, KEY, 40)
    assert same.state == "encrypted_padded" and np.array_equal(same.bits, e.bits)
    empty = pad_to(BitMessage(np.zeros(0, np.uint8), state="encrypted"), KEY, 128)
    assert len(empty) == 128 and empty.plaintext_len == 0
    p = pad_to(e, KEY, 1000)
    assert truncate(p) == e
    assert np.array_equal(p.bits[40:], keystream_bits(KEY.for_domain("pad"), 0, 960))
    with pytest.raises(ConfigError):
        pad_to(e, KEY, 10)
    with pytest.raises(ConfigError):
        pad_to(BitMessage([1]), KEY, 10)


def test_uniform_range():
    u = keystream_uniform(KEY, 0, 50_000)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01


def test_key_validation_and_seed_derivation():
    with pytest.raises(ConfigError):
        StegoKey(b"short")
    with pytest.raises(ConfigError):
        StegoKey(bytes(32), nonce=-1)
    with pytest.raises(ConfigError):
        StegoKey(bytes(32), stream_domain="other")
    assert key_from_seed(7) == key_from_seed(7)
    assert key_from_seed(7).key != key_from_seed(8).key
    assert key_from_seed(7).stream_domain == "cover"
