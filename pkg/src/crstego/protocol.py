"""Sender and receiver pipelines around the codec.

Both ends derive the same quantized model from the reproduced cover, the
negotiated cost model and payload length. Because a particular pattern fixes
about as many message bits as its own self-information, which fluctuates
around the model entropy, the negotiated model is solved for the payload plus
a safety margin of ``margin_sigmas`` standard deviations of that
self-information (and ``margin_bits`` more). With ``margin_sigmas=0`` and
``margin_bits=0`` the model carries exactly the payload's entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coder import determined_bits, embed, extract, padding_bound
from .errors import CapacityShortfall, ConfigError, Infeasible, LengthMismatch
from .keystream import StegoKey, decrypt, encrypt, pad_to
from .solver import certain_model, expected_distortion, selfinfo_moments, solve_lambda, total_entropy
from .types import BitMessage, CoderConfig, CostMap, Cover, ModificationPattern, ProbabilityModel, distortion

LENGTH_FIELD_BITS = 32


@dataclass(frozen=True)
class Negotiated:
    """Parameters sender and receiver agree on out of band."""

    payload_bits: int
    config: CoderConfig = CoderConfig()
    margin_sigmas: float = 5.0
    margin_bits: int = 32

    def __post_init__(self):
        if self.payload_bits < 0 or self.margin_sigmas < 0 or self.margin_bits < 0:
            raise ConfigError("payload and margins must be nonnegative")


@dataclass(frozen=True)
class EmbedResult:
    stego: Cover
    model: ProbabilityModel
    consumed_bits: int
    determined_bits: int
    distortion: float
    expected_distortion: float
    entropy_bits: float


def entropy_target(costs: CostMap, params: Negotiated) -> float:
    L = params.payload_bits
    if params.margin_sigmas == 0 and params.margin_bits == 0:
        return float(L)
    base = solve_lambda(costs, L, params.config.gamma)
    _, var = selfinfo_moments(base)
    return L + params.margin_sigmas * math.sqrt(var) + params.margin_bits


def negotiate_model(costs: CostMap, params: Negotiated) -> ProbabilityModel:
    if params.payload_bits == 0:
        return certain_model(costs.n, costs.deltas, params.config.gamma)
    target = entropy_target(costs, params)
    capacity = costs.capacity_bits()
    if target >= capacity:
        raise Infeasible(
            f"payload {params.payload_bits} bits plus safety margin needs {target:.1f} bits; "
            f"capacity is {capacity:.1f}")
    return solve_lambda(costs, target, params.config.gamma)


def frame_message(payload: BitMessage) -> BitMessage:
    """Prefix a 32-bit big-endian bit count."""
    n = len(payload)
    if n >= 1 << LENGTH_FIELD_BITS:
        raise ConfigError("message too long for the length field")
    head = np.unpackbits(np.frombuffer(n.to_bytes(4, "big"), dtype=np.uint8))
    return BitMessage(np.concatenate([head, payload.bits]))


def unframe_message(bits: BitMessage) -> BitMessage:
    b = bits.bits
    if b.size < LENGTH_FIELD_BITS:
        raise ConfigError("message shorter than its length field")
    n = int.from_bytes(np.packbits(b[:LENGTH_FIELD_BITS]).tobytes(), "big")
    if n > b.size - LENGTH_FIELD_BITS:
        raise CapacityShortfall(f"length field claims {n} bits, only "
                                f"{b.size - LENGTH_FIELD_BITS} were extracted")
    return BitMessage(b[LENGTH_FIELD_BITS:LENGTH_FIELD_BITS + n])


def embed_message(cover: Cover, costs: CostMap, plaintext: BitMessage, key: StegoKey,
                  params: Negotiated, backend=None) -> EmbedResult:
    """Encrypt, pad and embed; verifies the pattern fixes every payload bit."""
    if len(costs) != len(cover):
        raise LengthMismatch("cost map and cover lengths differ")
    L = params.payload_bits
    if len(plaintext) != L:
        raise ConfigError(f"plaintext has {len(plaintext)} bits, negotiated payload is {L}")
    model = negotiate_model(costs, params)
    if L == 0:
        msg = BitMessage(np.zeros(0, np.uint8), state="encrypted")
        stego, consumed = embed(cover, model, msg, params.config, backend)
        fixed = 0
    else:
        enc = encrypt(plaintext, key)
        padded = pad_to(enc, key, max(L, padding_bound(model, params.config)))
        stego, consumed = embed(cover, model, padded, params.config, backend)
        pattern = ModificationPattern(stego.samples - cover.samples, model.deltas)
        fixed = determined_bits(model, pattern.symbols(), params.config, backend)
        if fixed < L:
            raise CapacityShortfall(
                f"pattern fixes {fixed} bits, payload needs {L}; raise the safety margin")
    pattern = ModificationPattern(stego.samples - cover.samples, model.deltas)
    return EmbedResult(stego, model, consumed, fixed, distortion(costs, pattern),
                       expected_distortion(model, costs), total_entropy(model))


def extract_message(stego: Cover, cover: Cover, costs: CostMap, key: StegoKey,
                    params: Negotiated, backend=None) -> BitMessage:
    model = negotiate_model(costs, params)
    enc = extract(stego, cover, model, params.payload_bits, params.config, backend)
    return decrypt(enc, key)
