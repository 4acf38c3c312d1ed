"""Cover-reproducible steganography: Gibbs-optimal modification models realized
by arithmetic coding, with syndrome-trellis and distortion-sort baselines."""

from ._backend import active as active_backend, set_backend
from .baselines import (
    StcSpec,
    brute_force_coset_leader,
    simulate_optimal,
    sort_expected_distortion,
    stc_embed,
    stc_extract,
)
from .bench import BenchConfig, TrialReport, empirical_conformance, rate_distortion_bench, two_sample_t
from .coder import CoderState, embed, extract, interval_step
from .costs import cost_model, load_costmap, residual_cost_audio, save_costmap, texture_cost_image
from .covers import GeneratorSpec, load_cover, store_cover, synth_cover
from .errors import CRSError
from .keystream import StegoKey, decrypt, encrypt, keystream_bits, pad_to, truncate
from .protocol import Negotiated, embed_message, extract_message
from .solver import PayloadSpec, expected_distortion, solve_lambda
from .types import (
    BitMessage,
    CoderConfig,
    CostMap,
    Cover,
    ModificationPattern,
    ProbabilityModel,
    apply_pattern,
    diff_pattern,
    distortion,
)

__version__ = "0.1.0"


__all__ = [
    "active_backend",
    "set_backend",
    "StcSpec",
    "brute_force_coset_leader",
    "simulate_optimal",
    "sort_expected_distortion",
    "stc_embed",
    "stc_extract",
    "BenchConfig",
    "TrialReport",
    "empirical_conformance",
    "rate_distortion_bench",
    "two_sample_t",
    "CoderState",
    "embed",
    "extract",
    "interval_step",
    "cost_model",
    "load_costmap",
    "residual_cost_audio",
    "save_costmap",
    "texture_cost_image",
    "GeneratorSpec",
    "load_cover",
    "store_cover",
    "synth_cover",
    "CRSError",
    "StegoKey",
    "decrypt",
    "encrypt",
    "keystream_bits",
    "pad_to",
    "truncate",
    "Negotiated",
    "embed_message",
    "extract_message",
    "PayloadSpec",
    "expected_distortion",
    "solve_lambda",
    "BitMessage",
    "CoderConfig",
    "CostMap",
    "Cover",
    "ModificationPattern",
    "ProbabilityModel",
    "apply_pattern",
    "diff_pattern",
    "distortion",
    "__version__",
]
