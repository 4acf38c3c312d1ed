"""Rate-distortion sweeps, conformance statistics and the pooled t-test."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from . import baselines
from .baselines import SORT, SORT_EVEN, sample_symbols, simulate_optimal, sort_full_probs
from .coder import embed, padding_bound
from .costs import COST_MODELS, cost_model
from .covers import GeneratorSpec, synth_cover
from .errors import (
    CodecError,
    ConfigError,
    DegenerateVariance,
    EmptyInput,
    Infeasible,
    SpecInvalid,
)
from .keystream import StegoKey, encrypt, keystream_bits, keystream_uniform, pad_to
from .solver import expected_distortion, solve_lambda
from .types import (
    BitMessage,
    CoderConfig,
    ModificationPattern,
    ProbabilityModel,
    apply_pattern,
    diff_pattern,
    distortion,
)

METHODS = ("aac", "stc", "simulated", "sort", "sort_even")
CSV_HEADER = ("payload", "method", "trial", "distortion", "consumed_bits", "kl", "seed", "nonce")
STATISTIC_LABEL = ("two-sample pooled t on realized distortion (aac vs stc); "
                   "not a detection-error statistic")


@dataclass
class TrialReport:
    payload_bits_per_element: float
    method: str
    trial: int
    realized_distortion: float
    expected_distortion_bound: float
    consumed_bits: int
    kl_to_optimal: float
    per_delta_counts: list = field(default_factory=list)
    seed: int = 0
    nonce: int = 0

    def __post_init__(self):
        if not self.realized_distortion >= 0 or not self.kl_to_optimal >= 0:
            raise ValueError("distortion and KL must be nonnegative")


@dataclass(frozen=True)
class Conformance:
    z: np.ndarray          # (n, k) z-scores, 0 where variance vanishes and counts agree
    kl: np.ndarray         # per element, sum p log2(p / p_hat)
    kl_reverse: np.ndarray  # per element, sum p_hat log2(p_hat / p)
    counts: np.ndarray


def empirical_conformance(patterns, model: ProbabilityModel, quantized: bool = True) -> Conformance:
    """Compare per-element delta frequencies over many patterns with the model.

    ``p_hat`` is add-one smoothed over the model's support, so elements whose
    model puts all mass on one delta score zero divergence when the patterns
    agree.
    """
    pats = list(patterns)
    if not pats:
        raise EmptyInput("need at least one pattern")
    n, k = model.probs.shape
    counts = np.zeros((n, k), dtype=np.int64)
    rows = np.arange(n)
    for p in pats:
        if len(p) != n:
            raise EmptyInput("pattern length does not match the model")
        np.add.at(counts, (rows, p.symbols()), 1)
    N = len(pats)
    pi = model.quantized_probs() if quantized else model.probs
    var = N * pi * (1 - pi)
    dev = counts - N * pi
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, dev / np.sqrt(np.where(var > 0, var, 1)),
                     np.where(dev == 0, 0.0, np.inf * np.sign(dev)))
    support = pi > 0
    phat = np.where(support, counts + 1, 0) / (N + support.sum(axis=1, keepdims=True))
    off = counts * ~support
    with np.errstate(divide="ignore", invalid="ignore"):
        fwd = np.where(support, pi * np.log2(pi / phat), 0.0).sum(axis=1)
        rev = np.where(support, phat * np.log2(phat / np.where(support, pi, 1)), 0.0).sum(axis=1)
    rev = np.where(off.any(axis=1), np.inf, rev)
    return Conformance(z, fwd, rev, counts)


def two_sample_t(a, b) -> float:
    """Pooled-variance two-sample t statistic of ``mean(a) - mean(b)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise ConfigError("each sample needs at least two values")
    m1, m2 = a.mean(), b.mean()
    sw = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / (n1 + n2 - 2)
    diff = m1 - m2
    if sw == 0:
        if diff == 0:
            return 0.0
        raise DegenerateVariance(f"zero pooled variance with mean difference {diff}; t is infinite")
    return float(diff / math.sqrt(sw * (1.0 / n1 + 1.0 / n2)))


_T_TABLE = None


def t_critical(df: int) -> float:
    """One-sided 5% critical value of Student's t with ``df`` degrees of freedom."""
    global _T_TABLE
    if df < 1:
        raise ConfigError("degrees of freedom must be positive")
    if _T_TABLE is None:
        _T_TABLE = json.loads(resources.files("crstego").joinpath("data/t_table.json").read_text())
    if df <= 200:
        return _T_TABLE["t"][str(df)]
    return _T_TABLE["large_df"]


# ---------------------------------------------------------------- sweep config

@dataclass(frozen=True)
class BenchConfig:
    payloads: tuple = (0.1, 0.2, 0.3, 0.4, 0.5)
    methods: tuple = ("aac", "stc", "simulated", "sort", "sort_even")
    trials: int = 10
    master_seed: int = 1
    cover: dict = field(default_factory=lambda: {"kind": "image", "width": 128, "height": 128})
    cost_model: str = "auto"
    stc_h: int = 7
    beta: int = 32
    gamma: int = 16

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if not self.methods:
            raise ConfigError("methods: need at least one")
        if not self.payloads or any(not (isinstance(p, (int, float)) and p > 0) for p in self.payloads):
            raise ConfigError("payloads: need positive bits-per-element values")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials: need a positive integer")
        if self.cost_model not in COST_MODELS:
            raise ConfigError(f"unknown cost model {self.cost_model!r}")
        if not isinstance(self.cover, dict) or "seed" in self.cover:
            raise ConfigError("cover: generator fields without a seed (seeds are per trial)")
        self.cover_spec(0)
        CoderConfig(self.beta, self.gamma)

    def cover_spec(self, seed: int) -> GeneratorSpec:
        return GeneratorSpec.from_dict({**self.cover, "seed": seed})

    def to_dict(self):
        d = asdict(self)
        d["payloads"] = list(self.payloads)
        d["methods"] = list(self.methods)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @classmethod
    def from_dict(cls, d) -> "BenchConfig":
        if not isinstance(d, dict):
            raise ConfigError("bench config must be a JSON object")
        extra = set(d) - set(cls.__dataclass_fields__)
        if extra:
            raise ConfigError(f"{sorted(extra)[0]}: unknown config field")
        d = dict(d)
        for f in ("payloads", "methods"):
            if f in d:
                d[f] = tuple(d[f])
        return cls(**d)


def default_config() -> BenchConfig:
    text = resources.files("crstego").joinpath("data/default_bench.json").read_text()
    return BenchConfig.from_dict(json.loads(text))


def trial_seed(master_seed: int, payload_index: int, trial: int) -> int:
    h = hashlib.blake2b(struct.pack("<QQQ", master_seed, payload_index, trial),
                        digest_size=8, person=b"crs-bench")
    return int.from_bytes(h.digest(), "little")


# ---------------------------------------------------------------- per-method runs

def _trial_key(seed: int, nonce: int) -> StegoKey:
    k = hashlib.blake2b(struct.pack("<Q", seed), digest_size=32, person=b"crs-bkey").digest()
    return StegoKey(k, nonce)


def pooled_kl(model_probs, pattern: ModificationPattern) -> float:
    """KL(mean model distribution || add-one smoothed realized histogram), bits."""
    p = np.asarray(model_probs).mean(axis=0)
    counts = np.bincount(pattern.symbols(), minlength=p.size)
    q = (counts + 1) / (counts.sum() + p.size)
    nz = p > 0
    return float(max(0.0, (p[nz] * np.log2(p[nz] / q[nz])).sum()))


def _aac(cover, costs, L, key, config):
    cfg = CoderConfig(config.beta, config.gamma)
    model = solve_lambda(costs, L, cfg.gamma)
    bits = keystream_bits(key.for_domain("sample"), 0, L)
    enc = encrypt(BitMessage(bits), key)
    padded = pad_to(enc, key, max(L, padding_bound(model, cfg)))
    stego, consumed = embed(cover, model, padded, cfg)
    return stego, consumed


def _stc(cover, costs, L, key, config):
    bits = keystream_bits(key.for_domain("sample"), 0, L)
    try:
        stego, _ = baselines.stc_embed_cover(cover, costs, bits, config.stc_h)
    except SpecInvalid as e:
        raise Infeasible(f"STC cannot carry this payload: {e}") from None
    return stego, L


def _sort(strategy):
    def run(cover, costs, L, key, config):
        probs = sort_full_probs(costs, L, strategy)
        u = keystream_uniform(key.for_domain("sample"), 0, costs.n)
        idx = sample_symbols(probs, u)
        deltas = np.asarray(costs.deltas, dtype=np.int64)[idx]
        return apply_pattern(cover, ModificationPattern(deltas, costs.deltas)), L
    return run


def _simulated(cover, costs, L, key, config):
    model = solve_lambda(costs, L, config.gamma)
    return simulate_optimal(cover, model, key), L


RUNNERS = {"aac": _aac, "stc": _stc, "simulated": _simulated,
           "sort": _sort(SORT), "sort_even": _sort(SORT_EVEN)}


def run_trial(config: BenchConfig, payload_index: int, trial: int):
    """All methods on one seeded cover. Returns ``(reports, failures)``."""
    payload = config.payloads[payload_index]
    seed = trial_seed(config.master_seed, payload_index, trial)
    nonce = trial
    cover = synth_cover(config.cover_spec(seed))
    costs = cost_model(config.cost_model, cover)
    n = len(cover)
    L = int(round(payload * n))
    key = _trial_key(seed, nonce)
    reports, failures = [], {}
    try:
        opt = solve_lambda(costs, L, config.gamma)
        bound = expected_distortion(opt, costs)
    except Infeasible as e:
        return reports, {m: str(e) for m in config.methods}
    for m in config.methods:
        try:
            stego, consumed = RUNNERS[m](cover, costs, L, key, config)
        except (Infeasible, CodecError) as e:
            failures[m] = f"{type(e).__name__}: {e}"
            continue
        pat = diff_pattern(stego, cover, costs.deltas)
        reports.append(TrialReport(
            payload, m, trial, distortion(costs, pat), bound, int(consumed),
            pooled_kl(opt.probs, pat),
            np.bincount(pat.symbols(), minlength=len(costs.deltas)).tolist(),
            seed, nonce))
    return reports, failures


def _job(args):
    return run_trial(*args)


def _workers():
    v = os.environ.get("CRS_THREADS", "1")
    try:
        w = int(v)
    except ValueError:
        raise ConfigError(f"CRS_THREADS must be an integer, got {v!r}") from None
    if w < 1:
        raise ConfigError("CRS_THREADS must be at least 1")
    return w


def rate_distortion_bench(config: BenchConfig, workers=None):
    """Run the sweep; returns ``(reports, summary)`` in a fixed order."""
    jobs = [(config, pi, t) for pi in range(len(config.payloads)) for t in range(config.trials)]
    workers = workers or _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    reports = []
    failures = {}
    for (cfg, pi, t), (reps, fails) in zip(jobs, results):
        reports.extend(reps)
        for m, msg in fails.items():
            failures.setdefault((pi, m), msg)
    return reports, summarize(config, reports, failures)


def summarize(config: BenchConfig, reports, failures=None):
    failures = failures or {}
    cells = {}
    for pi, p in enumerate(config.payloads):
        row = {}
        for m in config.methods:
            vals = np.array([r.realized_distortion for r in reports
                             if r.payload_bits_per_element == p and r.method == m])
            cell = {"trials": int(vals.size)}
            if (pi, m) in failures:
                cell["status"] = "infeasible"
                cell["reason"] = failures[(pi, m)]
            else:
                cell["status"] = "ok"
            if vals.size:
                cell["mean"] = float(vals.mean())
                cell["std"] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                bounds = [r.expected_distortion_bound for r in reports
                          if r.payload_bits_per_element == p and r.method == m]
                cell["expected_distortion_bound"] = float(np.mean(bounds))
            row[m] = cell
        a = [r.realized_distortion for r in reports if r.payload_bits_per_element == p and r.method == "aac"]
        s = [r.realized_distortion for r in reports if r.payload_bits_per_element == p and r.method == "stc"]
        if len(a) >= 2 and len(s) >= 2:
            try:
                t = two_sample_t(s, a)
            except DegenerateVariance:
                t = math.inf if np.mean(s) > np.mean(a) else -math.inf
            crit = t_critical(len(a) + len(s) - 2)
            row["t_stc_minus_aac"] = {"t": t, "t_critical_0.05": crit,
                                      "significant": bool(t > crit)}
        cells[repr(float(p))] = row
    return {
        "config_sha256": config.digest(),
        "statistic": STATISTIC_LABEL,
        "cells": cells,
    }


def report_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow([repr(float(r.payload_bits_per_element)), r.method, r.trial,
                    repr(float(r.realized_distortion)), r.consumed_bits,
                    repr(float(r.kl_to_optimal)), r.seed, r.nonce])
    return buf.getvalue()


def write_reports(out_dir, config: BenchConfig, reports, summary):
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for name, text in (("trials.csv", report_csv(reports)),
                       ("summary.json", json.dumps(summary, sort_keys=True, indent=1) + "\n"),
                       ("config.json", config.to_json() + "\n")):
        path = os.path.join(out_dir, name)
        with open(path, "w") as f:
            f.write(text)
        paths[name] = path
    return paths
