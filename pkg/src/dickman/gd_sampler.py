"""Sampling GD(theta) and GD^(X)(theta) through the perpetuity series.

D = X_1 U_1^(1/theta) + X_2 (U_1 U_2)^(1/theta) + ...

Each path is cut at the first term whose prefactor (U_1...U_m)^(1/theta)
drops below ``tol``; given the path, the discarded tail has mean
prefactor * theta * EX, which is what ``bias_bound`` records.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distances import two_sample_ks
from .errors import CapabilityError, ParameterDomainError
from .mixing import MixingLaw
from .rng import RngStream

CHUNK_SIZE = 1 << 16


@dataclass(frozen=True, eq=False)
class SampleBatch:
    values: np.ndarray
    theta: float
    mixing: MixingLaw
    truncation_tol: float
    bias_bound: float


def _sample_chunk(theta, mixing, tol, stream: RngStream, count):
    gen = stream.generator()
    total = np.zeros(count)
    log_pref = np.zeros(count)
    last_pref = np.zeros(count)
    log_tol = math.log(tol)
    unit = mixing.is_point_mass_one
    active = np.arange(count)
    while active.size:
        log_pref[active] -= gen.standard_exponential(active.size) / theta
        pref = np.exp(log_pref[active])
        total[active] += pref if unit else mixing.sample(gen, active.size) * pref
        done = log_pref[active] < log_tol
        last_pref[active[done]] = pref[done]
        active = active[~done]
    return total, float(last_pref.max(initial=0.0))


def _chunk_job(args):
    return _sample_chunk(*args)


def sample_gd(theta: float, mixing: MixingLaw, tol: float, rng: RngStream, count: int,
              workers: int = 1) -> SampleBatch:
    """Draw ``count`` truncated-series samples of GD^(X)(theta).

    Work is cut into fixed-size chunks, each with its own substream, so the
    batch does not depend on ``workers``.
    """
    if not (math.isfinite(theta) and theta > 0):
        raise ParameterDomainError(f"theta must be positive, got {theta}")
    if not (0 < tol <= 1e-3):
        raise ParameterDomainError(f"tol must lie in (0, 1e-3], got {tol}")
    if count < 1:
        raise ParameterDomainError("count must be positive")
    sizes = [min(CHUNK_SIZE, count - start) for start in range(0, count, CHUNK_SIZE)]
    jobs = [(theta, mixing, tol, rng.child(i), size) for i, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_chunk_job, jobs))
    else:
        results = [_chunk_job(job) for job in jobs]
    values = np.concatenate([r[0] for r in results])
    max_pref = max(r[1] for r in results)
    return SampleBatch(values, theta, mixing, tol, max_pref * theta * mixing.mean)


def fixed_point_check(theta: float, mixing: MixingLaw, replicates: int, rng: RngStream,
                      exponent: float | None = None, tol: float = 1e-10) -> float:
    """Two-sample KS distance between U^(1/theta) (D + X) and a fresh D sample.

    ``exponent`` overrides 1/theta, which is how the negative control is run.
    """
    if replicates < 10_000:
        raise ParameterDomainError("fixed_point_check needs at least 1e4 replicates")
    d = sample_gd(theta, mixing, tol, rng.child(0), replicates).values
    fresh = sample_gd(theta, mixing, tol, rng.child(1), replicates).values
    gen = rng.child(2).generator()
    u = gen.random(replicates)
    x = mixing.sample(gen, replicates)
    power = 1.0 / theta if exponent is None else exponent
    return two_sample_ks(u**power * (d + x), fresh)


def sample_limit_scaled(verdict, rng: RngStream, count: int, tol: float = 1e-10,
                        workers: int = 1) -> SampleBatch:
    """Samples of L * D^(X)(theta) for a Dickman-limit verdict."""
    if not verdict.is_dickman:
        raise CapabilityError(f"verdict {verdict.kind} has no Dickman limit to sample")
    batch = sample_gd(float(verdict.theta), verdict.mixing, tol, rng, count, workers)
    scale = float(verdict.L)
    return SampleBatch(batch.values * scale, batch.theta, batch.mixing, tol, batch.bias_bound * scale)
