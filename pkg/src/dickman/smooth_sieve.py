"""Smooth-number counts from a smallest-prime-factor sieve.

Psi(N, y) counts n <= N whose largest prime factor p+(n) is at most y;
Psi(N, N**(1/s)) / N tends to the Dickman function rho(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_numerics import DickmanParams, rho
from .errors import CapabilityError, ParameterDomainError

MAX_N = 10**8


def smallest_prime_factors(N: int) -> np.ndarray:
    spf = np.zeros(N + 1, dtype=np.int32)
    for p in range(2, math.isqrt(N) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.arange(N + 1, dtype=np.int32)
    unset = spf == 0
    spf[unset] = idx[unset]
    spf[:2] = 1
    return spf


def largest_prime_factor_sieve(N: int) -> np.ndarray:
    """lpf[n] = p+(n) for 0 <= n <= N, with lpf[1] = 1 (lpf[0] is unused)."""
    if N < 1:
        raise ParameterDomainError("N must be positive")
    if N > MAX_N:
        raise CapabilityError(f"sieve limited to N <= {MAX_N}")
    spf = smallest_prime_factors(N)
    lpf = spf.copy()
    rest = np.arange(N + 1, dtype=np.int32) // spf
    # strip one smallest factor per pass; at most log2(N) passes
    while True:
        live = np.flatnonzero(rest > 1)
        if live.size == 0:
            break
        f = spf[rest[live]]
        lpf[live] = np.maximum(lpf[live], f)
        rest[live] //= f
    return lpf


@dataclass(frozen=True)
class SmoothCount:
    N: int
    y: int
    psi: int
    ratio: float
    rho_s: float
    abs_error: float

    def to_record(self) -> dict:
        return dict(self.__dict__)


def smoothness_bound(N: int, s: float) -> int:
    """floor(N**(1/s)), robust to floating error at exact integer roots."""
    y = int(math.floor(N ** (1.0 / s)))
    while (y + 1) ** s <= N * (1 + 1e-12):
        y += 1
    while y > 1 and y**s > N * (1 + 1e-12):
        y -= 1
    return y


def dickman_check(N: int, s: float, lpf: np.ndarray | None = None) -> SmoothCount:
    if s < 1:
        raise ParameterDomainError("s must be >= 1")
    y = smoothness_bound(N, s)
    if y < 2:
        raise ParameterDomainError("N**(1/s) must be at least 2")
    if lpf is None or lpf.size < N + 1:
        lpf = largest_prime_factor_sieve(N)
    psi = int(np.count_nonzero(lpf[1 : N + 1] <= y))
    ratio = psi / N
    rho_s = rho(DickmanParams(1.0), s)
    return SmoothCount(N, y, psi, ratio, rho_s, abs(ratio - rho_s))
