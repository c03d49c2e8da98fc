"""Exact sampling of sums S_n = sum_{k<=n} B_k X_k with sparse B_k ~ Ber(p_k).

Indices below ``k_star`` are drawn directly. Beyond it, p_k must be
nonincreasing; successes are then found by geometric skipping under the
envelope p_{k+1} followed by thinning with probability p_j / p_{k+1}. The
envelope is refreshed after every proposal, which keeps the construction
exact by the memorylessness of independent trials.
"""

from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

K_STAR = 10_000


class BernoulliModel(Protocol):
    """What the kernel needs from a model of (B_k, X_k)."""

    sparse: bool

    def p_values(self, k: np.ndarray) -> np.ndarray: ...

    def sample_x(self, k: np.ndarray, gen: np.random.Generator) -> np.ndarray: ...


class EnvelopeError(ValueError):
    """p_k increased beyond the crossover index, so thinning would be biased."""


def next_success(p_of: Callable[[int], float], from_k: int, n: int, gen: np.random.Generator,
                 k_star: int = K_STAR) -> int | None:
    """Smallest k in (from_k, n] with B_k = 1, or None when the range is exhausted."""
    k = from_k
    while k < n:
        if k + 1 < k_star:
            k += 1
            if gen.random() < p_of(k):
                return k
            continue
        p_hat = float(p_of(k + 1))
        if p_hat >= 1.0:
            return k + 1
        if p_hat <= 0.0:
            return None
        j = k + int(gen.geometric(p_hat))
        if j > n:
            return None
        accept = float(p_of(j)) / p_hat
        if accept > 1.0 + 1e-12:
            raise EnvelopeError(f"p_k increases at k={j}; thinning needs a nonincreasing tail")
        if gen.random() < accept:
            return j
        k = j
    return None


def success_indices(model: BernoulliModel, n: int, gen: np.random.Generator,
                    p_head: np.ndarray | None = None, k_star: int = K_STAR) -> np.ndarray:
    """All k <= n with B_k = 1, in increasing order."""
    if not model.sparse:
        p = model.p_values(np.arange(1, n + 1, dtype=float))
        return np.flatnonzero(gen.random(n) < p) + 1
    head = min(n, k_star - 1)
    if p_head is None or p_head.size < head:
        p_head = model.p_values(np.arange(1, head + 1, dtype=float))
    hits = np.flatnonzero(gen.random(head) < p_head[:head]) + 1
    if n <= head:
        return hits
    tail = []
    p_of = lambda k: float(model.p_values(np.array([k], dtype=float))[0])  # noqa: E731
    k = head
    while True:
        nxt = next_success(p_of, k, n, gen, k_star)
        if nxt is None:
            break
        tail.append(nxt)
        k = nxt
    return np.concatenate([hits, np.array(tail, dtype=np.int64)])


def draw_sum(model: BernoulliModel, n: int, gen: np.random.Generator,
             p_head: np.ndarray | None = None, k_star: int = K_STAR) -> float:
    ks = success_indices(model, n, gen, p_head, k_star)
    if ks.size == 0:
        return 0.0
    return float(np.sum(model.sample_x(ks.astype(float), gen)))
