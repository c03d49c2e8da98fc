"""Card-insertion shuffles and their inversion counts.

At step k card k joins a row of k-1 cards. With probability |E_k|/k it is
placed with j cards to its right for j uniform on E_k (creating j
inversions); otherwise it goes to the right end. The inversion count is
I_n = sum_k B_k X_k with X_k uniform on E_k and B_k ~ Ber(|E_k|/k).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import bernoulli
from .errors import CapabilityError, ParameterDomainError
from .mixing import MixingLaw
from .rng import RngStream
from .schedules import MuSchedule

FULL = "full"
SINGLETON = "singleton"
TOP = "top"
LAST_N = "last_n"
RATIO = "ratio"
CUSTOM = "custom"
VARIANTS = (FULL, SINGLETON, TOP, LAST_N, RATIO, CUSTOM)


@dataclass(frozen=True)
class SubsetScheme:
    """A rule k -> E_k subset of {1, ..., k-1}.

    ``ratio`` schemes use E_k = {min(floor(r_i k), k-1)}, with zeros and
    duplicates dropped; ``custom`` schemes list E_1, E_2, ... explicitly.
    """

    variant: str
    N: int | None = None
    ratios: tuple[float, ...] = ()
    subsets: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterDomainError(f"unknown scheme variant {self.variant!r}")
        if self.variant == LAST_N and (self.N is None or self.N < 1):
            raise ParameterDomainError("last_n scheme needs N >= 1")
        if self.variant == RATIO:
            rs = tuple(float(r) for r in self.ratios)
            if not rs or any(not 0 < r <= 1 for r in rs):
                raise ParameterDomainError("ratio atoms must lie in (0, 1]")
            object.__setattr__(self, "ratios", tuple(sorted(set(rs))))
        if self.variant == CUSTOM:
            if self.subsets is None:
                raise ParameterDomainError("custom scheme needs explicit subsets")
            subsets = tuple(tuple(sorted(set(int(v) for v in e))) for e in self.subsets)
            for k, e in enumerate(subsets, start=1):
                if e and (e[0] < 1 or e[-1] > k - 1):
                    raise ParameterDomainError(f"E_{k}={list(e)} is not a subset of {{1,...,{k - 1}}}")
            object.__setattr__(self, "subsets", subsets)

    @property
    def sparse(self) -> bool:
        return self.variant in (SINGLETON, TOP, LAST_N, RATIO)

    def check_range(self, n: int):
        if self.variant == CUSTOM and n > len(self.subsets):
            raise ParameterDomainError(f"custom scheme only defines E_k for k <= {len(self.subsets)}")

    def subset(self, k: int) -> np.ndarray:
        k = int(k)
        if k <= 1:
            return np.zeros(0, dtype=np.int64)
        if self.variant == FULL:
            return np.arange(1, k, dtype=np.int64)
        if self.variant == SINGLETON:
            return np.array([1], dtype=np.int64)
        if self.variant == TOP:
            return np.array([k - 1], dtype=np.int64)
        if self.variant == LAST_N:
            return np.arange(max(1, k - self.N), k, dtype=np.int64)
        if self.variant == RATIO:
            atoms = np.minimum(np.floor(np.array(self.ratios) * k), k - 1).astype(np.int64)
            return np.unique(atoms[atoms >= 1])
        self.check_range(k)
        return np.array(self.subsets[k - 1], dtype=np.int64)

    def _ratio_matrix(self, k: np.ndarray):
        atoms = np.minimum(np.floor(np.multiply.outer(k, self.ratios)), (k - 1)[:, None])
        atoms = np.sort(atoms, axis=1)
        keep = atoms >= 1
        keep[:, 1:] &= atoms[:, 1:] != atoms[:, :-1]
        return atoms, keep

    def _moments(self, k: np.ndarray):
        """(|E_k|, sum of E_k, sum of squares of E_k) for an array of k."""
        k = np.asarray(k, dtype=float)
        live = k >= 2
        if self.variant == FULL:
            m = np.where(live, k - 1, 0)
            return m, m * (m + 1) / 2, m * (m + 1) * (2 * m + 1) / 6
        if self.variant == SINGLETON:
            one = live.astype(float)
            return one, one, one
        if self.variant == TOP:
            return live.astype(float), np.where(live, k - 1, 0), np.where(live, (k - 1) ** 2, 0)
        if self.variant == LAST_N:
            lo = np.maximum(1, k - self.N)
            hi = k - 1
            size = np.where(live, hi - lo + 1, 0)
            s1 = np.where(live, (lo + hi) * size / 2, 0)
            sq = lambda m: m * (m + 1) * (2 * m + 1) / 6  # noqa: E731
            s2 = np.where(live, sq(hi) - sq(lo - 1), 0)
            return size, s1, s2
        if self.variant == RATIO:
            atoms, keep = self._ratio_matrix(k)
            return keep.sum(axis=1).astype(float), (atoms * keep).sum(axis=1), (atoms**2 * keep).sum(axis=1)
        sets = [self.subset(int(v)) for v in k]
        return (np.array([e.size for e in sets], dtype=float),
                np.array([e.sum() for e in sets], dtype=float),
                np.array([(e.astype(float) ** 2).sum() for e in sets]))

    def p_values(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return self._moments(k)[0] / k

    def mu_values(self, k) -> np.ndarray:
        """mu_k = mean of E_k (0 when E_k is empty)."""
        size, s1, _ = self._moments(k)
        return np.divide(s1, size, out=np.zeros_like(s1, dtype=float), where=size > 0)

    def second_moments(self, k) -> np.ndarray:
        size, _, s2 = self._moments(k)
        return np.divide(s2, size, out=np.zeros_like(s2, dtype=float), where=size > 0)

    def mean_terms(self, k) -> np.ndarray:
        """p_k mu_k = (sum of E_k) / k."""
        k = np.asarray(k, dtype=float)
        return self._moments(k)[1] / k

    def sample_x(self, k: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.variant == FULL:
            return gen.integers(1, k.astype(np.int64)).astype(float)
        if self.variant == SINGLETON:
            return np.ones_like(k)
        if self.variant == TOP:
            return k - 1
        if self.variant == LAST_N:
            lo = np.maximum(1, k - self.N)
            return lo + np.floor(gen.random(k.size) * (k - lo))
        out = np.empty(k.size)
        for i, kk in enumerate(k):
            e = self.subset(int(kk))
            out[i] = e[gen.integers(e.size)]
        return out

    # limit data used by scheme_to_limit_inputs / MixingLaw.scheme_derived

    def limit_mean(self) -> float:
        return 1.0

    def limit_atoms(self):
        if self.variant in (SINGLETON, TOP, LAST_N):
            return (1.0,), (1.0,)
        if self.variant == RATIO:
            mean = float(np.mean(self.ratios))
            return tuple(r / mean for r in self.ratios), tuple(1.0 / len(self.ratios) for _ in self.ratios)
        if self.variant == FULL:
            return None  # X_k / mu_k tends to Uniform(0, 2)
        raise CapabilityError("custom schemes have no structured limit law")

    def to_record(self) -> dict:
        rec = {"variant": self.variant}
        if self.N is not None:
            rec["N"] = self.N
        if self.ratios:
            rec["ratios"] = list(self.ratios)
        if self.subsets is not None:
            rec["subsets"] = [list(e) for e in self.subsets]
        return rec


def scheme_to_limit_inputs(scheme: SubsetScheme) -> tuple[MuSchedule, int | None, MixingLaw]:
    """(mu schedule, stable |E_k| or None for unbounded, limit law of X_k / mu_k)."""
    if scheme.variant == CUSTOM:
        raise CapabilityError("custom schemes must be classified empirically")
    if scheme.variant == FULL:
        mu, size = MuSchedule(0.5, (1.0,)), None
    elif scheme.variant == SINGLETON:
        mu, size = MuSchedule(1.0, (0.0,)), 1
    elif scheme.variant == TOP:
        mu, size = MuSchedule(1.0, (1.0,)), 1
    elif scheme.variant == LAST_N:
        mu, size = MuSchedule(1.0, (1.0,)), scheme.N
    else:
        mu, size = MuSchedule(float(np.mean(scheme.ratios)), (1.0,)), len(scheme.ratios)
    return mu, size, MixingLaw.scheme_derived(scheme)


@dataclass(frozen=True, eq=False)
class InversionRun:
    n: int
    samples: np.ndarray
    mean_model: float


def inversion_mass(scheme: SubsetScheme, n: int) -> float:
    """E I_n = sum_k (|E_k|/k) mu_k."""
    return float(np.sum(scheme.mean_terms(np.arange(1, n + 1, dtype=float))))


def _inversion_chunk(scheme, n, master_seed, domain, start, stop):
    p_head = scheme.p_values(np.arange(1, min(n, bernoulli.K_STAR - 1) + 1, dtype=float))
    out = np.empty(stop - start, dtype=np.int64)
    for r in range(start, stop):
        gen = RngStream(master_seed, r, domain).generator()
        out[r - start] = round(bernoulli.draw_sum(scheme, n, gen, p_head))
    return out


def simulate_inversions(scheme: SubsetScheme, n: int, replicates: int, rng: RngStream,
                        workers: int = 1) -> InversionRun:
    """Replicate draws of I_n; replicate r uses substream ``rng.child(r)``."""
    scheme.check_range(n)
    from .parallel import run_chunks

    domain = (*rng.domain, rng.stream_index)
    samples = run_chunks(_inversion_chunk, (scheme, n, rng.master_seed, domain), replicates, workers)
    return InversionRun(n, samples, inversion_mass(scheme, n))


class ShuffleOutcome(NamedTuple):
    permutation: np.ndarray
    inversions: int
    running_sum: int


class FenwickTree:
    """Binary indexed tree over 1..size with prefix sums and k-th one search."""

    def __init__(self, size: int, fill: int = 0):
        self.size = size
        self.tree = [0] * (size + 1)
        if fill:
            for i in range(1, size + 1):
                self.tree[i] += fill
                j = i + (i & -i)
                if j <= size:
                    self.tree[j] += self.tree[i]
        self._top = 1 << (size.bit_length() - 1) if size else 0

    def add(self, index: int, delta: int):
        while index <= self.size:
            self.tree[index] += delta
            index += index & -index

    def prefix(self, index: int) -> int:
        total = 0
        while index > 0:
            total += self.tree[index]
            index -= index & -index
        return total

    def find_kth(self, k: int) -> int:
        """Smallest index whose prefix sum reaches k (k >= 1)."""
        pos = 0
        step = self._top
        while step:
            nxt = pos + step
            if nxt <= self.size and self.tree[nxt] < k:
                pos = nxt
                k -= self.tree[nxt]
            step >>= 1
        return pos + 1


def permutation_from_right_counts(right_counts) -> np.ndarray:
    """Final row of cards when card k is inserted with right_counts[k-1] cards to its right.

    Processing cards from last to first, card k takes the free slot with
    (k - 1 - j_k) free slots to its left.
    """
    n = len(right_counts)
    free = FenwickTree(n, fill=1)
    row = np.zeros(n, dtype=np.int64)
    for k in range(n, 0, -1):
        j = int(right_counts[k - 1])
        if not 0 <= j <= k - 1:
            raise ParameterDomainError(f"card {k} cannot have {j} cards to its right")
        slot = free.find_kth(k - j)
        row[slot - 1] = k
        free.add(slot, -1)
    return row


def count_inversions(seq) -> int:
    """Pairs i < j with seq[i] > seq[j], by bottom-up merge sort."""
    a = list(seq)
    n = len(a)
    buf = [0] * n
    count = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, t = lo, mid, lo
            while i < mid and j < hi:
                if a[i] <= a[j]:
                    buf[t] = a[i]
                    i += 1
                else:
                    buf[t] = a[j]
                    count += mid - i
                    j += 1
                t += 1
            buf[t:t + mid - i] = a[i:mid]
            t += mid - i
            buf[t:t + hi - j] = a[j:hi]
        a, buf = buf, a
        width *= 2
    return count


def shuffle_oracle(scheme: SubsetScheme, n: int, rng: RngStream) -> ShuffleOutcome:
    """Physically shuffle n cards and count inversions two ways."""
    if n > 10**5:
        raise ParameterDomainError("shuffle_oracle is limited to n <= 1e5")
    scheme.check_range(n)
    gen = rng.generator()
    p = scheme.p_values(np.arange(1, n + 1, dtype=float))
    right = np.zeros(n, dtype=np.int64)
    running = 0
    for k in range(2, n + 1):
        if gen.random() < p[k - 1]:
            right[k - 1] = int(scheme.sample_x(np.array([float(k)]), gen)[0])
            running += int(right[k - 1])
    perm = permutation_from_right_counts(right)
    return ShuffleOutcome(perm, count_inversions(perm), running)
