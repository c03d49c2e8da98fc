"""Monte Carlo for W_n = (1/M_n) sum_{k<=n} B_k X_k and its distance to the predicted limit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__, bernoulli
from .classifier import DEGENERATE, DICKMAN, LimitVerdict, classify_shuffle, classify_theorem2
from .core_numerics import cached_table
from .distances import ks_distance, ks_to_point_mass, two_sample_ks, wasserstein1
from .errors import ParameterDomainError
from .gd_sampler import sample_limit_scaled
from .inversions import SubsetScheme, scheme_to_limit_inputs
from .parallel import run_chunks
from .rng import TAG_REFERENCE, TAG_SIMULATION, RngStream
from .schedules import MuSchedule, PSchedule

REFERENCE_DRAWS = 10**6


@dataclass(frozen=True)
class DeterministicX:
    """X_k = mu_k exactly, B_k ~ Ber(p_k)."""

    mu: MuSchedule
    p: PSchedule
    name = "deterministic"

    @property
    def sparse(self) -> bool:
        return self.p.vanishes

    def p_values(self, k):
        return self.p.values(k)

    def mu_values(self, k):
        return self.mu.values(k)

    def second_moments(self, k):
        return self.mu.values(k) ** 2

    def sample_x(self, k, gen):
        return self.mu.values(k)

    def to_record(self):
        return {"variant": self.name, "mu": {"c": self.mu.c_mu, "a": list(self.mu.a)},
                "p": {"c": self.p.c_p, "b": list(self.p.b)}}


@dataclass(frozen=True)
class SubsetUniform:
    """X_k uniform on E_k, p_k = |E_k| / k."""

    scheme: SubsetScheme
    name = "subset_uniform"

    @property
    def sparse(self) -> bool:
        return self.scheme.sparse

    def p_values(self, k):
        return self.scheme.p_values(k)

    def mu_values(self, k):
        return self.scheme.mu_values(k)

    def second_moments(self, k):
        return self.scheme.second_moments(k)

    def sample_x(self, k, gen):
        return self.scheme.sample_x(k, gen)

    def to_record(self):
        return {"variant": self.name, "scheme": self.scheme.to_record()}


@dataclass(frozen=True)
class TruncatedPoisson:
    """B_k = 1{Y_k > 0}, X_k = k (Y_k | Y_k > 0) with Y_k ~ Poisson(theta0 / k)."""

    theta0: float
    name = "truncated_poisson"

    def __post_init__(self):
        if not self.theta0 > 0:
            raise ParameterDomainError("theta0 must be positive")

    sparse = True

    def p_values(self, k):
        return -np.expm1(-self.theta0 / np.asarray(k, dtype=float))

    def mu_values(self, k):
        lam = self.theta0 / np.asarray(k, dtype=float)
        return self.theta0 / -np.expm1(-lam)

    def second_moments(self, k):
        k = np.asarray(k, dtype=float)
        lam = self.theta0 / k
        return k**2 * (lam + lam**2) / -np.expm1(-lam)

    def sample_x(self, k, gen):
        k = np.asarray(k, dtype=float)
        lam = self.theta0 / k
        u = gen.random(k.size)
        y = np.ones(k.size)
        pmf = lam / np.expm1(lam)
        cum = pmf.copy()
        todo = u > cum
        # inverse CDF of the zero-truncated Poisson; lam <= theta0 keeps this short
        while np.any(todo):
            y[todo] += 1
            pmf[todo] *= lam[todo] / y[todo]
            cum[todo] += pmf[todo]
            todo &= (u > cum) & (pmf > 0)
        return k * y

    def to_record(self):
        return {"variant": self.name, "theta0": self.theta0}


@dataclass(frozen=True)
class SimConfig:
    model: object
    n_grid: tuple[int, ...]
    replicates: int
    master_seed: int

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterDomainError("n_grid must be a strictly increasing sequence of positive integers")
        if self.replicates < 100:
            raise ParameterDomainError("replicates must be at least 100")


@dataclass(frozen=True, eq=False)
class SimResult:
    n_grid: tuple[int, ...]
    samples: dict  # n -> W_n samples, replicate order
    masses: dict  # n -> M_n
    distances: dict  # n -> {"ks", "w1", "mean", "var", "var_theory"}
    verdict: LimitVerdict
    manifest: dict = field(default_factory=dict)

    def ks_sequence(self) -> list[float]:
        return [self.distances[n]["ks"] for n in self.n_grid]

    def w1_sequence(self) -> list[float]:
        return [self.distances[n]["w1"] for n in self.n_grid]


def prefix_masses(model, n_max: int) -> np.ndarray:
    k = np.arange(1, n_max + 1, dtype=float)
    return np.cumsum(model.p_values(k) * model.mu_values(k))


def theoretical_variance(model, n: int, mass: float) -> float:
    """Var W_n = sum_k (p_k E X_k^2 - p_k^2 mu_k^2) / M_n^2."""
    k = np.arange(1, n + 1, dtype=float)
    p = model.p_values(k)
    mu = model.mu_values(k)
    return float(np.sum(p * model.second_moments(k) - (p * mu) ** 2) / mass**2)


def _replicate_chunk(model, n, master_seed, start, stop):
    head = min(n, bernoulli.K_STAR - 1)
    p_head = model.p_values(np.arange(1, head + 1, dtype=float)) if model.sparse else None
    out = np.empty(stop - start)
    for r in range(start, stop):
        gen = RngStream(master_seed, r, (TAG_SIMULATION, n)).generator()
        out[r - start] = bernoulli.draw_sum(model, n, gen, p_head)
    return out


def draw_w(model, n: int, mass: float, replicates: int, master_seed: int, workers: int = 1) -> np.ndarray:
    """Replicate draws of W_n; replicate r at size n always uses the same substream."""
    sums = run_chunks(_replicate_chunk, (model, n, master_seed), replicates, workers)
    return sums / mass


class Reference:
    """Distance computations against the verdict's limit law."""

    def __init__(self, verdict: LimitVerdict, master_seed: int, workers: int = 1):
        self.verdict = verdict
        self.table = None
        self.sample = None
        if verdict.kind == DICKMAN:
            theta = float(verdict.theta)
            if verdict.mixing.is_point_mass_one:
                x_max = max(20.0, float(math.ceil(theta + 12.0 * math.sqrt(theta) + 10.0)))
                self.table = cached_table(theta, x_max)
            else:
                stream = RngStream(master_seed, 0, (TAG_REFERENCE,))
                self.sample = np.sort(sample_limit_scaled(verdict, stream, REFERENCE_DRAWS, workers=workers).values)
        elif verdict.kind != DEGENERATE:
            raise ParameterDomainError(f"cannot simulate against an {verdict.kind} verdict: {verdict.reason}")

    def ks(self, w: np.ndarray) -> float:
        if self.table is not None:
            scale = float(self.verdict.L)
            return ks_distance(w, lambda x: self.table.cdf(x / scale))
        if self.sample is not None:
            return two_sample_ks(w, self.sample)
        return ks_to_point_mass(w, self.verdict.c)

    def w1(self, w: np.ndarray) -> float:
        if self.table is not None:
            scale = float(self.verdict.L)
            return wasserstein1(w, lambda u: scale * self.table.quantile(u))
        if self.sample is not None:
            return wasserstein1(w, self.sample)
        return float(np.mean(np.abs(w - self.verdict.c)))


def predicted_verdict(model) -> LimitVerdict:
    """The limit the classifier predicts for a simulation model."""
    if isinstance(model, DeterministicX):
        return classify_theorem2(model.mu, model.p)
    if isinstance(model, SubsetUniform):
        return classify_shuffle(*scheme_to_limit_inputs(model.scheme))
    if isinstance(model, TruncatedPoisson):
        # X_k / k -> 1 and p_k ~ theta0 / k, so W_n -> (1/theta0) D_theta0
        theta = Fraction(model.theta0)
        return LimitVerdict.dickman(theta, 1 / theta)
    raise ParameterDomainError(f"unknown model {model!r}")


def simulate(config: SimConfig, verdict: LimitVerdict, workers: int = 1) -> SimResult:
    """Draw ``replicates`` copies of W_n for each n on the grid and measure distances."""
    if verdict.kind not in (DICKMAN, DEGENERATE):
        raise ParameterDomainError(f"cannot simulate against an {verdict.kind} verdict: {verdict.reason}")
    model = config.model
    if isinstance(model, SubsetUniform):
        model.scheme.check_range(config.n_grid[-1])
    masses_all = prefix_masses(model, config.n_grid[-1])
    reference = Reference(verdict, config.master_seed, workers)
    samples, masses, distances = {}, {}, {}
    for n in config.n_grid:
        mass = float(masses_all[n - 1])
        w = draw_w(model, n, mass, config.replicates, config.master_seed, workers)
        samples[n] = w
        masses[n] = mass
        distances[n] = {
            "ks": reference.ks(w),
            "w1": reference.w1(w),
            "mean": float(np.mean(w)),
            "var": float(np.var(w, ddof=1)),
            "var_theory": theoretical_variance(model, n, mass),
        }
    manifest = {
        "model": model.to_record(),
        "n_grid": list(config.n_grid),
        "replicates": config.replicates,
        "master_seed": config.master_seed,
        "verdict": verdict.to_record(),
        "version": __version__,
    }
    return SimResult(config.n_grid, samples, masses, distances, verdict, manifest)
