"""Iterated-logarithm schedules for mu_k and p_k.

mu(x) = c_mu x^a0 prod_j (log^(j) x)^a_j
p(x)  = c_p / (x^b0 prod_j (log^(j) x)^b_j)

Both are evaluated in log space at max(k, k0), where k0 is the smallest
integer whose deepest iterated logarithm is at least 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CapabilityError, ParameterDomainError

MAX_DEPTH = 4


def _log_tower_threshold(depth: int) -> tuple[int | None, float]:
    """(k0, log k0) for the given depth; k0 is None when it exceeds float range."""
    if depth > MAX_DEPTH:
        raise CapabilityError(f"iterated-log depth {depth} exceeds the supported maximum {MAX_DEPTH}")
    if depth <= 3:
        t = 1.0
        for _ in range(depth):
            t = math.exp(t)
        k0 = max(1, math.ceil(t))
        return k0, math.log(k0)
    # depth 4: k0 = ceil(exp(exp(exp(e)))) is not a float; its log is exp(exp(e)) to double precision
    return None, math.exp(math.exp(math.e))


def _log_factors(log_k: np.ndarray, depth: int) -> list[np.ndarray]:
    """[log k, log log k, ...] up to ``depth`` entries."""
    out = []
    cur = log_k
    for _ in range(depth):
        out.append(cur)
        cur = np.log(cur)
    return out


def _schedule(coef, exps, k, k0) -> np.ndarray:
    """Direct product form, used whenever k0 is an ordinary integer."""
    k = np.maximum(np.asarray(k, dtype=float), k0)
    val = coef * k ** exps[0]
    cur = k
    for e in exps[1:]:
        cur = np.log(cur)
        if e != 0:
            val = val * cur**e
    return val


def _log_schedule(coef, exps, k, k0_log) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    log_k = np.maximum(np.log(k), k0_log)
    logs = _log_factors(log_k, len(exps) - 1)  # log^(1) .. log^(J)
    val = math.log(coef) + exps[0] * log_k
    for j in range(1, len(exps)):
        if exps[j] != 0:
            val = val + exps[j] * np.log(logs[j - 1])
    return val


@dataclass(frozen=True)
class MuSchedule:
    c_mu: float
    a: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        if not (self.c_mu > 0 and math.isfinite(self.c_mu)):
            raise ParameterDomainError(f"c_mu must be positive, got {self.c_mu}")
        if len(self.a) == 0:
            raise ParameterDomainError("mu exponent vector must be nonempty")

    @property
    def depth(self) -> int:
        return len(self.a) - 1

    @cached_property
    def _threshold(self):
        return _log_tower_threshold(self.depth)

    @property
    def k0(self) -> int | None:
        return self._threshold[0]

    def log_values(self, k) -> np.ndarray:
        return _log_schedule(self.c_mu, self.a, k, self._threshold[1])

    def values(self, k) -> np.ndarray:
        if np.any(np.asarray(k) < 1):
            raise ParameterDomainError("schedule index k must be >= 1")
        if self.k0 is not None:
            return _schedule(self.c_mu, self.a, k, self.k0)
        with np.errstate(over="raise"):
            try:
                return np.exp(self.log_values(k))
            except FloatingPointError:
                raise CapabilityError("mu schedule overflows at the clamping threshold") from None


@dataclass(frozen=True)
class PSchedule:
    c_p: float
    b: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not (self.c_p > 0 and math.isfinite(self.c_p)):
            raise ParameterDomainError(f"c_p must be positive, got {self.c_p}")
        if len(self.b) == 0:
            raise ParameterDomainError("p exponent vector must be nonempty")

    @property
    def well_shaped(self) -> bool:
        """b_{J_p} != 0 whenever J_p >= 1; the classifier reports violations as Invalid."""
        return len(self.b) == 1 or self.b[-1] != 0

    @property
    def depth(self) -> int:
        return len(self.b) - 1

    @cached_property
    def _threshold(self):
        return _log_tower_threshold(self.depth)

    @property
    def k0(self) -> int | None:
        return self._threshold[0]

    def values(self, k) -> np.ndarray:
        if np.any(np.asarray(k) < 1):
            raise ParameterDomainError("schedule index k must be >= 1")
        neg = tuple(-v for v in self.b)
        if self.k0 is not None:
            return np.minimum(1.0, _schedule(self.c_p, neg, k, self.k0))
        return np.minimum(1.0, np.exp(_log_schedule(self.c_p, neg, k, self._threshold[1])))

    @property
    def vanishes(self) -> bool:
        """True when p(k) -> 0, i.e. the first nonzero exponent is positive."""
        for v in self.b:
            if v != 0:
                return v > 0
        return False


def eval_mu(s: MuSchedule, k: int) -> float:
    return float(s.values(k))


def eval_p(s: PSchedule, k: int) -> float:
    return float(s.values(k))


def mu_increment(s: MuSchedule, k: int) -> float:
    """Analytic derivative mu'(k) = mu(k)/k * (a0 + sum_j a_j / prod_{i<=j} log^(i) k)."""
    k0 = s.k0
    if k0 is None or k < k0:
        raise ParameterDomainError(f"mu_increment needs k >= k0={k0}")
    logs = _log_factors(np.array(math.log(k)), s.depth)
    factor = s.a[0]
    prod = 1.0
    for j in range(1, len(s.a)):
        prod *= float(logs[j - 1])
        factor += s.a[j] / prod
    return eval_mu(s, k) / k * factor


@dataclass(frozen=True, eq=False)
class PrefixMass:
    values: np.ndarray  # values[n-1] = M_n
    k0: int

    def __call__(self, n: int) -> float:
        if not 1 <= n <= self.values.size:
            raise ParameterDomainError(f"n={n} outside 1..{self.values.size}")
        return float(self.values[n - 1])


def prefix_mass(mu: MuSchedule, p: PSchedule, n_max: int) -> PrefixMass:
    if n_max < 1:
        raise ParameterDomainError("n_max must be >= 1")
    k = np.arange(1, n_max + 1, dtype=float)
    k0 = max(mu.k0 or 0, p.k0 or 0)
    return PrefixMass(np.cumsum(p.values(k) * mu.values(k)), k0)


def series_diverges(d) -> bool:
    """Whether sum_k k^d0 prod_j (log^(j) k)^d_j diverges (Bertrand scale)."""
    for v in d:
        if v != -1:
            return v > -1
    return True


@dataclass(frozen=True)
class NontrivReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_nontriv(mu: MuSchedule, p: PSchedule) -> NontrivReport:
    """Check that sum p_k and M_n both diverge."""
    violations = []
    if not series_diverges([-v for v in p.b]):
        violations.append("sum of p_k converges")
    width = max(len(mu.a), len(p.b))
    a = list(mu.a) + [0.0] * (width - len(mu.a))
    b = list(p.b) + [0.0] * (width - len(p.b))
    if not series_diverges([x - y for x, y in zip(a, b)]):
        violations.append("M_n stays bounded")
    return NontrivReport(tuple(violations))
