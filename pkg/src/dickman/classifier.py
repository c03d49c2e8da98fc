"""Limit verdicts for normalized Bernoulli sums W_n.

``classify_theorem2`` decides between a Dickman limit (1/theta) D_theta and
a degenerate limit at c in {0, 1} for iterated-log schedules.
``classify_shuffle`` applies the sufficient conditions for insertion-shuffle
inversion counts.

theta and L are kept as exact rationals built from the user's floats, so
L * theta == 1 holds exactly for schedule verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mixing import MixingLaw
from .schedules import MuSchedule, PSchedule, series_diverges, validate_nontriv

DICKMAN = "Dickman"
DEGENERATE = "Degenerate"
INVALID = "Invalid"

# boundedness test grid for mu_n / sum_{k<=n} mu_k / k
_BOUND_GRID_MAX = 10**6
_BOUND_GROWTH = 0.01


@dataclass(frozen=True)
class LimitVerdict:
    kind: str
    theta: Fraction | None = None
    L: Fraction | None = None
    mixing: MixingLaw | None = None
    c: int | float | None = None
    reason: str | None = None

    @classmethod
    def dickman(cls, theta: Fraction, L: Fraction, mixing: MixingLaw | None = None) -> "LimitVerdict":
        return cls(DICKMAN, theta=theta, L=L, mixing=mixing or MixingLaw.point_mass_one())

    @classmethod
    def degenerate(cls, c) -> "LimitVerdict":
        return cls(DEGENERATE, c=c)

    @classmethod
    def invalid(cls, reason: str) -> "LimitVerdict":
        return cls(INVALID, reason=reason)

    @property
    def is_dickman(self) -> bool:
        return self.kind == DICKMAN

    def to_record(self) -> dict:
        """Structured record {kind, theta?, L?, c?, reason?}."""
        rec: dict = {"kind": self.kind}
        if self.kind == DICKMAN:
            rec["theta"] = _number(self.theta)
            rec["L"] = _number(self.L)
            if not self.mixing.is_point_mass_one:
                rec["mixing"] = self.mixing.to_record()
        elif self.kind == DEGENERATE:
            rec["c"] = self.c
        else:
            rec["reason"] = self.reason
        return rec


def _number(q: Fraction):
    return int(q) if q.denominator == 1 else float(q)


@dataclass(frozen=True)
class KappaIndices:
    kappa_mu: int | None
    kappa_p: int | None


def kappa_indices(mu: MuSchedule, p: PSchedule) -> KappaIndices:
    k_mu = next((j for j, v in enumerate(mu.a) if v != 0), None)
    k_p = next((j for j, v in enumerate(p.b) if v != 1), None)
    return KappaIndices(k_mu, k_p)


def dickman_conditions_hold(mu: MuSchedule, p: PSchedule) -> bool:
    jp = p.depth
    return (
        jp <= mu.depth
        and all(v == 1 for v in p.b)
        and all(mu.a[j] == 0 for j in range(jp))
        and mu.a[jp] > 0
    )


def classify_theorem2(mu: MuSchedule, p: PSchedule) -> LimitVerdict:
    if not p.well_shaped:
        return LimitVerdict.invalid("b_{J_p} must be nonzero when J_p >= 1")
    report = validate_nontriv(mu, p)
    if not report.ok:
        return LimitVerdict.invalid("; ".join(report.violations))
    if dickman_conditions_hold(mu, p):
        theta = Fraction(p.c_p) / Fraction(mu.a[p.depth])
        return LimitVerdict.dickman(theta, 1 / theta)
    kappa = kappa_indices(mu, p)
    km, kp = kappa.kappa_mu, kappa.kappa_p
    if km is not None and mu.a[km] > 0 and ((kp is None and km < p.depth) or (kp is not None and km < kp)):
        return LimitVerdict.degenerate(0)
    return LimitVerdict.degenerate(1)


def ratio_bounded(mu: MuSchedule, n_max: int = _BOUND_GRID_MAX) -> bool:
    """Numerical boundedness of mu_n / sum_{k<=n} mu_k / k on the grid k <= n_max.

    The running maximum must not grow by more than 1% across either of the
    last two decades.
    """
    k = np.arange(1, n_max + 1, dtype=float)
    m = mu.values(k)
    ratio = m / np.cumsum(m / k)
    running = np.maximum.accumulate(ratio)
    decades = [running[10**d - 1] for d in range(1, int(np.log10(n_max)) + 1)]
    return all(later <= earlier * (1 + _BOUND_GROWTH) for earlier, later in zip(decades[-3:], decades[-2:]))


def classify_shuffle(scheme_mu: MuSchedule, set_size: int | None, mixing: MixingLaw) -> LimitVerdict:
    """Verdict for I_n / E I_n; ``set_size`` None means |E_k| -> infinity."""
    if set_size is not None and set_size < 1:
        return LimitVerdict.invalid("|E_k| must be eventually positive")
    a0 = scheme_mu.a[0]
    if set_size is not None and a0 > 0:
        theta = Fraction(set_size) / Fraction(a0)
        return LimitVerdict.dickman(theta, 1 / theta, mixing)
    # (i-b): a0 == 0 and sum mu_k / k diverges make mu_n / sum mu_k/k -> 0
    if a0 == 0 and series_diverges((a0 - 1,) + scheme_mu.a[1:]):
        return LimitVerdict.degenerate(1)
    if set_size is None and ratio_bounded(scheme_mu):
        return LimitVerdict.degenerate(1)
    return LimitVerdict.invalid("no sufficient condition for a shuffle limit holds")
