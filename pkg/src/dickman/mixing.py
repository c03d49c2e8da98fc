"""Laws of the mixing variable X in GD^(X)(theta)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import CapabilityError, ParameterDomainError

POINT_MASS_ONE = "point_mass_one"
FINITE_DISCRETE = "finite_discrete"
SCHEME_DERIVED = "scheme_derived"


@dataclass(frozen=True)
class MixingLaw:
    """Distribution of a nonnegative mixing variable with mean at most 1.

    ``atoms``/``weights`` are ``None`` only for scheme-derived laws whose limit
    is not finitely supported (the full insertion scheme); such laws expose
    their mean but refuse moments and sampling.
    """

    variant: str
    atoms: tuple[float, ...] | None = (1.0,)
    weights: tuple[float, ...] | None = (1.0,)
    mean: float = 1.0
    scheme: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.variant not in (POINT_MASS_ONE, FINITE_DISCRETE, SCHEME_DERIVED):
            raise ParameterDomainError(f"unknown mixing variant {self.variant!r}")
        if self.atoms is not None:
            a = np.asarray(self.atoms, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if a.ndim != 1 or a.shape != w.shape or a.size == 0:
                raise ParameterDomainError("atoms and weights must be equal-length nonempty vectors")
            if np.any(a < 0) or not np.all(np.isfinite(a)):
                raise ParameterDomainError("mixing atoms must be finite and nonnegative")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ParameterDomainError("mixing weights must form a probability vector")
            if abs(float(a @ w) - self.mean) > 1e-12:
                raise ParameterDomainError("cached mean does not match the atoms")
        if self.mean > 1.0 + 1e-12:
            raise ParameterDomainError(f"mixing mean must satisfy EX <= 1, got {self.mean}")

    @classmethod
    def point_mass_one(cls) -> "MixingLaw":
        return cls(POINT_MASS_ONE)

    @classmethod
    def finite_discrete(cls, atoms, weights=None) -> "MixingLaw":
        atoms = tuple(float(v) for v in atoms)
        if weights is None:
            weights = tuple(1.0 / len(atoms) for _ in atoms)
        else:
            weights = tuple(float(v) for v in weights)
        return cls(FINITE_DISCRETE, atoms, weights, float(np.dot(atoms, weights)))

    @classmethod
    def scheme_derived(cls, scheme) -> "MixingLaw":
        """Limit law of X_k / mu_k for a structured insertion scheme."""
        limit = scheme.limit_atoms()
        if limit is None:
            return cls(SCHEME_DERIVED, None, None, float(scheme.limit_mean()), scheme)
        atoms, weights = limit
        atoms = tuple(float(v) for v in atoms)
        weights = tuple(float(v) for v in weights)
        return cls(SCHEME_DERIVED, atoms, weights, float(np.dot(atoms, weights)), scheme)

    @property
    def is_point_mass_one(self) -> bool:
        return self.atoms is not None and len(self.atoms) == 1 and self.atoms[0] == 1.0

    def _require_atoms(self, what):
        if self.atoms is None:
            raise CapabilityError(f"{what} unavailable: mixing law has no finite-atom representation")
        return np.asarray(self.atoms), np.asarray(self.weights)

    def moment(self, m: int) -> float:
        a, w = self._require_atoms("moments")
        return float(w @ a**m)

    def expm1_mean(self, t):
        """E[exp(-t X) - 1], evaluated without cancellation for small t."""
        a, w = self._require_atoms("transform")
        t = np.asarray(t, dtype=float)
        return np.expm1(-np.multiply.outer(t, a)) @ w

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        a, w = self._require_atoms("sampling")
        if a.size == 1:
            return np.full(size, a[0])
        # cumulative search; atom counts are tiny
        idx = np.searchsorted(np.cumsum(w), gen.random(size), side="right")
        return a[np.minimum(idx, a.size - 1)]

    def to_record(self) -> dict:
        rec = {"variant": self.variant, "mean": self.mean}
        if self.atoms is not None:
            rec["atoms"] = list(self.atoms)
            rec["weights"] = list(self.weights)
        return rec
