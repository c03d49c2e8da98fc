"""Acceptance criteria as executable checks.

Each ``criterion_N`` runs one criterion at its stated tolerance and scale
and returns a ``CriterionResult``. ``run_all`` drives them for the
``verify`` subcommand and the test suite. The master seed is fixed once
here and never tuned.
"""

from __future__ import annotations

import filecmp
import json
import math
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .classifier import LimitVerdict, classify_shuffle, classify_theorem2
from .core_numerics import DickmanParams, EULER_GAMMA, build_tables, cdf_via_recursion, laplace
from .gd_sampler import fixed_point_check, sample_gd
from .inversions import SubsetScheme, scheme_to_limit_inputs, shuffle_oracle, simulate_inversions
from .mixing import MixingLaw
from .rng import TAG_ORACLE, RngStream
from .schedules import MuSchedule, PSchedule
from .simulator import DeterministicX, SimConfig, SubsetUniform, TruncatedPoisson, predicted_verdict, simulate
from .smooth_sieve import dickman_check, largest_prime_factor_sieve

ACCEPTANCE_SEED = 12345
REPLICATES = 10_000
ATTRACTION_GRID = (1_000, round(10**4.5), 1_000_000)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s): {self.detail}"


def _strictly_decreasing(seq) -> bool:
    return all(b < a for a, b in zip(seq, seq[1:]))


def _fmt_seq(seq) -> str:
    return "[" + ", ".join(f"{v:.4g}" for v in seq) + "]"


def criterion_1(seed: int, workers: int):
    """Density values, total mass and agreement of the two construction routes."""
    t1 = build_tables(DickmanParams(1.0))
    t2 = build_tables(DickmanParams(2.0))
    e1 = abs(t1.rho(2.0) - (1 - math.log(2)))
    e2 = abs(t2.rho(2.0) - (4 - 4 * math.log(2)))
    e_int = abs(t1.integral_rho(20.0) - math.exp(EULER_GAMMA))
    xs = np.linspace(0.0, 20.0, 4001)
    sup = {}
    for theta in (0.5, 1.0, 2.0):
        a = build_tables(DickmanParams(theta))
        b = cdf_via_recursion(DickmanParams(theta))
        sup[theta] = float(np.max(np.abs(a.cdf(xs) - b.cdf(xs))))
    ok = e1 < 1e-8 and e2 < 1e-8 and e_int < 1e-6 and max(sup.values()) <= 1e-8
    detail = (f"|rho1(2) err|={e1:.2e} |rho2(2) err|={e2:.2e} |int err|={e_int:.2e} "
              f"sup|F_steps-F_rec|={', '.join(f'{k}:{v:.1e}' for k, v in sup.items())}")
    return ok, detail, 10.0


def criterion_2(seed: int, workers: int):
    """Transform at zero, its slope, and sampler moments against the cumulants."""
    one = MixingLaw.point_mass_one()
    exact = all(laplace(DickmanParams(t), one, 0.0) == 1.0 for t in (0.5, 1.0, 2.0))
    h = 1e-4
    slope_err = 0.0
    for t in (0.5, 1.0, 2.0):
        L = lambda lam: laplace(DickmanParams(t), one, lam)  # noqa: E731
        # one-sided second-order difference; the transform is only defined for lambda >= 0
        slope = (-3 * L(0.0) + 4 * L(h) - L(2 * h)) / (2 * h)
        slope_err = max(slope_err, abs(slope + t))
    z_max = 0.0
    for i, t in enumerate((1.0, 2.0)):
        d = sample_gd(t, one, 1e-10, RngStream(seed, i, (21,)), 10**6, workers).values
        n = d.size
        mean, var = d.mean(), d.var(ddof=1)
        m4 = np.mean((d - mean) ** 4)
        z_mean = abs(mean - t) / math.sqrt(var / n)
        z_var = abs(var - t / 2) / math.sqrt((m4 - var**2) / n)
        z_max = max(z_max, z_mean, z_var)
    ok = exact and slope_err < 1e-6 and z_max <= 4
    return ok, f"L(0)==1: {exact}; max|slope+theta|={slope_err:.2e}; max moment z={z_max:.2f}", 30.0


def criterion_3(seed: int, workers: int):
    """Perpetuity fixed point, with a wrong-exponent negative control."""
    n = 10**5
    ks1 = fixed_point_check(1.0, MixingLaw.point_mass_one(), n, RngStream(seed, 0, (31,)))
    ks2 = fixed_point_check(2.0, MixingLaw.finite_discrete([2 / 3, 4 / 3]), n, RngStream(seed, 1, (31,)))
    neg = fixed_point_check(1.0, MixingLaw.point_mass_one(), n, RngStream(seed, 2, (31,)), exponent=0.5)
    ok = ks1 < 0.01 and ks2 < 0.01 and neg > 0.05
    return ok, f"KS theta=1: {ks1:.4f}, theta=2 mixed: {ks2:.4f}, wrong exponent: {neg:.4f}", 60.0


def classifier_table() -> list[tuple[str, LimitVerdict, LimitVerdict]]:
    """(label, computed, expected) for the decision-table examples."""
    t2 = [
        ("a=(1), b=(1)", (1, (1,)), (1, (1,)), LimitVerdict.dickman(Fraction(1), Fraction(1))),
        ("a=(0,1), b=(1,1)", (1, (0, 1)), (1, (1, 1)), LimitVerdict.dickman(Fraction(1), Fraction(1))),
        ("a=(0.5,0), b=(1,1)", (1, (0.5, 0)), (1, (1, 1)), LimitVerdict.degenerate(0)),
        ("a=(0), b=(1)", (1, (0,)), (1, (1,)), LimitVerdict.degenerate(1)),
        ("a=(1), b=(0.5)", (1, (1,)), (1, (0.5,)), LimitVerdict.degenerate(1)),
    ]
    rows = [(label, classify_theorem2(MuSchedule(*mu), PSchedule(*p)), want) for label, mu, p, want in t2]
    invalid = classify_theorem2(MuSchedule(1, (1,)), PSchedule(1, (2,)))
    rows.append(("b=(2)", invalid, LimitVerdict.invalid(invalid.reason or "")))
    mixed = MixingLaw.finite_discrete([2 / 3, 4 / 3])
    rows += [
        ("shuffle a=(1), N=1", classify_shuffle(MuSchedule(1, (1,)), 1, MixingLaw.point_mass_one()),
         LimitVerdict.dickman(Fraction(1), Fraction(1))),
        ("shuffle a=(1), N=2, X uniform{2/3,4/3}", classify_shuffle(MuSchedule(1, (1,)), 2, mixed),
         LimitVerdict.dickman(Fraction(2), Fraction(1, 2), mixed)),
        ("shuffle mu~k/2, |E_k|=k-1", classify_shuffle(*scheme_to_limit_inputs(SubsetScheme("full"))),
         LimitVerdict.degenerate(1)),
    ]
    return rows


def _same(got: LimitVerdict, want: LimitVerdict) -> bool:
    if got.kind != want.kind:
        return False
    if want.is_dickman:
        return got.theta == want.theta and got.L == want.L and got.mixing == want.mixing
    return got.c == want.c


def criterion_4(seed: int, workers: int):
    """Classifier decision table, exact equality."""
    rows = classifier_table()
    bad = [label for label, got, want in rows if not _same(got, want)]
    return not bad, f"{len(rows) - len(bad)}/{len(rows)} verdicts exact" + (f"; wrong: {bad}" if bad else ""), 1.0


def _attraction(model, seed, workers):
    verdict = predicted_verdict(model)
    result = simulate(SimConfig(model, ATTRACTION_GRID, REPLICATES, seed), verdict, workers)
    return result.ks_sequence()


def criterion_5(seed: int, workers: int):
    """KS to GD(1) decreasing over the n-grid for mu_k=k, p_k=1/k and for the Top scheme."""
    det = _attraction(DeterministicX(MuSchedule(1, (1,)), PSchedule(1, (1,))), seed, workers)
    top = _attraction(SubsetUniform(SubsetScheme("top")), seed, workers)
    ok = all(_strictly_decreasing(s) and s[-1] < 0.12 for s in (det, top))
    return ok, f"n={list(ATTRACTION_GRID)} KS deterministic {_fmt_seq(det)}, top {_fmt_seq(top)}", 600.0


def _variance_se(w: np.ndarray) -> float:
    """Standard error of the unbiased sample variance."""
    n = w.size
    s2 = w.var(ddof=1)
    m4 = np.mean((w - w.mean()) ** 4)
    return math.sqrt(max(m4 - (n - 3) / (n - 1) * s2**2, 0.0) / n)


def criterion_6(seed: int, workers: int):
    """Degenerate regime: variance tracking against the analytic value."""
    model = DeterministicX(MuSchedule(1, (0,)), PSchedule(1, (1,)))
    grid = (10**4, 10**6)
    result = simulate(SimConfig(model, grid, REPLICATES, seed), predicted_verdict(model), workers)
    parts, ok = [], True
    for n in grid:
        d = result.distances[n]
        z = abs(d["var"] - d["var_theory"]) / _variance_se(result.samples[n])
        ok &= z <= 3
        parts.append(f"n={n}: var={d['var']:.5f} theory={d['var_theory']:.5f} z={z:.2f}")
    var_seq = [result.distances[n]["var"] for n in grid]
    ok &= _strictly_decreasing(var_seq)
    return ok, "; ".join(parts), 300.0


def criterion_7(seed: int, workers: int):
    """Truncated Poisson model: unit mean and approach to (1/2) D_2."""
    model = TruncatedPoisson(2.0)
    grid = (10**3, 10**5)
    result = simulate(SimConfig(model, grid, REPLICATES, seed), predicted_verdict(model), workers)
    w = result.samples[10**5]
    z = abs(w.mean() - 1.0) / (w.std(ddof=1) / math.sqrt(w.size))
    ks = result.ks_sequence()
    ok = z <= 4 and ks[1] < ks[0]
    return ok, f"mean z={z:.2f}; KS n=1e3: {ks[0]:.4f}, n=1e5: {ks[1]:.4f}", 300.0


def random_scheme(gen: np.random.Generator, n: int) -> SubsetScheme:
    kind = gen.integers(6)
    if kind == 0:
        return SubsetScheme("full")
    if kind == 1:
        return SubsetScheme("singleton")
    if kind == 2:
        return SubsetScheme("top")
    if kind == 3:
        return SubsetScheme("last_n", N=int(gen.integers(1, 6)))
    if kind == 4:
        return SubsetScheme("ratio", ratios=tuple(gen.uniform(0.05, 1.0, size=gen.integers(1, 4))))
    subsets = [()]
    for k in range(2, n + 1):
        size = int(gen.integers(0, min(k - 1, 4) + 1))
        subsets.append(tuple(gen.choice(np.arange(1, k), size=size, replace=False)))
    return SubsetScheme("custom", subsets=tuple(subsets))


def oracle_cases(seed: int, cases: int = 1000, n_max: int = 1000):
    """Yield (scheme, n, outcome) for randomized shuffle-oracle cases."""
    for case in range(cases):
        gen = RngStream(seed, case, (TAG_ORACLE, 0)).generator()
        n = int(gen.integers(1, n_max + 1))
        scheme = random_scheme(gen, n)
        yield scheme, n, shuffle_oracle(scheme, n, RngStream(seed, case, (TAG_ORACLE, 1)))


def criterion_8(seed: int, workers: int):
    """Shuffle-oracle dual counts and the Full-scheme mean."""
    mismatches = sum(o.inversions != o.running_sum for _, _, o in oracle_cases(seed))
    n = 1000
    run = simulate_inversions(SubsetScheme("full"), n, REPLICATES, RngStream(seed, 0, (81,)), workers)
    s = run.samples.astype(float)
    z = abs(s.mean() - n * (n - 1) / 4) / (s.std(ddof=1) / math.sqrt(s.size))
    ok = mismatches == 0 and z <= 4 and int(run.samples.max()) <= n * (n - 1) // 2
    return ok, f"oracle mismatches {mismatches}/1000; Full mean {s.mean():.1f} vs {n * (n - 1) / 4}, z={z:.2f}", 120.0


def criterion_9(seed: int, workers: int):
    """Smooth-number counts against rho at N = 1e6."""
    lpf = largest_prime_factor_sieve(10**6)
    c2 = dickman_check(10**6, 2.0, lpf)
    c3 = dickman_check(10**6, 3.0, lpf)
    ok = c2.abs_error < 0.02 and c3.abs_error < 0.02
    return ok, (f"s=2: ratio={c2.ratio:.6f} rho={c2.rho_s:.6f} err={c2.abs_error:.4f}; "
                f"s=3: ratio={c3.ratio:.6f} rho={c3.rho_s:.6f} err={c3.abs_error:.4f}"), 30.0


REPRO_CONFIG = {
    "model": {"variant": "deterministic", "mu": {"c": 1, "a": [1]}, "p": {"c": 1, "b": [1]}},
    "n_grid": [1000, 30000],
    "replicates": 400,
}


def criterion_10(seed: int, workers: int):
    """simulate rerun from its manifest gives byte-identical CSVs at 1, 2 and 8 workers."""
    from .cli import run

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "config.json"
        cfg.write_text(json.dumps(REPRO_CONFIG))
        run("simulate", str(cfg), str(tmp / "w1"), seed=seed, threads=1)
        first = tmp / "w1" / f"simulate-{seed}"
        mismatched = []
        for threads in (2, 8):
            run("simulate", str(first / "manifest.json"), str(tmp / f"w{threads}"), threads=threads)
            again = tmp / f"w{threads}" / f"simulate-{seed}"
            for name in ("samples.csv", "distances.csv"):
                if not filecmp.cmp(first / name, again / name, shallow=False):
                    mismatched.append(f"{name}@{threads}")
    ok = not mismatched
    return ok, "byte-identical at 1, 2, 8 workers" if ok else f"differences: {mismatched}", None


CRITERIA = {
    1: ("density correctness", criterion_1),
    2: ("transform and moments", criterion_2),
    3: ("fixed-point identity", criterion_3),
    4: ("classifier decision table", criterion_4),
    5: ("end-to-end attraction", criterion_5),
    6: ("degenerate regime", criterion_6),
    7: ("Poisson example", criterion_7),
    8: ("inversion representation", criterion_8),
    9: ("smooth numbers", criterion_9),
    10: ("reproducibility", criterion_10),
}


def run_criterion(number: int, seed: int = ACCEPTANCE_SEED, workers: int = 1) -> CriterionResult:
    name, fn = CRITERIA[number]
    start = time.perf_counter()
    ok, detail, budget = fn(seed, workers)
    seconds = time.perf_counter() - start
    if budget is not None and seconds >= budget:
        ok = False
        detail += f"; runtime {seconds:.1f}s exceeds {budget:.0f}s"
    return CriterionResult(number, name, bool(ok), detail, seconds)


def run_all(numbers=None, seed: int = ACCEPTANCE_SEED, workers: int = 1, echo: bool = False):
    results = []
    for number in numbers or sorted(CRITERIA):
        if number not in CRITERIA:
            from .errors import ConfigValidationError

            raise ConfigValidationError(f"criteria: unknown criterion {number}")
        result = run_criterion(number, seed, workers)
        if echo:
            print(result.line(), flush=True)
        results.append(result)
    return results
