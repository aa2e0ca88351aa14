"""Scenario generators and the Monte Carlo size/power engine."""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .data import Dataset, exponential_link, linear_link, validate_dataset
from .errors import RdreamError
from .pipeline import METHODS, evaluate_methods
from .sdr import orthonormalize

FAMILIES = ("H11", "H12", "H13", "H14", "H21", "H22", "H23", "H31")
DEFAULT_P = {"H1": 8, "H2": 4, "H3": 8}
ALLOWED_P = {"H1": (8,), "H2": (2, 4), "H3": (8, 12)}
NORMAL = "normal"
LOGNORMAL = "lognormal"
# ln-scale standard deviation of the log-normal error (variance 0.25^2)
LOGNORMAL_SIGMA = 0.25
MAX_FAILURE_FRACTION = 0.01


@dataclass(frozen=True)
class ContaminationSpec:
    """``kind`` is ``none``, ``add`` (shift responses by ``value``) or
    ``replace`` (redraw responses from model ``model``)."""

    kind: str = "none"
    rate: float = 0.0
    value: float = 0.0
    model: str = ""

    def __post_init__(self):
        if self.kind not in ("none", "add", "replace"):
            raise ValueError(f"unknown contamination kind {self.kind!r}")
        if not 0.0 <= self.rate <= 0.5:
            raise ValueError(f"contamination rate must be in [0, 0.5], got {self.rate}")
        if self.kind == "replace" and self.model not in ("cos", "exp"):
            raise ValueError(f"unknown replacement model {self.model!r}")

    def count(self, n):
        return 0 if self.kind == "none" else int(round(self.rate * n))

    def label(self):
        if self.kind == "none":
            return "none"
        if self.kind == "add":
            return f"add({self.value:g},{self.rate:g})"
        return f"replace({self.model},{self.rate:g})"


def default_contamination(family: str, rate: Optional[float] = None) -> ContaminationSpec:
    study = family[:2]
    if study == "H1":
        return ContaminationSpec("add", 0.10 if rate is None else rate, value=5.0)
    if study == "H2":
        return ContaminationSpec("replace", 0.10 if rate is None else rate, model="cos")
    return ContaminationSpec("replace", 0.0 if rate is None else rate, model="exp")


@dataclass(frozen=True)
class ScenarioSpec:
    family: str
    a: float
    n: int
    p: Optional[int] = None
    error: str = NORMAL
    contamination: Optional[ContaminationSpec] = None
    lognormal_sigma: float = LOGNORMAL_SIGMA

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.a < 0:
            raise ValueError("departure parameter a must be >= 0")
        if self.error not in (NORMAL, LOGNORMAL):
            raise ValueError(f"unknown error distribution {self.error!r}")
        study = self.family[:2]
        if self.p is None:
            object.__setattr__(self, "p", DEFAULT_P[study])
        if self.p not in ALLOWED_P[study]:
            raise ValueError(f"p={self.p} not allowed for {self.family}; use {ALLOWED_P[study]}")
        if self.contamination is None:
            object.__setattr__(self, "contamination", default_contamination(self.family))
        if self.n < 10:
            raise ValueError("n must be at least 10")

    @property
    def rho(self):
        return self.contamination.rate

    def cell_id(self) -> str:
        return (
            f"{self.family}|a={self.a!r}|n={self.n}|p={self.p}|err={self.error}"
            f"|sig={self.lognormal_sigma!r}|{self.contamination.label()}"
        )


@dataclass(frozen=True)
class GroundTruth:
    b: np.ndarray
    q: int


def directions(family, p):
    beta1 = np.ones(p) / np.sqrt(p)
    half = p // 2
    beta2 = np.concatenate([np.ones(half), np.zeros(p - half)]) / np.sqrt(half)
    return beta1, beta2


def draw_errors(rng, size, error, sigma=LOGNORMAL_SIGMA):
    if error == NORMAL:
        return rng.standard_normal(size)
    raw = np.exp(sigma * rng.standard_normal(size))
    mean = np.exp(0.5 * sigma * sigma)
    sd = np.sqrt((np.exp(sigma * sigma) - 1.0) * np.exp(sigma * sigma))
    return (raw - mean) / sd


def _mean_function(family, a, u1, u2):
    if family == "H11":
        return u1 + a * np.exp(-1.5 * u1)
    if family == "H12":
        return u1 + 1.5 * a * u1**3
    if family == "H13":
        return u1 + 6.0 * a * np.cos(0.8 * np.pi * u1)
    if family == "H14":
        return 2.5 * np.exp(0.5 * u1) + 1.5 * a * u1**3
    if family == "H21":
        return u1 + 1.5 * a * u2**3
    if family == "H22":
        return u1 + 0.3 * a * (4.0 * u2**3 + u2**2)
    if family == "H23":
        return u1 + 4.0 * a * np.exp(-u2)
    return u1 + 2.0 * a * u1**3


def null_link(family):
    return exponential_link(2.5, 0.5) if family == "H14" else linear_link()


def generate_scenario(spec: ScenarioSpec, seed) -> tuple[Dataset, GroundTruth]:
    """Draw one dataset. ``seed`` is an int, a SeedSequence or a Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n, p = spec.n, spec.p
    beta1, beta2 = directions(spec.family, p)
    x = rng.standard_normal((n, p))
    u1 = x @ beta1
    u2 = x @ beta2
    eps = draw_errors(rng, n, spec.error, spec.lognormal_sigma)
    y = _mean_function(spec.family, spec.a, u1, u2) + eps
    cont = spec.contamination
    m = cont.count(n)
    if m:
        idx = rng.choice(n, size=m, replace=False)
        if cont.kind == "add":
            y[idx] += cont.value
        else:
            fresh = draw_errors(rng, m, spec.error, spec.lognormal_sigma)
            if cont.model == "cos":
                y[idx] = 5.5 * np.cos(3.0 * np.pi * u1[idx]) + fresh
            else:
                y[idx] = 6.0 * np.exp(-np.abs(u1[idx])) + fresh
    if spec.family[:2] == "H2" and spec.a > 0:
        truth = GroundTruth(orthonormalize(np.column_stack([beta1, beta2])), 2)
    else:
        truth = GroundTruth(beta1[:, None], 1)
    return validate_dataset(y, x), truth


# -- seeding -----------------------------------------------------------------


def cell_hash(cell_id: str) -> int:
    return int.from_bytes(hashlib.sha256(cell_id.encode()).digest()[:8], "little")


def replication_seed(seed_base: int, cell_id: str, rep: int) -> np.random.SeedSequence:
    """Counter-based seed mixing ``(seed_base, cell hash, replication)``."""
    h = cell_hash(cell_id)
    return np.random.SeedSequence(
        [seed_base & 0xFFFFFFFF, (seed_base >> 32) & 0xFFFFFFFF, h & 0xFFFFFFFF, h >> 32, rep]
    )


# -- Monte Carlo ----------------------------------------------------------------


def _one_replication(args):
    spec, methods, seed_base, rep, gwz_sdr = args
    d, _ = generate_scenario(spec, replication_seed(seed_base, spec.cell_id(), rep))
    out = []
    # the per-dataset q > 3 warning is noise across thousands of replications
    stat_log = logging.getLogger("rdream.statistic")
    level = stat_log.level
    stat_log.setLevel(logging.ERROR)
    try:
        reports = evaluate_methods(d, methods, null_link(spec.family), gwz_sdr=gwz_sdr)
    except (RdreamError, np.linalg.LinAlgError) as exc:
        return [(m, None, f"{type(exc).__name__}: {exc}") for m in methods]
    finally:
        stat_log.setLevel(level)
    for m in methods:
        r = reports[m]
        out.append((m, r.s_n_adj, r.diagnostic))
    return out


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("RDREAM_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def simulate_statistics(
    spec: ScenarioSpec,
    methods: Sequence[str],
    reps: int,
    seed_base: int = 0,
    threads: Optional[int] = None,
    gwz_sdr: str = "dee",
) -> dict:
    """Adjusted statistics for every replication, NaN where a replication failed.

    Replication ``r`` always uses the same seed, so the output does not
    depend on ``threads``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    tasks = [(spec, methods, seed_base, r, gwz_sdr) for r in range(reps)]
    threads = resolve_threads(threads)
    if threads == 1:
        results = [_one_replication(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one_replication, tasks, chunksize=max(1, reps // (4 * threads))))
    stats = {m: np.full(reps, np.nan) for m in methods}
    for r, row in enumerate(results):
        for m, s, _ in row:
            if s is not None:
                stats[m][r] = s
    return stats


@dataclass(frozen=True)
class PowerRow:
    family: str
    error: str
    a: float
    n: int
    method: str
    rate: float
    reps: int
    seed_base: int
    p: int
    rho: float
    contamination: str
    alpha: float
    rejections: int
    failures: int
    valid: bool


COLUMNS = tuple(PowerRow.__dataclass_fields__)


@dataclass
class PowerTable:
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def rate(self, family, a, n, method, **match):
        hits = [
            r for r in self.rows
            if r.family == family and r.a == a and r.n == n and r.method == method
            and all(getattr(r, k) == v for k, v in match.items())
        ]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {family} a={a} n={n} {method} {match}")
        return hits[0].rate


def rows_from_statistics(spec, stats, reps, alpha, seed_base):
    from .statistic import chi2_quantile

    crit = chi2_quantile(1.0 - alpha)
    rows = []
    for m, s in stats.items():
        ok = ~np.isnan(s)
        failures = int(reps - ok.sum())
        rejections = int(np.sum(s[ok] ** 2 >= crit))
        valid = failures < MAX_FAILURE_FRACTION * reps
        used = reps - failures
        rate = rejections / used if used else float("nan")
        rows.append(
            PowerRow(
                family=spec.family, error=spec.error, a=float(spec.a), n=spec.n, method=m,
                rate=rate, reps=reps, seed_base=seed_base, p=spec.p, rho=float(spec.rho),
                contamination=spec.contamination.label(), alpha=alpha,
                rejections=rejections, failures=failures, valid=bool(valid),
            )
        )
    return rows


def run_monte_carlo(
    grid: Sequence[ScenarioSpec],
    methods: Sequence[str],
    reps: int = 500,
    alpha: float = 0.05,
    seed_base: int = 0,
    threads: Optional[int] = None,
    gwz_sdr: str = "dee",
) -> PowerTable:
    """Empirical rejection rates for every (cell, method).

    A replication that fails (degenerate variance, singular local fit) is
    dropped from the denominator; a cell with 1% or more failures is
    marked invalid.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    table = PowerTable(
        config={
            "methods": list(methods),
            "reps": reps,
            "alpha": alpha,
            "seed_base": seed_base,
            "gwz_sdr": gwz_sdr,
            "grid": [scenario_to_dict(s) for s in grid],
        }
    )
    for spec in grid:
        stats = simulate_statistics(spec, methods, reps, seed_base, threads, gwz_sdr)
        table.rows.extend(rows_from_statistics(spec, stats, reps, alpha, seed_base))
    return table


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    out = asdict(spec)
    out["contamination"] = asdict(spec.contamination)
    return out


def scenario_from_dict(d: dict) -> ScenarioSpec:
    d = dict(d)
    d["contamination"] = ContaminationSpec(**d["contamination"])
    return ScenarioSpec(**d)


def with_contamination_rate(spec: ScenarioSpec, rate: float) -> ScenarioSpec:
    return replace(spec, contamination=replace(spec.contamination, rate=rate))
