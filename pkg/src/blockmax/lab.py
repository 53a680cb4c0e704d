"""Monte Carlo experiments around block-maxima MLE consistency.

Almost-sure limits cannot be observed directly, so every experiment here
renders them as falsifiable finite-sample statements: medians of error
statistics over independent replications, tracked along a growing grid
of sample sizes.  All randomness flows from one root seed through
per-(cell, replication) spawn keys, so reports are byte-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .blocks import EmpiricalMeasure, block_maxima, empirical_mean_loglik, ks_distance, normalize
from .distributions import ReferenceDistribution, norm_constants, sample_iid
from .fit import FitOptions, fit_mle
from .gev import GevParams, gev_loglik, gev_quantile

CELL_BUDGET = 10_000_000  # max draws n*m per replication accepted from config files


@dataclass(frozen=True)
class GrowthRule:
    """Block-length schedule m(n).

    kinds: ``poly_log`` m(n)=ceil(c*(log n)^a), ``power`` m(n)=ceil(n^a),
    ``fixed`` m(n)=c, ``slow`` m(n)=ceil(c*log(log n))+offset.  Only
    poly_log with a>1 and power with 0<a<1 grow faster than log n.
    """

    kind: str
    c: float = 1.0
    a: float = 2.0
    offset: int = 0

    KINDS = ("poly_log", "power", "fixed", "slow")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown growth kind '{self.kind}'")

    def block_length(self, n: int) -> int:
        if n < 3:
            raise ValueError("growth rules are defined for n >= 3")
        if self.kind == "poly_log":
            m = math.ceil(self.c * math.log(n) ** self.a)
        elif self.kind == "power":
            m = math.ceil(n ** self.a)
        elif self.kind == "fixed":
            m = round(self.c)
        else:
            m = math.ceil(self.c * math.log(math.log(n))) + self.offset
        return max(int(m), 1)

    @property
    def satisfies_growth_condition(self) -> bool:
        """Whether m(n)/log(n) -> infinity along this rule."""
        if self.kind == "poly_log":
            return self.a > 1.0
        if self.kind == "power":
            return 0.0 < self.a < 1.0
        return False

    def describe(self) -> str:
        if self.kind == "poly_log":
            return f"poly_log:c={self.c:g},a={self.a:g}"
        if self.kind == "power":
            return f"power:a={self.a:g}"
        if self.kind == "fixed":
            return f"fixed:c={self.c:g}"
        return f"slow:c={self.c:g},offset={self.offset}"

    @staticmethod
    def from_spec(spec: str) -> "GrowthRule":
        name, _, argstr = spec.strip().partition(":")
        name = name.strip().lower()
        kwargs = {}
        if argstr.strip():
            for part in argstr.split(","):
                key, eq, value = part.partition("=")
                key = key.strip()
                if not eq or key not in ("c", "a", "offset"):
                    raise ValueError(f"bad growth parameter '{part.strip()}' in '{spec}'")
                kwargs[key] = int(value) if key == "offset" else float(value)
        return GrowthRule(kind=name, **kwargs)


def poly_log_growth(c: float = 1.0, a: float = 2.0) -> GrowthRule:
    """Default schedule m(n) = ceil((log n)^2): fast enough, cheap in draws."""
    return GrowthRule("poly_log", c=c, a=a)


def slow_growth(c: float = 1.0, offset: int = 1) -> GrowthRule:
    """m(n) = ceil(log log n) + 1: grows, but slower than log n."""
    return GrowthRule("slow", c=c, offset=offset)


@dataclass(frozen=True)
class StudyRow:
    n: int
    m: int
    rep: int
    gamma_hat: float
    mu_err: float        # (mu_hat - b_m) / a_m
    sigma_ratio: float   # sigma_hat / a_m
    converged: bool
    ks: float
    mean_ll_truth: float


@dataclass(frozen=True)
class StudySummary:
    n: int
    m: int
    replications: int
    gamma_err_quartiles: tuple[float, float, float]
    mu_err_quartiles: tuple[float, float, float]
    sigma_err_quartiles: tuple[float, float, float]
    frac_converged: float
    median_ks: float


@dataclass(frozen=True)
class StudyReport:
    dist_spec: str
    gamma0: float
    growth: str
    seed: int
    rows: list[StudyRow]
    summary: list[StudySummary]

    CSV_HEADER = "n,m,rep,gamma_hat,mu_err,sigma_ratio,converged,ks,mean_ll_truth"

    def csv_lines(self) -> list[str]:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.n},{r.m},{r.rep},{r.gamma_hat!r},{r.mu_err!r},{r.sigma_ratio!r},"
                f"{'true' if r.converged else 'false'},{r.ks!r},{r.mean_ll_truth!r}"
            )
        return lines


def _rep_rng(seed: int, cell: int, rep: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, cell, rep)))


def _quartiles(values) -> tuple[float, float, float]:
    q1, q2, q3 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q1), float(q2), float(q3)


def run_consistency_study(
    dist: ReferenceDistribution,
    n_grid: Sequence[int],
    growth: GrowthRule,
    replications: int,
    seed: int,
    fit_options: FitOptions = FitOptions(),
) -> StudyReport:
    """Fit block maxima over an n-grid and record normalized errors.

    For each n: m = growth(n); each replication draws n*m points, fits
    the MLE on the n block maxima, and reports the three error
    coordinates of the consistency statement using the exact constants.
    Non-converged fits are recorded with their flag, never dropped.
    """
    if not dist.gamma0 > -1.0:
        raise ValueError("study requires an index above -1")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    rows: list[StudyRow] = []
    summaries: list[StudySummary] = []
    truth = GevParams(dist.gamma0, 0.0, 1.0)
    for cell, n in enumerate(n_grid):
        m = growth.block_length(int(n))
        constants = norm_constants(dist, m)
        cell_rows: list[StudyRow] = []
        for rep in range(replications):
            rng = _rep_rng(seed, cell, rep)
            data = sample_iid(dist, int(n) * m, rng)
            series = block_maxima(data, m)
            result = fit_mle(series.values, fit_options)
            normalized = normalize(series, constants)
            measure = EmpiricalMeasure.from_values(normalized.values)
            cell_rows.append(StudyRow(
                n=int(n),
                m=m,
                rep=rep,
                gamma_hat=result.theta_hat.gamma,
                mu_err=(result.theta_hat.mu - constants.b_m) / constants.a_m,
                sigma_ratio=result.theta_hat.sigma / constants.a_m,
                converged=result.converged,
                ks=ks_distance(measure, dist.gamma0),
                mean_ll_truth=empirical_mean_loglik(measure, truth),
            ))
        rows.extend(cell_rows)
        summaries.append(StudySummary(
            n=int(n),
            m=m,
            replications=replications,
            gamma_err_quartiles=_quartiles([abs(r.gamma_hat - dist.gamma0) for r in cell_rows]),
            mu_err_quartiles=_quartiles([abs(r.mu_err) for r in cell_rows]),
            sigma_err_quartiles=_quartiles([abs(r.sigma_ratio - 1.0) for r in cell_rows]),
            frac_converged=sum(r.converged for r in cell_rows) / replications,
            median_ks=float(np.median([r.ks for r in cell_rows])),
        ))
    return StudyReport(
        dist_spec=dist.spec or dist.name,
        gamma0=dist.gamma0,
        growth=growth.describe(),
        seed=int(seed),
        rows=rows,
        summary=summaries,
    )


def expected_loglik(gamma0: float) -> float:
    """Mean of the standardized log-likelihood under its own law.

    Adaptive quadrature through the probability integral transform; this
    is the limiting value of the empirical mean log-likelihood at the
    true parameters.
    """
    if not gamma0 > -1.0:
        raise ValueError("defined for index > -1 only")
    value, _ = quad(
        lambda u: gev_loglik(gamma0, gev_quantile(gamma0, u)),
        0.0, 1.0, limit=200, epsabs=1e-10, epsrel=1e-10,
    )
    return float(value)


@dataclass(frozen=True)
class CrucialLemmaRow:
    n: int
    m: int
    median_gap: float
    n_infeasible: int    # replications whose normalized maxima left the support


def check_crucial_lemma(
    dist: ReferenceDistribution,
    n_grid: Sequence[int],
    growth: GrowthRule,
    replications: int,
    seed: int,
) -> list[CrucialLemmaRow]:
    """Gap between the empirical mean log-likelihood at the truth and its limit.

    Replications where some normalized maximum falls outside the limit
    support make the empirical mean -inf; they are counted separately and
    enter the median as infinite gaps.
    """
    if not dist.gamma0 > -1.0:
        raise ValueError("requires an index above -1")
    target = expected_loglik(dist.gamma0)
    truth = GevParams(dist.gamma0, 0.0, 1.0)
    out: list[CrucialLemmaRow] = []
    for cell, n in enumerate(n_grid):
        m = growth.block_length(int(n))
        constants = norm_constants(dist, m)
        gaps = []
        n_inf = 0
        for rep in range(replications):
            rng = _rep_rng(seed, cell, rep, stream=1)
            data = sample_iid(dist, int(n) * m, rng)
            normalized = normalize(block_maxima(data, m), constants)
            value = empirical_mean_loglik(EmpiricalMeasure.from_values(normalized.values), truth)
            if math.isfinite(value):
                gaps.append(abs(value - target))
            else:
                n_inf += 1
                gaps.append(math.inf)
        out.append(CrucialLemmaRow(
            n=int(n), m=m, median_gap=float(np.median(gaps)), n_infeasible=n_inf,
        ))
    return out


@dataclass(frozen=True)
class ObstructionRow:
    n: int
    m_slow: int
    median_min_slow: float
    m_fast: int
    median_min_fast: float


def check_slow_growth_obstruction(
    dist: ReferenceDistribution,
    n_grid: Sequence[int],
    slow: GrowthRule,
    fast: GrowthRule,
    replications: int,
    seed: int,
) -> list[ObstructionRow]:
    """Track the smallest normalized block maximum under two schedules.

    For a heavy-tailed member with left endpoint -inf, a slowly growing
    block length lets the smallest normalized maximum run away to -inf,
    which destroys the feasible region around the truth; a fast schedule
    keeps it bounded.
    """
    if not (dist.gamma0 > 0.0 and math.isinf(dist.left_endpoint) and dist.left_endpoint < 0):
        raise ValueError("obstruction check needs gamma0 > 0 and left endpoint -inf")
    out: list[ObstructionRow] = []
    for cell, n in enumerate(n_grid):
        medians = []
        ms = []
        for stream, rule in ((2, slow), (3, fast)):
            m = rule.block_length(int(n))
            constants = norm_constants(dist, m)
            mins = []
            for rep in range(replications):
                rng = _rep_rng(seed, cell, rep, stream=stream)
                data = sample_iid(dist, int(n) * m, rng)
                normalized = normalize(block_maxima(data, m), constants)
                mins.append(float(np.min(normalized.values)))
            medians.append(float(np.median(mins)))
            ms.append(m)
        out.append(ObstructionRow(
            n=int(n), m_slow=ms[0], median_min_slow=medians[0],
            m_fast=ms[1], median_min_fast=medians[1],
        ))
    return out


@dataclass(frozen=True)
class EquivalenceRow:
    m: int
    ratio: float   # a'_m / a_m
    gap: float     # (b'_m - b_m) / a_m


def check_norm_equivalence(
    dist: ReferenceDistribution,
    alt_constants: Callable[[int], tuple[float, float]],
    m_grid: Sequence[int],
) -> list[EquivalenceRow]:
    """Compare an alternative admissible normalization to the exact one."""
    out = []
    for m in m_grid:
        exact = norm_constants(dist, int(m))
        a_alt, b_alt = alt_constants(int(m))
        out.append(EquivalenceRow(
            m=int(m),
            ratio=float(a_alt / exact.a_m),
            gap=float((b_alt - exact.b_m) / exact.a_m),
        ))
    return out


# --- study configuration files -------------------------------------------

KNOWN_CHECKS = ("consistency", "crucial_lemma", "obstruction")


@dataclass(frozen=True)
class StudyConfig:
    """Parsed key=value study configuration.

    Keys: ``dist`` (member spec), ``n_grid`` (comma-separated ints),
    ``growth`` (rule spec), ``replications``, ``seed``, optional
    ``checks`` (comma list from consistency, crucial_lemma, obstruction)
    and ``slow_growth`` (rule spec used by the obstruction check).
    """

    dist_spec: str
    n_grid: tuple[int, ...]
    growth: GrowthRule
    replications: int
    seed: int
    checks: tuple[str, ...] = ("consistency",)
    slow_growth: Optional[GrowthRule] = None


def parse_study_config(path) -> StudyConfig:
    """Read a key=value config file ('#' comments and blank lines skipped)."""
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, eq, value = text.partition("=")
            if not eq:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got '{text}'")
            raw[key.strip().lower()] = value.strip()
    missing = [k for k in ("dist", "n_grid", "growth", "replications", "seed") if k not in raw]
    if missing:
        raise ValueError(f"{path}: missing required keys: {', '.join(missing)}")
    try:
        n_grid = tuple(int(tok) for tok in raw["n_grid"].split(",") if tok.strip())
        replications = int(raw["replications"])
        seed = int(raw["seed"])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    checks = tuple(
        tok.strip() for tok in raw.get("checks", "consistency").split(",") if tok.strip()
    )
    slow = GrowthRule.from_spec(raw["slow_growth"]) if "slow_growth" in raw else None
    return StudyConfig(
        dist_spec=raw["dist"],
        n_grid=n_grid,
        growth=GrowthRule.from_spec(raw["growth"]),
        replications=replications,
        seed=seed,
        checks=checks,
        slow_growth=slow,
    )


def validate_study_config(config: StudyConfig) -> ReferenceDistribution:
    """Check a config against all preconditions; returns the built member.

    Raises ValueError listing every violation (budget included) so a bad
    file is diagnosed in one pass.
    """
    from .distributions import from_spec  # local import keeps module load cheap

    problems = []
    dist = None
    try:
        dist = from_spec(config.dist_spec)
    except ValueError as exc:
        problems.append(str(exc))
    if dist is not None and not dist.gamma0 > -1.0:
        problems.append(f"member index {dist.gamma0} is not above -1")
    if config.replications < 1:
        problems.append("replications must be >= 1")
    if not config.n_grid:
        problems.append("n_grid is empty")
    for check in config.checks:
        if check not in KNOWN_CHECKS:
            problems.append(f"unknown check '{check}' (known: {', '.join(KNOWN_CHECKS)})")
    rules = [config.growth] + ([config.slow_growth] if config.slow_growth else [])
    for n in config.n_grid:
        if n < 3:
            problems.append(f"n = {n} is too small")
            continue
        for rule in rules:
            m = rule.block_length(n)
            if n * m > CELL_BUDGET:
                problems.append(
                    f"cell n={n}, m={m} needs {n * m} draws per replication, "
                    f"over the {CELL_BUDGET} budget"
                )
    if "crucial_lemma" in config.checks and not config.growth.satisfies_growth_condition:
        problems.append("crucial_lemma check requires a growth rule with m(n)/log(n) -> inf")
    if "obstruction" in config.checks:
        if config.slow_growth is None:
            problems.append("obstruction check requires a slow_growth rule")
        if dist is not None and not (
            dist.gamma0 > 0.0 and math.isinf(dist.left_endpoint) and dist.left_endpoint < 0
        ):
            problems.append("obstruction check needs gamma0 > 0 and left endpoint -inf")
    if problems:
        raise ValueError("invalid study config:\n  - " + "\n  - ".join(problems))
    return dist
