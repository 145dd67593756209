"""Paired t-tests between baseline ("normal") and intervention days.

Days are paired either by position (day k with day k) or by weekday (i-th
Monday with i-th Monday). Each behavioural feature gets a two-tailed paired
t-test on the per-pair differences ``intervention - normal``; significance
is p < 0.05 with no multiple-comparison correction.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ambientis.aggregation import DailySummary, mean_hourly_profile
from ambientis.errors import DegenerateSampleError, InsufficientDataError, StatsError

ALPHA = 0.05
_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 10_000


class PairingWarning(UserWarning):
    pass


class Strategy(str, enum.Enum):
    BY_INDEX = "by-index"
    BY_WEEKDAY = "by-weekday"


class HourlyMode(str, enum.Enum):
    DAY_MEAN = "day-mean"    # one value per day: mean of its 24-bin profile
    HOUR_SLOT = "hour-slot"  # 24 pairs: mean profile bins of the paired days


# -- Student t ------------------------------------------------------------

def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _beta_cf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, dof: float) -> float:
    """P(|T| >= |t|) for Student's t with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    if math.isnan(t):
        raise ValueError("t is NaN")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = dof / (dof + t * t)
    return min(1.0, regularized_incomplete_beta(x, dof / 2.0, 0.5))


# -- paired test ----------------------------------------------------------

@dataclass(frozen=True)
class PairedSample:
    feature: str
    pairs: tuple[tuple[float, float], ...]
    strategy: str = Strategy.BY_INDEX.value

    def __post_init__(self):
        for a, b in self.pairs:
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"{self.feature}: non-finite value in pair ({a}, {b})")


@dataclass(frozen=True)
class PairedComparison:
    feature: str
    n_pairs: int
    mean_difference: float
    t: float
    dof: int
    p: float

    @property
    def significant(self) -> bool:
        return self.p < ALPHA

    def to_dict(self) -> dict:
        return {
            "feature": self.feature, "status": "ok", "n_pairs": self.n_pairs,
            "dof": self.dof, "mean_difference": self.mean_difference,
            "t": self.t, "p": self.p, "significant": self.significant,
        }


@dataclass(frozen=True)
class NotTestable:
    feature: str
    n_pairs: int
    reason: str

    significant = False

    def to_dict(self) -> dict:
        return {"feature": self.feature, "status": "not testable",
                "n_pairs": self.n_pairs, "reason": self.reason}


def paired_t_test(sample: PairedSample) -> PairedComparison:
    n = len(sample.pairs)
    if n < 2:
        raise InsufficientDataError(f"{sample.feature}: need at least 2 pairs, got {n}")
    diffs = [b - a for a, b in sample.pairs]
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        raise DegenerateSampleError(f"{sample.feature}: differences have zero variance")
    t = mean / math.sqrt(var / n)
    dof = n - 1
    return PairedComparison(sample.feature, n, mean, t, dof, student_t_two_tailed_p(t, dof))


# -- pairing --------------------------------------------------------------

def pair_days(normal: Sequence[DailySummary], intervention: Sequence[DailySummary],
              strategy: Strategy | str = Strategy.BY_INDEX) -> list[tuple[DailySummary, DailySummary]]:
    strategy = Strategy(strategy)
    if not normal or not intervention:
        raise InsufficientDataError("both phases need at least one day")
    normal = sorted(normal, key=lambda d: d.date)
    intervention = sorted(intervention, key=lambda d: d.date)
    if strategy is Strategy.BY_INDEX:
        n = min(len(normal), len(intervention))
        if len(normal) != len(intervention):
            warnings.warn(f"phases differ in length ({len(normal)} vs {len(intervention)}); "
                          f"truncating to {n} pairs", PairingWarning, stacklevel=2)
        pairs = list(zip(normal[:n], intervention[:n]))
    else:
        by_day: dict[int, list[DailySummary]] = defaultdict(list)
        for d in intervention:
            by_day[d.weekday].append(d)
        seen: dict[int, int] = defaultdict(int)
        pairs = []
        for d in normal:
            k = seen[d.weekday]
            seen[d.weekday] += 1
            if k < len(by_day[d.weekday]):
                pairs.append((d, by_day[d.weekday][k]))
        dropped = len(normal) + len(intervention) - 2 * len(pairs)
        if dropped:
            warnings.warn(f"dropped {dropped} day(s) without a same-weekday partner",
                          PairingWarning, stacklevel=2)
    if not pairs:
        raise InsufficientDataError("pairing produced no pairs")
    return pairs


# -- comparison table -----------------------------------------------------

@dataclass(frozen=True)
class Feature:
    key: str
    title: str
    value: Callable[[DailySummary], float | None]


FEATURES = (
    Feature("standing", "Standing", lambda d: d.standing_ratio),
    Feature("sitting", "Sitting", lambda d: d.sitting_ratio),
    Feature("inactivity", "Inactivity", lambda d: d.inactivity_ratio),
    Feature("scale", "Scale", lambda d: d.mean_movement_scale),
    Feature("speed", "Speed", lambda d: d.mean_movement_speed),
    Feature("appearance_duration", "Appearance duration", lambda d: d.appearance_minutes),
    Feature("appearance_per_hour", "Appearance min. per h.", lambda d: sum(d.profile) / 24.0),
)
FEATURE_KEYS = tuple(f.key for f in FEATURES)


@dataclass
class ComparisonReport:
    strategy: str
    hourly_mode: str
    n_normal: int
    n_intervention: int
    n_pairs: int
    rows: list = field(default_factory=list)

    def row(self, key: str):
        for r in self.rows:
            if r.feature == key:
                return r
        raise KeyError(key)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "hourly_mode": self.hourly_mode,
            "alpha": ALPHA,
            "normal_days": self.n_normal,
            "intervention_days": self.n_intervention,
            "pairs": self.n_pairs,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_text(self, label: str = "P") -> str:
        return format_table(self, label)


def _test_or_flag(sample: PairedSample):
    try:
        return paired_t_test(sample)
    except StatsError as exc:
        return NotTestable(sample.feature, len(sample.pairs), str(exc))


def comparison_table(normal: Sequence[DailySummary], intervention: Sequence[DailySummary],
                     strategy: Strategy | str = Strategy.BY_INDEX,
                     hourly_mode: HourlyMode | str = HourlyMode.DAY_MEAN,
                     features: Sequence[str] = FEATURE_KEYS) -> ComparisonReport:
    strategy, hourly_mode = Strategy(strategy), HourlyMode(hourly_mode)
    pairs = pair_days(normal, intervention, strategy)
    report = ComparisonReport(strategy.value, hourly_mode.value, len(normal),
                              len(intervention), len(pairs))
    wanted = {f.key: f for f in FEATURES}
    for key in features:
        feat = wanted[key]
        if key == "appearance_per_hour" and hourly_mode is HourlyMode.HOUR_SLOT:
            a = mean_hourly_profile([p[0] for p in pairs])
            b = mean_hourly_profile([p[1] for p in pairs])
            values = tuple(zip(a, b))
        else:
            values = tuple(
                (va, vb) for va, vb in ((feat.value(x), feat.value(y)) for x, y in pairs)
                if va is not None and vb is not None
            )
        report.rows.append(_test_or_flag(PairedSample(key, values, strategy.value)))
    return report


def _fmt_p(p: float) -> str:
    if p >= 0.001:
        return f"{p:.3f}"
    if p >= 0.0001:
        return f"{p:.4f}"
    return f"{p:.1e}"


def format_table(report: ComparisonReport, label: str = "P") -> str:
    """Aligned text: one p-value row across features, then per-feature details."""
    titles = {f.key: f.title for f in FEATURES}
    dofs = sorted({r.dof for r in report.rows if isinstance(r, PairedComparison)})
    dof_txt = "/".join(map(str, dofs)) if dofs else "n/a"
    head = f"{label} ({report.n_normal + report.n_intervention} days, DoF = {dof_txt})"
    cells = []
    for r in report.rows:
        if isinstance(r, PairedComparison):
            cells.append(_fmt_p(r.p) + ("*" if r.significant else ""))
        else:
            cells.append("n/t")
    cols = ["T-test (p-value)"] + [titles[r.feature] for r in report.rows]
    vals = [head] + cells
    widths = [max(len(c), len(v)) for c, v in zip(cols, vals)]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(cols, widths)),
        "  ".join(v.ljust(w) for v, w in zip(vals, widths)),
        f"* p < {ALPHA}; n/t = not testable",
        "",
        f"{'feature':<24}{'n':>4}{'dof':>5}{'mean diff':>13}{'t':>13}{'p':>10}",
    ]
    for r in report.rows:
        if isinstance(r, PairedComparison):
            lines.append(f"{titles[r.feature]:<24}{r.n_pairs:>4}{r.dof:>5}"
                         f"{r.mean_difference:>13.4g}{r.t:>13.4g}{_fmt_p(r.p):>10}")
        else:
            lines.append(f"{titles[r.feature]:<24}{r.n_pairs:>4}    -  not testable: {r.reason}")
    return "\n".join(lines) + "\n"
