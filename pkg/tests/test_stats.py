from __future__ import annotations

import datetime as dt
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from ambientis.aggregation import DailySummary
from ambientis.errors import DegenerateSampleError, InsufficientDataError
from ambientis.stats import (
    FEATURE_KEYS, NotTestable, PairedComparison, PairedSample, PairingWarning,
    comparison_table, format_table, pair_days, paired_t_test, regularized_incomplete_beta,
    student_t_two_tailed_p,
)

from oracles import t_two_tailed_p

MONDAY = dt.date(2024, 3, 4)


def sample(diffs, base=10.0):
    return PairedSample("x", tuple((base, base + d) for d in diffs))


def test_paired_t_small_example():
    r = paired_t_test(sample([1, 2, 3]))
    assert r.t == pytest.approx(3.4641, abs=1e-4)
    assert r.dof == 2
    assert r.p == pytest.approx(0.07418, abs=1e-4)
    assert r.p == pytest.approx(t_two_tailed_p(r.t, 2), abs=1e-10)
    assert not r.significant


def test_paired_t_symmetric_differences():
    r = paired_t_test(sample([-1, 1, -1, 1]))
    assert r.t == 0.0 and r.p == 1.0


def test_paired_t_errors():
    with pytest.raises(DegenerateSampleError):
        paired_t_test(sample([2, 2, 2]))
    with pytest.raises(InsufficientDataError):
        paired_t_test(sample([1]))
    with pytest.raises(ValueError):
        sample([1, float("inf")])


@pytest.mark.parametrize("t,dof", [(12.7062, 1), (2.0860, 20)])
def test_critical_values(t, dof):
    assert student_t_two_tailed_p(t, dof) == pytest.approx(0.05, abs=1e-4)


def test_p_edge_cases():
    assert student_t_two_tailed_p(0.0, 7) == 1.0
    assert student_t_two_tailed_p(math.inf, 7) == 0.0
    assert student_t_two_tailed_p(-2.5, 9) == student_t_two_tailed_p(2.5, 9)
    with pytest.raises(ValueError):
        student_t_two_tailed_p(1.0, 0)


def test_p_against_integration_oracle():
    for t, dof in [(0.3, 1), (1.0, 3), (2.4, 7), (5.0, 20), (40.0, 2)]:
        assert student_t_two_tailed_p(t, dof) == pytest.approx(t_two_tailed_p(t, dof), abs=1e-9)


def test_incomplete_beta_against_scipy(rng):
    for _ in range(300):
        x, a, b = rng.uniform(0, 1), rng.uniform(0.1, 40), rng.uniform(0.1, 40)
        assert regularized_incomplete_beta(x, a, b) == pytest.approx(special.betainc(a, b, x), abs=1e-10)
    assert regularized_incomplete_beta(0.0, 2, 3) == 0.0
    assert regularized_incomplete_beta(1.0, 2, 3) == 1.0
    with pytest.raises(ValueError):
        regularized_incomplete_beta(1.5, 2, 3)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=100)
@given(st.lists(st.tuples(finite, finite), min_size=2, max_size=30))
def test_phase_swap_antisymmetry(pairs):
    try:
        fwd = paired_t_test(PairedSample("x", tuple(pairs)))
    except DegenerateSampleError:
        return
    rev = paired_t_test(PairedSample("x", tuple((b, a) for a, b in pairs)))
    assert rev.t == pytest.approx(-fwd.t, rel=1e-9, abs=1e-12)
    assert rev.p == pytest.approx(fwd.p, abs=1e-12)


def day(date, phase="normal", inactivity=0.3, minutes=60.0):
    profile = [0.0] * 24
    profile[9] = minutes
    return DailySummary(date, phase, minutes, tuple(profile), 0.4, 0.6, 0.0,
                        inactivity, 0.2, 1.0, 100, 100, 100, 100)


def days(n, start=MONDAY, phase="normal", **kw):
    return [day(start + dt.timedelta(i), phase, **kw) for i in range(n)]


def test_pair_by_index_8_days():
    pairs = pair_days(days(8), days(8, MONDAY + dt.timedelta(8), "intervention"), "by-index")
    assert len(pairs) == 8
    assert pairs[0][0].date == MONDAY


def test_pair_by_weekday_equals_by_index_when_aligned():
    normal = days(21)
    interv = days(21, MONDAY + dt.timedelta(21), "intervention")
    assert pair_days(normal, interv, "by-weekday") == pair_days(normal, interv, "by-index")


def test_pair_by_index_truncates_with_warning():
    with pytest.warns(PairingWarning):
        pairs = pair_days(days(5), days(3, MONDAY + dt.timedelta(5), "intervention"))
    assert len(pairs) == 3


def test_pair_by_weekday_matches_weekdays():
    normal = days(7)
    interv = days(7, MONDAY + dt.timedelta(9), "intervention")  # starts on Wednesday
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pairs = pair_days(normal, interv, "by-weekday")
    assert len(pairs) == 7
    assert all(a.weekday == b.weekday for a, b in pairs)
    with pytest.warns(PairingWarning, match="partner"):
        pairs = pair_days(days(3), days(3, MONDAY + dt.timedelta(8), "intervention"), "by-weekday")
    assert [a.weekday for a, _ in pairs] == [1, 2]


def test_pair_errors():
    with pytest.raises(InsufficientDataError):
        pair_days([], days(3))
    with pytest.raises(ValueError):
        pair_days(days(3), days(3), "random")


def _varied(n, phase, start, rng, shift=0.0):
    out = []
    for i in range(n):
        d = start + dt.timedelta(i)
        out.append(day(d, phase, inactivity=0.3 + shift + rng.normal(0, 0.05),
                       minutes=60 + rng.normal(0, 5)))
    return out


def test_comparison_table_dof(rng):
    for n, strategy in ((8, "by-index"), (21, "by-weekday")):
        normal = _varied(n, "normal", MONDAY, rng)
        interv = _varied(n, "intervention", MONDAY + dt.timedelta(n), rng, 0.1)
        report = comparison_table(normal, interv, strategy)
        assert [r.feature for r in report.rows] == list(FEATURE_KEYS)
        assert report.row("inactivity").dof == n - 1
        assert report.row("appearance_duration").dof == n - 1
        assert report.row("inactivity").significant
        # constant features are flagged, not crashed on
        assert isinstance(report.row("standing"), NotTestable)
        text = format_table(report, "P1")
        assert f"P1 ({2 * n} days, DoF = {n - 1})" in text


def test_comparison_identical_inputs_not_testable(rng):
    normal = _varied(8, "normal", MONDAY, rng)
    interv = [day(d.date + dt.timedelta(8), "intervention", d.inactivity_ratio, d.appearance_minutes)
              for d in normal]
    report = comparison_table(normal, interv)
    for r in report.rows:
        assert isinstance(r, NotTestable) or r.p == 1.0
    assert "n/t" in report.to_text()
    assert report.to_dict()["rows"][0]["status"] == "not testable"


def test_hour_slot_mode_uses_24_pairs(rng):
    normal = _varied(8, "normal", MONDAY, rng)
    interv = _varied(8, "intervention", MONDAY + dt.timedelta(8), rng)
    report = comparison_table(normal, interv, hourly_mode="hour-slot")
    # single nonzero bin: the other 23 differences are zero
    row = report.row("appearance_per_hour")
    assert row.n_pairs == 24 and row.dof == 23
    day_mean = comparison_table(normal, interv).row("appearance_per_hour")
    assert day_mean.t == pytest.approx(comparison_table(normal, interv).row("appearance_duration").t)


def test_missing_values_are_skipped():
    normal = days(4)
    interv = days(4, MONDAY + dt.timedelta(4), "intervention")
    interv[0] = DailySummary(interv[0].date, "intervention", 0.0, (0.0,) * 24,
                             None, None, None, None, None, None)
    report = comparison_table(normal, interv, features=["inactivity"])
    assert report.rows[0].n_pairs == 3


def test_report_serializes():
    r = PairedComparison("x", 8, 0.1, 2.5, 7, 0.04)
    assert r.significant and r.to_dict()["dof"] == 7


def test_shift_and_scale_invariance(rng):
    for _ in range(20):
        pairs = rng.normal(0, 1, (10, 2))
        base = paired_t_test(PairedSample("x", tuple(map(tuple, pairs))))
        c, s = rng.uniform(-100, 100), rng.uniform(0.01, 100)
        shifted = paired_t_test(PairedSample("x", tuple(map(tuple, pairs + c))))
        scaled = paired_t_test(PairedSample("x", tuple(map(tuple, pairs * s))))
        assert shifted.t == pytest.approx(base.t, rel=1e-9)
        assert scaled.t == pytest.approx(base.t, rel=1e-9)
        assert scaled.p == pytest.approx(base.p, rel=1e-9)


def test_p_decreases_with_abs_t():
    for dof in (1, 2, 5, 7, 20, 50):
        ps = [student_t_two_tailed_p(t, dof) for t in np.linspace(0, 13, 200)]
        assert all(b < a for a, b in zip(ps, ps[1:]))


def test_p_against_trapezoid_oracle():
    from scipy.special import gammaln
    for i in range(50):
        t, dof = 13.0 * i / 49, (1, 2, 5, 7, 20, 50)[i % 6]
        x = np.linspace(0.0, t, 200_001)
        log_c = gammaln((dof + 1) / 2) - gammaln(dof / 2) - 0.5 * np.log(dof * np.pi)
        dens = np.exp(log_c - (dof + 1) / 2 * np.log1p(x * x / dof))
        central = np.sum((dens[1:] + dens[:-1]) * np.diff(x)) / 2
        assert student_t_two_tailed_p(t, dof) == pytest.approx(1 - 2 * central, abs=1e-6)
