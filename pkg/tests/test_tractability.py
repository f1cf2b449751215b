import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from korobov_exp import tractability as tr
from korobov_exp.minimal_errors import complexity, log_error_linf_all
from korobov_exp.space import SequenceFamily, WeightedSpace
from korobov_exp.spectrum import Spectrum

EXP_A = SequenceFamily.exponential(1.0)
SQ_B = SequenceFamily.power(2.0)


def test_diagnostics_closed_forms():
    d = tr.diagnostics(EXP_A, SQ_B, 3)
    assert d.B == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert d.B_s == pytest.approx(1 + 1 / 4 + 1 / 9)
    assert d.alpha_star == 1.0
    assert d.limit_a_infinite is True
    d = tr.diagnostics(SequenceFamily.linear(), SequenceFamily.constant(1), 4)
    assert d.alpha_star == 0.0 and d.B == math.inf and d.B_s == 4


def test_exponential_b_sum():
    d = tr.diagnostics(EXP_A, SequenceFamily.exponential(math.log(2)), 2)
    assert d.B == pytest.approx(1.0)


def test_explicit_lists_are_not_extrapolated():
    d = tr.diagnostics(SequenceFamily.explicit([1, 2, 3]), SequenceFamily.explicit([1, 4, 9]), 3)
    assert d.B == tr.UNKNOWN and d.alpha_star == tr.UNDETERMINABLE
    v = tr.verdicts(d)
    assert v["linf"]["EXP"] is tr.Verdict.TRUE
    assert v["linf"]["UEXP"] is tr.Verdict.UNDETERMINED
    assert v["linf"]["EC-SPT"] is tr.Verdict.UNDETERMINED
    assert v["l2"]["kappa-EC-WT, kappa>1, std"] is tr.Verdict.OPEN


def test_spt_verdict_and_interval():
    v = tr.verdicts(tr.diagnostics(EXP_A, SQ_B, 1))
    assert v["linf"]["EC-SPT"] is tr.Verdict.TRUE
    lo, hi = v["linf"]["tau_star"]
    assert lo == pytest.approx(math.pi ** 2 / 6) and hi == pytest.approx(math.pi ** 2 / 6 + math.log(3))


def test_bounded_a_fails_wt():
    v = tr.verdicts(tr.diagnostics(SequenceFamily.constant(1), SQ_B, 1))
    assert v["linf"]["EC-WT"] is tr.Verdict.FALSE
    assert v["l2"]["kappa-EC-WT, kappa>1, all"] is tr.Verdict.TRUE


def test_superexponential_alpha_gives_point_interval():
    v = tr.verdicts(tr.diagnostics(SequenceFamily.superexponential(1.0, 2.0), SQ_B, 1))
    lo, hi = v["linf"]["tau_star"]
    assert lo == hi == pytest.approx(math.pi ** 2 / 6)


def test_l2_interval_is_capped_by_B():
    # small alpha*: log(3)/alpha* exceeds B, so the L2 interval is [B, 2B]
    v = tr.verdicts(tr.diagnostics(SequenceFamily.exponential(0.01), SQ_B, 1))
    B = math.pi ** 2 / 6
    assert v["l2"]["tau_star"] == pytest.approx((B, 2 * B))
    assert v["linf"]["tau_star"][1] == pytest.approx(B + math.log(3) / 0.01)


@given(st.floats(0.2, 2.0), st.floats(0.5, 5.0))
def test_fit_recovers_synthetic_rate(p0, c1):
    n = np.unique(np.round(np.logspace(0, 3, 30)))
    log_e = -((n / c1) ** p0)
    fit = tr.fit_rate(n, log_errors=log_e)
    assert fit.p == pytest.approx(p0, abs=1e-6)
    assert fit.C1 == pytest.approx(c1, rel=1e-6)


def _linf_samples(space, n_max=10_000, points=25):
    spec = Spectrum(space)
    n = np.unique(np.round(np.logspace(0, math.log10(n_max), points)).astype(int))
    return n, [log_error_linf_all(spec, int(k))[0] for k in n]


@pytest.mark.parametrize("b,tol", [((1,), 0.15), ((1, 2), 0.20)])
def test_fit_rate_half_omega(b, tol):
    s = len(b)
    n, le = _linf_samples(WeightedSpace(s, 0.5, [1] * s, list(b)))
    p = tr.fit_rate(n, log_errors=le).p
    assert abs(p * sum(1 / x for x in b) - 1) <= tol


@pytest.mark.parametrize("b", [(1, 1), (2, 3), (1, 2, 4)])
def test_fit_rate_families(b):
    s = len(b)
    n, le = _linf_samples(WeightedSpace(s, 0.1, [1] * s, list(b)))
    p = tr.fit_rate(n, log_errors=le).p
    assert abs(p * sum(1 / x for x in b) - 1) <= 0.2


def test_fit_rejects_bad_samples():
    n = [1, 2, 5, 10, 50, 100, 500]
    with pytest.raises(ValueError):
        tr.fit_rate(n, [0.5, 0.4, 0.45, 0.1, 0.01, 0.001, 1e-4])
    with pytest.raises(ValueError):
        tr.fit_rate(n, [0.5, 0.4, 0.3, 0.1, 0.01, 1e-300, 0.0])
    with pytest.raises(ValueError):
        tr.fit_rate(n[:5], [0.5, 0.4, 0.3, 0.1, 0.01])
    with pytest.raises(ValueError):
        tr.fit_rate(n, log_errors=-np.arange(1, 8.0), rel_err=[1e-3] * 7)


@pytest.mark.parametrize("eta", [0.05, 0.1, 0.2])
def test_wt_bound_dominates(eta):
    space = WeightedSpace(2, 0.5, {"family": "linear"}, [1, 2])
    spec = Spectrum(space)
    for eps in (0.5, 1e-2, 1e-4):
        assert complexity(spec, eps) <= tr.wt_complexity_bound(space, eps, eta)


def test_wt_bound_diverges_near_third():
    space = WeightedSpace(1, 0.5, [1], [1])
    vals = [tr.log_wt_complexity_bound(space, 0.1, eta) for eta in (0.3, 0.33, 0.333)]
    assert vals[0] < vals[1] < vals[2]
    with pytest.raises(ValueError):
        tr.wt_complexity_bound(space, 0.1, 1 / 3)


def test_spt_regression_slope():
    # measured absolute complexities grow no faster than (1 + log 1/eps)**tau
    tau = math.pi ** 2 / 6 + math.log(3) + 0.2
    eps = np.logspace(-8, -1, 12)
    x = np.log1p(-np.log(eps))
    for s in (1, 2, 4, 8):
        spec = Spectrum(WeightedSpace(s, 0.5, EXP_A, SQ_B))
        y = np.log([max(complexity(spec, e), 1) for e in eps])
        assert np.polyfit(x, y, 1)[0] <= tau


def test_table_has_single_open_cell():
    rows = tr.table1(tr.diagnostics(EXP_A, SQ_B, 2))
    cells = [r[c] for r in rows for c in ("linf", "l2")]
    assert cells.count("open") == 1
