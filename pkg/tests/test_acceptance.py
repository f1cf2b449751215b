"""Acceptance gate: one test, and one PASS/FAIL line, per criterion."""

import json
import math
import time

import numpy as np
import pytest

from korobov_exp import cli, grids, oracle, spline
from korobov_exp import minimal_errors as me
from korobov_exp import tractability as tr
from korobov_exp.space import WeightedSpace
from korobov_exp.spectrum import Spectrum

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def report(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[num] = line
    print(line)
    assert ok, line


A_FAMILIES = {"const": [1], "linear": {"family": "linear"}}
B_FAMILIES = {"const": [1], "square": {"family": "power", "kappa": 2}}


def _seq(fam, s):
    return fam * s if isinstance(fam, list) else fam


# 1 -------------------------------------------------------------------------

def test_1_spectral_oracle_equivalence():
    t0 = time.perf_counter()
    checked, bad = 0, []
    for s in (1, 2, 3):
        for an, a in A_FAMILIES.items():
            for bn, b in B_FAMILIES.items():
                space = WeightedSpace(s, 0.5, _seq(a, s), _seq(b, s))
                got = Spectrum(space).exponents(1000)
                ref = oracle.brute_spectrum_auto(space, 1000).exponents
                # both sorted: equal multisets up to 1e-14 fuzz means equal entrywise
                if len(got) != len(ref) or np.abs(np.sort(got) - ref).max() > 1e-14 * max(1, ref[-1]):
                    bad.append((s, an, bn))
                checked += 1
    dt = time.perf_counter() - t0
    report(1, not bad and checked == 12 and dt < 30,
           f"{checked} spaces, mismatches {bad}, {dt:.1f}s")


# 2 -------------------------------------------------------------------------

def test_2_closed_forms():
    worst_init = worst_zero = 0.0
    for omega in (0.1, 0.5, 0.9):
        for s in range(1, 13):
            space = WeightedSpace(s, omega, [1] * s, [1] * s)
            ref = (1 + 2 * omega / (1 - omega)) ** (s / 2)
            init = me.initial_error(space)
            worst_init = max(worst_init, abs(init - ref) / ref)
            worst_zero = max(worst_zero, abs(me.error_linf_all(space, 0) - init) / init)
    report(2, worst_init <= 1e-10 and worst_zero <= 1e-10,
           f"max rel. dev. initial error {worst_init:.1e}, e(0) vs initial {worst_zero:.1e}")


# 3 -------------------------------------------------------------------------

def test_3_error_orderings():
    points = violations = 0
    for s in (1, 2, 3):
        for omega in (0.3, 0.7):
            space = WeightedSpace(s, omega, {"family": "linear"}, [1, 2, 1.5][:s])
            spec = Spectrum(space)
            for n in (0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584):
                points += 1
                if me.error_l2_all(spec, n) > me.error_linf_all(spec, n) * (1 + 1e-12):
                    violations += 1
            for eps in np.logspace(-8, -0.05, 16):
                points += 1
                if me.complexity(spec, eps, "linf", "norm") > me.complexity(spec, eps, "linf", "abs"):
                    violations += 1
    report(3, points >= 200 and violations == 0, f"{points} points, {violations} violations")


# 4 -------------------------------------------------------------------------

def _fitted_p(space):
    spec = Spectrum(space)
    n = np.unique(np.round(np.logspace(0, 4, 25)).astype(int))
    logs = [me.log_error_linf_all(spec, int(k)) for k in n]
    return tr.fit_rate(n, log_errors=[v for v, _ in logs], rel_err=[r for _, r in logs]).p


def test_4_rate_recovery():
    t0 = time.perf_counter()
    cases = [((1,), 0.15), ((1, 2), 0.20), ((1, 2, 4), 0.20)]
    parts, ok = [], True
    for b, tol in cases:
        s = len(b)
        target = 1 / sum(1 / x for x in b)
        p = _fitted_p(WeightedSpace(s, 0.1, [1] * s, list(b)))
        dev = abs(p / target - 1)
        ok &= dev <= tol
        parts.append(f"b={b}: p={p:.3f} vs {target:.3f} ({dev:.1%} <= {tol:.0%})")
    dt = time.perf_counter() - t0
    report(4, ok and dt < 120, f"omega=0.1; " + "; ".join(parts) + f"; {dt:.1f}s")


# 5 -------------------------------------------------------------------------

GRID_CASES = [
    (WeightedSpace(1, 0.5, [1], [1]), [(1,), (2,), (5,), (8,), (16,), (33,)]),
    (WeightedSpace(2, 0.7, [1, 1.5], [1, 2]), [(1, 1), (2, 2), (4, 3), (8, 4), (6, 6)]),
    (WeightedSpace(2, 0.5, {"family": "exponential", "delta": 1},
                   {"family": "power", "kappa": 2}), [(3, 1), (5, 3), (9, 3), (17, 3)]),
    (WeightedSpace(3, 0.6, [1, 1, 2], [1, 1, 1]), [(2, 2, 2), (4, 4, 4), (3, 3, 1), (6, 4, 2)]),
    (WeightedSpace(4, 0.4, {"family": "linear"}, [1, 1.5, 2, 2.5]), [(2, 2, 2, 2), (4, 3, 2, 1)]),
]


def test_5_grid_bound_chain():
    rng = np.random.default_rng(0)
    grids_done = chain_viol = 0
    worst_res = worst_gap = 0.0
    gram_checked = 0
    for space, meshes in GRID_CASES:
        for mesh in meshes:
            g = grids.RegularGrid(mesh)
            b = grids.error_bounds(space, g)
            est = spline.empirical_wc_error(space, g, 1000, seed=0)
            if not (est.lower <= b["bound_mass"] <= b["bound_fn"] * (1 + 1e-12)):
                chain_viol += 1
            f = rng.normal(size=g.n)
            sigma = spline.interpolate(space, g, f)
            worst_res = max(worst_res, float(np.abs(sigma(g.points()) - f).max()))
            if g.n <= 64:
                gram = spline.gram_oracle(space, g, f)
                x = rng.random((100, g.dim))
                worst_gap = max(worst_gap, float(np.abs(sigma(x) - gram(x)).max()))
                gram_checked += 1
            grids_done += 1
    ok = grids_done >= 20 and chain_viol == 0 and worst_res <= 1e-8 and worst_gap <= 1e-8
    report(5, ok, f"{grids_done} grids, {chain_viol} chain violations, max residual {worst_res:.1e}, "
                  f"max fast/Gram gap {worst_gap:.1e} over {gram_checked} grids")


# 6 -------------------------------------------------------------------------

def test_6_construction_guarantees():
    misses = []
    spaces = [WeightedSpace(4, 0.5, [1] * 4, [1] * 4),
              WeightedSpace(4, 0.5, {"family": "exponential", "delta": 1},
                            {"family": "power", "kappa": 2})]
    for base in spaces:
        for s in (1, 2, 4):
            space = base.with_dim(s)
            for k in range(1, 7):
                eps = 10.0 ** -k
                g = grids.mesh_uexp(space, eps)
                if not grids.error_bounds(space, g)["bound_fn"] <= eps:
                    misses.append((s, eps))
    space = WeightedSpace(16, 0.5, {"family": "exponential", "delta": 1},
                          {"family": "power", "kappa": 2})
    eps = np.logspace(-8, -1, 50)
    n = [grids.mesh_spt(space, e, 0.5).n for e in eps]
    slope = float(np.polyfit(np.log1p(-np.log(eps)), np.log(n), 1)[0])
    limit = math.pi ** 2 / 6 + math.log(3) / 0.5 + 0.15
    report(6, not misses and slope <= limit,
           f"uexp misses {misses}; spt slope {slope:.3f} <= {limit:.3f}")


# 7 -------------------------------------------------------------------------

def test_7_lower_bound():
    points = violations = 0
    # s = 4 with omega = 0.8 needs more eigenvalues than the enumeration cap allows
    cases = [(s, w) for s in (1, 2, 3) for w in (0.2, 0.5, 0.8)] + [(4, 0.2), (4, 0.5)]
    for s, omega in cases:
        space = WeightedSpace(s, omega, {"family": "linear"}, [1, 2, 1, 3][:s])
        spec = Spectrum(space)
        for eps in (0.9, 0.5, 0.1, 1e-2, 1e-4, 1e-6):
            points += 1
            if me.complexity(spec, eps, "linf", "norm") < me.lower_bound_norm(space, eps) - 1:
                violations += 1
    report(7, violations == 0, f"{points} points, {violations} violations")


# 8 -------------------------------------------------------------------------

def test_8_wt_bound():
    points = violations = 0
    for s in (1, 2, 3):
        for a in ([1] * s, {"family": "linear"}, {"family": "exponential", "delta": 1}):
            space = WeightedSpace(s, 0.5, a, [1, 2, 3][:s])
            spec = Spectrum(space)
            for eps in (0.5, 1e-1, 1e-2, 1e-3, 1e-4):
                n = me.complexity(spec, eps, "linf", "abs")
                for eta in (0.05, 0.1, 0.2):
                    points += 1
                    if n > tr.wt_complexity_bound(space, eps, eta):
                        violations += 1
    report(8, violations == 0, f"{points} points, {violations} violations")


# 9 -------------------------------------------------------------------------

T, F, O = "true", "false", "open"
ROWS = ("EXP", "UEXP", "kappa-EC-WT, kappa>1, all", "kappa-EC-WT, kappa>1, std",
        "EC-WT", "EC-PT", "EC-SPT")
# (linf, l2) per row, worked out by hand from B, alpha* and lim a_j
EXPECTED = {
    "a=1, b=1": ({"family": "constant"}, {"family": "constant"},
                 [(T, T), (F, F), (F, T), (F, O), (F, F), (F, F), (F, F)], None),
    "a=j, b=1": ({"family": "linear"}, {"family": "constant"},
                 [(T, T), (F, F), (T, T), (T, O), (T, T), (F, F), (F, F)], None),
    "a=j, b=j^2": ({"family": "linear"}, {"family": "power", "kappa": 2},
                   [(T, T), (T, T), (T, T), (T, O), (T, T), (F, F), (F, F)], None),
    "a=e^j, b=j^2": ({"family": "exponential", "delta": 1}, {"family": "power", "kappa": 2},
                     [(T, T), (T, T), (T, T), (T, O), (T, T), (T, T), (T, T)],
                     (math.pi ** 2 / 6, math.pi ** 2 / 6 + math.log(3))),
    "a=1, b=j^2": ({"family": "constant"}, {"family": "power", "kappa": 2},
                   [(T, T), (T, T), (F, T), (F, O), (F, F), (F, F), (F, F)], None),
    "a=e^(j^2), b=2^j": ({"family": "superexponential", "delta": 1, "power": 2},
                         {"family": "exponential", "delta": math.log(2)},
                         [(T, T), (T, T), (T, T), (T, O), (T, T), (T, T), (T, T)], (1.0, 1.0)),
}


def test_9_table_replication(tmp_path, capsys):
    mismatches = []
    for name, (a, b, cells, tau) in EXPECTED.items():
        out = tmp_path / "report.json"
        code = cli.main(["tractability-report", "--a", json.dumps(a), "--b", json.dumps(b),
                         "--format", "json", "--out", str(out)])
        doc = json.loads(out.read_text())
        got = {r["property"]: (r["linf"], r["l2"]) for r in doc["table"]}
        for row, want in zip(ROWS, cells):
            if got.get(row) != want:
                mismatches.append((name, row, got.get(row), want))
        if tau is not None and not np.allclose(doc["tau_star_linf"], tau, rtol=1e-12):
            mismatches.append((name, "tau", doc["tau_star_linf"], tau))
        if code != 0:
            mismatches.append((name, "exit", code, 0))
    capsys.readouterr()
    report(9, not mismatches, f"{len(EXPECTED)} families x {len(ROWS)} rows x 2 columns, "
                              f"mismatches {mismatches}")
