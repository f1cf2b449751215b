"""Command-line interface: ``korobov-exp <subcommand> [options]``.

Exit codes: 0 success, 2 usage or malformed input, 3 certification failure
(stalled threshold decision or a failed ``--verify`` comparison),
4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import grids, minimal_errors as me, oracle, spline, tractability as tr
from .space import SequenceFamily, SpaceError, WeightedSpace, load_space
from .spectrum import ResourceCapExceeded, Spectrum

EXIT_USAGE = 2
EXIT_CERTIFICATION = 3
EXIT_RESOURCE = 4


class CertificationFailed(RuntimeError):
    pass


# --------------------------------------------------------------------------
# argument parsing helpers
# --------------------------------------------------------------------------

def parse_eps(text: str) -> list[float]:
    """``0.1,0.01`` or a log-spaced range ``lo:hi:count``."""
    if ":" in text:
        lo, hi, count = text.split(":")
        vals = np.logspace(math.log10(float(lo)), math.log10(float(hi)), int(count))
        return [float(v) for v in vals]
    return [float(v) for v in text.split(",") if v]


def parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


@dataclass(frozen=True)
class SweepSpec:
    space: WeightedSpace
    s_values: tuple
    eps: tuple
    problem: str
    info_class: str
    criterion: str
    out: str | None

    def spaces(self):
        for s in self.s_values:
            yield self.space if s == self.space.dim else self.space.with_dim(s)


def _space(args) -> WeightedSpace:
    if not args.space:
        raise SpaceError("--space FILE is required")
    return load_space(args.space)


def _s_values(args, space) -> tuple:
    vals = tuple(parse_ints(args.s)) if args.s else (space.dim,)
    if any(not 1 <= s <= args.max_s for s in vals):
        raise SpaceError(f"s values must lie in [1, {args.max_s}]")
    return vals


def _sweep(args, eps_max: float = 1.0) -> SweepSpec:
    space = _space(args)
    eps = tuple(parse_eps(args.eps)) if args.eps else ()
    if any(not 0 < e <= eps_max for e in eps):
        raise SpaceError(f"eps values must lie in (0, {eps_max:g}]")
    return SweepSpec(space, _s_values(args, space), eps, args.problem, args.info_class,
                     args.criterion, args.out)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _clean(x):
    """Replace non-finite floats so the JSON is standard."""
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def emit(rows, args, document=None):
    """Write rows as CSV, or ``document`` (default: the rows) as JSON."""
    if args.format == "json":
        text = json.dumps(_clean(document if document is not None else rows), indent=2,
                          default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _csv_cell(v) for k, v in r.items()})
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_spectrum(args):
    space = _space(args)
    rows = []
    for s in _s_values(args, space):
        sp = space if s == space.dim else space.with_dim(s)
        spec = Spectrum(sp)
        terms = spec.extend_to(args.k)
        if args.verify:
            ref = oracle.brute_spectrum_auto(sp, args.k).exponents
            got = np.sort([t.exponent for t in terms])
            if not np.allclose(got, ref, rtol=1e-14, atol=1e-14):
                raise CertificationFailed("enumerated spectrum differs from the brute-force box")
        for k, t in enumerate(terms, 1):
            rows.append({"s": s, "k": k, "h": list(t.freq), "exponent": t.exponent,
                         "log_eigenvalue": t.log_eigenvalue + 0.0, "eigenvalue": t.eigenvalue})
    emit(rows, args)


def _best_grid(space: WeightedSpace, n: int) -> grids.RegularGrid:
    """Greedy grid with at most n points, refining the coordinate that removes most mass."""
    mesh = [1] * space.dim
    while True:
        best = None
        for j in range(space.dim):
            trial = mesh.copy()
            trial[j] += 1
            if math.prod(trial) > n:
                continue
            mass = grids.out_of_vn_mass(space, grids.RegularGrid(trial))
            if best is None or mass < best[0]:
                best = (mass, trial)
        if best is None:
            return grids.RegularGrid(mesh)
        mesh = best[1]


def cmd_errors(args):
    space = _space(args)
    ns = parse_ints(args.n)
    rows = []
    for s in _s_values(args, space):
        sp = space if s == space.dim else space.with_dim(s)
        spec = Spectrum(sp)
        log_cri = 0.0 if args.problem == "l2" else me.log_cri(sp, args.criterion)
        for n in ns:
            if args.problem == "l2":
                le, r = me.log_error_l2_all(spec, n), 1e-15
            else:
                le, r = me.log_error_linf_all(spec, n)
            row = {"s": s, "n": n, "problem": args.problem, "criterion": args.criterion,
                   "class": args.info_class}
            if args.info_class == "all":
                row.update(error=math.exp(le - log_cri), log_error=le - log_cri, log_error_radius=r)
            else:
                # any grid with at most n points is an admissible algorithm
                g = _best_grid(sp, max(n, 1))
                upper = (grids.error_bounds(sp, g)["bound_mass"] if n > 0
                         else me.initial_error(sp, args.problem))
                row.update(lower=math.exp(le - log_cri), upper=upper / math.exp(log_cri),
                           grid=list(g.mesh))
            rows.append(row)
    emit(rows, args)


def cmd_complexity(args):
    sweep = _sweep(args)
    if not sweep.eps:
        raise SpaceError("--eps is required")
    rows = []
    for sp in sweep.spaces():
        spec = Spectrum(sp)
        for eps in sweep.eps:
            try:
                n = me.complexity(spec, eps, sweep.problem, sweep.criterion)
            except me.CertificationStall as exc:
                raise CertificationFailed(
                    f"s={sp.dim} eps={eps!r}: complexity only bracketed to [{exc.n_lo}, {exc.n_hi}]") from exc
            row = {"s": sp.dim, "eps": eps, "problem": sweep.problem,
                   "criterion": sweep.criterion, "class": sweep.info_class}
            if sweep.info_class == "all":
                row["n"] = n
            else:
                target = eps * math.exp(me.log_cri(sp, sweep.criterion)) \
                    if sweep.problem == "linf" else eps
                row["n_lower"] = n
                row["n_upper"] = grids.mesh_uexp(sp, target).n if target < 1 else 1
            rows.append(row)
    emit(rows, args)


def _design(args, sp, eps):
    if args.construction == "spt":
        return grids.mesh_spt(sp, eps, args.beta), {}
    d = grids.uexp_design(sp, eps, args.omega1)
    return d.grid, {"m": d.m, "B": d.B, "omega1": d.omega1, "R": d.R}


def cmd_grid_design(args):
    sweep = _sweep(args, eps_max=1.0 - 1e-300)
    if not sweep.eps:
        raise SpaceError("--eps is required")
    rows = []
    for sp in sweep.spaces():
        for eps in sweep.eps:
            g, extra = _design(args, sp, eps)
            b = grids.error_bounds(sp, g)
            rows.append({"s": sp.dim, "eps": eps, "construction": args.construction,
                         "mesh": list(g.mesh), "n": g.n, **b, **extra})
    emit(rows, args)


def _test_function(space, spec_text: str):
    kind, _, rest = spec_text.partition(":")
    if kind == "kernel":
        y = [float(v) for v in rest.split(",")] if rest else [0.0] * space.dim
        if len(y) != space.dim:
            raise SpaceError("kernel section point has the wrong dimension")
        return spline.kernel_section(space, y)
    if kind == "trig":
        coeffs = {}
        for term in rest.split(";"):
            h, _, c = term.partition("=")
            key = tuple(int(v) for v in h.split(","))
            if len(key) != space.dim:
                raise SpaceError("trig frequency has the wrong dimension")
            coeffs[key] = complex(c) if c else 1.0
        return spline.trig_polynomial(space, coeffs)
    raise SpaceError(f"unknown test function {spec_text!r} (use kernel:y1,... or trig:h=c;...)")


def cmd_spline_demo(args):
    space = _space(args)
    if args.mesh:
        g = grids.RegularGrid(parse_ints(args.mesh))
    elif args.eps:
        g, _ = _design(args, space, parse_eps(args.eps)[0])
    else:
        raise SpaceError("give --mesh or --eps")
    if g.dim != space.dim:
        raise SpaceError("mesh length does not match the space dimension")
    f = _test_function(space, args.function)
    samples = f(g.points())
    sigma = spline.interpolate(space, g, samples)
    x = spline.sample_points(g.dim, args.samples, args.seed)
    wc = spline.empirical_wc_error(space, g, args.samples, args.seed)
    doc = {
        "mesh": list(g.mesh), "n": g.n, "function": args.function, "f_norm": f.norm,
        "residual_max": float(np.abs(sigma(g.points()) - samples).max()),
        "sampled_error_max": float(np.abs(sigma(x) - f(x)).max()),
        "sampled_error_bound": wc.upper_mass * f.norm,
        "wc_lower": wc.lower, "wc_upper_mass": wc.upper_mass, "wc_upper_fn": wc.upper_fn,
        "wc_argmax": list(wc.argmax), "sample_count": args.samples, "seed": args.seed,
    }
    if args.verify:
        if g.n > spline.GRAM_MAX_N:
            raise SpaceError(f"--verify needs n <= {spline.GRAM_MAX_N}")
        gram = spline.gram_oracle(space, g, samples)
        gap = float(np.abs(sigma(x) - gram(x)).max())
        doc["gram_gap"] = gap
        if gap > 1e-8 or wc.lower > wc.upper_mass + 1e-12:
            emit([doc], args, doc)
            raise CertificationFailed(f"spline paths disagree (gap {gap:.3e})")
    emit([doc], args, doc)


def _families(args):
    if args.space:
        space = load_space(args.space)
        return space.a_seq, space.b_seq, space.dim
    if not (args.a and args.b):
        raise SpaceError("give --space or both --a and --b")
    try:
        a = SequenceFamily.from_json(json.loads(args.a))
        b = SequenceFamily.from_json(json.loads(args.b))
    except json.JSONDecodeError as exc:
        raise SpaceError(f"family must be JSON: {exc}") from exc
    return a, b, None


def cmd_tractability_report(args):
    a, b, dim = _families(args)
    s = parse_ints(args.s)[0] if args.s else (dim or 1)
    diag = tr.diagnostics(a, b, s)
    v = tr.verdicts(diag)
    table = tr.table1(diag)
    extra = {"EC-WT+UEXP": v["linf"]["EC-WT+UEXP"].value,
             "tau_star_linf": v["linf"]["tau_star"], "tau_star_l2": v["l2"]["tau_star"],
             "p_star_s": v["p_star_s"], "p_star": v["p_star"]}
    doc = {"a": a.to_json(), "b": b.to_json(), "diagnostics": diag.to_dict(),
           "table": table, **extra, "open_question": tr.OPEN_QUESTION}
    if args.format == "json":
        emit(table, args, doc)
        return
    rows = [{"property": r["property"], "linf": r["linf"], "l2": r["l2"]} for r in table]
    rows.append({"property": "EC-WT+UEXP", "linf": extra["EC-WT+UEXP"], "l2": extra["EC-WT+UEXP"]})
    rows.append({"property": "tau_star", "linf": _interval(extra["tau_star_linf"]),
                 "l2": _interval(extra["tau_star_l2"])})
    emit(rows, args)


def _interval(iv):
    return "none" if iv is None else f"[{iv[0]!r}, {iv[1]!r}]"


def cmd_convergence_study(args):
    space = _space(args)
    rows = []
    for s in _s_values(args, space):
        sp = space if s == space.dim else space.with_dim(s)
        spec = Spectrum(sp)
        ns = np.unique(np.round(np.logspace(0, math.log10(args.n_max), args.points)).astype(int))
        les, radii = [], []
        for n in ns:
            if args.problem == "l2":
                les.append(me.log_error_l2_all(spec, int(n)))
                radii.append(1e-15)
            else:
                le, r = me.log_error_linf_all(spec, int(n))
                les.append(le)
                radii.append(r)
        if args.problem == "l2":
            # keep the last n of every tie run so errors strictly decrease
            keep = [i for i in range(len(les)) if i == len(les) - 1 or les[i + 1] < les[i]]
            ns, les, radii = ns[keep], [les[i] for i in keep], [radii[i] for i in keep]
        fit = tr.fit_rate(ns, log_errors=les, rel_err=radii)
        for n, le in zip(ns, les):
            rows.append({"s": s, "n": int(n), "error": math.exp(le), "log_error": le,
                         "fitted_p": fit.p, "inverse_B_s": 1.0 / math.fsum(1.0 / b for b in sp.b)})
    emit(rows, args)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", metavar="FILE", help="JSON space definition")
    common.add_argument("--s", metavar="LIST", help="comma-separated dimensions")
    common.add_argument("--max-s", type=int, default=16, help="largest admissible s")
    common.add_argument("--eps", metavar="LIST|RANGE", help="'e1,e2,...' or log range 'lo:hi:count'")
    common.add_argument("--problem", choices=me.PROBLEMS, default="linf")
    common.add_argument("--class", dest="info_class", choices=me.INFO_CLASSES, default="all")
    common.add_argument("--criterion", choices=me.CRITERIA, default="abs")
    common.add_argument("--beta", type=float, default=0.5)
    common.add_argument("--omega1", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--verify", action="store_true", help="cross-check against brute-force oracles")
    common.add_argument("--out", metavar="FILE")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="korobov-exp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("spectrum", parents=[common], help="largest eigenvalues")
    q.add_argument("--k", type=int, default=20)
    q.set_defaults(func=cmd_spectrum)

    q = sub.add_parser("errors", parents=[common], help="n-th minimal errors")
    q.add_argument("--n", default="0,1,2,4,8,16,32,64")
    q.set_defaults(func=cmd_errors)

    q = sub.add_parser("complexity", parents=[common], help="information complexity")
    q.set_defaults(func=cmd_complexity)

    for name, func, hlp in (("grid-design", cmd_grid_design, "mesh sizes for a target error"),
                            ("spline-demo", cmd_spline_demo, "interpolate a test function")):
        q = sub.add_parser(name, parents=[common], help=hlp)
        q.add_argument("--construction", choices=("uexp", "spt"), default="uexp")
        q.set_defaults(func=func)
    q.add_argument("--mesh", metavar="LIST")
    q.add_argument("--function", default="kernel", help="kernel:y1,... or trig:h1,h2=c;...")
    q.add_argument("--samples", type=int, default=1024)

    q = sub.add_parser("tractability-report", parents=[common], help="verdict table")
    q.add_argument("--a", help="JSON sequence, e.g. '{\"family\": \"exponential\", \"delta\": 1}'")
    q.add_argument("--b", help="JSON sequence, e.g. '{\"family\": \"power\", \"kappa\": 2}'")
    q.set_defaults(func=cmd_tractability_report)

    q = sub.add_parser("convergence-study", parents=[common], help="error decay and fitted rate")
    q.add_argument("--n-max", type=int, default=10_000)
    q.add_argument("--points", type=int, default=25)
    q.set_defaults(func=cmd_convergence_study)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (SpaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CertificationFailed, me.CertificationStall, oracle.CertificateFailure) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except (ResourceCapExceeded, MemoryError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
