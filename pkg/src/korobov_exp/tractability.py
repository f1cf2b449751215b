"""Tractability diagnostics, verdicts, and empirical rate fitting.

Every verdict is a lookup from three asymptotic quantities of the weight
sequences:

    B      = sum_j 1/b_j                      (finite or not)
    alpha* = liminf_j log(a_j) / j
    lim a_j = infinity                         (true or not)

Named families answer these in closed form.  Explicit lists only describe
finitely many terms, so anything that depends on a limit is reported as
undetermined rather than extrapolated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .minimal_errors import log_c_const
from .space import SequenceFamily, WeightedSpace, power_series
from .spectrum import d_eta

__all__ = [
    "SequenceFamily", "Verdict", "Diagnostics", "diagnostics", "verdicts", "table1",
    "RateFit", "fit_rate", "wt_complexity_bound", "log_wt_complexity_bound",
    "TABLE_ROWS", "OPEN_QUESTION",
]

UNKNOWN = "unknown"
UNDETERMINABLE = "undeterminable from finite data"

OPEN_QUESTION = ("kappa-EC-WT with kappa > 1 for L2-approximation and function values "
                 "remains an open question")


class Verdict(str, enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDETERMINED = "undetermined"
    OPEN = "open"

    @classmethod
    def of(cls, flag) -> "Verdict":
        if flag is None:
            return cls.UNDETERMINED
        return cls.TRUE if flag else cls.FALSE

    def __str__(self):
        return self.value


def _and(*flags):
    if any(f is False for f in flags):
        return False
    if any(f is None for f in flags):
        return None
    return True


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostics:
    s: int
    B_s: float
    B: float | str            # float (possibly inf) or UNKNOWN
    alpha_star: float | str   # float (possibly inf) or UNDETERMINABLE
    limit_a_infinite: bool | None

    @property
    def B_finite(self) -> bool | None:
        return None if isinstance(self.B, str) else self.B < math.inf

    @property
    def alpha_positive(self) -> bool | None:
        return None if isinstance(self.alpha_star, str) else self.alpha_star > 0

    def to_dict(self) -> dict:
        return {"s": self.s, "B_s": _num(self.B_s), "B": _num(self.B),
                "alpha_star": _num(self.alpha_star),
                "limit_a_infinite": Verdict.of(self.limit_a_infinite).value}


def _num(x):
    if isinstance(x, str):
        return x
    return "inf" if x == math.inf else x


def _reciprocal_sum(b: SequenceFamily) -> float | str:
    p = b.params
    if b.kind == "explicit":
        return UNKNOWN
    if b.kind in ("constant", "linear"):
        return math.inf
    scale = p.get("scale", 1.0)
    if b.kind == "power":
        kappa = p.get("kappa", 1.0)
        return float(special.zeta(kappa)) / scale if kappa > 1 else math.inf
    delta = p.get("delta", 1.0)
    if delta == 0:
        return math.inf
    if b.kind == "exponential":
        return 1.0 / (scale * math.expm1(delta))
    # sum_j exp(-delta j**power)
    return power_series(delta, p.get("power", 2.0))[0] / scale


def _alpha_star(a: SequenceFamily) -> float | str:
    if a.kind == "explicit":
        return UNDETERMINABLE
    if a.kind in ("constant", "linear", "power"):
        return 0.0
    delta = a.params.get("delta", 1.0)
    if a.kind == "exponential":
        return delta
    return math.inf if delta > 0 else 0.0


def _a_diverges(a: SequenceFamily) -> bool | None:
    p = a.params
    if a.kind == "explicit":
        return None
    if a.kind == "constant":
        return False
    if a.kind == "linear":
        return True
    if a.kind == "power":
        return p.get("kappa", 1.0) > 0
    return p.get("delta", 1.0) > 0


def diagnostics(family_a, family_b, s: int) -> Diagnostics:
    """Asymptotic weight quantities; ``B_s`` needs ``s`` terms of b."""
    a = family_a if isinstance(family_a, SequenceFamily) else SequenceFamily.from_json(family_a)
    b = family_b if isinstance(family_b, SequenceFamily) else SequenceFamily.from_json(family_b)
    if s < 1 or a.horizon < s or b.horizon < s:
        raise ValueError(f"families must reach dimension s={s}")
    B_s = math.fsum(1.0 / v for v in b.values(s))
    return Diagnostics(s, B_s, _reciprocal_sum(b), _alpha_star(a), _a_diverges(a))


def space_diagnostics(space: WeightedSpace) -> Diagnostics:
    return diagnostics(space.a_seq, space.b_seq, space.dim)


# --------------------------------------------------------------------------
# verdicts and the comparison table
# --------------------------------------------------------------------------

TABLE_ROWS = (
    ("EXP", "for all considered a and b", "for all considered a and b"),
    ("UEXP", "iff B < inf", "iff B < inf"),
    ("kappa-EC-WT, kappa>1, all", "iff lim a_j = inf", "for all considered a and b"),
    ("kappa-EC-WT, kappa>1, std", "iff lim a_j = inf", "open"),
    ("EC-WT", "iff lim a_j = inf", "iff lim a_j = inf"),
    ("EC-PT", "iff EC-SPT", "iff EC-SPT"),
    ("EC-SPT", "iff B < inf and alpha* > 0", "iff B < inf and alpha* > 0"),
)


def _tau_interval(diag: Diagnostics, l2: bool):
    """Interval containing the EC-SPT exponent, or None when EC-SPT fails or is undetermined."""
    if _and(diag.B_finite, diag.alpha_positive) is not True:
        return None
    B = diag.B
    width = 0.0 if diag.alpha_star == math.inf else math.log(3.0) / diag.alpha_star
    if l2:
        width = min(B, width)
    return (B, B + width)


def verdicts(diag: Diagnostics) -> dict:
    """Verdicts for L_inf (both information classes, both criteria) and L2."""
    uexp = diag.B_finite
    wt = diag.limit_a_infinite
    spt = _and(diag.B_finite, diag.alpha_positive)
    return {
        "linf": {
            "EXP": Verdict.TRUE,
            "UEXP": Verdict.of(uexp),
            "kappa-EC-WT, kappa>1, all": Verdict.of(wt),
            "kappa-EC-WT, kappa>1, std": Verdict.of(wt),
            "EC-WT": Verdict.of(wt),
            "EC-PT": Verdict.of(spt),
            "EC-SPT": Verdict.of(spt),
            "EC-WT+UEXP": Verdict.of(_and(wt, uexp)),
            "tau_star": _tau_interval(diag, l2=False),
        },
        "l2": {
            "EXP": Verdict.TRUE,
            "UEXP": Verdict.of(uexp),
            "kappa-EC-WT, kappa>1, all": Verdict.TRUE,
            "kappa-EC-WT, kappa>1, std": Verdict.OPEN,
            "EC-WT": Verdict.of(wt),
            "EC-PT": Verdict.of(spt),
            "EC-SPT": Verdict.of(spt),
            "EC-WT+UEXP": Verdict.of(_and(wt, uexp)),
            "tau_star": _tau_interval(diag, l2=True),
        },
        "p_star_s": 1.0 / diag.B_s,
        "p_star": (None if diag.B_finite is None
                   else (1.0 / diag.B if diag.B_finite else 0.0)),
    }


def table1(diag: Diagnostics) -> list[dict]:
    """Rows of the L_inf / L2 comparison table with the verdicts for these weights."""
    v = verdicts(diag)
    return [{"property": name, "condition_linf": c_inf, "condition_l2": c_2,
             "linf": v["linf"][name].value, "l2": v["l2"][name].value}
            for name, c_inf, c_2 in TABLE_ROWS]


# --------------------------------------------------------------------------
# rate fitting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    """Fit of ``e(n) = C q**((n/C1)**p)`` with ``q = 1/e`` fixed.

    With q pinned, ``log log(C/e(n)) = p log n - p log C1``; any other q
    only shifts C1.
    """

    n: tuple
    log_errors: tuple
    p: float
    q: float
    C: float
    C1: float
    residual: float
    used: tuple = field(default=())


def fit_rate(n, errors=None, *, log_errors=None, rel_err=None, C: float = 1.0,
             floor: float = 1e-300) -> RateFit:
    """Least-squares exponential-convergence rate from the tail half of the samples.

    Give either ``errors`` or ``log_errors`` (the latter for values below
    double range).  Samples must be strictly decreasing.  Plain errors at or
    below ``floor`` count as saturated, and any sample whose certified
    relative error ``rel_err`` exceeds 1e-6 is uncertified; both are
    rejected, as are tail errors not below ``C``.
    """
    n = np.asarray(n, dtype=float)
    if (errors is None) == (log_errors is None):
        raise ValueError("give exactly one of errors and log_errors")
    if log_errors is None:
        errors = np.asarray(errors, dtype=float)
        if np.any(errors <= 0):
            raise ValueError("errors must be positive")
        if np.any(errors <= floor):
            raise ValueError("saturated samples at the tolerance floor")
        log_errors = np.log(errors)
    log_errors = np.asarray(log_errors, dtype=float)
    if n.shape != log_errors.shape or n.ndim != 1:
        raise ValueError("n and errors must be matching 1-d sequences")
    if len(n) < 6:
        raise ValueError("need at least 6 samples")
    if np.any(np.diff(n) <= 0):
        raise ValueError("n must be strictly increasing")
    if n[0] < 1 or n[-1] / n[0] < 100:
        raise ValueError("samples must span at least two decades of n >= 1")
    if np.any(np.diff(log_errors) >= 0):
        raise ValueError("errors must be strictly decreasing")
    if rel_err is not None and np.any(np.asarray(rel_err, dtype=float) > 1e-6):
        raise ValueError("samples not certified to relative tolerance 1e-6")
    tail = slice(len(n) // 2, None)
    x = np.log(n[tail])
    gap = math.log(C) - log_errors[tail]
    if np.any(gap <= 0):
        raise ValueError("tail errors must lie below C")
    y = np.log(gap)
    A = np.vstack([x, np.ones_like(x)]).T
    (p, k), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([p, k]) - y) ** 2)))
    C1 = math.exp(-k / p) if p != 0 else math.inf
    return RateFit(tuple(n.tolist()), tuple(log_errors.tolist()), float(p), math.exp(-1.0),
                   C, C1, resid, tuple(n[tail].tolist()))


# --------------------------------------------------------------------------
# kappa-EC-WT complexity bound
# --------------------------------------------------------------------------

def log_wt_complexity_bound(space: WeightedSpace, eps: float, eta: float) -> float:
    """Log of ``bound - 1``; see ``wt_complexity_bound``."""
    if not 0 < eta < 1.0 / 3.0:
        raise ValueError("eta must lie in (0, 1/3)")
    if not eps > 0:
        raise ValueError("eps must be positive")
    D = d_eta(space, eta)
    log_prod = math.fsum(math.log1p(2.0 * D * space.omega ** (eta * a)) for a in space.a)
    log_const = float(np.logaddexp(-0.5 * math.log(2.0), log_c_const(1.0 / (2.0 * eta))))
    inner = log_const - math.log(eps) + log_prod / (2.0 * eta)
    return inner * 2.0 * eta / (1.0 - 3.0 * eta)


def wt_complexity_bound(space: WeightedSpace, eps: float, eta: float) -> float:
    """``1 + ((sqrt(2)/2 + C(1/(2 eta))) / eps * prod_j (1 + 2 D_eta omega**(eta a_j))**(1/(2 eta)))**(2 eta/(1 - 3 eta))``.

    Upper bound on the absolute L_inf complexity for all linear functionals,
    valid for ``0 < eta < 1/3``; ``inf`` when it leaves double range.
    """
    lb = log_wt_complexity_bound(space, eps, eta)
    return 1.0 + math.exp(lb) if lb < 709 else math.inf
