"""n-th minimal worst-case errors and information complexities.

For the class of all linear functionals the errors are spectral:

    L2:    e(n) = lambda_{n+1} ** (1/2)
    Linf:  e(n) = (sum_{k>n} lambda_k) ** (1/2)

and the optimal algorithm in both norms is truncation of the Fourier series
to the frequencies of the n largest eigenvalues.  For function values only
(``std``) the package reports bounds, never exact values.

Errors can underflow, so every quantity also has a ``log_`` form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .space import WeightedSpace, initial_error_linf, log_trace
from .spectrum import Spectrum

PROBLEMS = ("l2", "linf")
CRITERIA = ("abs", "norm")
INFO_CLASSES = ("all", "std")

# tolerance fuzz at the defining threshold of a complexity
THRESHOLD_FUZZ = 1e-10


class CertificationStall(RuntimeError):
    """A threshold comparison could not be decided at the available accuracy.

    ``n_lo`` and ``n_hi`` bracket the true complexity.
    """

    def __init__(self, n_lo: int, n_hi: int, msg: str = ""):
        super().__init__(msg or f"complexity only bracketed to [{n_lo}, {n_hi}]")
        self.n_lo = n_lo
        self.n_hi = n_hi


@dataclass(frozen=True)
class ErrorQuery:
    space: WeightedSpace
    n: int
    problem: str = "linf"
    info_class: str = "all"
    criterion: str = "abs"

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}")
        if self.info_class not in INFO_CLASSES:
            raise ValueError(f"info_class must be one of {INFO_CLASSES}")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if self.n < 0:
            raise ValueError("n must be nonnegative")


def _spectrum(space_or_spec) -> Spectrum:
    if isinstance(space_or_spec, Spectrum):
        return space_or_spec
    return Spectrum(space_or_spec)


def log_error_l2_all(spec, n: int) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 0.5 * _spectrum(spec).log_eigenvalue(n + 1)


def error_l2_all(spec, n: int) -> float:
    """n-th minimal L2 error for all linear functionals, ``sqrt(lambda_{n+1})``.

    ``spec`` may be a space or a ``Spectrum`` (reused across calls).
    """
    return math.exp(log_error_l2_all(spec, n))


def log_error_linf_all(spec, n: int) -> tuple[float, float]:
    """``(log e, r)``: log of the n-th minimal L_inf error, within ``+- r``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    lv, r = _spectrum(spec).log_tail_sum(n)
    return 0.5 * lv, 0.5 * r


def error_linf_all(spec, n: int) -> float:
    """n-th minimal L_inf error for all linear functionals."""
    return math.exp(log_error_linf_all(spec, n)[0])


def log_cri(space: WeightedSpace, criterion: str) -> float:
    if criterion == "abs":
        return 0.0
    if criterion == "norm":
        return 0.5 * log_trace(space)
    raise ValueError(f"criterion must be one of {CRITERIA}")


def _decide(log_value: float, r: float, log_thr: float):
    """True/False when ``value <= thr`` is certified (with fuzz), None if not."""
    lim = log_thr + THRESHOLD_FUZZ
    if log_value + r <= lim:
        return True
    if log_value - r > lim:
        return False
    if r <= THRESHOLD_FUZZ:
        return log_value <= lim
    return None


def complexity_bracket(space_or_spec, eps: float, problem: str = "linf",
                       criterion: str = "abs") -> tuple[int, int]:
    """Smallest n with e(n) <= eps * CRI, bracketed as ``(n_lo, n_hi)``.

    ``n_lo == n_hi`` whenever every comparison could be certified.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if problem not in PROBLEMS:
        raise ValueError(f"problem must be one of {PROBLEMS}")
    spec = _spectrum(space_or_spec)
    log_eps = math.log(eps)
    if problem == "l2":
        # criteria coincide for L2: the initial error is 1
        log_thr = 2.0 * log_eps

        def test(n):
            return _decide(spec.log_eigenvalue(n + 1), 1e-15, log_thr)
    else:
        log_thr = 2.0 * (log_eps + log_cri(spec.space, criterion))

        def test(n):
            lv, r = spec.log_tail_sum(n)
            return _decide(lv, r, log_thr)

    # the error is nonincreasing in n: gallop to an upper end, then bisect
    if test(0) is True:
        return 0, 0
    lo, hi = 0, 1
    while True:
        if test(hi) is True:
            break
        lo, hi = hi, 2 * hi
    # invariant: test(lo) is not True, test(hi) is True
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if test(mid) is True:
            hi = mid
        else:
            lo = mid
    # uncertified points just below hi widen the bracket
    n_lo = hi
    while n_lo > 0 and test(n_lo - 1) is None:
        n_lo -= 1
    return n_lo, hi


def complexity(space_or_spec, eps: float, problem: str = "linf",
               criterion: str = "abs") -> int:
    """Information complexity for all linear functionals.

    L2:   min{n : lambda_{n+1} <= eps**2}
    Linf: min{n : sum_{k>n} lambda_k <= eps**2 * CRI**2}

    Equality at the threshold counts as satisfied.  Raises
    ``CertificationStall`` when only a bracket can be certified.
    """
    lo, hi = complexity_bracket(space_or_spec, eps, problem, criterion)
    if lo != hi:
        raise CertificationStall(lo, hi)
    return hi


def lower_bound_norm(space: WeightedSpace, eps: float) -> float:
    """``(1 - eps**2) prod_j (1 + 2 omega**a_j)``, a lower bound for the normalized L_inf complexity."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return (1.0 - eps * eps) * math.prod(1.0 + 2.0 * space.omega ** a for a in space.a)


def lemma2_bound(spec, n: int, l2_std_bound: float) -> float:
    """Upper bound on the n-th minimal L_inf error from function values.

    ``e_linf_all(n) + n * l2_std_bound`` where ``l2_std_bound`` is any
    certified upper bound on the n-th minimal L2 error from function values.
    """
    if l2_std_bound < 0:
        raise ValueError("l2_std_bound must be nonnegative")
    return error_linf_all(spec, n) + n * l2_std_bound


def c_const(x: float) -> float:
    """``C(x) = 2**(2x(2x+1)+x-1/2) ((2x+1)/(2x-1))**(1/2) (1+1/(2x))**x`` for x > 1/2."""
    return math.exp(log_c_const(x))


def log_c_const(x: float) -> float:
    if not x > 0.5:
        raise ValueError("C(x) needs x > 1/2")
    return ((2 * x * (2 * x + 1) + x - 0.5) * math.log(2.0)
            + 0.5 * math.log((2 * x + 1) / (2 * x - 1)) + x * math.log1p(1 / (2 * x)))


def lemma3_bounds(n: int, beta_s: float, M_s: float) -> tuple[float, float]:
    """L_inf error bounds from the eigenvalue decay ``lambda_{s,n} <= M_s**2 / n**(2 beta_s)``.

    Returns ``(all_bound, std_bound)``; the second entry is ``nan`` when
    ``beta_s <= 3/2``, where no bound for function values follows.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not beta_s > 0.5:
        raise ValueError("beta_s must exceed 1/2")
    if not M_s > 0:
        raise ValueError("M_s must be positive")
    all_bound = M_s / math.sqrt(2 * beta_s - 1) * n ** -(beta_s - 0.5)
    if beta_s <= 1.5:
        return all_bound, math.nan
    log_std = (math.log(M_s) + float(np.logaddexp(-0.5 * math.log(2.0), log_c_const(beta_s)))
               - (beta_s - 1.5) * math.log(n))
    return all_bound, math.exp(log_std) if log_std < 709 else math.inf


def l2_std_bound_lemma3(n: int, beta_s: float, M_s: float) -> float:
    """``M_s C(beta_s) / n**(beta_s - 1/2)``, the L2 bound used inside the function-value case."""
    if not beta_s > 0.5:
        raise ValueError("beta_s must exceed 1/2")
    return math.exp(math.log(M_s) + log_c_const(beta_s) - (beta_s - 0.5) * math.log(n))


def lp_complexity_bracket(spec, eps: float) -> tuple[int, int]:
    """Absolute-criterion L_p complexities, p in [2, inf], lie between these two."""
    spec = _spectrum(spec)
    return complexity(spec, eps, "l2"), complexity(spec, eps, "linf", "abs")


def initial_error(space: WeightedSpace, problem: str = "linf") -> float:
    if problem == "l2":
        return 1.0
    return initial_error_linf(space)
