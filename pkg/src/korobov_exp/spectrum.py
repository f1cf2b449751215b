"""Ordered eigenvalues of W_s with certified partial and tail sums.

The eigenvalues are the Fourier weights ``omega ** E(h)`` over all
``h in Z^s``.  They are produced in nonincreasing order by a best-first
search over nonnegative representatives ``m in Z_{>=0}^s``; each
representative stands for the ``2 ** #{j : m_j > 0}`` sign patterns that
share its exponent.

The search tree gives every ``m != 0`` the single parent obtained by
decrementing its last nonzero coordinate.  A child never has a smaller
exponent than its parent, so popping the heap yields exponents in
nondecreasing order without a visited set.

Tail sums ``sum_{k>n} lambda_k`` are needed far below the rounding level of
the trace (they underflow for n ~ 10^4), so they are computed in the log
domain: directly over enumerated terms, plus a certified bound on every
term not yet enumerated.
"""

from __future__ import annotations

import heapq
import itertools
import math
from array import array

import numpy as np

from .space import FrequencyTerm, WeightedSpace, coord_series, log_trace, power_series

TIE_FUZZ = 1e-14

# relative accuracy demanded of tail sums
TAIL_RTOL = 1e-11

_ETAS = (0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01)


class ResourceCapExceeded(RuntimeError):
    """The enumeration would exceed its configured term or frontier cap."""


class Spectrum:
    """Lazily extended list of the largest eigenvalues of one space.

    Single writer: ``extend_to`` mutates the object.  Arrays returned by the
    accessors are copies and may be shared freely.
    """

    def __init__(self, space: WeightedSpace, max_terms: int = 4_000_000,
                 max_frontier: int = 4_000_000):
        self.space = space
        self.max_terms = max_terms
        self.max_frontier = max_frontier
        self._L = space.log_inv_omega
        self._heap = [(0.0, (0,) * space.dim)]
        self._freqs: list[tuple] = []
        self._exps = array("d")
        self._psum = [0.0]
        self._sum = 0.0
        self._comp = 0.0
        self._trace_cache: dict[float, float] = {}

    # -- enumeration -------------------------------------------------------

    def _exponent(self, m) -> float:
        a, b = self.space.a, self.space.b
        return sum(a[j] * m[j] ** b[j] for j in range(len(m)) if m[j])

    def _push_children(self, m):
        s = self.space.dim
        last = max((j for j in range(s) if m[j]), default=0)
        for j in range(last, s):
            if self.space.a[j] == math.inf:
                continue
            child = m[:j] + (m[j] + 1,) + m[j + 1:]
            heapq.heappush(self._heap, (self._exponent(child), child))
        if len(self._heap) > self.max_frontier:
            raise ResourceCapExceeded(
                f"frontier exceeded {self.max_frontier} entries after {len(self)} terms")

    def _emit(self, E: float, m):
        support = [j for j in range(len(m)) if m[j]]
        for signs in itertools.product((1, -1), repeat=len(support)):
            h = list(m)
            for j, sg in zip(support, signs):
                h[j] = sg * m[j]
            self._freqs.append(tuple(h))
            self._exps.append(E)
            # Neumaier-compensated running sum of eigenvalues
            lam = math.exp(-E * self._L)
            t = self._sum + lam
            if abs(self._sum) >= lam:
                self._comp += (self._sum - t) + lam
            else:
                self._comp += (lam - t) + self._sum
            self._sum = t
            self._psum.append(t + self._comp)

    def _step(self):
        """Emit the next group of representatives with (fuzzily) equal exponent."""
        E0, m0 = heapq.heappop(self._heap)
        group = [(E0, m0)]
        self._push_children(m0)
        lim = E0 + TIE_FUZZ * max(1.0, E0)
        while self._heap and self._heap[0][0] <= lim:
            E, m = heapq.heappop(self._heap)
            group.append((E, m))
            self._push_children(m)
        group.sort(key=lambda t: t[1])
        for E, m in group:
            self._emit(E, m)
        if len(self._freqs) > self.max_terms:
            raise ResourceCapExceeded(f"more than {self.max_terms} eigenvalues requested")

    def extend_to(self, k: int) -> list[FrequencyTerm]:
        """Make sure the ``k`` largest eigenvalues are known; return them."""
        if k < 1:
            raise ValueError("k must be positive")
        self.ensure(k)
        return [self.term(i) for i in range(1, k + 1)]

    def ensure(self, k: int) -> None:
        while len(self._freqs) < k:
            if not self._heap:
                raise ResourceCapExceeded("space has fewer than k nonzero eigenvalues")
            self._step()

    def extend_to_exponent(self, T: float) -> None:
        """Enumerate every frequency with exponent <= T."""
        while self._heap and self._heap[0][0] <= T:
            self._step()

    def __len__(self) -> int:
        return len(self._freqs)

    @property
    def frontier_exponent(self) -> float:
        """Every frequency not yet enumerated has at least this exponent."""
        return self._heap[0][0] if self._heap else math.inf

    # -- accessors (1-based k) ---------------------------------------------

    def term(self, k: int) -> FrequencyTerm:
        self.ensure(k)
        E = self._exps[k - 1]
        return FrequencyTerm(self._freqs[k - 1], E, -E * self._L)

    def exponent(self, k: int) -> float:
        self.ensure(k)
        return self._exps[k - 1]

    def log_eigenvalue(self, k: int) -> float:
        """``log lambda_{s,k}`` (<= 0)."""
        return -self.exponent(k) * self._L

    def eigenvalue(self, k: int) -> float:
        return math.exp(self.log_eigenvalue(k))

    def exponents(self, k: int) -> np.ndarray:
        self.ensure(k)
        return np.frombuffer(self._exps, dtype=float, count=k).copy()

    def frequencies(self, k: int) -> list[tuple]:
        self.ensure(k)
        return self._freqs[:k]

    # -- sums --------------------------------------------------------------

    def partial_sum(self, n: int) -> float:
        """``sum_{k<=n} lambda_k``."""
        if n > 0:
            self.ensure(n)
        return self._psum[n]

    def log_trace(self, eta: float = 1.0) -> float:
        """``log sum_k lambda_k ** eta``."""
        if eta not in self._trace_cache:
            self._trace_cache[eta] = log_trace(self.space, eta)
        return self._trace_cache[eta]

    @property
    def trace(self) -> float:
        return math.exp(self.log_trace())

    def log_remainder_bound(self) -> float:
        """Log of an upper bound on the sum of all eigenvalues not yet enumerated.

        With T the frontier exponent, for any eta in (0, 1)
        ``sum_{E(h) >= T} omega**E(h) <= omega**((1-eta) T) * sum_h omega**(eta E(h))``.
        """
        T = self.frontier_exponent
        if T == math.inf:
            return -math.inf
        return min(-(1.0 - eta) * T * self._L + self.log_trace(eta) for eta in _ETAS)

    def _tail_direct(self, n: int) -> tuple[float, float]:
        """Log tail over enumerated terms n+1.. plus certified remainder."""
        self.ensure(n + 1)
        E1 = self._exps[n]
        # enumerate far enough that the remainder is negligible against omega**E1
        need = min(((E1 * self._L + 35.0 + self.log_trace(eta)) / ((1.0 - eta) * self._L))
                   for eta in _ETAS)
        self.extend_to_exponent(need)
        while True:
            logs = -np.frombuffer(self._exps, dtype=float)[n:] * self._L
            top = float(logs.max())
            log_S = top + math.log(math.fsum(np.exp(logs - top)))
            log_R = self.log_remainder_bound()
            if log_R - log_S < math.log(TAIL_RTOL) or log_R == -math.inf:
                break
            self.extend_to_exponent(self.frontier_exponent * 1.25 + 1.0)
        half_ratio = 0.5 * math.exp(log_R - log_S) if log_R > -math.inf else 0.0
        return log_S + math.log1p(half_ratio), half_ratio + 1e-15 * (1 + math.log10(len(logs)))

    def log_tail_sum(self, n: int) -> tuple[float, float]:
        """``(log sum_{k>n} lambda_k, r)`` with the true log within ``+- r``."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        ltr = self.log_trace()
        if n == 0:
            return ltr, 4e-15 * self.space.dim
        tr = math.exp(ltr)
        diff = tr - self.partial_sum(n)
        abs_err = tr * (4e-15 * self.space.dim + 1e-15)
        if diff > 0 and abs_err <= TAIL_RTOL * diff:
            return math.log(diff), abs_err / diff
        return self._tail_direct(n)

    def tail_sum_err(self, n: int) -> tuple[float, float]:
        """``(sum_{k>n} lambda_k, certified absolute error)``; value clamped at 0."""
        lv, r = self.log_tail_sum(n)
        v = math.exp(lv)
        return max(v, 0.0), v * math.expm1(r)

    def tail_sum(self, n: int) -> float:
        return self.tail_sum_err(n)[0]


def d_eta(space: WeightedSpace, eta: float) -> float:
    """``D_eta = sum_{h>=1} omega ** (eta a_* (h**b_* - 1))``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    kappa = eta * space.a_star * space.log_inv_omega
    val, _ = power_series(kappa, space.b_star)
    return math.exp(kappa) * val


def log_eigenvalue_upper_bound(space: WeightedSpace, n: int, eta: float) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    D = d_eta(space, eta)
    s = math.fsum(math.log1p(2.0 * D * space.omega ** (eta * a)) for a in space.a)
    return (s - math.log(n)) / eta


def eigenvalue_upper_bound(space: WeightedSpace, n: int, eta: float) -> float:
    """Upper bound ``n**(-1/eta) prod_j (1 + 2 D_eta omega**(eta a_j)) ** (1/eta)`` on lambda_{s,n}."""
    lv = log_eigenvalue_upper_bound(space, n, eta)
    return math.exp(lv) if lv < 709 else math.inf


def per_coordinate_trace(space: WeightedSpace) -> list[float]:
    """The factors ``1 + 2 T_j(1)`` whose product is the trace."""
    return [1.0 + 2.0 * coord_series(space, j) for j in range(1, space.dim + 1)]
