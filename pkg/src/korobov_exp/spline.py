"""Minimal-norm interpolation on regular grids.

On a grid the spline has a closed aliased-Fourier form.  With grid DFT
coefficients ``c_v`` (v in V_n) and ``l`` ranging over the dual lattice,

    sigma(f)(x) = sum_v c_v * [sum_l w_{v+l} e(v+l, x)] / [sum_l w_{v+l}]

where ``w`` are the Fourier weights and ``e(h, x) = exp(2 pi i h.x)``.
Weights and the dual lattice are tensor products, so each bracket is a
product of one-dimensional sums.  Those sums are kept relative to the weight
of their own channel ``w_v``, which keeps high channels away from underflow.

The same structure gives the power function (squared worst-case pointwise
error over the unit ball) as a sum of nonnegative terms, so it stays
accurate when the grid is fine and the error is tiny.  ``gram_oracle`` and
``power_function(..., method="gram")`` solve the dense kernel system
instead and serve as independent checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.stats import qmc

from .grids import RegularGrid, error_bounds
from .space import WeightedSpace, kernel, power_tail_bound

GRAM_MAX_N = 4096


class GramConditioningError(np.linalg.LinAlgError):
    def __init__(self, cond: float):
        super().__init__(f"Gram matrix numerically singular (condition estimate {cond:.3e}); "
                         "tighten kernel_tol")
        self.cond = cond


@dataclass
class _Channel:
    """One coordinate's aliasing data, rows indexed by the channel v_j in DFT order."""

    freqs: np.ndarray   # (m, T) integer frequencies v + m t
    ratios: np.ndarray  # (m, T) w_{v+mt} / w_v, entries <= 1
    log_w: np.ndarray   # (m,) log w_v

    @property
    def rho(self) -> np.ndarray:
        return self.ratios.sum(axis=1)


def _channel(space: WeightedSpace, j: int, m: int, cutoff: float) -> _Channel:
    kappa = space.a[j] * space.log_inv_omega
    b = space.b[j]
    v = np.fft.fftfreq(m, 1.0 / m).astype(int)
    if m % 2 == 0:
        v[v == -m // 2] = m // 2
    if kappa == math.inf:
        return _Channel(v[:, None], np.ones((m, 1)), np.zeros(m))
    # |v + m t| >= (T + 1/2) m for |t| > T; compare with the smallest channel weight
    log_w_min = -kappa * (m / 2.0) ** b
    T = 1
    while True:
        H = math.ceil((T + 0.5) * m) - 1
        if 2.0 * power_tail_bound(kappa, b, H) <= cutoff * math.exp(log_w_min) or T > 10_000:
            break
        T += 1
    t = np.arange(-T, T + 1)
    freqs = v[:, None] + m * t[None, :]
    log_w = -kappa * np.abs(v).astype(float) ** b
    ratios = np.exp(-kappa * np.abs(freqs).astype(float) ** b - log_w[:, None])
    return _Channel(freqs, ratios, log_w)


def naive_dft(grid: RegularGrid, samples) -> np.ndarray:
    """``(1/n) sum_k f(x_k) exp(-2 pi i v.x_k)`` for v in V_n, by the O(n^2) sum."""
    X = grid.points()
    V = grid.vn_frequencies()
    f = np.asarray(samples, dtype=complex).ravel()
    return np.exp(-2j * math.pi * V @ X.T) @ f / grid.n


@dataclass
class SplineInterpolant:
    """The minimal-norm interpolant of grid samples; evaluate by calling it."""

    grid: RegularGrid
    space: WeightedSpace
    grid_dft: np.ndarray      # shape grid.mesh, DFT order along each axis
    channels: list
    real: bool = True

    def alias_weight_sums(self) -> np.ndarray:
        """``sum_l w_{v+l}`` for every v in V_n, flattened in grid order."""
        logs = np.zeros(())
        for ch in self.channels:
            logs = np.add.outer(logs, ch.log_w + np.log(ch.rho))
        return np.exp(logs).ravel()

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[-1] != self.grid.dim:
            raise ValueError("evaluation points have the wrong dimension")
        out = self.grid_dft[None, ...]
        for j, ch in enumerate(self.channels):
            e = np.exp(2j * math.pi * ch.freqs[None, :, :] * x[:, j, None, None])
            phi = (e * ch.ratios[None]).sum(axis=2) / ch.rho[None, :]
            # contract axis 1 (the current coordinate) against phi
            out = np.einsum("na...,na->n...", out, phi)
        return out.real if self.real else out


def interpolate(space: WeightedSpace, grid: RegularGrid, samples,
                tail_cutoff: float = 1e-16) -> SplineInterpolant:
    """Build the spline from samples at ``grid.points()`` (same order).

    Each aliasing sum is truncated once its certified remainder is below
    ``tail_cutoff`` relative to the channel's own weight.
    """
    if space.dim != grid.dim:
        raise ValueError("space and grid dimensions differ")
    samples = np.asarray(samples)
    if samples.size != grid.n:
        raise ValueError(f"expected {grid.n} samples, got {samples.size}")
    if not tail_cutoff > 0:
        raise ValueError("tail_cutoff must be positive")
    real = not np.iscomplexobj(samples)
    coeffs = np.fft.fftn(samples.reshape(grid.mesh).astype(complex)) / grid.n
    channels = [_channel(space, j, m, tail_cutoff) for j, m in enumerate(grid.mesh)]
    return SplineInterpolant(grid, space, coeffs, channels, real)


def power_function(space: WeightedSpace, grid: RegularGrid, x, kernel_tol: float = 1e-20,
                   method: str = "spectral") -> np.ndarray:
    """Squared worst-case error of the grid spline at the points ``x``.

    ``method="spectral"`` uses the factorized aliasing formula,
    ``method="gram"`` evaluates ``K(x,x) - k_x^T G^-1 k_x`` densely.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if method == "gram":
        return _power_gram(space, grid, x, kernel_tol)
    if method != "spectral":
        raise ValueError("method must be 'spectral' or 'gram'")
    channels = [_channel(space, j, m, 1e-17) for j, m in enumerate(grid.mesh)]
    # per coordinate, summed over channels v_j:
    #   A = sum w |nu|^2 / rho,  Bj = sum w G / rho,  C = sum w rho
    # with nu = sum_t r_t e(v+mt, x), G = rho^2 - |nu|^2 >= 0 computed as a
    # double sum of r_t r_t' 2 sin^2(pi m (t - t') x).
    A, Bs, C = [], [], []
    for j, ch in enumerate(channels):
        m = grid.mesh[j]
        w = np.exp(ch.log_w)
        rho = ch.rho
        xj = x[:, j]
        nu = (np.exp(2j * math.pi * ch.freqs[None] * xj[:, None, None]) * ch.ratios[None]).sum(axis=2)
        T = ch.freqs.shape[1]
        dt = np.arange(T)[:, None] - np.arange(T)[None, :]
        rr = ch.ratios[:, :, None] * ch.ratios[:, None, :]
        sin2 = 2.0 * np.sin(math.pi * m * dt[None] * xj[:, None, None]) ** 2
        G = np.einsum("vtu,ntu->nv", rr, sin2)
        A.append((w * np.abs(nu) ** 2 / rho).sum(axis=1))
        Bs.append((w * G / rho).sum(axis=1))
        C.append(float((w * rho).sum()))
    s = grid.dim
    P = np.zeros(x.shape[0])
    left = np.ones(x.shape[0])
    for j in range(s):
        P += left * Bs[j] * math.prod(C[j + 1:])
        left = left * A[j]
    return P


def _cut_index(kappa: float, b: float, tol: float) -> int:
    """Smallest H >= 1 whose certified tail bound is at most ``tol``."""
    hi = 1
    while power_tail_bound(kappa, b, hi) > tol:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if power_tail_bound(kappa, b, mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def _kernel_ext(space: WeightedSpace, x, y, tol: float) -> np.ndarray:
    """The kernel in extended precision, each coordinate series cut below ``tol``."""
    d = np.asarray(x, dtype=np.longdouble) - np.asarray(y, dtype=np.longdouble)
    out = np.ones(d.shape[:-1], dtype=np.longdouble)
    two_pi = 2 * np.arccos(np.longdouble(-1))
    for j in range(space.dim):
        kappa = space.a[j] * space.log_inv_omega
        if kappa == math.inf:
            continue
        H = _cut_index(kappa, space.b[j], tol)
        h = np.arange(1, H + 1, dtype=np.longdouble)
        w = np.exp(-np.longdouble(kappa) * h ** np.longdouble(space.b[j]))
        f = np.ones(d.shape[:-1], dtype=np.longdouble)
        for hk, wk in zip(h, w):
            f += 2 * wk * np.cos(two_pi * hk * d[..., j])
        out *= f
    return out


class _GramSystem:
    """Gram matrix on the grid with a float64 Cholesky factor.

    Solves use iterative refinement with extended-precision residuals, so
    the accuracy is set by the long double kernel rather than by
    ``cond(G) * 2**-53``.
    """

    def __init__(self, space, grid, kernel_tol):
        if grid.n > GRAM_MAX_N:
            raise ValueError(f"dense Gram route limited to n <= {GRAM_MAX_N}")
        self.space, self.tol = space, kernel_tol
        self.nodes = grid.points()
        self.G = _kernel_ext(space, self.nodes[:, None, :], self.nodes[None, :, :], kernel_tol)
        G64 = self.G.astype(float)
        try:
            self.cf = linalg.cho_factor(G64, lower=True)
        except linalg.LinAlgError:
            raise GramConditioningError(float(np.linalg.cond(G64))) from None
        self.cond = float(np.linalg.cond(G64))
        if self.cond * np.finfo(float).eps > 0.1:
            raise GramConditioningError(self.cond)

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs)
        ext = np.clongdouble if np.iscomplexobj(rhs) else np.longdouble
        rhs = rhs.astype(ext)
        c = linalg.cho_solve(self.cf, rhs.astype(complex if ext is np.clongdouble else float)).astype(ext)
        prev = np.inf
        for _ in range(30):
            r = rhs - self.G @ c
            delta = linalg.cho_solve(self.cf, r.astype(complex if ext is np.clongdouble else float))
            c += delta.astype(ext)
            size = float(np.abs(delta).max()) / max(float(np.abs(c).max()), 1e-300)
            if size < 1e-18 or size >= prev:
                break
            prev = size
        return c

    def kernel_to_nodes(self, x) -> np.ndarray:
        return _kernel_ext(self.space, x[:, None, :], self.nodes[None, :, :], self.tol)


def _power_gram(space, grid, x, kernel_tol):
    system = _GramSystem(space, grid, kernel_tol)
    k = system.kernel_to_nodes(x)
    z = system.solve(k.T)
    kxx = _kernel_ext(space, x, x, kernel_tol)
    P = (kxx - (k.T * z).sum(axis=0)).astype(float)
    if np.any(P < -1e-9):
        raise ArithmeticError("power function significantly negative; Gram solve inaccurate")
    return np.maximum(P, 0.0)


class GramInterpolant:
    """Kernel interpolant ``sum_r c_r K(x, x_r)`` from the dense Gram system."""

    def __init__(self, space: WeightedSpace, grid: RegularGrid, samples,
                 kernel_tol: float = 1e-20):
        samples = np.asarray(samples)
        if samples.size != grid.n:
            raise ValueError(f"expected {grid.n} samples, got {samples.size}")
        self.space, self.grid = space, grid
        self._system = _GramSystem(space, grid, kernel_tol)
        self.nodes = self._system.nodes
        self.cond = self._system.cond
        self._coef = self._system.solve(samples.ravel())
        self.real = not np.iscomplexobj(samples)

    @property
    def coef(self) -> np.ndarray:
        return self._coef.astype(float if self.real else complex)

    @property
    def gram(self) -> np.ndarray:
        return self._system.G.astype(float)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        vals = self._system.kernel_to_nodes(x) @ self._coef
        return vals.astype(float if self.real else complex)


def gram_oracle(space: WeightedSpace, grid: RegularGrid, samples,
                kernel_tol: float = 1e-20) -> GramInterpolant:
    return GramInterpolant(space, grid, samples, kernel_tol)


def sample_points(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in ``[0,1)^dim``; identical for identical seeds."""
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(count)


@dataclass(frozen=True)
class WorstCaseEstimate:
    lower: float          # max of sqrt(P) over the sample
    upper_mass: float     # 2 sqrt(out-of-V_n mass)
    upper_fn: float       # 2 sqrt(n F_n)
    argmax: tuple
    sample_count: int


def empirical_wc_error(space: WeightedSpace, grid: RegularGrid, sample_count: int = 1024,
                       seed: int = 0, method: str = "spectral") -> WorstCaseEstimate:
    """Sampled lower estimate of the spline's worst-case L_inf error, with analytic upper bounds."""
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    x = sample_points(grid.dim, sample_count, seed)
    P = power_function(space, grid, x, method=method)
    i = int(np.argmax(P))
    b = error_bounds(space, grid)
    return WorstCaseEstimate(math.sqrt(max(P[i], 0.0)), b["bound_mass"], b["bound_fn"],
                             tuple(float(t) for t in x[i]), sample_count)


# --------------------------------------------------------------------------
# built-in test functions
# --------------------------------------------------------------------------

def kernel_section(space: WeightedSpace, y, kernel_tol: float = 1e-14):
    """``x -> K(x, y)``, a member of the space with norm ``sqrt(K(y, y))``."""
    y = np.asarray(y, dtype=float)

    def f(x):
        return kernel(space, np.atleast_2d(x), y[None, :], kernel_tol)

    f.norm = math.sqrt(kernel(space, y, y, kernel_tol))
    return f


def trig_polynomial(space: WeightedSpace, coeffs: dict):
    """``x -> sum_h c_h exp(2 pi i h.x)`` for a finite dict ``{h: c_h}``."""
    H = np.array([tuple(h) for h in coeffs], dtype=float).reshape(len(coeffs), space.dim)
    c = np.array(list(coeffs.values()), dtype=complex)

    def f(x):
        return np.exp(2j * math.pi * np.atleast_2d(x) @ H.T) @ c

    from .space import exponent
    f.norm = math.sqrt(sum(abs(ch) ** 2 * space.omega ** -exponent(space, h)
                           for h, ch in coeffs.items()))
    return f
