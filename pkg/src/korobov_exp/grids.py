"""Regular grids, their aliasing structure, and two mesh-size constructions.

A grid with mesh sizes ``(m_1, ..., m_s)`` holds the ``n = prod m_j`` points
``(k_1/m_1, ..., k_s/m_s)``.  Its dual lattice consists of the integer
vectors with ``m_j | l_j`` for every j, and

    V_n = Z^s  intersected with  prod_j (-m_j/2, m_j/2]

is a fundamental domain: every frequency splits uniquely as ``v + l``.

The squared worst-case L_inf error of the grid spline is bounded by four
times the eigenvalue mass outside ``V_n`` and, more loosely, by ``4 n F_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .space import WeightedSpace, power_series


@dataclass(frozen=True)
class RegularGrid:
    mesh: tuple

    def __init__(self, mesh):
        mesh = tuple(int(m) for m in mesh)
        if not mesh or any(m < 1 for m in mesh):
            raise ValueError("mesh sizes must be positive integers")
        object.__setattr__(self, "mesh", mesh)

    @property
    def dim(self) -> int:
        return len(self.mesh)

    @property
    def n(self) -> int:
        return math.prod(self.mesh)

    def points(self) -> np.ndarray:
        """All grid points, shape ``(n, s)``, last coordinate varying fastest."""
        axes = [np.arange(m) / m for m in self.mesh]
        mg = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mg], axis=-1)

    def vn_range(self, j: int) -> tuple[int, int]:
        """Inclusive integer range of ``V_n`` in coordinate j (0-based)."""
        m = self.mesh[j]
        return -((m - 1) // 2), m // 2

    def vn_frequencies(self) -> np.ndarray:
        """All of ``V_n`` as an ``(n, s)`` integer array in grid order."""
        axes = [np.fft.fftfreq(m, 1.0 / m).astype(int) for m in self.mesh]
        axes = [np.where(ax == -m // 2, m // 2, ax) if m % 2 == 0 else ax
                for ax, m in zip(axes, self.mesh)]
        mg = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mg], axis=-1)


def vn_membership(grid: RegularGrid, h) -> bool:
    """True iff ``-m_j/2 < h_j <= m_j/2`` for every j."""
    h = tuple(h)
    if len(h) != grid.dim:
        raise ValueError("frequency length does not match the grid dimension")
    return all(2 * x <= m and -2 * x < m for x, m in zip(h, grid.mesh))


def dual_membership(grid: RegularGrid, l) -> bool:
    """True iff ``m_j`` divides ``l_j`` for every j."""
    l = tuple(l)
    if len(l) != grid.dim:
        raise ValueError("vector length does not match the grid dimension")
    return all(x % m == 0 for x, m in zip(l, grid.mesh))


def reduce(grid: RegularGrid, h) -> tuple[tuple, tuple]:
    """Split ``h = v + l`` with ``v`` in ``V_n`` and ``l`` in the dual lattice."""
    v, l = [], []
    for x, m in zip(h, grid.mesh):
        r = x % m
        if 2 * r > m:
            r -= m
        v.append(r)
        l.append(x - r)
    return tuple(v), tuple(l)


# --------------------------------------------------------------------------
# aliasing sums
# --------------------------------------------------------------------------

_DIRECT_HEAD = 1 << 16


def _coord_parts(space: WeightedSpace, grid: RegularGrid, j: int):
    """Per-coordinate ``(inside, outside)`` mass of ``omega**(a_j |h|**b_j)``."""
    a, b, m = space.a[j], space.b[j], grid.mesh[j]
    kappa = a * space.log_inv_omega
    lo, hi = grid.vn_range(j)
    if kappa == math.inf:
        return 1.0, 0.0
    out_hi = power_series(kappa, b, hi + 1)[0]
    out_lo = power_series(kappa, b, -lo + 1)[0]
    if max(-lo, hi) <= _DIRECT_HEAD:
        hs = np.arange(1, max(-lo, hi) + 1, dtype=float)
        w = np.exp(-kappa * hs ** b)
        inside = 1.0 + math.fsum(w[:hi]) + math.fsum(w[:-lo])
    else:
        # the tails are negligible here, so subtracting them loses nothing
        total = power_series(kappa, b)[0]
        inside = 1.0 + (total - out_hi) + (total - out_lo)
    return inside, out_hi + out_lo


def vn_mass(space: WeightedSpace, grid: RegularGrid) -> float:
    """``sum_{v in V_n} omega_v``."""
    _check(space, grid)
    return math.prod(_coord_parts(space, grid, j)[0] for j in range(grid.dim))


def out_of_vn_mass(space: WeightedSpace, grid: RegularGrid, tol: float = 1e-13) -> float:
    """``sum_{h not in V_n} omega_h``, accurate to relative ~1e-14 (well inside ``tol``).

    Computed as ``prod(V_j + O_j) - prod(V_j)`` expanded into a telescoping
    sum of nonnegative terms, so no cancellation occurs for fine grids.
    """
    _check(space, grid)
    if not tol > 0:
        raise ValueError("tol must be positive")
    parts = [_coord_parts(space, grid, j) for j in range(grid.dim)]
    total = 0.0
    for j, (_, out_j) in enumerate(parts):
        left = math.prod(p[0] for p in parts[:j])
        right = math.prod(p[0] + p[1] for p in parts[j + 1:])
        total += left * out_j * right
    return total


def f_n(space: WeightedSpace, grid: RegularGrid, tol: float = 1e-13) -> float:
    """``-1 + prod_j (1 + 2 sum_{h>=1} wbar**(a_j 2**-b_j (m_j h)**b_j))`` with ``wbar = omega**(1/2)``."""
    _check(space, grid)
    if not tol > 0:
        raise ValueError("tol must be positive")
    logs = []
    for a, b, m in zip(space.a, space.b, grid.mesh):
        kappa = 0.5 * space.log_inv_omega * a * 2.0 ** -b * float(m) ** b
        u = power_series(kappa, b)[0] if kappa < math.inf else 0.0
        logs.append(math.log1p(2.0 * u))
    return math.expm1(math.fsum(logs))


def error_bounds(space: WeightedSpace, grid: RegularGrid) -> dict:
    """The two analytic upper bounds on the grid spline's L_inf worst-case error."""
    mass = out_of_vn_mass(space, grid)
    fn = f_n(space, grid)
    return {"out_of_vn_mass": mass, "f_n": fn,
            "bound_mass": 2.0 * math.sqrt(mass),
            "bound_fn": 2.0 * math.sqrt(grid.n * fn)}


def _check(space, grid):
    if space.dim != grid.dim:
        raise ValueError(f"grid of dimension {grid.dim} for a {space.dim}-dimensional space")


# --------------------------------------------------------------------------
# mesh constructions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UexpDesign:
    grid: RegularGrid
    m: int
    B: float
    omega1: float
    C: tuple
    R: float


def _log_sup_c(s: int, B: float, c: float) -> float:
    """``log sup_{m in N} m**(1/s) exp(-c m**(1/B))``.

    In ``t = m**(1/B)`` the log is ``(B/s) log t - c t``, concave with its
    peak at ``t* = B/(s c)``; hence the integer sup sits at 1, floor(m*) or
    ceil(m*) with ``m* = t***B``.
    """

    def logg(m):
        return math.log(m) / s - c * m ** (1.0 / B)

    log_mstar = B * math.log(B / (s * c))
    if log_mstar <= 0.0:
        return logg(1)
    if log_mstar > 36.0:
        # beyond exact integer arithmetic: the continuous peak bounds the sup
        t = B / (s * c)
        return (B / s) * (math.log(t) - 1.0)
    mstar = math.exp(log_mstar)
    return max(logg(1), logg(max(1, math.floor(mstar))), logg(math.ceil(mstar)))


def uexp_design(space: WeightedSpace, eps: float, omega1: float | None = None,
                B: float | None = None) -> UexpDesign:
    """Grid whose spline has L_inf worst-case error at most ``eps``.

    ``omega1`` must lie in ``(sqrt(omega), 1)``; the default is the geometric
    midpoint ``omega**(1/4)``.  ``B`` replaces ``B(s) = sum_{j<=s} 1/b_j`` in
    the construction and must not be smaller than it.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    s = space.dim
    wbar = math.sqrt(space.omega)
    if omega1 is None:
        omega1 = math.sqrt(wbar)
    if not wbar < omega1 < 1:
        raise ValueError("omega1 must lie in (sqrt(omega), 1)")
    Bs = math.fsum(1.0 / b for b in space.b)
    if B is None:
        B = Bs
    elif B < Bs * (1 - 1e-12):
        raise ValueError(f"B={B} is smaller than B(s)={Bs}")
    L1 = -math.log(omega1)
    log_q = math.log(wbar / omega1)

    log_C = tuple(_log_sup_c(s, B, -log_q * space.a_star * 4.0 ** -bj) for bj in space.b)
    R = 0.0
    for a, b in zip(space.a, space.b):
        kappa = a * 4.0 ** -b * L1
        if kappa < math.inf:
            R = max(R, math.exp(kappa) * power_series(kappa, b)[0])

    log_den = math.log(math.log1p(eps * eps / 4.0))
    m_real = 1.0
    for a, b, lc in zip(space.a, space.b, log_C):
        if a == math.inf:
            continue
        inner = float(np.logaddexp(0.0, math.log(R) + lc + math.log(2 * s) - log_den))
        base = 4.0 ** b / a * inner / L1
        m_real = max(m_real, base ** B)
    m = math.ceil(m_real)
    mesh = tuple(max(1, _int_root_floor(m, B * b)) for b in space.b)
    return UexpDesign(RegularGrid(mesh), m, B, omega1, tuple(math.exp(x) for x in log_C), R)


def _int_root_floor(m: int, p: float) -> int:
    """``floor(m ** (1/p))`` robust against rounding of the float root."""
    r = int(math.floor(m ** (1.0 / p)))
    while (r + 1) ** p <= m:
        r += 1
    while r > 1 and r ** p > m:
        r -= 1
    return r


def mesh_uexp(space: WeightedSpace, eps: float, omega1: float | None = None,
              B: float | None = None) -> RegularGrid:
    return uexp_design(space, eps, omega1, B).grid


def _ceil(x: float) -> int:
    # absorb rounding in log(eps**-2) so exact integers are not bumped up
    return math.ceil(x * (1.0 - 1e-12))


def mesh_spt(space: WeightedSpace, eps: float, beta: float) -> RegularGrid:
    """Odd mesh sizes ``m_j = 2 ceil((log eps**-2 / (a_j**beta log omega**-1)) ** (1/b_j)) - 1``.

    The ceiling is clamped at 1, so ``m_j >= 1`` even for eps close to 1.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    num = -2.0 * math.log(eps) / space.log_inv_omega
    mesh = []
    for a, b in zip(space.a, space.b):
        x = 0.0 if a == math.inf else (num / a ** beta) ** (1.0 / b)
        mesh.append(2 * max(1, _ceil(x)) - 1)
    return RegularGrid(mesh)


def spt_exponent(space: WeightedSpace, beta: float, eta: float = 0.0) -> float:
    """Power of eps in the error guarantee of the odd-mesh construction."""
    return min(space.a_star ** (1.0 - beta), 1.0) - eta


def spt_cost_exponent(B: float, beta: float, delta: float) -> float:
    """``B + log(3)/(beta delta)``, the power of ``1 + log(1/eps)`` bounding its size."""
    return B + math.log(3.0) / (beta * delta)
