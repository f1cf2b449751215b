"""Brute-force reference computations for tests and ``--verify``.

Nothing here shares summation code with the fast paths: eigenvalues come
from sorting a full box of frequencies, lattice sums from summing that box
and bounding what lies outside by an integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .grids import RegularGrid
from .space import WeightedSpace
from .spline import gram_oracle  # noqa: F401  (re-exported)

BOX_LIMIT = 10 ** 7


class CertificateFailure(RuntimeError):
    """The box is too small for the requested result; enlarge ``H``."""


@dataclass(frozen=True)
class BoxEnumeration:
    H: tuple
    frequencies: np.ndarray   # (k, s), ascending exponent
    exponents: np.ndarray     # (k,)
    boundary: float           # every frequency outside the box has at least this exponent


def _box_exponents(space: WeightedSpace, H):
    axes = [np.arange(-h, h + 1) for h in H]
    grids = np.meshgrid(*axes, indexing="ij")
    hs = np.stack([g.ravel() for g in grids], axis=-1)
    E = np.zeros(len(hs))
    for j in range(space.dim):
        h = np.abs(hs[:, j]).astype(float)
        E = E + np.where(h > 0, space.a[j] * h ** space.b[j], 0.0)
    return hs, E


def _widths(space, H):
    H = (int(H),) * space.dim if np.isscalar(H) else tuple(int(h) for h in H)
    if len(H) != space.dim or min(H) < 0:
        raise ValueError("H must be a nonnegative integer or one per coordinate")
    if math.prod(2 * h + 1 for h in H) > BOX_LIMIT:
        raise ValueError(f"box with {math.prod(2 * h + 1 for h in H)} points exceeds {BOX_LIMIT}")
    return H


def brute_spectrum(space: WeightedSpace, H, k: int) -> BoxEnumeration:
    """The k smallest exponents, read off a sorted box ``|h_j| <= H_j``.

    Certified only if every frequency outside the box has a strictly larger
    exponent than the k-th one; otherwise ``CertificateFailure``.
    """
    H = _widths(space, H)
    hs, E = _box_exponents(space, H)
    if k < 1 or k > len(E):
        raise ValueError(f"k must lie in [1, {len(E)}]")
    order = np.argsort(E, kind="stable")[:k]
    boundary = min(space.a[j] * float(H[j] + 1) ** space.b[j] for j in range(space.dim))
    if not boundary > E[order[-1]]:
        raise CertificateFailure(
            f"k-th exponent {E[order[-1]]:.6g} not below boundary {boundary:.6g}; enlarge H")
    return BoxEnumeration(H, hs[order], E[order], boundary)


def _integral_tail(kappa: float, b: float, H: int) -> float:
    """``int_H^inf exp(-kappa x**b) dx`` which dominates ``sum_{h>H} exp(-kappa h**b)``."""
    if kappa == math.inf:
        return 0.0
    x = kappa * float(H) ** b
    return special.gammaincc(1.0 / b, x) * special.gamma(1.0 / b) / (b * kappa ** (1.0 / b))


def brute_out_of_vn(space: WeightedSpace, grid: RegularGrid, H) -> tuple[float, float]:
    """Interval ``(lo, hi)`` containing ``sum_{h not in V_n} omega_h``.

    ``lo`` sums the box directly; ``hi`` adds an integral majorant for the
    frequencies outside it.
    """
    if space.dim != grid.dim:
        raise ValueError("space and grid dimensions differ")
    H = _widths(space, H)
    if any(2 * h < m for h, m in zip(H, grid.mesh)):
        raise CertificateFailure("box does not cover V_n")
    hs, E = _box_exponents(space, H)
    m = np.array(grid.mesh)
    inside = np.all((2 * hs <= m) & (-2 * hs < m), axis=1)
    w = space.omega ** E
    box_out = float(np.sort(w[~inside]).sum())
    # outside the box some |h_j| > H_j:  sum <= sum_j tail_j * prod_{i != j} S_i
    L = space.log_inv_omega
    tails, totals = [], []
    for j in range(space.dim):
        kappa = space.a[j] * L
        t = 2.0 * _integral_tail(kappa, space.b[j], H[j])
        hh = np.arange(1, H[j] + 1, dtype=float)
        box_j = 1.0 + 2.0 * float(np.exp(-kappa * hh ** space.b[j]).sum())
        tails.append(t)
        totals.append(box_j + t)
    outer = sum(t * math.prod(totals[:j] + totals[j + 1:]) for j, t in enumerate(tails))
    pad = 1e-12 * (box_out + 1e-300)
    return max(box_out - pad, 0.0), box_out + pad + outer


def brute_spectrum_auto(space: WeightedSpace, k: int) -> BoxEnumeration:
    """``brute_spectrum`` with a box sized from a first, uncertified pass.

    The k-th exponent T of any box bounds the true k-th exponent from above,
    so widths ``H_j = ceil((T/a_j)**(1/b_j))`` contain everything needed.
    """
    H = max(1, math.ceil(k ** (1.0 / space.dim)))
    H = [H] * space.dim
    while math.prod(2 * h + 1 for h in H) < k:
        H = [2 * h for h in H]
    _, E = _box_exponents(space, _widths(space, H))
    T = float(np.partition(E, k - 1)[k - 1])
    H = [0 if a == math.inf else math.ceil((T / a) ** (1.0 / b))
         for a, b in zip(space.a, space.b)]
    return brute_spectrum(space, H, k)
