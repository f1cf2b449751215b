"""Weighted Korobov spaces with exponentially decaying Fourier weights.

A space is fixed by a dimension ``s``, a base ``omega`` in (0, 1) and two
positive sequences ``a`` and ``b``.  The Fourier weight of the frequency
``h`` is

    omega_h = omega ** sum_j a_j |h_j| ** b_j,

and the reproducing kernel is the product over coordinates of
``1 + 2 sum_{h>=1} omega**(a_j h**b_j) cos(2 pi h (x_j - y_j))``.

Every infinite series in this module is truncated with a certified bound on
the neglected tail, so each returned value carries a known error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

FAMILY_KINDS = ("explicit", "constant", "linear", "exponential", "power", "superexponential")

# default relative accuracy of every certified series
SERIES_RTOL = 1e-15


class SpaceError(ValueError):
    """Raised for an invalid space definition."""


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class SequenceFamily:
    """A positive, nondecreasing weight sequence ``j -> value(j)`` for j >= 1.

    Named families keep their closed form so the asymptotic quantities
    (sum of reciprocals, ``liminf log(a_j)/j``, divergence) can be answered
    exactly.  Explicit lists only know their first ``len(values)`` entries.

    Kinds and parameters
    --------------------
    explicit          values=[...]
    constant          value (default 1)
    linear            scale * j
    exponential       scale * exp(delta * j)
    power             scale * j ** kappa
    superexponential  scale * exp(delta * j ** power), power > 1
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise SpaceError(f"unknown sequence family {self.kind!r}")
        p = self.params
        if self.kind == "explicit":
            vals = p.get("values")
            if not vals:
                raise SpaceError("explicit family needs a non-empty 'values' list")
            if any(not (v > 0) for v in vals):
                raise SpaceError("sequence values must be positive")
        elif self.kind == "constant":
            if not p.get("value", 1.0) > 0:
                raise SpaceError("constant family needs value > 0")
        else:
            if not p.get("scale", 1.0) > 0:
                raise SpaceError("family scale must be positive")
            if self.kind in ("exponential", "superexponential") and p.get("delta", 1.0) < 0:
                raise SpaceError("delta must be nonnegative")
            if self.kind == "power" and p.get("kappa", 1.0) < 0:
                raise SpaceError("kappa must be nonnegative")
            if self.kind == "superexponential" and not p.get("power", 2.0) > 1:
                raise SpaceError("superexponential family needs power > 1")

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "SequenceFamily":
        return cls("explicit", {"values": [float(v) for v in values]})

    @classmethod
    def constant(cls, value: float = 1.0) -> "SequenceFamily":
        return cls("constant", {"value": float(value)})

    @classmethod
    def linear(cls, scale: float = 1.0) -> "SequenceFamily":
        return cls("linear", {"scale": float(scale)})

    @classmethod
    def exponential(cls, delta: float, scale: float = 1.0) -> "SequenceFamily":
        return cls("exponential", {"delta": float(delta), "scale": float(scale)})

    @classmethod
    def power(cls, kappa: float, scale: float = 1.0) -> "SequenceFamily":
        return cls("power", {"kappa": float(kappa), "scale": float(scale)})

    @classmethod
    def superexponential(cls, delta: float = 1.0, power: float = 2.0,
                         scale: float = 1.0) -> "SequenceFamily":
        return cls("superexponential",
                   {"delta": float(delta), "power": float(power), "scale": float(scale)})

    @property
    def horizon(self) -> float:
        """Largest index the family can produce (inf for named families)."""
        if self.kind == "explicit":
            return len(self.params["values"])
        return math.inf

    def value(self, j: int) -> float:
        if j < 1:
            raise IndexError("sequence indices start at 1")
        p = self.params
        if self.kind == "explicit":
            if j > len(p["values"]):
                raise IndexError(f"explicit sequence has only {len(p['values'])} entries")
            return float(p["values"][j - 1])
        if self.kind == "constant":
            return float(p.get("value", 1.0))
        scale = p.get("scale", 1.0)
        if self.kind == "linear":
            return scale * j
        if self.kind == "exponential":
            return scale * _safe_exp(p.get("delta", 1.0) * j)
        if self.kind == "power":
            return scale * float(j) ** p.get("kappa", 1.0)
        return scale * _safe_exp(p.get("delta", 1.0) * float(j) ** p.get("power", 2.0))

    def values(self, s: int) -> tuple:
        return tuple(self.value(j) for j in range(1, s + 1))

    def to_json(self):
        if self.kind == "explicit":
            return list(self.params["values"])
        return {"family": self.kind, **self.params}

    @classmethod
    def from_json(cls, obj) -> "SequenceFamily":
        if isinstance(obj, (list, tuple)):
            return cls.explicit(obj)
        if isinstance(obj, (int, float)):
            return cls.constant(obj)
        if isinstance(obj, dict):
            obj = dict(obj)
            try:
                kind = obj.pop("family")
            except KeyError:
                raise SpaceError("sequence object needs a 'family' key") from None
            if kind == "explicit":
                return cls.explicit(obj.get("values", []))
            return cls(kind, {k: float(v) for k, v in obj.items()})
        raise SpaceError(f"cannot read a sequence from {obj!r}")


def _as_family(seq) -> SequenceFamily:
    if isinstance(seq, SequenceFamily):
        return seq
    return SequenceFamily.from_json(seq)


@dataclass(frozen=True)
class WeightedSpace:
    """The space H(K_{s,a,b}); immutable once built."""

    dim: int
    omega: float
    a_seq: SequenceFamily
    b_seq: SequenceFamily
    a: tuple = field(init=False, repr=False)
    b: tuple = field(init=False, repr=False)

    def __init__(self, dim: int, omega: float, a, b):
        if int(dim) != dim or dim < 1:
            raise SpaceError("dimension must be a positive integer")
        if not 0.0 < omega < 1.0:
            raise SpaceError("omega must lie in the open interval (0, 1)")
        a_seq, b_seq = _as_family(a), _as_family(b)
        if a_seq.horizon < dim or b_seq.horizon < dim:
            raise SpaceError(f"weight sequences do not reach dimension {dim}")
        a_vals, b_vals = a_seq.values(int(dim)), b_seq.values(int(dim))
        if any(not (v > 0) for v in a_vals + b_vals):
            raise SpaceError("weights a_j and b_j must be positive")
        if any(x > y for x, y in zip(a_vals, a_vals[1:])):
            raise SpaceError("a_j must be nondecreasing in j")
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "omega", float(omega))
        object.__setattr__(self, "a_seq", a_seq)
        object.__setattr__(self, "b_seq", b_seq)
        object.__setattr__(self, "a", a_vals)
        object.__setattr__(self, "b", b_vals)

    @property
    def a_star(self) -> float:
        return min(self.a)

    @property
    def b_star(self) -> float:
        return min(self.b)

    @property
    def log_inv_omega(self) -> float:
        return -math.log(self.omega)

    def with_dim(self, s: int) -> "WeightedSpace":
        return WeightedSpace(s, self.omega, self.a_seq, self.b_seq)

    def to_dict(self) -> dict:
        return {"s": self.dim, "omega": self.omega,
                "a": self.a_seq.to_json(), "b": self.b_seq.to_json()}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedSpace":
        missing = {"s", "omega", "a", "b"} - set(d)
        if missing:
            raise SpaceError(f"space definition lacks keys {sorted(missing)}")
        return cls(d["s"], d["omega"], d["a"], d["b"])


def load_space(path) -> WeightedSpace:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpaceError(f"cannot read space file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SpaceError("space file must hold a JSON object")
    return WeightedSpace.from_dict(data)


def dump_space(space: WeightedSpace, path) -> None:
    Path(path).write_text(json.dumps(space.to_dict(), indent=2) + "\n")


# --------------------------------------------------------------------------
# certified series  sum_{h >= start} exp(-kappa * h**b)
# --------------------------------------------------------------------------

def power_tail_bound(kappa: float, b: float, H: int) -> float:
    """Upper bound on ``sum_{h > H} exp(-kappa h**b)`` for H >= 1."""
    if kappa == math.inf:
        return 0.0
    if b >= 1.0:
        # h**b - H**b >= (h - H) * b * H**(b-1) >= h - H for h > H >= 1
        r = math.exp(-kappa * b * H ** (b - 1.0))
        if r >= 1.0:
            return math.inf
        return math.exp(-kappa * H ** b) * r / (1.0 - r)
    # decreasing summand: the tail is dominated by the integral from H
    inv_b = 1.0 / b
    z = kappa * H ** b
    log_val = (-math.log(b) - inv_b * math.log(kappa) + special.gammaln(inv_b)
               + math.log(max(special.gammaincc(inv_b, z), 1e-320)))
    return math.exp(log_val)


def power_series(kappa: float, b: float, start: int = 1, rtol: float = SERIES_RTOL,
                 atol: float = 0.0) -> tuple[float, float]:
    """Certified ``sum_{h >= start} exp(-kappa h**b)``.

    Returns ``(value, err)`` with the exact sum inside ``value +- err``.
    Summation stops once the tail bound is below ``max(atol, rtol*value)``.
    """
    if start < 1:
        raise ValueError("start must be >= 1")
    if kappa == math.inf:
        return 0.0, 0.0
    if not kappa > 0:
        raise ValueError("series diverges for kappa <= 0")
    parts = []
    h0, chunk = start, 64
    while True:
        h = np.arange(h0, h0 + chunk, dtype=float)
        terms = np.exp(-kappa * h ** b)
        parts.append(math.fsum(terms))
        H = h0 + chunk - 1
        total = math.fsum(parts)
        bound = power_tail_bound(kappa, b, H)
        if bound <= max(atol, rtol * total) or bound < 1e-300:
            return total + bound / 2.0, bound / 2.0 + 4e-16 * total
        h0, chunk = H + 1, min(2 * chunk, 1 << 16)
        if h0 > 1 << 40:
            raise ArithmeticError("series truncation failed to converge")


# --------------------------------------------------------------------------
# frequency-level operations
# --------------------------------------------------------------------------

def exponent(space: WeightedSpace, h) -> float:
    """``E(h) = sum_j a_j |h_j| ** b_j``; ``omega_h = omega ** E(h)``."""
    h = tuple(int(x) for x in h)
    if len(h) != space.dim:
        raise ValueError(f"frequency of length {len(h)} for a {space.dim}-dimensional space")
    return math.fsum(a * abs(x) ** b for a, b, x in zip(space.a, space.b, h) if x != 0)


def log_eigenvalue(space: WeightedSpace, h) -> float:
    """``log omega_h = -E(h) log(1/omega)``."""
    return -exponent(space, h) * space.log_inv_omega


@dataclass(frozen=True)
class FrequencyTerm:
    freq: tuple
    exponent: float
    log_eigenvalue: float

    @property
    def eigenvalue(self) -> float:
        return math.exp(self.log_eigenvalue)


def coord_series(space: WeightedSpace, j: int, scale: float = 1.0,
                 tol: float | None = None) -> float:
    """``T_j(scale) = sum_{h>=1} omega ** (scale * a_j * h ** b_j)`` (j is 1-based).

    With ``tol`` given the result is within ``tol`` absolutely, otherwise within
    ``SERIES_RTOL`` relatively.
    """
    return coord_series_err(space, j, scale, tol)[0]


def coord_series_err(space: WeightedSpace, j: int, scale: float = 1.0,
                     tol: float | None = None, start: int = 1) -> tuple[float, float]:
    if not 1 <= j <= space.dim:
        raise IndexError(f"coordinate {j} outside 1..{space.dim}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    kappa = scale * space.a[j - 1] * space.log_inv_omega
    if tol is None:
        return power_series(kappa, space.b[j - 1], start)
    if not tol > 0:
        raise ValueError("tol must be positive")
    return power_series(kappa, space.b[j - 1], start, rtol=0.0, atol=tol)


def log_trace(space: WeightedSpace, scale: float = 1.0) -> float:
    """``log prod_j (1 + 2 T_j(scale))``; at scale 1 the sum of all eigenvalues."""
    return math.fsum(math.log1p(2.0 * coord_series(space, j, scale))
                     for j in range(1, space.dim + 1))


def initial_error_linf(space: WeightedSpace, tol: float = 1e-12) -> float:
    """Norm of the embedding into L_inf, ``prod_j (1 + 2 T_j(1)) ** (1/2)``.

    The series are summed to ``SERIES_RTOL`` which is far inside ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    return math.exp(0.5 * log_trace(space))


def _coord_weights(space: WeightedSpace, j: int, atol: float) -> np.ndarray:
    """``omega**(a_j h**b_j)`` for h = 1..H with the neglected tail below ``atol``."""
    kappa = space.a[j - 1] * space.log_inv_omega
    b = space.b[j - 1]
    if kappa == math.inf:
        return np.zeros(0)
    H = 1
    while power_tail_bound(kappa, b, H) > atol:
        H *= 2
    lo, hi = H // 2, H
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if power_tail_bound(kappa, b, mid) > atol:
            lo = mid
        else:
            hi = mid
    h = np.arange(1, hi + 1, dtype=float)
    return np.exp(-kappa * h ** b)


def kernel(space: WeightedSpace, x, y, tol: float = 1e-13):
    """Reproducing kernel ``K(x, y)``; ``x`` and ``y`` broadcast over leading axes.

    Each coordinate factor is truncated so that the product is within ``tol``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != space.dim or y.shape[-1] != space.dim:
        raise ValueError("points must have the space dimension as last axis")
    s = space.dim
    S = [1.0 + 2.0 * coord_series(space, j) for j in range(1, s + 1)]
    total = math.prod(S)
    out = None
    for j in range(1, s + 1):
        w = _coord_weights(space, j, tol * S[j - 1] / (4.0 * s * total))
        d = x[..., j - 1] - y[..., j - 1]
        f = np.ones(np.broadcast(d).shape)
        for k, wk in enumerate(w, start=1):
            f += 2.0 * wk * np.cos(2.0 * math.pi * k * d)
        out = f if out is None else out * f
    return out if out.ndim else float(out)
