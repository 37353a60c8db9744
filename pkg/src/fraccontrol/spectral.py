"""Dirichlet Laplacian eigenstructure on [0, 1], actuators and subregions.

Every function-space object is carried as its leading ``N`` coefficients in
the orthonormal basis ``zeta_i(x) = sqrt(2) sin(i pi x)``, ``i = 1..N``.
Entry ``i - 1`` of a modal vector holds the coefficient of ``zeta_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Zonal",
    "Pointwise",
    "Actuator",
    "Region",
    "modal_vector",
    "unit_mode",
    "eigenvalue",
    "eigenvalues",
    "eigenfunction_at",
    "synthesize",
    "actuator_coeffs",
    "region_gram",
    "restrict",
    "zero_extend_gram_apply",
    "region_norm",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Zonal:
    """Control spread uniformly over ``[beta1, beta2]``."""

    beta1: float
    beta2: float

    def __post_init__(self):
        if not 0.0 <= self.beta1 < self.beta2 <= 1.0:
            raise ValueError(
                f"zonal actuator: 0 <= beta1 < beta2 <= 1 required, "
                f"got [{self.beta1}, {self.beta2}]"
            )


@dataclass(frozen=True)
class Pointwise:
    """Control injected at a single point ``b`` (Dirac actuator)."""

    b: float

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError(f"pointwise actuator: 0 < b < 1 required, got {self.b}")


Actuator = Zonal | Pointwise


@dataclass(frozen=True)
class Region:
    """Target subinterval ``omega = [a, b]`` of the unit interval."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("region: a < b required")
        if not (0.0 <= self.a and self.b <= 1.0):
            raise ValueError(f"region: [a, b] must lie in [0, 1], got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.a) & (x <= self.b)


def modal_vector(coeffs, n: int | None = None) -> np.ndarray:
    """Validate coefficients and optionally zero-pad/truncate to length ``n``."""
    v = np.asarray(coeffs, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("modal vector needs at least one coefficient")
    if not np.all(np.isfinite(v)):
        raise ValueError("modal coefficients must be finite")
    if n is not None:
        out = np.zeros(n)
        m = min(n, v.size)
        out[:m] = v[:m]
        v = out
    return v


def unit_mode(k: int, n: int) -> np.ndarray:
    if not 1 <= k <= n:
        raise ValueError(f"mode index {k} outside 1..{n}")
    v = np.zeros(n)
    v[k - 1] = 1.0
    return v


def eigenvalue(i: int) -> float:
    if i < 1:
        raise ValueError("mode index starts at 1")
    return -(i**2) * math.pi**2


def eigenvalues(n: int) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=float)
    return -(i**2) * math.pi**2


def eigenfunction_at(i: int, x) -> float | np.ndarray:
    if i < 1:
        raise ValueError("mode index starts at 1")
    return SQRT2 * np.sin(i * math.pi * np.asarray(x, dtype=float))


def synthesize(v: np.ndarray, x) -> np.ndarray:
    """Point values sum_i v_i zeta_i(x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    i = np.arange(1, len(v) + 1)
    return SQRT2 * np.sin(math.pi * np.outer(x, i)) @ np.asarray(v, dtype=float)


def actuator_coeffs(act: Actuator, n: int) -> np.ndarray:
    """Coefficients b_i of the actuator's spatial profile against zeta_i."""
    i = np.arange(1, n + 1, dtype=float)
    if isinstance(act, Zonal):
        return SQRT2 * (np.cos(i * math.pi * act.beta1) - np.cos(i * math.pi * act.beta2)) / (
            i * math.pi
        )
    if isinstance(act, Pointwise):
        out = SQRT2 * np.sin(i * math.pi * act.b)
        # sin(i pi b) at rational b hits exact zeros that rounding smears
        # into ~1e-16; snap them so unreachable modes are detected exactly
        k = i * act.b
        out[np.isclose(k, np.round(k), rtol=0.0, atol=1e-12)] = 0.0
        return out
    raise TypeError(f"unknown actuator {act!r}")


def _sin_primitive(freq: np.ndarray, a: float, b: float) -> np.ndarray:
    """int_a^b cos(freq pi x) dx, with the freq = 0 limit b - a."""
    out = np.full(freq.shape, b - a)
    nz = freq != 0
    f = freq[nz] * math.pi
    out[nz] = (np.sin(f * b) - np.sin(f * a)) / f
    return out


def region_gram(region: Region, n: int, m: int | None = None) -> np.ndarray:
    """G[i, j] = int_omega zeta_i zeta_j dx for i <= n, j <= m (m defaults to n)."""
    m = n if m is None else m
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, m + 1)[None, :]
    diff = np.broadcast_to(i - j, (n, m)).astype(float)
    summ = np.broadcast_to(i + j, (n, m)).astype(float)
    # 2 sin(p) sin(q) = cos(p - q) - cos(p + q)
    return _sin_primitive(diff, region.a, region.b) - _sin_primitive(summ, region.a, region.b)


def restrict(v: np.ndarray, region: Region, grid) -> np.ndarray:
    """Point values of the modal function on grid points inside ``region``."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if not np.all(region.contains(grid)):
        raise ValueError(f"grid points outside region [{region.a}, {region.b}]")
    return synthesize(v, grid)


def zero_extend_gram_apply(v: np.ndarray, region: Region) -> np.ndarray:
    """Modal coefficients of the zero extension of ``v`` restricted to ``region``."""
    v = np.asarray(v, dtype=float)
    return region_gram(region, len(v)) @ v


def region_norm(v: np.ndarray, region: Region) -> float:
    """L2(omega) norm of the modal function ``v``."""
    v = np.asarray(v, dtype=float)
    q = float(v @ region_gram(region, len(v)) @ v)
    return math.sqrt(max(q, 0.0))
