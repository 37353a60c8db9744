"""Modal solution operators and the mild solution of the delayed system.

Per mode ``i`` (eigenvalue ``lam_i = -i^2 pi^2``) the state obeys

    z_i(t) = E_{r,1}(lam_i t^r) z0_i
             + b_i int_{-h}^{t-h} k_i(t - h - s) w(s) ds,
    k_i(s) = s^(r-1) r E^2_{r,r+1}(lam_i s^r) = s^(r-1) E_{r,r}(lam_i s^r),

where ``w`` is the history ``phi`` on ``[-h, 0]`` and the control ``u`` on
``[0, tau - h]``.  Both are piecewise linear on their grids, and the
convolution is integrated exactly against them using the antiderivatives

    K0(S) = int_0^S k = S^r E_{r,r+1}(lam S^r),
    K1(S) = int_0^S (S - s) k ds = S^(r+1) E_{r,r+2}(lam S^r),

so the weak singularity at ``s = 0`` needs no special treatment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mittag_leffler import DEFAULT_TOL, ml2, ml3
from .spectral import Actuator, actuator_coeffs, eigenvalues, modal_vector

__all__ = [
    "FracParams",
    "ControlSignal",
    "Trajectory",
    "IntegrabilityError",
    "rr_apply",
    "sr_apply",
    "kernel",
    "convolution_weights",
    "mild_solution",
]


class IntegrabilityError(ValueError):
    """Squared kernel not integrable: r <= 1/2 requires a positive cutoff eps."""


@dataclass(frozen=True)
class FracParams:
    """Fractional order, horizon, delay and near-singularity cutoff.

    ``eps=None`` selects the default cutoff: ``0.05 (tau - h)`` when
    ``r <= 1/2`` (where the squared kernel is not integrable), else 0.
    ``r = 1`` is accepted as the classical limit.
    """

    r: float
    tau: float = 1.0
    h: float = 0.1
    eps: float | None = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"r must lie in (0, 1], got {self.r}")
        if not self.h >= 0.0:
            raise ValueError(f"delay h must be >= 0, got {self.h}")
        if not self.tau > self.h:
            raise ValueError(f"horizon tau must exceed delay h, got tau={self.tau}, h={self.h}")
        if self.eps is not None and not 0.0 <= self.eps < self.tau - self.h:
            raise ValueError(f"eps must lie in [0, tau - h), got {self.eps}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")

    @property
    def horizon(self) -> float:
        """Length ``tau - h`` of the control window."""
        return self.tau - self.h

    @property
    def eps_used(self) -> float:
        if self.eps is not None:
            return self.eps
        return 0.05 * self.horizon if self.r <= 0.5 else 0.0

    def check_integrable(self):
        if self.r <= 0.5 and self.eps_used == 0.0:
            raise IntegrabilityError(
                f"r={self.r}: the squared kernel (tau-s-h)^(2(r-1)) is integrable only "
                "when 2(r-1) > -1; set eps > 0 for r <= 1/2"
            )


@dataclass(frozen=True)
class ControlSignal:
    """Piecewise-linear control on ``[0, T]`` plus history on ``[-h, 0]``."""

    grid: np.ndarray
    u: np.ndarray
    history_grid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        u = np.asarray(self.u, dtype=float)
        hg = np.asarray(self.history_grid, dtype=float)
        hv = np.asarray(self.history, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid[0] != 0.0:
            raise ValueError("control grid must start at 0 and have at least 2 points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("control grid must be strictly increasing")
        if u.shape != grid.shape:
            raise ValueError(f"u has shape {u.shape}, grid has {grid.shape}")
        if hg.shape != hv.shape:
            raise ValueError("history values and history grid differ in shape")
        if hg.size == 1:
            raise ValueError("history needs at least 2 points (or none)")
        if hg.size and (hg[-1] != 0.0 or np.any(np.diff(hg) <= 0)):
            raise ValueError("history grid must be increasing and end at 0")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(hv))):
            raise ValueError("control and history values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "history_grid", hg)
        object.__setattr__(self, "history", hv)

    @classmethod
    def uniform(cls, params: FracParams, steps: int, u=0.0, phi=0.0, history_steps=None):
        """Uniform grid with ``steps`` intervals on ``[0, tau - h]``.

        ``u`` and ``phi`` may be constants, callables of time or sample arrays.
        """
        if steps < 1:
            raise ValueError("steps must be >= 1")
        grid = np.linspace(0.0, params.horizon, steps + 1)
        uvals = _sample(u, grid)
        if params.h > 0.0:
            hs = history_steps or max(1, int(round(steps * params.h / params.horizon)))
            hgrid = np.linspace(-params.h, 0.0, hs + 1)
            hvals = _sample(phi, hgrid)
        else:
            hgrid = hvals = np.zeros(0)
        return cls(grid, uvals, hgrid, hvals)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def with_u(self, u) -> "ControlSignal":
        return ControlSignal(self.grid, u, self.history_grid, self.history)


def _sample(f, grid):
    if callable(f):
        return np.asarray([f(t) for t in grid], dtype=float)
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(grid.shape, float(f))
    if f.shape != grid.shape:
        raise ValueError(f"samples have shape {f.shape}, grid has {grid.shape}")
    return f


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), N)

    def mode(self, i: int) -> np.ndarray:
        return self.states[:, i - 1]


def rr_apply(params: FracParams, t: float, z0) -> np.ndarray:
    """Free evolution: coefficient i times E_{r,1}(lam_i t^r)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    z0 = modal_vector(z0)
    lam = eigenvalues(z0.size)
    return ml2(params.r, 1.0, lam * t**params.r, params.tol) * z0


def sr_apply(params: FracParams, t: float, v) -> np.ndarray:
    """Coefficient i times r E^2_{r,r+1}(lam_i t^r)."""
    if not t > 0:
        raise ValueError("t must be > 0")
    v = modal_vector(v)
    lam = eigenvalues(v.size)
    r = params.r
    return r * ml3(r, r + 1.0, 2.0, lam * t**r, params.tol) * v


def kernel(params: FracParams, n: int, s) -> np.ndarray:
    """k_i(s) for i = 1..n, shape (n, len(s)); requires s > 0."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0):
        raise ValueError("kernel is singular at s <= 0")
    r = params.r
    lam = eigenvalues(n)[:, None]
    e = ml2(r, r, (lam * s[None, :] ** r).ravel(), params.tol).reshape(n, s.size)
    return s[None, :] ** (r - 1.0) * e


class _Antiderivatives:
    """K0 and K1 of modes 1..n tabulated at a fixed set of s >= 0."""

    def __init__(self, params: FracParams, n: int, s):
        r = params.r
        self.s = np.unique(np.asarray(s, dtype=float))
        lam = eigenvalues(n)
        sr = self.s**r
        y = (lam[:, None] * sr[None, :]).ravel()
        shape = (n, self.s.size)
        self.k0 = sr[None, :] * ml2(r, r + 1.0, y, params.tol).reshape(shape)
        self.k1 = (sr * self.s)[None, :] * ml2(r, r + 2.0, y, params.tol).reshape(shape)

    def index(self, s):
        idx = np.searchsorted(self.s, s)
        if np.any(idx >= self.s.size) or np.any(self.s[np.minimum(idx, self.s.size - 1)] != s):
            raise KeyError("s value missing from the antiderivative table")
        return idx


def _window(t_shift, nodes):
    """Clipped distances to the singular point and the active segments."""
    s = np.maximum(t_shift - nodes, 0.0)
    return s, np.nonzero(s[:-1] > 0.0)[0]


def convolution_weights(
    params: FracParams, n: int, t_shift: float, nodes, table: _Antiderivatives | None = None
) -> np.ndarray:
    """Exact product-integration weights for piecewise-linear data.

    Returns C of shape (n, len(nodes)) such that for a function ``w`` linear
    between consecutive ``nodes``

        int_{nodes[0]}^{min(t_shift, nodes[-1])} k_i(t_shift - s) w(s) ds = C[i] @ w(nodes).
    """
    nodes = np.asarray(nodes, dtype=float)
    C = np.zeros((n, nodes.size))
    if nodes.size < 2 or t_shift <= nodes[0]:
        return C
    s, active = _window(t_shift, nodes)
    if active.size == 0:
        return C
    sa, sb = s[active], s[active + 1]
    if table is None:
        table = _Antiderivatives(params, n, np.concatenate([sa, sb]))
    ia, ib = table.index(sa), table.index(sb)
    k0, k1 = table.k0[:n], table.k1[:n]
    dx = nodes[active + 1] - nodes[active]
    a0 = k0[:, ia] - k0[:, ib]
    a1 = k1[:, ia] - k1[:, ib] - (sa - sb)[None, :] * k0[:, ib]
    # on a segment w = w_j + (w_{j+1} - w_j)(sa - s)/dx in the s variable
    np.add.at(C.T, active, (a0 - a1 / dx[None, :]).T)
    np.add.at(C.T, active + 1, (a1 / dx[None, :]).T)
    return C


def _table_for(params: FracParams, n: int, shifts, grids) -> _Antiderivatives:
    """One table covering every (shift, grid) window, so ML is evaluated once."""
    pts = [np.zeros(1)]
    for ts in shifts:
        for g in grids:
            if g.size >= 2 and ts > g[0]:
                s, _ = _window(ts, g)
                pts.append(s)
    return _Antiderivatives(params, n, np.concatenate(pts))


def mild_solution(
    params: FracParams, z0, act: Actuator, sig: ControlSignal, out_times
) -> Trajectory:
    """Mild solution at ``out_times`` for initial state ``z0`` (length N)."""
    z0 = modal_vector(z0)
    n = z0.size
    times = np.atleast_1d(np.asarray(out_times, dtype=float))
    if np.any(times < 0) or np.any(times > params.tau * (1 + 1e-12)):
        raise ValueError(f"output times must lie in [0, tau={params.tau}]")
    if not math.isclose(sig.horizon, params.horizon, rel_tol=1e-12, abs_tol=1e-14):
        raise ValueError(
            f"control grid ends at {sig.horizon}, expected tau - h = {params.horizon}"
        )
    if sig.history.size and not math.isclose(sig.history_grid[0], -params.h, abs_tol=1e-14):
        raise ValueError(f"history grid starts at {sig.history_grid[0]}, expected -h")
    b = actuator_coeffs(act, n)
    lam = eigenvalues(n)
    grids = [g for g, v in ((sig.history_grid, sig.history), (sig.grid, sig.u)) if np.any(v)]
    table = _table_for(params, n, times - params.h, grids) if grids else None
    free = ml2(params.r, 1.0, (lam[None, :] * times[:, None] ** params.r).ravel(), params.tol)
    states = free.reshape(times.size, n) * z0[None, :]
    for k, t in enumerate(times):
        conv = np.zeros(n)
        for g, v in ((sig.history_grid, sig.history), (sig.grid, sig.u)):
            if np.any(v):
                conv += convolution_weights(params, n, t - params.h, g, table) @ v
        states[k] += b * conv
    return Trajectory(times, states)
