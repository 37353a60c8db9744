"""Regional controllability Gramian and reachability tests.

Truncation uses two mode counts.  Target data on ``omega`` are represented
by ``N`` modes (the size of Lambda), while states carry ``N_state >= N``
modes.  With ``N_state == N`` the Gramian ``G W G`` inherits every zero row of
``W`` (actuators with unreachable modes), so it would be singular for every
region; a longer state expansion lets the reachable modes cover ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .fracops import (
    ControlSignal,
    FracParams,
    IntegrabilityError,
    convolution_weights,
    kernel,
    mild_solution,
    sr_apply,
)
from .spectral import Actuator, Region, actuator_coeffs, region_gram

__all__ = [
    "GramianReport",
    "DiscreteSystem",
    "default_state_modes",
    "adjoint_kernel_row",
    "singular_rule",
    "gramian",
    "impulse_rule",
    "gramian_by_impulses",
    "is_region_controllable",
    "control_grid",
    "active_nodes",
    "trapezoid_weights",
    "control_to_state",
    "control_to_state_by_quadrature",
    "control_to_state_by_simulation",
    "discrete_system",
]

DEFAULT_CONTROLLABILITY_TOL = 1e-10
_GL_NODES = 16
_LEVELS = 60


def default_state_modes(n: int) -> int:
    return 3 * n


@dataclass(frozen=True)
class GramianReport:
    matrix: np.ndarray  # Lambda, N x N
    smin: float
    smax: float
    unreachable_modes: list[int]
    eps_used: float
    w: np.ndarray  # state Gramian, N_state x N_state
    state_modes: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self, with_matrix=False) -> dict:
        out = {
            "smin": self.smin,
            "smax": self.smax,
            "unreachable_modes": self.unreachable_modes,
            "eps_used": self.eps_used,
            "modes": self.n,
            "state_modes": self.state_modes,
        }
        if with_matrix:
            out["matrix"] = self.matrix.tolist()
        return out


def adjoint_kernel_row(params: FracParams, act: Actuator, sigma: float, n: int) -> np.ndarray:
    """Entry i: b_i (T - sigma)^(r-1) r E^2_{r,r+1}(lam_i (T - sigma)^r), T = tau - h."""
    T = params.horizon
    if not 0.0 <= sigma < T:
        raise ValueError(f"sigma must lie in [0, tau - h) = [0, {T}), got {sigma}")
    return actuator_coeffs(act, n) * kernel(params, n, T - sigma)[:, 0]


def singular_rule(a: float, b: float, p: float, levels: int = _LEVELS):
    """Nodes and weights for int_a^b f(s) ds where f(s) ~ s^p as s -> 0.

    Panels are geometrically graded towards ``s = a`` (or 0).  When ``a == 0``
    the innermost panel uses Gauss-Jacobi with the weight s^p, folded back
    into the returned weights so that ``sum(w * f(s))`` is the rule.
    """
    if not 0.0 <= a < b:
        raise ValueError("need 0 <= a < b")
    x, wx = roots_legendre(_GL_NODES)
    if a > 0.0:
        edges = [a]
        while edges[-1] * 2.0 < b:
            edges.append(edges[-1] * 2.0)
        edges.append(b)
        edges = np.array(edges)
    else:
        edges = np.concatenate([[0.0], b * 2.0 ** -np.arange(levels, -1, -1.0)])
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo == 0.0:
            xj, wj = roots_jacobi(_GL_NODES, 0.0, p)
            s = hi * (1.0 + xj) / 2.0
            nodes.append(s)
            weights.append(wj * (hi / 2.0) ** (p + 1.0) / s**p)
        else:
            nodes.append(lo + (hi - lo) * (1.0 + x) / 2.0)
            weights.append(wx * (hi - lo) / 2.0)
    return np.concatenate(nodes), np.concatenate(weights)


def _spectrum_from_factor(B: np.ndarray):
    """Extreme eigenvalues of B B^T from the singular values of B.

    Squaring singular values keeps eigenvalues far below eps * smax accurate,
    which forming B B^T and calling an eigensolver would not.
    """
    sv = np.linalg.svd(B, compute_uv=False)
    smax = float(sv[0] ** 2) if sv.size else 0.0
    smin = float(sv[-1] ** 2) if sv.size == B.shape[0] else 0.0
    return smin, smax


def gramian(
    params: FracParams,
    act: Actuator,
    region: Region,
    n: int,
    state_modes: int | None = None,
) -> GramianReport:
    """Lambda = G^T W G with W = int_0^{T-eps} v(s) v(s)^T ds, v the adjoint kernel row."""
    params.check_integrable()
    m = default_state_modes(n) if state_modes is None else state_modes
    if m < n:
        raise ValueError("state_modes must be >= modes")
    eps = params.eps_used
    # in s = T - sigma the integrand behaves like s^(2(r-1)) near s = 0
    s, w = singular_rule(eps, params.horizon, 2.0 * (params.r - 1.0))
    b = actuator_coeffs(act, m)
    # W = K K^T with K the kernel rows scaled by sqrt of the (positive) weights
    K = kernel(params, m, s) * b[:, None] * np.sqrt(w)[None, :]
    W = K @ K.T
    G = region_gram(region, m, n)
    B = G.T @ K
    lam = B @ B.T
    smin, smax = _spectrum_from_factor(B)
    unreachable = [int(i) + 1 for i in np.nonzero(b == 0.0)[0]]
    return GramianReport(lam, smin, smax, unreachable, eps, W, m)


def impulse_rule(params: FracParams, m: int):
    """Impulse offsets s = T - sigma and weights for int s^(2r-2) f(s) ds, f smooth in s^r.

    In u = s^r the weight becomes u^(1 - 1/r) / r and the kernel factor
    E(lam u) is entire, so Gauss-Jacobi in u converges spectrally.  With a
    cutoff the interval [eps^r, T^r] avoids u = 0 and Gauss-Legendre is used.
    """
    if m < 1:
        raise ValueError("need at least one impulse")
    r, eps = params.r, params.eps_used
    top = params.horizon**r
    beta = 1.0 - 1.0 / r
    if eps == 0.0:
        x, w = roots_jacobi(m, 0.0, beta)
        u = top * (1.0 + x) / 2.0
        w = w * (top / 2.0) ** (beta + 1.0) / r
    else:
        lo = eps**r
        x, w = roots_legendre(m)
        u = lo + (top - lo) * (1.0 + x) / 2.0
        w = w * (top - lo) / 2.0 * u**beta / r
    return u ** (1.0 / r), w


def gramian_by_impulses(params: FracParams, act: Actuator, n: int, m: int = 100) -> np.ndarray:
    """State Gramian W = H diag(w) H^T from m unit-impulse responses.

    Column j is the state at tau produced by an impulse at sigma_j = T - s_j,
    b (s_j)^(r-1) S_r(s_j), obtained from the solution operator ``sr_apply``
    (Prabhakar route) rather than the kernel used by :func:`gramian`; the
    factor s^(r-1) of each column is absorbed in the rule's weight.
    """
    params.check_integrable()
    s, w = impulse_rule(params, m)
    b = actuator_coeffs(act, n)
    H = np.stack([sr_apply(params, sj, b) for sj in s], axis=1)
    W = (H * w[None, :]) @ H.T
    return 0.5 * (W + W.T)


def is_region_controllable(report: GramianReport, tol: float = DEFAULT_CONTROLLABILITY_TOL) -> bool:
    """Finite-truncation surrogate: smallest eigenvalue above tol times the largest."""
    return report.smax > 0.0 and report.smin > tol * report.smax


# {{{ discrete control space


def control_grid(params: FracParams, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return np.linspace(0.0, params.horizon, steps + 1)


def active_nodes(params: FracParams, grid: np.ndarray) -> np.ndarray:
    """Mask of control nodes outside the cutoff window (T - eps, T]."""
    eps = params.eps_used
    if eps == 0.0:
        return np.ones(grid.shape, dtype=bool)
    return grid <= params.horizon - eps + 1e-12 * params.horizon


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    d = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += d / 2.0
    w[1:] += d / 2.0
    return w


def control_to_state(params: FracParams, act: Actuator, n: int, grid: np.ndarray) -> np.ndarray:
    """H (n x len(grid)): state at tau produced by each unit hat control."""
    C = convolution_weights(params, n, params.horizon, grid)
    return actuator_coeffs(act, n)[:, None] * C


def control_to_state_by_quadrature(
    params: FracParams, act: Actuator, n: int, grid: np.ndarray
) -> np.ndarray:
    """H assembled by sampling the adjoint kernel row against each hat.

    Independent of the exact-moment weights: each grid segment is integrated
    with Gauss-Legendre, and the segment touching the singularity with the
    graded Gauss-Jacobi rule.
    """
    T = params.horizon
    x, wx = roots_legendre(_GL_NODES)
    H = np.zeros((n, grid.size))
    b = actuator_coeffs(act, n)
    for j in range(grid.size - 1):
        lo, hi = grid[j], grid[j + 1]
        if hi >= T:
            # s = T - sigma in [0, T - lo], singular like s^(r-1) at 0
            s, w = singular_rule(0.0, T - lo, params.r - 1.0)
            sig = T - s
        else:
            sig = lo + (hi - lo) * (1.0 + x) / 2.0
            w = wx * (hi - lo) / 2.0
            s = T - sig
        kv = kernel(params, n, s) * b[:, None]
        lam = (hi - sig) / (hi - lo)
        H[:, j] += kv @ (w * lam)
        H[:, j + 1] += kv @ (w * (1.0 - lam))
    return H


def control_to_state_by_simulation(
    params: FracParams, act: Actuator, n: int, grid: np.ndarray
) -> np.ndarray:
    """H by forward simulation of each unit hat through the mild solution."""
    H = np.zeros((n, grid.size))
    base = ControlSignal(grid, np.zeros(grid.size))
    for k in range(grid.size):
        e = np.zeros(grid.size)
        e[k] = 1.0
        traj = mild_solution(params, np.zeros(n), act, base.with_u(e), [params.tau])
        H[:, k] = traj.states[0]
    return H


@dataclass(frozen=True)
class DiscreteSystem:
    """Discretized steering problem on the piecewise-linear control space.

    ``H`` maps active control node values to the state at tau, ``D`` holds
    the trapezoid (lumped mass) weights so that the control energy is
    ``0.5 * sum(D * u**2)``, and ``G`` is the rectangular region Gram matrix
    (N_state x N).  The discrete Gramian is ``W = H D^-1 H^T``.
    """

    grid: np.ndarray
    active: np.ndarray
    H: np.ndarray
    D: np.ndarray
    G: np.ndarray

    @property
    def W(self) -> np.ndarray:
        W = (self.H / self.D[None, :]) @ self.H.T
        return 0.5 * (W + W.T)

    @property
    def A(self) -> np.ndarray:
        """Map from active control values to the N Galerkin moments on omega."""
        return self.G.T @ self.H

    @property
    def A_scaled(self) -> np.ndarray:
        """A D^-1/2: in v = sqrt(D) u the energy is 0.5 |v|^2 and Lambda = A_s A_s^T."""
        return self.A / np.sqrt(self.D)[None, :]

    def spectrum(self):
        """(smin, smax) of the discrete Lambda, from singular values of A_scaled."""
        return _spectrum_from_factor(self.A_scaled)

    @property
    def lam(self) -> np.ndarray:
        lam = self.G.T @ self.W @ self.G
        return 0.5 * (lam + lam.T)

    def expand(self, u_active: np.ndarray) -> np.ndarray:
        u = np.zeros(self.grid.size)
        u[self.active] = u_active
        return u


def discrete_system(
    params: FracParams,
    act: Actuator,
    region: Region,
    n: int,
    steps: int,
    state_modes: int | None = None,
    method: str = "moments",
) -> DiscreteSystem:
    """Assemble H by ``method`` in {"moments", "quadrature", "simulation"}."""
    m = default_state_modes(n) if state_modes is None else state_modes
    if m < n:
        raise ValueError("state_modes must be >= modes")
    grid = control_grid(params, steps)
    builders = {
        "moments": control_to_state,
        "quadrature": control_to_state_by_quadrature,
        "simulation": control_to_state_by_simulation,
    }
    if method not in builders:
        raise ValueError(f"unknown method {method!r}")
    H = builders[method](params, act, m, grid)
    active = active_nodes(params, grid)
    D = trapezoid_weights(grid)
    return DiscreteSystem(grid, active, H[:, active], D[active], region_gram(region, m, n))


# }}}

__all__ += ["IntegrabilityError"]
