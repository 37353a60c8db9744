"""Minimum-energy (HUM) steering of the state restricted to a subregion.

The control space is piecewise linear on a uniform grid over ``[0, tau - h]``
with energy ``0.5 * sum(D * u**2)`` (trapezoid weights ``D``).  Writing
``H`` for the control-to-final-state map and ``G`` for the rectangular region
Gram matrix, the target is met in the Galerkin sense on ``omega``:

    A u = c,   A = G^T H,   c = G^T (z_d - z_free(tau) - z_history(tau)).

The minimum-energy solution is ``u* = D^-1 A^T psi`` with
``(A D^-1 A^T + reg I) psi = c``; ``A D^-1 A^T`` is the discrete Lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controllability import DiscreteSystem, default_state_modes, discrete_system
from .fracops import ControlSignal, FracParams, mild_solution, rr_apply
from .spectral import Actuator, Region, modal_vector, region_norm

__all__ = [
    "HumSolution",
    "Verification",
    "RankDeficiencyError",
    "DEFAULT_STEPS",
    "default_regularization",
    "free_final_state",
    "history_final_state",
    "energy",
    "regional_error",
    "solve_hum",
    "verify",
]

DEFAULT_STEPS = 200
# singular values of the scaled steering map below RANK_RTOL * largest are
# treated as zero when reg = 0
RANK_RTOL = 1e-12


class RankDeficiencyError(np.linalg.LinAlgError):
    """Lambda is numerically singular and no regularization was requested."""


@dataclass(frozen=True)
class HumSolution:
    psi0: np.ndarray
    control: ControlSignal
    energy: float
    residual: float
    regularization: float
    condition: float
    cutoff_nodes: int  # control nodes zeroed inside the eps window
    system: DiscreteSystem

    def summary(self) -> dict:
        return {
            "energy": self.energy,
            "residual": self.residual,
            "reg": self.regularization,
            "condition": self.condition,
            "cutoff_nodes": self.cutoff_nodes,
        }


def default_regularization(lam: np.ndarray) -> float:
    """1e-8 trace(Lambda) / N."""
    return 1e-8 * float(np.trace(lam)) / lam.shape[0]


def free_final_state(params: FracParams, z0) -> np.ndarray:
    return rr_apply(params, params.tau, z0)


def history_final_state(params: FracParams, act: Actuator, sig: ControlSignal, n: int) -> np.ndarray:
    """Contribution of the history phi alone to the state at tau."""
    if not sig.history.size or not np.any(sig.history):
        return np.zeros(n)
    quiet = sig.with_u(np.zeros(sig.grid.size))
    return mild_solution(params, np.zeros(n), act, quiet, [params.tau]).states[0]


def energy(sig: ControlSignal) -> float:
    """0.5 int u^2 over [0, tau - h] plus the echoed history over [tau - h, tau]."""
    e = 0.5 * float(np.trapezoid(sig.u**2, sig.grid))
    if sig.history.size:
        e += 0.5 * float(np.trapezoid(sig.history**2, sig.history_grid))
    return e


def regional_error(z: np.ndarray, zd: np.ndarray, region: Region) -> float:
    """||P_omega (z - zd)|| relative to ||P_omega zd|| (absolute when zd vanishes on omega)."""
    err = region_norm(z - zd, region)
    scale = region_norm(zd, region)
    return err / scale if scale > 0.0 else err


def _history_template(params: FracParams, steps: int, phi) -> ControlSignal:
    if isinstance(phi, ControlSignal):
        return phi
    return ControlSignal.uniform(params, steps, u=0.0, phi=phi)


def solve_hum(
    params: FracParams,
    act: Actuator,
    region: Region,
    z0,
    zd_on_omega,
    n: int,
    reg: float | None = None,
    *,
    steps: int = DEFAULT_STEPS,
    state_modes: int | None = None,
    phi=0.0,
    system: DiscreteSystem | None = None,
    allow_rank_deficient: bool = False,
) -> HumSolution:
    """Minimum-energy control steering P_omega z(tau) to P_omega zd.

    ``z0`` and ``zd_on_omega`` are modal coefficient lists (zero-padded to the
    state truncation).  ``reg=None`` selects ``1e-8 trace(Lambda)/N``; with
    ``reg=0`` the minimum-norm least-squares control is returned; if Lambda
    is numerically singular this raises :class:`RankDeficiencyError` unless
    ``allow_rank_deficient`` is set, in which case directions with singular
    values below ``RANK_RTOL`` times the largest are dropped (pseudoinverse).
    ``phi`` is a constant, callable or a :class:`ControlSignal` carrying the
    history on ``[-h, 0]``.
    """
    params.check_integrable()
    m = default_state_modes(n) if state_modes is None else state_modes
    if system is None:
        system = discrete_system(params, act, region, n, steps, state_modes=m)
    m = system.G.shape[0]
    steps = system.grid.size - 1
    z0 = modal_vector(z0, m)
    zd = modal_vector(zd_on_omega, m)
    hist = _history_template(params, steps, phi)

    drift = free_final_state(params, z0) + history_final_state(params, act, hist, m)
    c = system.G.T @ (zd - drift)
    # Lambda = A_s A_s^T; work with the SVD of A_s so that tiny eigenvalues
    # of Lambda are not lost to squaring
    U, sv, Vt = np.linalg.svd(system.A_scaled, full_matrices=False)
    ev = sv**2
    if reg is None:
        reg = 1e-8 * float(np.sum(ev)) / n
    if reg < 0:
        raise ValueError("reg must be >= 0")
    smin = ev[-1] if sv.size == n else 0.0
    keep = np.ones(sv.size, dtype=bool)
    if reg == 0.0:
        keep = sv > RANK_RTOL * sv[0] if sv.size else keep
        if sv.size < n or not np.all(keep):
            if np.any(c) and not allow_rank_deficient:
                raise RankDeficiencyError(
                    f"Lambda is numerically singular (smin={smin:.3e}, smax={ev[0]:.3e}); "
                    "pass reg > 0"
                )
    condition = float((ev[0] + reg) / (smin + reg)) if smin + reg > 0 else float("inf")
    coef = np.where(keep, U.T @ c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        psi0 = U @ np.where(keep, coef / (ev + reg), 0.0)
        v = Vt.T @ np.where(keep, coef * sv / (ev + reg), 0.0)
    u_active = v / np.sqrt(system.D)
    u = system.expand(u_active)
    control = ControlSignal(system.grid, u, hist.history_grid, hist.history)
    z = mild_solution(params, z0, act, control, [params.tau]).states[0]
    return HumSolution(
        psi0=psi0,
        control=control,
        energy=energy(control),
        residual=regional_error(z, zd, region),
        regularization=float(reg),
        condition=condition,
        cutoff_nodes=int(np.count_nonzero(~system.active)),
        system=system,
    )


@dataclass(frozen=True)
class Verification:
    residual: float
    energy: float
    perturbed_energies: np.ndarray
    min_energy_gap: float  # min over draws of energy(perturbed) - energy(u*)
    row_space_defect: float  # relative norm of u* outside the row space of A
    violation: bool


def verify(
    params: FracParams,
    act: Actuator,
    region: Region,
    z0,
    sol: HumSolution,
    zd_on_omega,
    *,
    draws: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
) -> Verification:
    """Re-simulate ``sol`` and probe its optimality with feasible perturbations.

    Perturbations are drawn from the null space of the discrete steering map,
    so each perturbed control reaches exactly the same Galerkin moments.
    """
    system = sol.system
    m = system.G.shape[0]
    z0 = modal_vector(z0, m)
    zd = modal_vector(zd_on_omega, m)
    z = mild_solution(params, z0, act, sol.control, [params.tau]).states[0]
    residual = regional_error(z, zd, region)

    # scaled coordinates: v = sqrt(D) u turns the energy into 0.5 |v|^2
    sq = np.sqrt(system.D)
    A_hat = system.A_scaled
    v_star = sol.control.u[system.active] * sq
    _, sv, vt = np.linalg.svd(A_hat)
    rank = int(np.sum(sv > sv[0] * 1e-13)) if sv.size else 0
    null = vt[rank:]
    row = vt[:rank]
    nv = np.linalg.norm(v_star)
    defect = float(np.linalg.norm(v_star - row.T @ (row @ v_star)) / nv) if nv > 0 else 0.0

    rng = np.random.default_rng(seed)
    e_star = sol.energy
    energies = np.empty(draws)
    for k in range(draws):
        delta = null.T @ rng.standard_normal(null.shape[0])
        # log-uniform sizes from 1e-4 to 1 relative to |u*|
        size = 10.0 ** rng.uniform(-4.0, 0.0) * max(nv, 1.0)
        delta *= size / max(np.linalg.norm(delta), 1e-300)
        u = system.expand((v_star + delta) / sq)
        energies[k] = energy(sol.control.with_u(u))
    gap = float(np.min(energies - e_star)) if draws else 0.0
    return Verification(
        residual=residual,
        energy=e_star,
        perturbed_energies=energies,
        min_energy_gap=gap,
        row_space_defect=defect,
        violation=bool(gap < -tol),
    )
