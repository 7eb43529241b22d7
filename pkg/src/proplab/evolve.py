"""Time evolution for the Schrodinger and wave flows.

The default propagator is the exact one through the dense eigenbasis; a
Crank-Nicolson stepper exists for order-of-accuracy checks and for grids too
large to diagonalize.  The wave propagator is the trigonometric one

    u(t) = cos(sqrt(H) t) f0 + (sin(sqrt(H) t)/sqrt(H)) g0,

which requires H >= 0 up to eigensolver tolerance; eigenvalues in the noise
band around zero are clamped and the sin/sqrt factor switches to its t*sinc
limit there.  Energies are assembled with the same stencil adjoint as the
Laplacian, so exact propagation conserves them to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .operators import Grid, HermitianOperator, eigendecompose

ZERO_MODE_BAND = 1e-12


@dataclass(frozen=True)
class SchrodingerState:
    psi: np.ndarray
    t: float


@dataclass(frozen=True)
class WaveState:
    u: np.ndarray
    u_dot: np.ndarray
    t: float


@dataclass(frozen=True)
class EnergyValue:
    value: float
    kinetic: float
    potential: float
    velocity: float


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a nonempty 1-D sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    return times


def schrodinger_evolve(
    h_op: HermitianOperator,
    psi0: np.ndarray,
    times,
    method: str = "exact",
    dt: float | None = None,
) -> list:
    """Evolve i d(psi)/dt = H psi through the listed times.

    method="exact" uses the spectral propagator (norm drift ~ rounding);
    method="cn" marches Crank-Nicolson steps of size dt between the requested
    times (exactly unitary up to the linear-solve tolerance, error O(dt^2)).
    """
    times = _check_times(times)
    psi0 = np.asarray(psi0, dtype=complex)
    if method == "exact":
        dec = eigendecompose(h_op)
        coeff = dec.eigenvectors.conj().T @ psi0
        phases = np.exp(-1j * np.outer(dec.eigenvalues, times))
        block = dec.eigenvectors @ (phases * coeff[:, None])
        return [SchrodingerState(psi=block[:, i].copy(), t=float(t)) for i, t in enumerate(times)]
    if method != "cn":
        raise ValueError(f"unknown evolution method '{method}'")
    if dt is None:
        dt = (times[-1] - times[0]) / 2000.0 if times[-1] > times[0] else 1e-3
    m = h_op.matrix
    tridiagonal = _is_tridiagonal(m)
    out = [SchrodingerState(psi=psi0.copy(), t=float(times[0]))]
    psi = psi0.copy()
    t = float(times[0])
    for target in times[1:]:
        span = float(target) - t
        steps = max(1, int(math.ceil(span / dt - 1e-12)))
        step = span / steps
        if tridiagonal:
            psi = _cn_march_tridiagonal(m, psi, step, steps)
        else:
            psi = _cn_march_dense(m, psi, step, steps)
        t = float(target)
        out.append(SchrodingerState(psi=psi.copy(), t=t))
    return out


def _is_tridiagonal(m: np.ndarray) -> bool:
    n = m.shape[0]
    mask = np.ones_like(m, dtype=bool)
    idx = np.arange(n)
    for k in (-1, 0, 1):
        d = idx[max(0, -k) : n - max(0, k)]
        mask[d, d + k] = False
    return not np.any(m[mask])


def _cn_march_tridiagonal(m: np.ndarray, psi: np.ndarray, dt: float, steps: int) -> np.ndarray:
    n = m.shape[0]
    z = 0.5j * dt
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = z * np.diagonal(m, 1)
    ab[1, :] = 1.0 + z * np.diagonal(m)
    ab[2, :-1] = z * np.diagonal(m, -1)
    lower = np.diagonal(m, -1)
    upper = np.diagonal(m, 1)
    diag = np.diagonal(m)
    for _ in range(steps):
        rhs = psi - z * (diag * psi)
        rhs[:-1] -= z * (upper * psi[1:])
        rhs[1:] -= z * (lower * psi[:-1])
        psi = solve_banded((1, 1), ab, rhs)
    return psi


def _cn_march_dense(m: np.ndarray, psi: np.ndarray, dt: float, steps: int) -> np.ndarray:
    from scipy.linalg import lu_factor, lu_solve

    n = m.shape[0]
    z = 0.5j * dt
    left = np.eye(n) + z * m
    right = np.eye(n) - z * m
    lu = lu_factor(left)
    for _ in range(steps):
        psi = lu_solve(lu, right @ psi)
    return psi


def wave_evolve(h_op: HermitianOperator, f0: np.ndarray, g0: np.ndarray, times) -> list:
    """Evolve -d^2u/dt^2 = H u from (u, u_dot)(0) = (f0, g0).

    Refuses an indefinite H (smallest eigenvalue below -1e-10 * norm);
    eigenvalues inside the tolerance band are clamped to zero and propagated
    with the t*sinc limit.
    """
    times = _check_times(times)
    f0 = np.asarray(f0, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    dec = eigendecompose(h_op)
    lam = dec.eigenvalues
    scale = float(max(abs(lam[0]), abs(lam[-1]), 1e-300))
    if lam[0] < -1e-10 * scale:
        raise ValueError(
            f"H is indefinite (lambda_min = {lam[0]:.3e}); sqrt(H) propagation undefined"
        )
    lam = np.maximum(lam, 0.0)
    om = np.sqrt(lam)
    a = dec.eigenvectors.T @ f0
    b = dec.eigenvectors.T @ g0
    states = []
    for t in times:
        t = float(t)
        if t == 0.0:
            states.append(WaveState(u=f0.copy(), u_dot=g0.copy(), t=0.0))
            continue
        cos = np.cos(om * t)
        small = lam <= ZERO_MODE_BAND
        snc = np.where(small, t * (1.0 - (om * t) ** 2 / 6.0), np.sin(om * t) / np.where(small, 1.0, om))
        u = dec.eigenvectors @ (cos * a + snc * b)
        u_dot = dec.eigenvectors @ (-om * np.sin(om * t) * a + cos * b)
        states.append(WaveState(u=np.real(u), u_dot=np.real(u_dot), t=t))
    return states


def wave_mode_blocks(h_op: HermitianOperator, f0, g0, times):
    """Batched u(t) and u_dot(t) as n-by-len(times) arrays (internal fast path)."""
    times = _check_times(times)
    dec = eigendecompose(h_op)
    lam = dec.eigenvalues
    scale = float(max(abs(lam[0]), abs(lam[-1]), 1e-300))
    if lam[0] < -1e-10 * scale:
        raise ValueError(f"H is indefinite (lambda_min = {lam[0]:.3e})")
    lam = np.maximum(lam, 0.0)
    om = np.sqrt(lam)
    a = dec.eigenvectors.T @ np.asarray(f0, dtype=float)
    b = dec.eigenvectors.T @ np.asarray(g0, dtype=float)
    ot = np.outer(om, times)
    cos = np.cos(ot)
    small = lam <= ZERO_MODE_BAND
    om_safe = np.where(small, 1.0, om)
    snc = np.where(small[:, None], times[None, :] * (1.0 - ot**2 / 6.0), np.sin(ot) / om_safe[:, None])
    u = dec.eigenvectors @ (cos * a[:, None] + snc * b[:, None])
    u_dot = dec.eigenvectors @ (-(om[:, None]) * np.sin(ot) * a[:, None] + cos * b[:, None])
    return np.real(u), np.real(u_dot)


def energy(lap_op: HermitianOperator, potential_values: np.ndarray, state: WaveState) -> EnergyValue:
    """Discrete field energy h * (|grad u|^2 + |u_dot|^2 + V |u|^2).

    The gradient term is assembled as u . lap u with the same stencil, so the
    spectral wave propagator conserves the sum to rounding.
    """
    h = lap_op.grid.h
    u, ud = state.u, state.u_dot
    kinetic = h * float(np.real(u @ (lap_op.matrix @ u)))
    velocity = h * float(np.real(ud @ ud))
    potential = h * float(np.real(u @ (np.asarray(potential_values) * u)))
    return EnergyValue(
        value=kinetic + velocity + potential,
        kinetic=kinetic,
        potential=potential,
        velocity=velocity,
    )


def expectation(state: SchrodingerState, op: HermitianOperator) -> float:
    """<psi, B psi>; real for Hermitian B."""
    return float(np.real(np.vdot(state.psi, op.matrix @ state.psi)))


def heisenberg_bracket(state: WaveState, matrix) -> float:
    """(u, B u_dot) - (u_dot, B u); vanishes for real symmetric B."""
    m = matrix.matrix if isinstance(matrix, HermitianOperator) else np.asarray(matrix)
    val = state.u @ (m @ state.u_dot) - state.u_dot @ (m @ state.u)
    return float(np.real(val))


def momentum_content_max(grid: Grid, psi0: np.ndarray, rel_threshold: float = 1e-6) -> float:
    """Largest |k| carrying at least rel_threshold of the peak Fourier amplitude."""
    spec = np.fft.fft(np.asarray(psi0, dtype=complex))
    ks = 2.0 * math.pi * np.fft.fftfreq(grid.n, d=grid.h)
    mask = np.abs(spec) > rel_threshold * np.abs(spec).max()
    return float(np.abs(ks[mask]).max())


def safe_horizon(grid: Grid, psi0: np.ndarray, flow: str = "schrodinger") -> float:
    """Time before boundary reflections can contaminate the run.

    0.8 * (distance from the data's support to the wall) / v_max, with
    v_max = 2 max|k| for the Schrodinger flow and 1 for the wave flow.
    """
    amp = np.abs(np.asarray(psi0))
    support = np.abs(grid.points)[amp > 1e-8 * amp.max()].max()
    dist = grid.half_width - support
    if flow == "schrodinger":
        vmax = 2.0 * momentum_content_max(grid, psi0)
    elif flow == "wave":
        vmax = 1.0
    else:
        raise ValueError(f"unknown flow '{flow}'")
    if vmax <= 0:
        return math.inf
    return 0.8 * dist / vmax
