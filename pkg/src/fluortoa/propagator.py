"""Strang-split spectral propagation under the effective Hamiltonian.

The conditional (no-photon) state evolves under

    H_eff = p^2/2m + (Omega(x)/2) (sigma+ + sigma-) - i (gamma/2) |2><2|

with hbar = 1. Each step is half a potential step, a full kinetic step in
momentum space, and another half potential step. The potential part is the
exact exponential of a 2x2 matrix at every grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import BoundaryError, ConfigError, GridError, StepSizeError
from .wavepacket import SpinorField

EDGE_POINTS = 8
EDGE_LEAK_LIMIT = 1e-6
# dt * max(omega0, gamma) must stay below this
ACCURACY_GUARD = 0.5
# below this |Delta * tau| use the series for sin(Delta tau)/Delta
SERIES_SWITCH = 1e-4
# k_max must exceed the dressed-channel wave number by this factor
COUPLED_K_MARGIN = 2.0


@dataclass(frozen=True)
class LaserProfile:
    """Position-dependent Rabi frequency (rad/us).

    ``step``: omega0 for x >= edge, 0 otherwise (the edge point is inside).
    ``gaussian``: omega0 * exp(-(x - center)^2 / (2 width^2)).
    """

    shape: Literal["step", "gaussian"] = "step"
    omega0: float = 0.0
    edge: float = 0.0
    center: float = 0.0
    width: float | None = None

    def __post_init__(self):
        if self.shape not in ("step", "gaussian"):
            raise ConfigError(f"laser shape must be 'step' or 'gaussian', got {self.shape!r}")
        if not (math.isfinite(self.omega0) and self.omega0 >= 0):
            raise ConfigError(f"omega0 must be non-negative, got {self.omega0}")
        if self.shape == "gaussian" and not (self.width is not None and self.width > 0):
            raise ConfigError("a gaussian laser profile needs a positive width")

    @property
    def reference_point(self) -> float:
        """Step edge or beam centre; the default arrival point."""
        return self.edge if self.shape == "step" else self.center


def omega_at(profile: LaserProfile, x):
    """Rabi frequency at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if profile.shape == "step":
        out = np.where(x >= profile.edge, profile.omega0, 0.0)
    else:
        out = profile.omega0 * np.exp(-((x - profile.center) ** 2) / (2 * profile.width**2))
    return float(out) if out.ndim == 0 else out


def potential_matrix(omega, gamma: float, tau: float):
    """Entries (a11, a12, a22) of exp(-i tau M), M = [[0, W/2], [W/2, -i g/2]].

    With mu = -i g/4 and Delta^2 = mu^2 + W^2/4,
    exp(-i tau M) = exp(-i mu tau) [cos(Delta tau) I - i sin(Delta tau)/Delta (M - mu I)].
    The result is symmetric, so a21 = a12.
    """
    omega = np.asarray(omega, dtype=float)
    mu = -0.25j * gamma
    delta = np.sqrt(mu * mu + 0.25 * omega.astype(complex) ** 2)
    z = delta * tau
    small = np.abs(z) < SERIES_SWITCH
    safe = np.where(small, 1.0, delta)
    z2 = z * z
    sinc_tau = np.where(small, tau * (1 - z2 / 6 + z2 * z2 / 120), np.sin(z) / safe)
    cos = np.cos(z)
    pre = np.exp(-1j * mu * tau)
    a11 = pre * (cos + 1j * sinc_tau * mu)
    a12 = pre * (-0.5j * sinc_tau * omega)
    a22 = pre * (cos - 1j * sinc_tau * (-0.5j * gamma - mu))
    return a11, a12, a22


def kinetic_phase(grid, dt: float, hbar_over_m: float) -> np.ndarray:
    return np.exp(-0.5j * hbar_over_m * grid.k**2 * dt)


def check_step_size(profile: LaserProfile, gamma: float, dt: float) -> None:
    if not (math.isfinite(dt) and dt > 0):
        raise StepSizeError(f"time step must be positive, got {dt}")
    rate = max(profile.omega0, gamma)
    if dt * rate >= ACCURACY_GUARD:
        raise StepSizeError(
            f"dt = {dt:g} us too coarse: dt*max(omega0, gamma) = {dt * rate:.3g} must be "
            f"< {ACCURACY_GUARD}; use dt < {ACCURACY_GUARD / rate:.3g} us")


def coupled_wavenumber(k_in: float, profile: LaserProfile, hbar_over_m: float) -> float:
    """Wave number inside the beam of the dressed channel shifted down by omega0/2.

    Entering the light converts up to hbar*omega0/2 of internal energy into
    kinetic energy, so this channel is faster than the incoming packet.
    """
    return math.sqrt(k_in**2 + profile.omega0 / hbar_over_m)


def check_coupled_resolution(grid, k_in: float, profile: LaserProfile,
                             hbar_over_m: float) -> None:
    """Raise :class:`GridError` if ``grid`` under-resolves the laser-coupled channel.

    The sharp beam edge scatters into a broad band around that wave number,
    so a margin of ``COUPLED_K_MARGIN`` is required.
    """
    need = COUPLED_K_MARGIN * coupled_wavenumber(k_in, profile, hbar_over_m)
    if grid.k_max <= need:
        raise GridError(
            f"grid too coarse for the laser-coupled channel: k_max = {grid.k_max:.4g}/um must "
            f"exceed {need:.4g}/um; use dx < {math.pi / need:.4g} um (currently {grid.dx:.4g} um)")


def half_potential_step(field: SpinorField, profile: LaserProfile, gamma: float,
                        dt: float) -> SpinorField:
    """Apply exp(-i (dt/2) M(x)) at every grid point; returns a new field."""
    if not dt > 0:
        raise StepSizeError(f"time step must be positive, got {dt}")
    out = field.copy()
    a11, a12, a22 = potential_matrix(omega_at(profile, field.grid.x), gamma, dt / 2)
    kernels.apply_potential(out.data, a11, a12, a22)
    return out


def kinetic_full_step(field: SpinorField, dt: float, hbar_over_m: float) -> SpinorField:
    """Free evolution over ``dt`` for both components; returns a new field."""
    phi = sfft.fft(field.data, axis=-1)
    kernels.apply_phase(phi, kinetic_phase(field.grid, dt, hbar_over_m))
    return SpinorField(sfft.ifft(phi, axis=-1, overwrite_x=True), field.grid)


class Stepper:
    """Precomputed in-place Strang stepper for one (profile, gamma, dt).

    ``frozen_atom`` drops the kinetic step, leaving independent damped Rabi
    oscillations at every grid point.
    """

    def __init__(self, grid, profile: LaserProfile, gamma: float, dt: float,
                 hbar_over_m: float, frozen_atom: bool = False):
        check_step_size(profile, gamma, dt)
        self.grid = grid
        self.dt = dt
        self.frozen_atom = frozen_atom
        self.half = tuple(np.ascontiguousarray(a) for a in
                          potential_matrix(omega_at(profile, grid.x), gamma, dt / 2))
        self.phase = np.ascontiguousarray(kinetic_phase(grid, dt, hbar_over_m))

    def step(self, psi: np.ndarray) -> np.ndarray:
        """Advance ``psi`` (shape (2, n)) by one step; may return a new array."""
        kernels.apply_potential(psi, *self.half)
        if not self.frozen_atom:
            psi = sfft.fft(psi, axis=-1, overwrite_x=True)
            kernels.apply_phase(psi, self.phase)
            psi = sfft.ifft(psi, axis=-1, overwrite_x=True)
        kernels.apply_potential(psi, *self.half)
        return psi

    def populations(self, psi: np.ndarray) -> tuple[float, float]:
        """(N, P2) of ``psi``."""
        total, excited = kernels.populations(psi)
        return total * self.grid.dx, excited * self.grid.dx


def strang_step(field: SpinorField, profile: LaserProfile, gamma: float, dt: float, *,
                hbar_over_m: float, frozen_atom: bool = False) -> SpinorField:
    """One symmetric potential/kinetic/potential step; returns a new field."""
    stepper = Stepper(field.grid, profile, gamma, dt, hbar_over_m, frozen_atom)
    return SpinorField(stepper.step(field.data.copy()), field.grid)


@dataclass
class PropagationRecord:
    """Sampled norm N(t) and excited population P2(t) of one propagation."""

    times: np.ndarray
    norm: np.ndarray
    p2: np.ndarray
    edge_leak: float
    final_field: SpinorField
    gamma: float
    dt: float
    profile: LaserProfile
    hbar_over_m: float

    @property
    def initial_weight(self) -> float:
        return float(self.norm[0])


def propagate(initial: SpinorField, profile: LaserProfile, gamma: float, dt: float,
              t_max: float, sample_stride: int = 1, *, hbar_over_m: float,
              frozen_atom: bool = False, check_edges: bool = True) -> PropagationRecord:
    """Iterate Strang steps up to ``t_max``, sampling N and P2 every ``sample_stride`` steps.

    Raises :class:`BoundaryError` if the density within ``EDGE_POINTS`` of
    either grid end exceeds ``EDGE_LEAK_LIMIT`` at any sample. The check is
    skipped for a frozen atom, whose density cannot move.
    """
    if not t_max > 0:
        raise ConfigError(f"t_max must be positive, got {t_max}")
    sample_stride = int(sample_stride)
    if sample_stride < 1:
        raise ConfigError(f"sample_stride must be >= 1, got {sample_stride}")
    stepper = Stepper(initial.grid, profile, gamma, dt, hbar_over_m, frozen_atom)
    n_steps = int(round(t_max / dt))
    n_samples = n_steps // sample_stride + 1
    times = np.empty(n_samples)
    norm = np.empty(n_samples)
    p2 = np.empty(n_samples)

    psi = initial.data.copy()
    edge_leak = 0.0
    check_edges = check_edges and not frozen_atom

    def sample(i, step_index):
        nonlocal edge_leak
        times[i] = step_index * dt
        norm[i], p2[i] = stepper.populations(psi)
        if check_edges:
            leak = kernels.edge_density(psi, EDGE_POINTS)
            edge_leak = max(edge_leak, leak)
            if leak > EDGE_LEAK_LIMIT:
                raise BoundaryError(
                    f"density {leak:.3g}/um reached the grid edge at t = {times[i]:.4g} us "
                    f"(limit {EDGE_LEAK_LIMIT:g}); enlarge the grid")

    sample(0, 0)
    i = 1
    for s in range(1, n_samples * sample_stride - sample_stride + 1):
        psi = stepper.step(psi)
        if s % sample_stride == 0:
            sample(i, s)
            i += 1
    return PropagationRecord(
        times=times, norm=norm, p2=p2, edge_leak=edge_leak,
        final_field=SpinorField(psi, initial.grid), gamma=gamma, dt=dt,
        profile=profile, hbar_over_m=hbar_over_m)
