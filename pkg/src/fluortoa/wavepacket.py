"""Grids, two-component fields and minimum-uncertainty Gaussian packets.

All quantities are in internal units (um, us, hbar = 1); wave numbers k are
in 1/um and velocities are ``hbar_over_m * k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft
from scipy.special import erfc

from .errors import ConfigError, GridError

# momentum reach required on the grid, in velocity standard deviations
ALIAS_SIGMAS = 6.0
# packet amplitude allowed at the grid ends, relative to its peak
EDGE_AMPLITUDE = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``x_j = x_min + j*dx``, ``j = 0..n-1``."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self):
        n = int(self.n)
        if n < 2 or n & (n - 1):
            raise GridError(f"grid point count must be a power of two >= 2, got {self.n}")
        if not (math.isfinite(self.dx) and self.dx > 0):
            raise GridError(f"grid spacing must be positive, got {self.dx}")
        if not math.isfinite(self.x_min):
            raise GridError("grid origin must be finite")

    @classmethod
    def from_extent(cls, x_min: float, x_max: float, n: int) -> Grid:
        if not x_max > x_min:
            raise GridError(f"grid needs x_max > x_min, got [{x_min}, {x_max}]")
        return cls(float(x_min), (x_max - x_min) / int(n), int(n))

    @property
    def x_max(self) -> float:
        return self.x_min + self.n * self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Angular wave numbers in standard FFT ordering."""
        return 2 * np.pi * sfft.fftfreq(self.n, self.dx)

    @property
    def dk(self) -> float:
        return 2 * np.pi / (self.n * self.dx)

    @property
    def k_max(self) -> float:
        return math.pi / self.dx


@dataclass(frozen=True)
class GaussianPacketSpec:
    """Analytic minimum-uncertainty packet in the ground state.

    ``x0`` is the current centre; after :func:`free_evolve_spec` it already
    includes the drift ``v_mean * t_offset``. ``dv`` is the velocity standard
    deviation and ``weight`` the packet's probability in an incoherent mixture.
    """

    x0: float
    v_mean: float
    dv: float
    hbar_over_m: float
    weight: float = 1.0
    t_offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.dv) and self.dv > 0):
            raise ConfigError(f"packet velocity spread dv must be positive, got {self.dv}")
        if not (math.isfinite(self.hbar_over_m) and self.hbar_over_m > 0):
            raise ConfigError("hbar_over_m must be positive")
        if not 0.0 <= self.weight <= 1.0:
            raise ConfigError(f"packet weight must lie in [0, 1], got {self.weight}")
        if not self.t_offset >= 0:
            raise ConfigError(f"t_offset must be non-negative, got {self.t_offset}")
        if not (math.isfinite(self.x0) and math.isfinite(self.v_mean)):
            raise ConfigError("packet centre and mean velocity must be finite")

    @property
    def sigma_x0(self) -> float:
        """Position spread at preparation, hbar/(2 m dv)."""
        return self.hbar_over_m / (2 * self.dv)

    @property
    def sigma_x(self) -> float:
        """Position spread after ``t_offset`` of free flight."""
        s0 = self.sigma_x0
        return s0 * math.sqrt(1 + (self.hbar_over_m * self.t_offset / (2 * s0**2)) ** 2)

    @property
    def k0(self) -> float:
        return self.v_mean / self.hbar_over_m

    @property
    def sigma_k(self) -> float:
        return self.dv / self.hbar_over_m

    @property
    def x_prepared(self) -> float:
        """Centre at preparation time."""
        return self.x0 - self.v_mean * self.t_offset

    def negative_momentum_mass(self) -> float:
        """Probability of k < 0, analytic."""
        return 0.5 * float(erfc(self.k0 / (math.sqrt(2) * self.sigma_k)))

    def amplitude(self, x: np.ndarray) -> np.ndarray:
        """Position amplitude, including the sqrt(weight) factor."""
        x = np.asarray(x, dtype=float)
        s0 = self.sigma_x0
        a = self.x_prepared
        t = self.t_offset
        spread = 1 + 1j * self.hbar_over_m * t / (2 * s0**2)
        k0 = self.k0
        phase = k0 * (x - a) - 0.5 * k0 * self.v_mean * t
        psi = ((2 * math.pi * s0**2) ** -0.25 / np.sqrt(spread)
               * np.exp(-((x - self.x0) ** 2) / (4 * s0**2 * spread) + 1j * phase))
        return math.sqrt(self.weight) * psi

    def momentum_amplitude(self, k: np.ndarray) -> np.ndarray:
        """Momentum amplitude (normalised over k), including sqrt(weight)."""
        k = np.asarray(k, dtype=float)
        sk = self.sigma_k
        phi = ((2 * math.pi * sk**2) ** -0.25
               * np.exp(-((k - self.k0) ** 2) / (4 * sk**2)
                        - 1j * k * self.x_prepared
                        - 0.5j * self.hbar_over_m * k**2 * self.t_offset))
        return math.sqrt(self.weight) * phi


class SpinorField:
    """Conditional two-level state on a grid.

    ``data`` has shape ``(2, n)``: row 0 is the ground amplitude, row 1 the
    excited amplitude. Amplitudes are normalised so that
    ``sum(|psi|^2) * dx`` is the probability.
    """

    __slots__ = ("data", "grid")

    def __init__(self, data, grid: Grid):
        data = np.ascontiguousarray(data, dtype=np.complex128)
        if data.shape != (2, grid.n):
            raise ConfigError(f"spinor data must have shape (2, {grid.n}), got {data.shape}")
        self.data = data
        self.grid = grid

    @classmethod
    def from_components(cls, ground, excited, grid: Grid) -> SpinorField:
        return cls(np.stack([np.asarray(ground), np.asarray(excited)]), grid)

    @property
    def ground(self) -> np.ndarray:
        return self.data[0]

    @property
    def excited(self) -> np.ndarray:
        return self.data[1]

    def copy(self) -> SpinorField:
        return SpinorField(self.data.copy(), self.grid)

    def norm(self) -> float:
        """Squared norm N = sum_j (|g_j|^2 + |e_j|^2) dx."""
        return float(np.sum(np.abs(self.data) ** 2)) * self.grid.dx

    def excited_population(self) -> float:
        return float(np.sum(np.abs(self.data[1]) ** 2)) * self.grid.dx

    def density(self) -> np.ndarray:
        return np.sum(np.abs(self.data) ** 2, axis=0)


def check_resolution(spec: GaussianPacketSpec, grid: Grid) -> None:
    """Raise :class:`GridError` if ``grid`` aliases or clips ``spec``."""
    need = abs(spec.k0) + ALIAS_SIGMAS * spec.sigma_k
    if grid.k_max <= need:
        dx_req = math.pi / need
        raise GridError(
            f"grid too coarse: k_max = {grid.k_max:.4g}/um must exceed {need:.4g}/um; "
            f"use dx < {dx_req:.4g} um (currently {grid.dx:.4g} um)")
    # Gaussian amplitude falls to EDGE_AMPLITUDE of the peak at this distance
    reach = spec.sigma_x * math.sqrt(-4 * math.log(EDGE_AMPLITUDE))
    lo, hi = spec.x0 - reach, spec.x0 + reach
    if lo < grid.x_min or hi > grid.x_max - grid.dx:
        raise GridError(
            f"packet tails leave the grid: need [{lo:.4g}, {hi:.4g}] um inside "
            f"[{grid.x_min:.4g}, {grid.x_max:.4g}] um")


def sample_gaussian(spec: GaussianPacketSpec, grid: Grid) -> SpinorField:
    """Discretise ``spec`` onto ``grid``; the excited component is zero."""
    check_resolution(spec, grid)
    data = np.zeros((2, grid.n), dtype=np.complex128)
    data[0] = spec.amplitude(grid.x)
    return SpinorField(data, grid)


def free_evolve_spec(spec: GaussianPacketSpec, t: float) -> GaussianPacketSpec:
    """Advance a packet analytically by ``t`` of free flight."""
    if not t >= 0:
        raise ConfigError(f"free evolution time must be non-negative, got {t}")
    if t == 0:
        return spec
    return replace(spec, x0=spec.x0 + spec.v_mean * t, t_offset=spec.t_offset + t)


def momentum_amplitudes(field: SpinorField) -> tuple[np.ndarray, np.ndarray]:
    """Momentum amplitudes of both components on ``field.grid.k``.

    Convention: phi(k_j) = dx/sqrt(2 pi) * sum_l psi(x_l) exp(-i k_j x_l),
    so that sum |phi|^2 dk equals sum |psi|^2 dx.
    """
    grid = field.grid
    k = grid.k
    phase = grid.dx / math.sqrt(2 * math.pi) * np.exp(-1j * k * grid.x_min)
    phi = sfft.fft(field.data, axis=-1) * phase
    return phi[0], phi[1]


def position_moments(field: SpinorField) -> tuple[float, float]:
    """Mean and standard deviation of x for the total density."""
    rho = field.density() * field.grid.dx
    total = rho.sum()
    x = field.grid.x
    mean = float(np.sum(x * rho) / total)
    var = float(np.sum((x - mean) ** 2 * rho) / total)
    return mean, math.sqrt(var)


def momentum_moments(field: SpinorField) -> tuple[float, float]:
    """Mean and standard deviation of k for the total momentum density."""
    phi_g, phi_e = momentum_amplitudes(field)
    rho = (np.abs(phi_g) ** 2 + np.abs(phi_e) ** 2) * field.grid.dk
    total = rho.sum()
    k = field.grid.k
    mean = float(np.sum(k * rho) / total)
    var = float(np.sum((k - mean) ** 2 * rho) / total)
    return mean, math.sqrt(var)
