"""Arrival-time densities from propagation records, and distances between them."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import ConvergenceError, UsageError
from .propagator import PropagationRecord
from .wavepacket import momentum_amplitudes

NORMALIZATION_TOL = 1e-6
# run-completion thresholds for detected/rejected fractions
FLUX_TOL = 1e-6          # |dN/dt| at the end, 1/us
EDGE_REGION = 1.0        # um either side of the laser reference point
EDGE_REGION_PROB = 1e-6  # probability allowed to linger there
GROUND_SHARE = 0.99


@dataclass
class ArrivalDistribution:
    """Sampled density Pi(t) in 1/us on ``times`` (us)."""

    times: np.ndarray
    density: np.ndarray
    total_mass: float
    normalized: bool = False
    stderr: np.ndarray | None = None

    @classmethod
    def from_density(cls, times, density, stderr=None) -> ArrivalDistribution:
        times = np.asarray(times, dtype=float)
        density = np.asarray(density, dtype=float)
        return cls(times, density, float(trapezoid(density, times)), False, stderr)

    def normalize(self) -> ArrivalDistribution:
        """Divide by the total mass so the density integrates to one."""
        if self.total_mass <= 0:
            raise UsageError("cannot normalise a distribution with zero mass")
        stderr = None if self.stderr is None else self.stderr / self.total_mass
        return replace(self, density=self.density / self.total_mass, total_mass=1.0,
                       normalized=True, stderr=stderr)

    def cdf(self) -> np.ndarray:
        return cumulative_trapezoid(self.density, self.times, initial=0.0)


def pi_from_p2(record: PropagationRecord, gamma: float | None = None) -> ArrivalDistribution:
    """Pi(t) = gamma * P2(t); equal to -dN/dt for the effective Hamiltonian."""
    gamma = record.gamma if gamma is None else gamma
    return ArrivalDistribution.from_density(record.times, gamma * record.p2)


def _uniform_spacing(times: np.ndarray) -> float:
    steps = np.diff(times)
    h = float(np.mean(steps))
    if not np.allclose(steps, h, rtol=1e-9, atol=0):
        raise UsageError("finite differences need uniformly spaced samples")
    return h


def pi_from_norm_fd(record: PropagationRecord) -> ArrivalDistribution:
    """Pi(t) = -dN/dt by central differences (one-sided at the ends)."""
    times = np.asarray(record.times)
    if times.size < 3:
        raise UsageError("finite differences need at least three samples")
    h = _uniform_spacing(times)
    return ArrivalDistribution.from_density(times, -np.gradient(record.norm, h, edge_order=2))


def mixture(dists: list[ArrivalDistribution]) -> ArrivalDistribution:
    """Sum of member densities on a shared time grid.

    Members simulated from weighted packets already carry their weight in
    their norm, so the plain sum is the weighted mixture.
    """
    if not dists:
        raise UsageError("mixture of zero distributions")
    times = dists[0].times
    for d in dists[1:]:
        if d.times.shape != times.shape or not np.array_equal(d.times, times):
            raise UsageError("mixture members must share one time grid")
    return ArrivalDistribution.from_density(times, np.sum([d.density for d in dists], axis=0))


def check_completed(record: PropagationRecord) -> None:
    """Raise :class:`ConvergenceError` unless the run has finished emitting."""
    if record.gamma == 0:
        return
    if record.times.size >= 2:
        h = record.times[-1] - record.times[-2]
        flux = abs(record.norm[-1] - record.norm[-2]) / h
        if flux >= FLUX_TOL:
            raise ConvergenceError(
                f"norm still changing at t = {record.times[-1]:.4g} us "
                f"(|dN/dt| = {flux:.3g}/us >= {FLUX_TOL:g}); run longer")
    field = record.final_field
    x = field.grid.x
    ref = record.profile.reference_point
    near = np.abs(x - ref) <= EDGE_REGION
    lingering = float(np.sum(np.abs(field.ground[near]) ** 2)) * field.grid.dx
    if lingering >= EDGE_REGION_PROB:
        raise ConvergenceError(
            f"ground-state probability {lingering:.3g} still within {EDGE_REGION} um of the "
            f"laser edge at t = {record.times[-1]:.4g} us; run longer or enlarge the grid")


def rejection_consistency(record: PropagationRecord) -> tuple[float, float]:
    """(ground share of surviving norm, mean ground wave number)."""
    field = record.final_field
    total = field.norm()
    ground = total - field.excited_population()
    phi_g, _ = momentum_amplitudes(field)
    rho = np.abs(phi_g) ** 2
    mean_k = float(np.sum(field.grid.k * rho) / np.sum(rho)) if rho.sum() > 0 else 0.0
    return (ground / total if total > 0 else 1.0), mean_k


def detected_fraction(record: PropagationRecord) -> float:
    """Probability that a fluorescence photon was detected, 1 - N(t_end)/N(0)."""
    return 1.0 - rejected_fraction(record)


def rejected_fraction(record: PropagationRecord) -> float:
    """Probability that the atom never emitted, N(t_end)/N(0).

    The survivors must have been turned back: nearly all surviving norm in
    the ground state with negative mean momentum.
    """
    check_completed(record)
    survived = float(record.norm[-1] / record.norm[0])
    if record.gamma > 0 and survived > 1e-9:
        share, mean_k = rejection_consistency(record)
        if share < GROUND_SHARE or mean_k >= 0:
            raise ConvergenceError(
                f"surviving norm is not a reflected ground-state packet "
                f"(ground share {share:.4f}, mean k {mean_k:.4g}/um)")
    return survived


def _require_normalized(*dists: ArrivalDistribution) -> None:
    for d in dists:
        if not d.normalized:
            raise UsageError("distribution must be normalised; call .normalize() first")


def _common_grid(a: ArrivalDistribution, b: ArrivalDistribution):
    if a.times.shape == b.times.shape and np.array_equal(a.times, b.times):
        return a.times, a.density, b.density
    lo = min(a.times[0], b.times[0])
    hi = max(a.times[-1], b.times[-1])
    n = max(a.times.size, b.times.size)
    t = np.linspace(lo, hi, n)
    return (t, np.interp(t, a.times, a.density, left=0.0, right=0.0),
            np.interp(t, b.times, b.density, left=0.0, right=0.0))


def mean_time(dist: ArrivalDistribution) -> float:
    """First moment of a normalised distribution."""
    _require_normalized(dist)
    return float(trapezoid(dist.times * dist.density, dist.times))


def l1_distance(a: ArrivalDistribution, b: ArrivalDistribution) -> float:
    """Integral of |Pi_a - Pi_b|, in [0, 2]."""
    _require_normalized(a, b)
    t, pa, pb = _common_grid(a, b)
    return float(trapezoid(np.abs(pa - pb), t))


def ks_distance(a: ArrivalDistribution, b: ArrivalDistribution) -> float:
    """Largest gap between the two cumulative distribution functions."""
    _require_normalized(a, b)
    t, pa, pb = _common_grid(a, b)
    ca = cumulative_trapezoid(pa, t, initial=0.0)
    cb = cumulative_trapezoid(pb, t, initial=0.0)
    return float(np.max(np.abs(ca - cb)))
