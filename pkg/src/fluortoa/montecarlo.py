"""Quantum-jump trajectories and the motionless-atom master-equation oracle.

Each trajectory evolves the conditional state with the Strang stepper. After
every step a uniform number u is drawn from the trajectory's own Philox
stream (keyed by its seed, one draw per step index). If
u < gamma * dt * P2 / N a photon is recorded at that step's time and the
state collapses to the ground level: ground <- excited, excited <- 0,
renormalised. There is no recoil kick.

All trajectories share one no-photon branch until their first jump, so the
first-photon histogram propagates that branch once and replays each seed's
uniform stream against the per-step jump probabilities. This yields the same
first-photon times as :func:`run_trajectory`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arrival import ArrivalDistribution
from .errors import StepSizeError
from .propagator import LaserProfile, Stepper, potential_matrix, propagate
from .wavepacket import SpinorField

MC_STEP_MARGIN = 0.1
_BLOCK = 8192


@dataclass(frozen=True)
class TrajectoryConfig:
    initial: SpinorField
    profile: LaserProfile
    gamma: float
    hbar_over_m: float
    dt: float
    t_max: float
    frozen_atom: bool = False

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class TrajectoryRecord:
    """Photon-detection times of one atom; the first entry is its arrival time."""

    seed: int
    photon_times: np.ndarray
    survived: bool
    sample_times: np.ndarray | None = None
    excited_fraction: np.ndarray | None = None


@dataclass
class MonteCarloResult:
    """Binned first-photon statistics of ``n_traj`` trajectories."""

    distribution: ArrivalDistribution
    edges: np.ndarray
    counts: np.ndarray
    n_traj: int
    survived_fraction: float
    first_times: np.ndarray = field(repr=False)

    def survived_stderr(self) -> float:
        p = self.survived_fraction
        return math.sqrt(p * (1 - p) / self.n_traj)


@dataclass(frozen=True)
class TwoLevelDensity:
    """Time series of the internal density matrix of a motionless atom."""

    times: np.ndarray
    rho11: np.ndarray
    rho22: np.ndarray
    rho12: np.ndarray


def check_mc_step(profile: LaserProfile, gamma: float, dt: float) -> None:
    rate = max(profile.omega0, gamma)
    if rate > 0 and dt >= MC_STEP_MARGIN / rate:
        raise StepSizeError(
            f"dt = {dt:g} us too coarse for quantum jumps: need dt < "
            f"{MC_STEP_MARGIN}/max(omega0, gamma) = {MC_STEP_MARGIN / rate:.3g} us")


class UniformStream:
    """Uniform draws u_1, u_2, ... for one seed, indexed by step number."""

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))
        self._buf = np.empty(0)
        self._start = 1  # step index of self._buf[0]

    def block(self) -> tuple[int, np.ndarray]:
        """Next block of draws and the step index of its first entry."""
        self._start += self._buf.size
        self._buf = self._gen.random(_BLOCK)
        return self._start, self._buf


def run_trajectory(config: TrajectoryConfig, seed: int, *, first_only: bool = False,
                   record_stride: int = 0) -> TrajectoryRecord:
    """Simulate one atom, recording every photon detection up to ``t_max``.

    The state is kept unnormalised between jumps (and the initial state is
    used as given); the jump probability uses the ratio P2/N, which is what
    renormalising every step would give.
    ``record_stride > 0`` also stores the excited fraction P2/N every
    ``record_stride`` steps (for ensemble averages).
    """
    check_mc_step(config.profile, config.gamma, config.dt)
    grid = config.initial.grid
    stepper = Stepper(grid, config.profile, config.gamma, config.dt, config.hbar_over_m,
                      config.frozen_atom)
    psi = config.initial.data.copy()
    n0, p20 = stepper.populations(psi)
    gdt = config.gamma * config.dt
    photons = []
    samples_t, samples_f = [], []
    if record_stride:
        samples_t.append(0.0)
        samples_f.append(p20 / n0)
    stream = UniformStream(seed)
    start, u = stream.block()
    for s in range(1, config.n_steps + 1):
        psi = stepper.step(psi)
        norm, p2 = stepper.populations(psi)
        if s - start >= u.size:
            start, u = stream.block()
        if u[s - start] < gdt * p2 / norm:
            photons.append(s * config.dt)
            if first_only:
                break
            psi[0] = psi[1]
            psi[1] = 0.0
            psi /= math.sqrt(stepper.populations(psi)[0])
            norm, p2 = 1.0, 0.0
        if record_stride and s % record_stride == 0:
            samples_t.append(s * config.dt)
            samples_f.append(p2 / norm)
    return TrajectoryRecord(
        seed=int(seed), photon_times=np.asarray(photons), survived=not photons,
        sample_times=np.asarray(samples_t) if record_stride else None,
        excited_fraction=np.asarray(samples_f) if record_stride else None)


def jump_probabilities(config: TrajectoryConfig):
    """Per-step jump probability gamma*dt*P2/N along the no-photon branch.

    Returns (record, p) with ``p[s]`` the probability used after step ``s``.
    """
    check_mc_step(config.profile, config.gamma, config.dt)
    record = propagate(config.initial, config.profile, config.gamma, config.dt, config.t_max,
                       1, hbar_over_m=config.hbar_over_m, frozen_atom=config.frozen_atom)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = config.gamma * config.dt * record.p2 / record.norm
    p[0] = 0.0
    return record, p


def first_jump_step(seed: int, p: np.ndarray) -> int:
    """Index of the first step whose draw falls below ``p``; 0 if none."""
    n_steps = p.size - 1
    stream = UniformStream(seed)
    while True:
        start, u = stream.block()
        if start > n_steps:
            return 0
        stop = min(start + u.size, n_steps + 1)
        hits = np.flatnonzero(u[:stop - start] < p[start:stop])
        if hits.size:
            return start + int(hits[0])


def first_photon_times(config: TrajectoryConfig, seeds, *, threads: int = 1,
                       p: np.ndarray | None = None) -> np.ndarray:
    """First-photon time for each seed (NaN for survivors)."""
    if p is None:
        _, p = jump_probabilities(config)
    seeds = list(seeds)

    def work(chunk):
        return [first_jump_step(s, p) for s in chunk]

    if threads > 1 and len(seeds) > 1:
        size = math.ceil(len(seeds) / threads)
        chunks = [seeds[i:i + size] for i in range(0, len(seeds), size)]
        with ThreadPoolExecutor(threads) as pool:
            steps = [s for part in pool.map(work, chunks) for s in part]
    else:
        steps = work(seeds)
    steps = np.asarray(steps, dtype=float)
    return np.where(steps > 0, steps * config.dt, np.nan)


def first_photon_histogram(config: TrajectoryConfig, n_traj: int, base_seed: int,
                           bins, *, threads: int = 1,
                           p: np.ndarray | None = None) -> MonteCarloResult:
    """Histogram of first-photon times of trajectories seeded base_seed + i.

    ``bins`` is a bin count over [0, t_max] or an array of edges. The density
    is counts / (n_traj * width), so it integrates to the detected fraction;
    standard errors are binomial per bin.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if np.ndim(bins) == 0:
        edges = np.linspace(0.0, config.n_steps * config.dt, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    seeds = [base_seed + i for i in range(n_traj)]
    first = first_photon_times(config, seeds, threads=threads, p=p)
    detected = first[~np.isnan(first)]
    counts, _ = np.histogram(detected, bins=edges)
    width = np.diff(edges)
    frac = counts / n_traj
    density = frac / width
    stderr = np.sqrt(frac * (1 - frac) / n_traj) / width
    centers = 0.5 * (edges[1:] + edges[:-1])
    dist = ArrivalDistribution(centers, density, float(np.sum(frac)), False, stderr)
    return MonteCarloResult(dist, edges, counts, n_traj,
                            float(np.sum(np.isnan(first)) / n_traj), first)


def empirical_ks(first_times: np.ndarray, times: np.ndarray, norm: np.ndarray) -> float:
    """KS distance between sampled first-photon times and 1 - N(t)/N(0).

    Survivors count as arrivals at +infinity, so both sides are
    sub-distributions of the same total sample size.
    """
    n = first_times.size
    det = np.sort(first_times[~np.isnan(first_times)])
    cdf_model = lambda t: 1.0 - np.interp(t, times, norm) / norm[0]  # noqa: E731
    f = cdf_model(det)
    hi = np.arange(1, det.size + 1) / n
    lo = np.arange(0, det.size) / n
    gap = max(np.max(np.abs(hi - f), initial=0.0), np.max(np.abs(f - lo), initial=0.0))
    # the model keeps rising after the last detection
    tail = abs(cdf_model(times[-1]) - det.size / n)
    return float(max(gap, tail))


def lindblad_0d(omega: float, gamma: float, t_grid, *, excited_initial: bool = False
                ) -> TwoLevelDensity:
    """Optical Bloch equations at zero detuning, classical RK4.

    Integrates the three entries rho11, rho22, rho12 independently (trace is
    not imposed) with a step no larger than 1e-3 / max(omega, gamma).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    rate = max(omega, gamma, 1e-300)
    h_max = 1e-3 / rate

    def deriv(r11, r22, r12):
        flow = omega * r12.imag
        return (-flow + gamma * r22, flow - gamma * r22,
                -0.5j * omega * (r22 - r11) - 0.5 * gamma * r12)

    y = (0j, 1 + 0j, 0j) if excited_initial else (1 + 0j, 0j, 0j)
    out = np.empty((t_grid.size, 3), dtype=complex)
    t = 0.0
    for i, target in enumerate(t_grid):
        span = target - t
        if span > 0:
            n = max(1, math.ceil(span / h_max))
            h = span / n
            for _ in range(n):
                k1 = deriv(*y)
                k2 = deriv(*(a + 0.5 * h * b for a, b in zip(y, k1)))
                k3 = deriv(*(a + 0.5 * h * b for a, b in zip(y, k2)))
                k4 = deriv(*(a + h * b for a, b in zip(y, k3)))
                y = tuple(a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
                          for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
            t = target
        out[i] = y
    return TwoLevelDensity(t_grid, out[:, 0].real, out[:, 1].real, out[:, 2])


def lindblad_steady_state(omega: float, gamma: float) -> float:
    """Stationary excited population at zero detuning."""
    return omega**2 / (gamma**2 + 2 * omega**2)


def lindblad_0d_conditional(omega: float, gamma: float, t_grid):
    """No-photon branch of a motionless atom starting in the ground state.

    Returns (N(t), P2(t)) from the exact 2x2 exponential of the effective
    Hamiltonian.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    a11, a12, _ = potential_matrix(np.full(t_grid.shape, omega), gamma, t_grid)
    p1 = np.abs(a11) ** 2
    p2 = np.abs(a12) ** 2
    return p1 + p2, p2
