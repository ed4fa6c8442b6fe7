"""Run orchestration shared by the CLI and the test-suite."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import arrival
from .arrival import ArrivalDistribution
from .config import SimulationConfig
from .kijowski import kijowski_mixture
from .montecarlo import (MonteCarloResult, TrajectoryConfig, empirical_ks,
                         first_photon_histogram, jump_probabilities)
from .propagator import PropagationRecord, propagate
from .wavepacket import sample_gaussian

log = logging.getLogger(__name__)


@dataclass
class SimulationResult:
    config: SimulationConfig
    records: list[PropagationRecord]
    times: np.ndarray
    norm: np.ndarray
    p2: np.ndarray
    detected: float | None
    rejected: float | None

    @property
    def operational(self) -> ArrivalDistribution:
        """gamma * P2 summed over mixture members (not normalised)."""
        return ArrivalDistribution.from_density(self.times, self.config.gamma * self.p2)


def simulate(cfg: SimulationConfig) -> SimulationResult:
    """Propagate every packet of the mixture and sum their records."""
    records = []
    for i, spec in enumerate(cfg.packets):
        log.info("propagating packet %d/%d (omega0 = %s, v = %.4g um/us)",
                 i + 1, len(cfg.packets), cfg.rabi.label, spec.v_mean)
        field = sample_gaussian(spec, cfg.grid)
        records.append(propagate(field, cfg.laser, cfg.gamma, cfg.dt, cfg.t_max,
                                 cfg.sample_stride, hbar_over_m=cfg.hbar_over_m,
                                 frozen_atom=cfg.frozen_atom))
    times = records[0].times
    norm = np.sum([r.norm for r in records], axis=0)
    p2 = np.sum([r.p2 for r in records], axis=0)
    detected = rejected = None
    if not cfg.frozen_atom:
        rejected = sum(arrival.rejected_fraction(r) * r.initial_weight for r in records)
        rejected /= sum(r.initial_weight for r in records)
        detected = 1.0 - rejected
    return SimulationResult(cfg, records, times, norm, p2, detected, rejected)


def kijowski_curve(cfg: SimulationConfig, times=None) -> ArrivalDistribution:
    if times is None:
        n = int(round(cfg.t_max / cfg.dt)) // cfg.sample_stride
        times = np.arange(n + 1) * (cfg.dt * cfg.sample_stride)
    return kijowski_mixture(cfg.packets, np.asarray(times, float), cfg.arrival_point)


def comparison_metrics(op: ArrivalDistribution, kij: ArrivalDistribution) -> dict:
    op_n = op.normalize()
    k_n = kij.normalize()
    mean_op = arrival.mean_time(op_n)
    mean_k = arrival.mean_time(k_n)
    return {
        "l1": arrival.l1_distance(op_n, k_n),
        "ks": arrival.ks_distance(op_n, k_n),
        "mean_operational_us": mean_op,
        "mean_kijowski_us": mean_k,
        "mean_delay_us": mean_op - mean_k,
        "operational_mass": op.total_mass,
        "kijowski_mass": kij.total_mass,
    }


def _split_counts(weights, n: int) -> list[int]:
    """Largest-remainder split of ``n`` trajectories by mixture weight."""
    raw = np.asarray(weights) * n
    counts = np.floor(raw).astype(int)
    order = np.argsort(-(raw - counts), kind="stable")
    for i in order[: n - counts.sum()]:
        counts[i] += 1
    return counts.tolist()


@dataclass
class MonteCarloRun:
    result: MonteCarloResult
    times: np.ndarray
    norm: np.ndarray
    ks: float


def montecarlo(cfg: SimulationConfig, threads: int = 1) -> MonteCarloRun:
    """First-photon Monte Carlo for the configured mixture.

    Trajectories are split over mixture members in proportion to their
    weights; member j uses consecutive seeds after member j-1.
    """
    mc = cfg.mc
    if mc is None:
        raise ValueError("configuration has no [mc] section")
    counts = _split_counts([p.weight for p in cfg.packets], mc.n_traj)
    seed = mc.seed
    firsts = []
    norm = None
    edges = np.linspace(0.0, int(round(cfg.t_max / cfg.dt)) * cfg.dt, mc.bins + 1)
    for spec, n in zip(cfg.packets, counts):
        field = sample_gaussian(spec, cfg.grid)
        # each member is simulated as a normalised pure state
        field.data /= np.sqrt(field.norm())
        tcfg = TrajectoryConfig(field, cfg.laser, cfg.gamma, cfg.hbar_over_m, cfg.dt,
                                cfg.t_max, cfg.frozen_atom)
        record, p = jump_probabilities(tcfg)
        member_norm = spec.weight * record.norm / record.norm[0]
        norm = member_norm if norm is None else norm + member_norm
        if n:
            res = first_photon_histogram(tcfg, n, seed, edges, threads=threads, p=p)
            firsts.append(res.first_times)
        seed += n
    first = np.concatenate(firsts)
    detected = first[~np.isnan(first)]
    hist, _ = np.histogram(detected, bins=edges)
    width = np.diff(edges)
    frac = hist / mc.n_traj
    dist = ArrivalDistribution(0.5 * (edges[1:] + edges[:-1]), frac / width,
                               float(frac.sum()), False,
                               np.sqrt(frac * (1 - frac) / mc.n_traj) / width)
    result = MonteCarloResult(dist, edges, hist, mc.n_traj,
                              float(np.isnan(first).sum() / mc.n_traj), first)
    times = record.times
    return MonteCarloRun(result, times, norm, empirical_ks(first, times, norm))
