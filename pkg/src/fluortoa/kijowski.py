"""Kijowski's ideal time-of-arrival density for free motion.

For a state with momentum amplitude phi(k) (normalised over k) and arrival
point X, in internal units (hbar = 1),

    Pi_K(t) = (hbar/m) / (2 pi) * | int_0^inf dk sqrt(k) phi(k) exp(i k X - i (hbar/m) k^2 t / 2) |^2

Only the positive-momentum sector contributes, and Pi_K integrates over all
t to the probability of k > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrival import ArrivalDistribution
from .errors import ConvergenceError, DomainError, UsageError
from .wavepacket import GaussianPacketSpec

MIN_POSITIVE_MASS = 0.999
QUADRATURE_SIGMAS = 8.0
MIN_NODES = 2048
SELF_CHECK_TOL = 1e-8
# cap on the (times x nodes) phase matrix built at once
_CHUNK_ELEMENTS = 2**22


@dataclass(frozen=True)
class MomentumSamples:
    """Momentum amplitudes on a uniform k grid, e.g. from an FFT of a grid field."""

    k: np.ndarray
    phi: np.ndarray
    hbar_over_m: float

    def positive_mass(self) -> float:
        dk = self.k[1] - self.k[0]
        rho = np.abs(self.phi) ** 2
        return float(np.sum(rho[self.k > 0]) / np.sum(rho)) if dk > 0 else 0.0


@dataclass(frozen=True)
class KijowskiRequest:
    packet: GaussianPacketSpec | MomentumSamples
    times: np.ndarray
    arrival_point: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise UsageError("Kijowski times must be a strictly increasing 1-D array")


def _amplitude(k, w, phi, times, X, hbar_over_m):
    """sum_j w_j sqrt(k_j) phi_j exp(i k_j X - i hbar/m k_j^2 t / 2) for every t."""
    coeff = w * np.sqrt(k) * phi * np.exp(1j * k * X)
    out = np.empty(times.size, dtype=complex)
    step = max(1, _CHUNK_ELEMENTS // k.size)
    k2 = -0.5 * hbar_over_m * k**2
    for lo in range(0, times.size, step):
        t = times[lo:lo + step]
        out[lo:lo + step] = np.exp(1j * np.outer(t, k2)) @ coeff
    return out


def _trapezoid_weights(k):
    w = np.empty_like(k)
    w[1:-1] = 0.5 * (k[2:] - k[:-2])
    w[0] = 0.5 * (k[1] - k[0])
    w[-1] = 0.5 * (k[-1] - k[-2])
    return w


def _gaussian_density(spec: GaussianPacketSpec, times, X, nodes):
    lo = max(0.0, spec.k0 - QUADRATURE_SIGMAS * spec.sigma_k)
    hi = spec.k0 + QUADRATURE_SIGMAS * spec.sigma_k
    k = np.linspace(lo, hi, nodes)
    amp = _amplitude(k, _trapezoid_weights(k), spec.momentum_amplitude(k), times, X,
                     spec.hbar_over_m)
    return spec.hbar_over_m / (2 * math.pi) * np.abs(amp) ** 2


def _sampled_density(samples: MomentumSamples, times, X):
    keep = samples.k > 0
    k = samples.k[keep]
    order = np.argsort(k)
    k = k[order]
    phi = samples.phi[keep][order]
    # uniform FFT grid: plain Riemann sum matches the discrete normalisation
    w = np.full(k.size, samples.k[1] - samples.k[0] if samples.k.size > 1 else 1.0)
    w = np.abs(w)
    amp = _amplitude(k, w, phi, times, X, samples.hbar_over_m)
    return samples.hbar_over_m / (2 * math.pi) * np.abs(amp) ** 2


def kijowski_distribution(req: KijowskiRequest, *, nodes: int = MIN_NODES,
                          self_check: bool = True) -> ArrivalDistribution:
    """Sample Pi_K on ``req.times``.

    Gaussian packets use the analytic momentum amplitude and a trapezoid rule
    over k0 +- 8 sigma_k; with ``self_check`` the rule is repeated with twice
    the nodes and any sampled value moving by more than 1e-8 raises
    :class:`ConvergenceError`.
    """
    times = np.asarray(req.times, dtype=float)
    packet = req.packet
    if isinstance(packet, GaussianPacketSpec):
        positive = 1.0 - packet.negative_momentum_mass()
        if positive < MIN_POSITIVE_MASS:
            raise DomainError(
                f"packet has P(k>0) = {positive:.6f} < {MIN_POSITIVE_MASS}; the "
                f"positive-momentum arrival formula does not apply")
        if nodes < MIN_NODES:
            raise UsageError(f"at least {MIN_NODES} quadrature nodes required")
        density = _gaussian_density(packet, times, req.arrival_point, nodes)
        if self_check:
            finer = _gaussian_density(packet, times, req.arrival_point, 2 * nodes - 1)
            gap = float(np.max(np.abs(finer - density)))
            if gap > SELF_CHECK_TOL:
                raise ConvergenceError(
                    f"Kijowski quadrature not converged: doubling nodes moved a value by {gap:.3g}")
    else:
        positive = packet.positive_mass()
        if positive < MIN_POSITIVE_MASS:
            raise DomainError(
                f"state has P(k>0) = {positive:.6f} < {MIN_POSITIVE_MASS}; the "
                f"positive-momentum arrival formula does not apply")
        density = _sampled_density(packet, times, req.arrival_point)
    return ArrivalDistribution.from_density(times, density)


def kijowski_mixture(specs, times, arrival_point: float = 0.0, **kw) -> ArrivalDistribution:
    """Weighted sum of member densities for an incoherent packet mixture.

    Each member's analytic amplitude already carries sqrt(weight).
    """
    total = None
    for spec in specs:
        d = kijowski_distribution(KijowskiRequest(spec, times, arrival_point), **kw)
        total = d.density if total is None else total + d.density
    return ArrivalDistribution.from_density(times, total)
