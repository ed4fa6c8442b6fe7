"""Stationary scattering off a sharp laser edge.

For the step profile the no-photon problem can be solved exactly with plane
waves. A ground-state wave e^{ikx} coming from the left is partly reflected
in the ground state; everything else ends in a photon emission, since the
excited amplitude decays on both sides of the edge. The rejected fraction of
a packet is then the momentum average of |r(k)|^2, which is what the
time-dependent propagation converges to as dx -> 0.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from .errors import UsageError
from .propagator import LaserProfile
from .wavepacket import GaussianPacketSpec


def _upper(z: np.ndarray) -> np.ndarray:
    """Square-root branch with non-negative imaginary part."""
    return np.where(z.imag < 0, -z, z)


def step_reflection(k, omega0: float, gamma: float, hbar_over_m: float) -> np.ndarray:
    """Ground-to-ground reflection amplitude r(k) of a step at x = 0.

    Left of the edge the ground wave is e^{ikx} + r e^{-ikx} and the excited
    wave decays towards -infinity; right of the edge the two eigenchannels of
    [[0, W/2], [W/2, -i g/2]] carry outgoing or evanescent waves. Both
    components and their derivatives are continuous at the edge.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k <= 0):
        raise UsageError("step_reflection needs positive incident wave numbers")
    energy = 0.5 * hbar_over_m * k**2
    q = _upper(np.sqrt(k**2 + 1j * gamma / hbar_over_m + 0j))
    m = np.array([[0.0, 0.5 * omega0], [0.5 * omega0, -0.5j * gamma]])
    lam, vec = np.linalg.eig(m)
    kappa = [_upper(np.sqrt(2 * (energy - lam_i) / hbar_over_m + 0j)) for lam_i in lam]

    a = np.zeros((k.size, 4, 4), dtype=complex)
    b = np.zeros((k.size, 4), dtype=complex)
    # unknowns: r, excited reflection, the two transmitted channel amplitudes
    a[:, 0] = [1, 0, -vec[0, 0], -vec[0, 1]]
    a[:, 1] = [0, 1, -vec[1, 0], -vec[1, 1]]
    a[:, 2, 0] = -1j * k
    a[:, 2, 2] = -1j * kappa[0] * vec[0, 0]
    a[:, 2, 3] = -1j * kappa[1] * vec[0, 1]
    a[:, 3, 1] = -1j * q
    a[:, 3, 2] = -1j * kappa[0] * vec[1, 0]
    a[:, 3, 3] = -1j * kappa[1] * vec[1, 1]
    b[:, 0] = -1.0
    b[:, 2] = -1j * k
    return np.linalg.solve(a, b[..., None])[:, 0, 0]


def stationary_rejected_fraction(spec: GaussianPacketSpec, profile: LaserProfile,
                                 gamma: float, *, sigmas: float = 10.0,
                                 nodes: int = 4001) -> float:
    """Momentum average of |r(k)|^2 for a packet incident on a step profile."""
    if profile.shape != "step":
        raise UsageError("the stationary solution exists only for the step profile")
    lo = max(spec.k0 - sigmas * spec.sigma_k, 1e-9)
    k = np.linspace(lo, spec.k0 + sigmas * spec.sigma_k, nodes)
    rho = np.abs(spec.momentum_amplitude(k)) ** 2  # carries the packet weight
    r = step_reflection(k, profile.omega0, gamma, spec.hbar_over_m)
    return float(trapezoid(rho * np.abs(r) ** 2, k))
