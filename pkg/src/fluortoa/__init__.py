"""Operational arrival-time distributions of two-level atoms crossing a laser beam.

The arrival time of an atom is the detection time of its first fluorescence
photon. Its density follows from the decaying norm of the no-photon
conditional state, propagated here with a split-operator spectral method, and
can be compared with Kijowski's ideal free-motion distribution or with
quantum-jump Monte Carlo.
"""

__version__ = "0.1.0"

from .arrival import ArrivalDistribution, pi_from_norm_fd, pi_from_p2  # noqa: E402
from .kijowski import KijowskiRequest, kijowski_distribution  # noqa: E402
from .propagator import LaserProfile, PropagationRecord, propagate  # noqa: E402
from .units import AtomParams, resolve_species  # noqa: E402
from .wavepacket import GaussianPacketSpec, Grid, SpinorField, sample_gaussian  # noqa: E402

__all__ = [
    "ArrivalDistribution", "AtomParams", "GaussianPacketSpec", "Grid", "KijowskiRequest",
    "LaserProfile", "PropagationRecord", "SpinorField", "kijowski_distribution",
    "pi_from_norm_fd", "pi_from_p2", "propagate", "resolve_species", "sample_gaussian",
]
