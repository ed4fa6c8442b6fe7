"""Internal unit system, constants and species presets.

Internally lengths are in micrometres, times in microseconds and actions in
units of hbar, so that hbar = 1 and only the ratio hbar/m (um^2/us) enters the
dynamics. Angular frequencies are therefore in rad/us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants

from .errors import ConfigError

LENGTH_UNIT_M = 1e-6
TIME_UNIT_S = 1e-6

# scale factor from each accepted user unit to the internal unit
_TO_INTERNAL = {
    "m": 1.0 / LENGTH_UNIT_M,
    "um": 1.0,
    "s": 1.0 / TIME_UNIT_S,
    "us": 1.0,
    "m/s": TIME_UNIT_S / LENGTH_UNIT_M,
    "cm/s": 1e-2 * TIME_UNIT_S / LENGTH_UNIT_M,
    "um/us": 1.0,
    "rad/s": TIME_UNIT_S,
    "rad/us": 1.0,
    "m^2/s": TIME_UNIT_S / LENGTH_UNIT_M**2,
    "um^2/us": 1.0,
}

CS133_MASS_U = 132.905451961


@dataclass(frozen=True)
class AtomParams:
    """Mass (kg) and spontaneous decay rate gamma (rad/s) of a two-level atom."""

    mass: float
    gamma: float
    label: str = "custom"

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ConfigError(f"atom mass must be positive and finite, got {self.mass!r}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigError(f"atom gamma must be non-negative and finite, got {self.gamma!r}")

    @property
    def lifetime(self) -> float:
        """Excited-state lifetime 1/gamma in seconds."""
        return math.inf if self.gamma == 0 else 1.0 / self.gamma

    @property
    def hbar_over_m(self) -> float:
        """hbar/m in um^2/us."""
        return to_internal(constants.hbar / self.mass, "m^2/s")

    @property
    def gamma_internal(self) -> float:
        return to_internal(self.gamma, "rad/s")


SPECIES = {
    "Cs133": AtomParams(
        mass=CS133_MASS_U * constants.atomic_mass,
        gamma=2 * math.pi * 5.3e6,
        label="Cs133",
    ),
}


def resolve_species(name: str | None = None, *, mass: float | None = None,
                    gamma: float | None = None) -> AtomParams:
    """Look up a species preset, or build one from an explicit (mass, gamma) pair.

    Explicit values take precedence over the preset when both are given.
    """
    if name is None:
        if mass is None or gamma is None:
            raise ConfigError("either a species name or both mass and gamma are required")
        return AtomParams(mass=float(mass), gamma=float(gamma))
    try:
        preset = SPECIES[name]
    except KeyError:
        valid = ", ".join(sorted(SPECIES))
        raise ConfigError(f"unknown species {name!r}; valid presets: {valid}") from None
    if mass is None and gamma is None:
        return preset
    return AtomParams(
        mass=preset.mass if mass is None else float(mass),
        gamma=preset.gamma if gamma is None else float(gamma),
        label=preset.label,
    )


def _factor(unit: str) -> float:
    try:
        return _TO_INTERNAL[unit]
    except KeyError:
        raise ConfigError(f"unsupported unit {unit!r}; known: {', '.join(_TO_INTERNAL)}") from None


def to_internal(value: float, unit: str, *, name: str = "value",
                positive: bool = False, nonnegative: bool = False) -> float:
    """Convert ``value`` given in ``unit`` to internal (um, us, hbar=1) units.

    >>> round(to_internal(10, "cm/s"), 12)
    0.1
    """
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")
    if nonnegative and value < 0:
        raise ConfigError(f"{name} must be non-negative, got {value!r}")
    return value * _factor(unit)


def from_internal(value: float, unit: str) -> float:
    """Inverse of :func:`to_internal`."""
    return float(value) / _factor(unit)
