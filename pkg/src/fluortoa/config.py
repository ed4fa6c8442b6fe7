"""INI configuration: parsing, validation and conversion to internal units.

Sections and keys (all optional; defaults reproduce the reference run of a
Cs-133 packet at 10 cm/s hitting a step-profile beam at x = 0)::

    [atom]      species | mass_kg, gamma_rad_s
    [laser]     shape, omega0, edge_um, center_um, width_um
    [packet]    x0_um, v_cm_s, dv_cm_s, weight, t_offset_us
                (more packets: [packet 2], [packet b], ... weights must sum to 1)
    [grid]      x_min_um, x_max_um, n
    [time]      dt_us, t_max_us, sample_stride
    [kijowski]  arrival_point_um
    [mc]        n_traj, seed, bins
    [sweep]     omega0, v_cm_s   (comma-separated lists)
    [output]    directory

``omega0`` is either an absolute rate ("2.58e8", "2.58e8 rad/s",
"258 rad/us") or a multiple of the decay rate ("1.24 gamma").
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .montecarlo import check_mc_step
from .propagator import LaserProfile, check_coupled_resolution, check_step_size
from .units import AtomParams, from_internal, resolve_species, to_internal
from .wavepacket import GaussianPacketSpec, Grid, check_resolution

DEFAULT_TEMPLATE = """\
[atom]
species = Cs133

[laser]
shape = step
omega0 = 1.24 gamma
edge_um = 0.0

[packet]
x0_um = -1.05
v_cm_s = 10
dv_cm_s = 0.098
weight = 1
t_offset_us = 0

[grid]
x_min_um = -8
x_max_um = 56
n = 16384

[time]
dt_us = 1e-4
t_max_us = 40
sample_stride = 100

[kijowski]
arrival_point_um = 0

[output]
directory = out
"""

_KEYS = {
    "atom": {"species", "mass_kg", "gamma_rad_s"},
    "laser": {"shape", "omega0", "edge_um", "center_um", "width_um"},
    "packet": {"x0_um", "v_cm_s", "dv_cm_s", "weight", "t_offset_us"},
    "grid": {"x_min_um", "x_max_um", "n"},
    "time": {"dt_us", "t_max_us", "sample_stride"},
    "kijowski": {"arrival_point_um"},
    "mc": {"n_traj", "seed", "bins"},
    "sweep": {"omega0", "v_cm_s"},
    "output": {"directory"},
}
_PACKET_SECTION = re.compile(r"^packet(?:[ ._-]+\w+)?$")


@dataclass(frozen=True)
class RabiSetting:
    """Peak Rabi frequency as given by the user, resolved against gamma."""

    value: float
    in_gamma: bool

    @property
    def label(self) -> str:
        if self.in_gamma:
            return f"{self.value:g}gamma"
        return f"{from_internal(self.value, 'rad/s'):g}rad_s"

    def resolve(self, gamma_internal: float) -> float:
        if self.in_gamma:
            return self.value * gamma_internal
        return self.value  # already internal

    def over_gamma(self, gamma_internal: float) -> float:
        if gamma_internal == 0:
            return math.nan
        return self.resolve(gamma_internal) / gamma_internal


@dataclass(frozen=True)
class McSettings:
    n_traj: int = 10000
    seed: int = 12345
    bins: int = 120


@dataclass(frozen=True)
class SweepSettings:
    omega0: tuple[RabiSetting, ...]
    velocities: tuple[float, ...]  # internal units


@dataclass(frozen=True)
class SimulationConfig:
    atom: AtomParams
    laser: LaserProfile
    rabi: RabiSetting
    packets: tuple[GaussianPacketSpec, ...]
    grid: Grid
    dt: float
    t_max: float
    sample_stride: int
    arrival_point: float
    mc: McSettings | None
    sweep: SweepSettings | None
    output_dir: Path
    frozen_atom: bool = False

    @property
    def gamma(self) -> float:
        return self.atom.gamma_internal

    @property
    def hbar_over_m(self) -> float:
        return self.atom.hbar_over_m

    def with_point(self, rabi: RabiSetting | None = None,
                   velocity: float | None = None) -> SimulationConfig:
        """Copy with a different Rabi frequency and/or packet mean velocity."""
        cfg = self
        if rabi is not None:
            cfg = replace(cfg, rabi=rabi,
                          laser=replace(cfg.laser, omega0=rabi.resolve(cfg.gamma)))
        if velocity is not None:
            cfg = replace(cfg, packets=tuple(replace(p, v_mean=velocity) for p in cfg.packets))
        return cfg

    def validate(self) -> None:
        for spec in self.packets:
            check_resolution(spec, self.grid)
            check_coupled_resolution(self.grid, abs(spec.k0) + 6 * spec.sigma_k, self.laser,
                                     self.hbar_over_m)
        check_step_size(self.laser, self.gamma, self.dt)
        if not self.t_max > 0:
            raise ConfigError("time.t_max_us must be positive")
        if self.sample_stride < 1:
            raise ConfigError("time.sample_stride must be >= 1")
        if self.mc is not None:
            check_mc_step(self.laser, self.gamma, self.dt)

    def parameters(self) -> dict:
        """Run parameters in user units, for metadata files."""
        return {
            "species": self.atom.label,
            "mass_kg": self.atom.mass,
            "gamma_rad_s": self.atom.gamma,
            "laser_shape": self.laser.shape,
            "omega0": self.rabi.label,
            "omega0_rad_s": from_internal(self.laser.omega0, "rad/s"),
            "omega0_over_gamma": self.laser.omega0 / self.gamma if self.gamma else None,
            "packets": [
                {"x0_um": p.x0, "v_cm_s": from_internal(p.v_mean, "cm/s"),
                 "dv_cm_s": from_internal(p.dv, "cm/s"), "weight": p.weight,
                 "t_offset_us": p.t_offset}
                for p in self.packets
            ],
            "grid": {"x_min_um": self.grid.x_min, "x_max_um": self.grid.x_max, "n": self.grid.n},
            "dt_us": self.dt,
            "t_max_us": self.t_max,
            "sample_stride": self.sample_stride,
            "arrival_point_um": self.arrival_point,
            "frozen_atom": self.frozen_atom,
        }


def parse_rabi(text: str) -> RabiSetting:
    """Parse "1.24 gamma", "2.6e8", "2.6e8 rad/s" or "260 rad/us"."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*(gamma|rad/s|rad/us)?\s*", text)
    if not m:
        raise ConfigError(f"cannot parse Rabi frequency {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ConfigError(f"cannot parse Rabi frequency {text!r}") from None
    unit = m.group(2) or "rad/s"
    if not (math.isfinite(value) and value >= 0):
        raise ConfigError(f"Rabi frequency must be non-negative, got {text!r}")
    if unit == "gamma":
        return RabiSetting(value, True)
    return RabiSetting(to_internal(value, unit), False)


def _get(parser, section, key, fallback, conv=float):
    if not parser.has_option(section, key):
        return fallback
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from None


def _check_keys(parser: configparser.ConfigParser) -> None:
    for section in parser.sections():
        kind = "packet" if _PACKET_SECTION.match(section) else section
        if kind not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in _KEYS[kind]:
                raise ConfigError(f"unknown key {section}.{key}")


def _parse_packets(parser, hbar_over_m):
    defaults = configparser.ConfigParser()
    defaults.read_string(DEFAULT_TEMPLATE)
    names = [s for s in parser.sections() if _PACKET_SECTION.match(s)]
    if not names:
        names, parser = ["packet"], defaults
    packets = []
    for name in names:
        if len(names) > 1 and not parser.has_option(name, "weight"):
            raise ConfigError(f"{name}.weight is required when several packets are given")
        def val(key, unit, **kw):
            fallback = defaults.getfloat("packet", key)
            return to_internal(_get(parser, name, key, fallback), unit, name=f"{name}.{key}", **kw)

        packets.append(GaussianPacketSpec(
            x0=val("x0_um", "um"),
            v_mean=val("v_cm_s", "cm/s"),
            dv=val("dv_cm_s", "cm/s", positive=True),
            hbar_over_m=hbar_over_m,
            weight=_get(parser, name, "weight", 1.0 if len(names) == 1 else math.nan),
            t_offset=val("t_offset_us", "us", nonnegative=True),
        ))
    total = sum(p.weight for p in packets)
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        raise ConfigError(f"packet weights must sum to 1, got {total:.12g}")
    return tuple(packets)


def parse_config_text(text: str, *, source: str = "<string>") -> SimulationConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    _check_keys(parser)

    species = _get(parser, "atom", "species", None, str)
    mass = _get(parser, "atom", "mass_kg", None)
    gamma_si = _get(parser, "atom", "gamma_rad_s", None)
    if species is None and mass is None and gamma_si is None:
        species = "Cs133"
    atom = resolve_species(species, mass=mass, gamma=gamma_si)
    gamma = atom.gamma_internal

    rabi = parse_rabi(_get(parser, "laser", "omega0", "1.24 gamma", str))
    laser = LaserProfile(
        shape=_get(parser, "laser", "shape", "step", str).strip(),
        omega0=rabi.resolve(gamma),
        edge=to_internal(_get(parser, "laser", "edge_um", 0.0), "um", name="laser.edge_um"),
        center=to_internal(_get(parser, "laser", "center_um", 0.0), "um", name="laser.center_um"),
        width=_get(parser, "laser", "width_um", None),
    )

    packets = _parse_packets(parser, atom.hbar_over_m)

    n = _get(parser, "grid", "n", 16384, int)
    grid = Grid.from_extent(_get(parser, "grid", "x_min_um", -8.0),
                            _get(parser, "grid", "x_max_um", 56.0), n)

    dt = to_internal(_get(parser, "time", "dt_us", 1e-4), "us", name="time.dt_us", positive=True)
    t_max = to_internal(_get(parser, "time", "t_max_us", 40.0), "us", name="time.t_max_us",
                        positive=True)
    stride = _get(parser, "time", "sample_stride", 100, int)

    arrival = _get(parser, "kijowski", "arrival_point_um", laser.reference_point)

    mc = None
    if parser.has_section("mc"):
        mc = McSettings(
            n_traj=_get(parser, "mc", "n_traj", McSettings.n_traj, int),
            seed=_get(parser, "mc", "seed", McSettings.seed, int),
            bins=_get(parser, "mc", "bins", McSettings.bins, int),
        )
        if mc.n_traj < 1 or mc.bins < 1:
            raise ConfigError("mc.n_traj and mc.bins must be >= 1")

    sweep = None
    if parser.has_section("sweep"):
        omegas = _get(parser, "sweep", "omega0", None, str)
        vels = _get(parser, "sweep", "v_cm_s", None, str)
        sweep = SweepSettings(
            omega0=tuple(parse_rabi(s) for s in omegas.split(",")) if omegas else (rabi,),
            velocities=tuple(to_internal(float(v), "cm/s", name="sweep.v_cm_s")
                             for v in vels.split(",")) if vels
            else (packets[0].v_mean,),
        )

    out = Path(_get(parser, "output", "directory", "out", str))

    cfg = SimulationConfig(atom=atom, laser=laser, rabi=rabi, packets=packets, grid=grid,
                           dt=dt, t_max=t_max, sample_stride=stride, arrival_point=arrival,
                           mc=mc, sweep=sweep, output_dir=out)
    cfg.validate()
    if sweep is not None:
        for r in sweep.omega0:
            for v in sweep.velocities:
                cfg.with_point(r, v).validate()
    return cfg


def parse_config(path) -> SimulationConfig:
    """Read and validate an INI file; raises :class:`ConfigError` on any problem."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    return parse_config_text(text, source=str(path))


def default_config() -> SimulationConfig:
    return parse_config_text(DEFAULT_TEMPLATE, source="<default>")
