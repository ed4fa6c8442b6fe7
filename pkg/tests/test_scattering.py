import numpy as np
import pytest

from fluortoa.arrival import rejected_fraction
from fluortoa.errors import UsageError
from fluortoa.propagator import LaserProfile, propagate
from fluortoa.scattering import stationary_rejected_fraction, step_reflection
from fluortoa.wavepacket import GaussianPacketSpec, Grid, sample_gaussian

from conftest import GAMMA, HOM


def test_no_coupling_no_reflection():
    k = np.linspace(10, 300, 7)
    assert np.max(np.abs(step_reflection(k, 0.0, 0.0, HOM))) < 1e-14
    assert np.max(np.abs(step_reflection(k, 0.0, GAMMA, HOM))) < 1e-14


def test_fast_atoms_pass():
    r = step_reflection(np.array([20.0, 200.0, 2000.0]), 1.24 * GAMMA, GAMMA, HOM)
    assert np.all(np.diff(np.abs(r)) < 0)
    assert abs(r[-1]) < 1e-4


def test_reflection_bounded():
    k = np.linspace(1, 1000, 500)
    for om in (0.1, 1.0, 10.0):
        assert np.all(np.abs(step_reflection(k, om * GAMMA, GAMMA, HOM)) <= 1 + 1e-12)


def test_needs_positive_k():
    with pytest.raises(UsageError):
        step_reflection([0.0, 1.0], 1.0, 1.0, HOM)


def test_gaussian_profile_refused():
    spec = GaussianPacketSpec(x0=-1, v_mean=0.1, dv=1e-3, hbar_over_m=HOM)
    with pytest.raises(UsageError):
        stationary_rejected_fraction(spec, LaserProfile("gaussian", 1.0, width=1.0), GAMMA)


def test_matches_time_dependent_run():
    spec = GaussianPacketSpec(x0=-1.05, v_mean=0.05, dv=0.098e-2, hbar_over_m=HOM)
    profile = LaserProfile(omega0=1.24 * GAMMA)
    field = sample_gaussian(spec, Grid.from_extent(-8, 8, 8192))
    rec = propagate(field, profile, GAMMA, 2e-3, 70.0, 100, hbar_over_m=HOM)
    exact = stationary_rejected_fraction(spec, profile, GAMMA)
    assert rejected_fraction(rec) == pytest.approx(exact, rel=0.02)
