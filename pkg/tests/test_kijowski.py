import numpy as np
import pytest
from scipy.integrate import trapezoid

from fluortoa.errors import DomainError, UsageError
from fluortoa.kijowski import (KijowskiRequest, MomentumSamples, kijowski_distribution,
                               kijowski_mixture)
from fluortoa.wavepacket import (GaussianPacketSpec, free_evolve_spec, momentum_amplitudes,
                                 sample_gaussian)

from conftest import HOM

TIMES = np.linspace(0, 30, 3001)


@pytest.fixture(scope="module")
def reference_curve():
    spec = GaussianPacketSpec(x0=-1.05, v_mean=0.1, dv=0.098e-2, hbar_over_m=HOM)
    return kijowski_distribution(KijowskiRequest(spec, TIMES))


def test_normalisation(reference_curve):
    assert reference_curve.total_mass == pytest.approx(1.0, abs=1e-4)


def test_peak_near_classical_time(reference_curve):
    assert TIMES[np.argmax(reference_curve.density)] == pytest.approx(10.5, abs=0.1)


def test_nonnegative(reference_curve):
    assert np.all(reference_curve.density >= 0)


def test_mean_close_to_classical(reference_curve):
    mean = trapezoid(TIMES * reference_curve.density, TIMES) / reference_curve.total_mass
    assert mean == pytest.approx(10.5, rel=2e-3)


def test_time_shift_covariance(reference_packet):
    later = free_evolve_spec(reference_packet, 2.0)
    a = kijowski_distribution(KijowskiRequest(reference_packet, TIMES))
    b = kijowski_distribution(KijowskiRequest(later, TIMES[:-200]))
    np.testing.assert_allclose(b.density, a.density[200:], atol=1e-10)


def test_arrival_point_shift(reference_packet):
    from dataclasses import replace
    moved = replace(reference_packet, x0=reference_packet.x0 + 0.5)
    a = kijowski_distribution(KijowskiRequest(reference_packet, TIMES))
    b = kijowski_distribution(KijowskiRequest(moved, TIMES, arrival_point=0.5))
    np.testing.assert_allclose(b.density, a.density, atol=1e-10)


def test_grid_samples_agree_with_analytic(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    phi, _ = momentum_amplitudes(field)
    samples = MomentumSamples(small_grid.k, phi, HOM)
    a = kijowski_distribution(KijowskiRequest(reference_packet, TIMES))
    b = kijowski_distribution(KijowskiRequest(samples, TIMES))
    assert np.max(np.abs(a.density - b.density)) < 1e-6


def test_slow_packet_outside_domain():
    spec = GaussianPacketSpec(x0=-1, v_mean=1e-3, dv=1e-3, hbar_over_m=HOM)
    with pytest.raises(DomainError, match="P\\(k>0\\)"):
        kijowski_distribution(KijowskiRequest(spec, TIMES))


def test_times_must_increase(reference_packet):
    with pytest.raises(UsageError):
        KijowskiRequest(reference_packet, np.array([0.0, 2.0, 1.0]))


def test_too_few_nodes(reference_packet):
    with pytest.raises(UsageError):
        kijowski_distribution(KijowskiRequest(reference_packet, TIMES), nodes=100)


def test_mixture_weights(reference_packet):
    from dataclasses import replace
    half = replace(reference_packet, weight=0.5)
    fast = replace(reference_packet, weight=0.5, v_mean=0.2)
    mix = kijowski_mixture([half, fast], TIMES)
    assert mix.total_mass == pytest.approx(1.0, abs=1e-4)
    parts = [kijowski_distribution(KijowskiRequest(replace(s, weight=1.0), TIMES)).density
             for s in (half, fast)]
    np.testing.assert_allclose(mix.density, 0.5 * (parts[0] + parts[1]), rtol=1e-9, atol=1e-15)


def test_narrow_packet_classical_limit():
    spec = GaussianPacketSpec(x0=-1.05, v_mean=0.1, dv=0.03e-2, hbar_over_m=HOM)
    times = np.linspace(-60, 80, 14001)
    d = kijowski_distribution(KijowskiRequest(spec, times)).normalize()
    mean = trapezoid(times * d.density, times)
    assert mean == pytest.approx(10.5, rel=0.01)


def test_spatial_shift_is_approximately_a_time_shift(reference_packet):
    from dataclasses import replace
    back = replace(reference_packet, x0=reference_packet.x0 - 0.2)
    a = kijowski_distribution(KijowskiRequest(reference_packet, TIMES))
    b = kijowski_distribution(KijowskiRequest(back, TIMES))
    # shift by 0.2 um / 0.1 um/us = 2 us; the packet also spreads meanwhile
    peak_a = TIMES[np.argmax(a.density)]
    peak_b = TIMES[np.argmax(b.density)]
    assert peak_b - peak_a == pytest.approx(2.0, abs=0.02)
    assert np.max(np.abs(b.density[200:] - a.density[:-200])) < 1e-3
