import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from fluortoa import _pykernels, kernels
from fluortoa.errors import BoundaryError, ConfigError, StepSizeError
from fluortoa.montecarlo import lindblad_0d_conditional
from fluortoa.propagator import (LaserProfile, Stepper, half_potential_step,
                                 kinetic_full_step, omega_at, potential_matrix, propagate,
                                 strang_step)
from fluortoa.wavepacket import GaussianPacketSpec, Grid, sample_gaussian

from conftest import GAMMA, HOM


def _expm(omega, gamma, tau):
    m = np.array([[0, omega / 2], [omega / 2, -0.5j * gamma]])
    return scipy.linalg.expm(-1j * tau * m)


@pytest.mark.parametrize("omega,gamma,tau", [
    (41.3, 33.3, 0.05), (3.3, 33.3, 0.2), (16.65, 33.3, 0.1),  # critical: Delta = 0
    (16.65 + 1e-7, 33.3, 0.1), (10.0, 0.0, 0.3), (0.0, 33.3, 0.1), (0.0, 0.0, 1.0)])
def test_potential_matrix_matches_expm(omega, gamma, tau):
    a11, a12, a22 = potential_matrix(np.array([omega]), gamma, tau)
    ref = _expm(omega, gamma, tau)
    got = np.array([[a11[0], a12[0]], [a12[0], a22[0]]])
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-13)


@settings(max_examples=50)
@given(omega=st.floats(0, 200), gamma=st.floats(0, 100), tau=st.floats(1e-6, 0.05))
def test_potential_matrix_property(omega, gamma, tau):
    a11, a12, a22 = potential_matrix(np.array([omega]), gamma, tau)
    ref = _expm(omega, gamma, tau)
    got = np.array([[a11[0], a12[0]], [a12[0], a22[0]]])
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-12)
    # non-Hermitian decay never increases the norm
    assert np.linalg.norm(got, 2) <= 1 + 1e-12


def test_gamma_zero_is_unitary():
    a11, a12, a22 = potential_matrix(np.linspace(0, 50, 11), 0.0, 0.01)
    for i in range(11):
        u = np.array([[a11[i], a12[i]], [a12[i], a22[i]]])
        np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-14)


def test_step_profile_includes_edge():
    prof = LaserProfile(omega0=2.0, edge=0.5)
    assert omega_at(prof, 0.5) == 2.0
    assert omega_at(prof, 0.4999) == 0.0
    np.testing.assert_array_equal(omega_at(prof, np.array([0, 1])), [0.0, 2.0])


def test_gaussian_profile():
    prof = LaserProfile("gaussian", omega0=2.0, center=1.0, width=0.5)
    assert omega_at(prof, 1.0) == 2.0
    assert omega_at(prof, 1.5) == pytest.approx(2.0 * np.exp(-0.5))
    assert prof.reference_point == 1.0
    with pytest.raises(ConfigError):
        LaserProfile("gaussian", omega0=1.0)
    with pytest.raises(ConfigError):
        LaserProfile("top-hat", omega0=1.0)


def test_step_size_guard(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    prof = LaserProfile(omega0=1.24 * GAMMA)
    with pytest.raises(StepSizeError, match="dt <"):
        propagate(field, prof, GAMMA, 0.02, 1.0, hbar_over_m=HOM)
    with pytest.raises(StepSizeError):
        propagate(field, prof, GAMMA, -1e-3, 1.0, hbar_over_m=HOM)


def test_boundary_leak_detected():
    spec = GaussianPacketSpec(x0=0.0, v_mean=0.3, dv=0.098e-2, hbar_over_m=HOM)
    grid = Grid.from_extent(-3, 3, 2048)
    with pytest.raises(BoundaryError, match="enlarge the grid"):
        propagate(sample_gaussian(spec, grid), LaserProfile(), 0.0, 1e-2, 20.0, 10,
                  hbar_over_m=HOM)


def test_sampling_layout(reference_packet, small_grid):
    rec = propagate(sample_gaussian(reference_packet, small_grid), LaserProfile(), 0.0, 1e-3,
                    0.1, 7, hbar_over_m=HOM)
    np.testing.assert_allclose(rec.times, np.arange(15) * 7e-3)
    assert rec.initial_weight == pytest.approx(1.0)


def test_composed_steps_equal_strang_step(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    prof = LaserProfile("gaussian", omega0=GAMMA, center=-1.0, width=0.3)
    dt = 1e-3
    manual = half_potential_step(field, prof, GAMMA, dt)
    manual = kinetic_full_step(manual, dt, HOM)
    manual = half_potential_step(manual, prof, GAMMA, dt)
    fused = strang_step(field, prof, GAMMA, dt, hbar_over_m=HOM)
    np.testing.assert_allclose(fused.data, manual.data, atol=1e-13)


def test_norm_conserved_without_decay(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    rec = propagate(field, LaserProfile(omega0=1.24 * GAMMA), 0.0, 1e-3, 10.0, 100,
                    hbar_over_m=HOM)
    assert np.max(np.abs(rec.norm - rec.norm[0])) < 1e-10


def test_norm_monotone_with_decay(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    rec = propagate(field, LaserProfile(omega0=1.24 * GAMMA), GAMMA, 1e-3, 20.0, 10,
                    hbar_over_m=HOM)
    assert np.all(np.diff(rec.norm) <= 1e-15)


def test_frozen_atom_matches_two_level_oracle(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    omega = 1.24 * GAMMA
    prof = LaserProfile(omega0=omega, edge=-100.0)
    rec = propagate(field, prof, GAMMA, 1e-3, 2.0, 10, hbar_over_m=HOM, frozen_atom=True)
    n_ref, p2_ref = lindblad_0d_conditional(omega, GAMMA, rec.times)
    assert np.max(np.abs(rec.norm - n_ref)) < 1e-10
    assert np.max(np.abs(rec.p2 - p2_ref)) < 1e-10


def _moving_run(dt, n=2048):
    spec = GaussianPacketSpec(x0=-1.0, v_mean=0.1, dv=0.098e-2, hbar_over_m=HOM)
    grid = Grid.from_extent(-4, 4, n)
    prof = LaserProfile("gaussian", omega0=GAMMA, center=0.0, width=0.2)
    t = 12.0
    return propagate(sample_gaussian(spec, grid), prof, GAMMA, dt, t, int(round(0.5 / dt)),
                     hbar_over_m=HOM)


def test_strang_is_second_order():
    ref = _moving_run(2.5e-4)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        rec = _moving_run(dt)
        errs.append(np.max(np.abs(rec.final_field.data - ref.final_field.data)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 3.2 < r < 4.8


def test_spectral_convergence_smooth_profile():
    coarse = _moving_run(2e-3, 2048)
    fine = _moving_run(2e-3, 4096)
    assert np.max(np.abs(coarse.norm - fine.norm)) < 1e-8
    assert np.max(np.abs(coarse.p2 - fine.p2)) < 1e-8


def test_python_backend_gives_same_record(monkeypatch, reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    prof = LaserProfile(omega0=1.24 * GAMMA)
    args = (field, prof, GAMMA, 1e-3, 0.5, 50)
    first = propagate(*args, hbar_over_m=HOM)
    for name in ("apply_potential", "apply_phase", "populations", "edge_density"):
        monkeypatch.setattr(kernels, name, getattr(_pykernels, name))
    second = propagate(*args, hbar_over_m=HOM)
    np.testing.assert_allclose(second.norm, first.norm, rtol=1e-13)
    np.testing.assert_allclose(second.p2, first.p2, rtol=1e-10, atol=1e-15)


def test_stepper_populations(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    st_ = Stepper(small_grid, LaserProfile(), 0.0, 1e-3, HOM)
    n, p2 = st_.populations(field.data)
    assert n == pytest.approx(field.norm())
    assert p2 == 0.0


def test_strang_order_on_step_profile(reference_packet, small_grid):
    field = sample_gaussian(reference_packet, small_grid)
    prof = LaserProfile(omega0=1.24 * GAMMA)
    finals = [propagate(field, prof, GAMMA, dt, 16.0, 1000, hbar_over_m=HOM).norm[-1]
              for dt in (4e-3, 2e-3, 1e-3)]
    order = np.log2((finals[0] - finals[1]) / (finals[1] - finals[2]))
    assert 1.8 <= order <= 2.2
