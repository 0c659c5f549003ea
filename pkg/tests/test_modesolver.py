import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hourglass_sps.modesolver import (
    ModeNotGuidedError,
    _dispersion,
    guided_mode_family,
    he11_index,
    mode_overlap,
    overlap_matrix,
    solve_mode,
)
from oracles import fd_hybrid_index

N_GAAS = 3.4788
LAM = 925.0


def test_he11_has_no_cutoff_at_thin_radius():
    mode = solve_mode(114, N_GAAS, 1.0, 925.0)
    assert 1.0 < mode.n_eff < N_GAAS


def test_bulk_limit():
    assert he11_index(20000.0, N_GAAS, LAM) == pytest.approx(N_GAAS, abs=2e-4)


def test_he11_matches_finite_difference_oracle():
    n_fd = fd_hybrid_index(930, N_GAAS, 1.0, LAM, dr=0.5)
    n_an = solve_mode(930, N_GAAS, 1.0, LAM).n_eff
    assert abs(n_an - n_fd) / n_fd < 1e-3


def test_frozen_indices():
    # values frozen after the finite-difference cross-check above
    assert he11_index(114.0, N_GAAS, 925.0) == pytest.approx(2.17116, abs=2e-5)
    assert he11_index(930.0, N_GAAS, 930.0) == pytest.approx(3.45867, abs=2e-5)


@pytest.mark.parametrize("label", [("HE", 1, 1), ("HE", 1, 2), ("EH", 1, 1), ("HE", 2, 1)])
def test_dispersion_residual(label):
    mode = solve_mode(930, N_GAAS, 1.0, LAM, label)
    val, _ = _dispersion(mode.n_eff, 930, N_GAAS, 1.0, mode.k0, mode.m, label[0])
    assert mode.residual < 1e-10
    assert 1.0 < mode.n_eff < N_GAAS
    assert mode.propagation_constant == pytest.approx(mode.k0 * mode.n_eff)


def test_cutoff_raises():
    with pytest.raises(ModeNotGuidedError):
        solve_mode(114, N_GAAS, 1.0, LAM, ("HE", 1, 2))


def test_invalid_geometry():
    with pytest.raises(ValueError):
        solve_mode(-1, N_GAAS, 1.0, LAM)
    with pytest.raises(ValueError):
        solve_mode(100, 1.0, 1.5, LAM)


def test_unit_power():
    for mode in guided_mode_family(930, N_GAAS, 1.0, LAM):
        assert mode.power(order=3) == pytest.approx(1.0, abs=1e-6)


def test_orthonormality():
    modes = guided_mode_family(930, N_GAAS, 1.0, LAM)
    o = overlap_matrix(modes, modes, order=2)
    assert np.max(np.abs(o - np.eye(len(modes)))) < 1e-4


def test_he11_he12_orthogonal():
    a = solve_mode(930, N_GAAS, 1.0, LAM)
    b = solve_mode(930, N_GAAS, 1.0, LAM, ("HE", 1, 2))
    assert abs(mode_overlap(a, b)) < 1e-6


def test_neighbour_overlap_converged():
    a = solve_mode(900, N_GAAS, 1.0, LAM)
    b = solve_mode(930, N_GAAS, 1.0, LAM)
    lo, hi = mode_overlap(a, b, order=1), mode_overlap(a, b, order=4)
    assert 0.99 < lo < 1.0
    assert abs(lo - hi) < 1e-8


def test_different_order_overlap_vanishes():
    a = solve_mode(930, N_GAAS, 1.0, LAM)
    b = solve_mode(930, N_GAAS, 1.0, LAM, ("HE", 2, 1))
    assert mode_overlap(a, b) == 0.0


def test_wavelength_mismatch():
    a = solve_mode(930, N_GAAS, 1.0, LAM)
    b = solve_mode(930, N_GAAS, 1.0, 900.0)
    with pytest.raises(ValueError):
        mode_overlap(a, b)


def test_tangential_continuity():
    mode = solve_mode(600, N_GAAS, 1.0, LAM)
    eps = 1e-10 * 600
    inner, outer = mode.radial_fields(np.array([600 - eps, 600 + eps])).T
    # e_phi, e_z, h_r, h_phi, h_z continuous; e_r jumps by eps ratio
    for k in (1, 2, 3, 4, 5):
        assert inner[k] == pytest.approx(outer[k], rel=1e-5, abs=1e-9)
    assert inner[0] * N_GAAS**2 == pytest.approx(outer[0], rel=1e-5)


def test_field_sampler_shapes():
    mode = solve_mode(600, N_GAAS, 1.0, LAM)
    f = mode.field_sampler(np.array([0.0, 100.0, 900.0]), np.array([0.0, 0.3, 1.0]))
    assert set(f) >= {"E_r", "E_phi", "E_z", "H_r", "H_phi", "H_z"}
    assert all(np.shape(v) == (3,) for v in f.values())


@settings(max_examples=15, deadline=None)
@given(st.floats(80.0, 1500.0), st.floats(1.0, 60.0))
def test_he11_index_increasing_in_radius(radius, step):
    assert he11_index(radius + step, N_GAAS, LAM) > he11_index(radius, N_GAAS, LAM)
