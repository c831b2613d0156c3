"""End-to-end smoke tests for the python bindings."""

import numpy as np
import pytest

import fhartree as fh


@pytest.fixture(scope="module")
def grid():
    return fh.RadialGrid(1024, 16.0)


@pytest.fixture(scope="module")
def gaussian(grid):
    r = grid.radii()
    return fh.RadialField(grid, np.exp(-0.5 * r**2).astype(complex))


def test_gaussian_transform_closed_form(grid, gaussian):
    F = fh.forward_transform(gaussian)
    rho = grid.freqs()
    exact = (2 * np.pi) ** 1.5 * np.exp(-0.5 * rho**2)
    assert np.max(np.abs(F.values - exact)) / exact.max() < 1e-6


def test_plancherel_and_roundtrip(grid, gaussian):
    F = fh.forward_transform(gaussian)
    assert abs(fh.spectral_l2_norm(F) - fh.l2_norm(gaussian)) < 1e-6
    back = fh.inverse_transform(F)
    assert np.linalg.norm(back.values - gaussian.values) < 1e-8 * np.linalg.norm(
        gaussian.values
    )
    assert abs(fh.l2_norm(gaussian) - np.pi**0.75) < 1e-9


def test_riesz_coulomb(grid, gaussian):
    from scipy.special import erf

    r = grid.radii()
    pot = fh.riesz_convolution(gaussian, 1.0).values.real
    exact = (2 * np.pi) ** 1.5 * erf(r / np.sqrt(2)) / r
    mask = (r > 0.2) & (r < 8.0)
    assert np.max(np.abs(pot[mask] - exact[mask]) / exact[mask]) < 1e-4


def test_projectors_partition(grid, gaussian):
    F = fh.forward_transform(gaussian)
    band = fh.project(F, fh.DyadicIndex(0))
    again = fh.project_tilde(band, fh.DyadicIndex(0))
    assert np.array_equal(band.values, again.values)


def test_mass_conservation_short_run(grid):
    r = grid.radii()
    phi = fh.RadialField(grid, (0.3 * np.exp(-0.5 * r**2)).astype(complex))
    traj = fh.evolve(phi, 0.2, fh.ModelParams(alpha=1.5, sigma=1.0), 2e-3, 100)
    assert abs(traj.mass[-1] - traj.mass[0]) / traj.mass[0] < 1e-10


def test_lemma22_single_point():
    pair = fh.BumpPair(fh.BumpProfile(2.0, 0.5), fh.BumpProfile(1.0, 0.4))
    alpha = 1.5
    thr = fh.vanishing_threshold(pair, 1.0, alpha)
    tau = 0.3 * thr
    closed = fh.closed_form_I(pair, tau, 1.0, alpha)
    coarse = fh.brute_force_I(pair, tau, 1.0, alpha, 0.004 * thr)
    fine = fh.brute_force_I(pair, tau, 1.0, alpha, 0.002 * thr)
    extrap = (4 * fine - coarse) / 3
    assert closed > 0
    assert abs(extrap - closed) / closed < 0.01
    assert fh.closed_form_I(pair, 1.05 * thr, 1.0, alpha) == 0.0


def test_bilinear_scan_entry(grid):
    f = fh.gaussian_band_profile(grid, 6.0, 0.8)
    g2 = fh.gaussian_band_profile(grid, 5.5, 1.0)
    e = fh.bilinear_scan(fh.DyadicIndex(2), fh.DyadicIndex(2), fh.DyadicIndex(0), f, g2, 1.5)
    assert e.lhs > 0
    assert e.rhs > 0
    assert e.ratio < 10


def test_growth_ratio_sign():
    g = fh.RadialGrid(1024, 16.0)
    rec = fh.growth_experiment(
        [4.0, 8.0, 16.0], -0.25, fh.ModelParams(alpha=1.5, sigma=1.0), 0.05, g
    )
    assert rec.slope_ratio > 0.3  # super-critical growth
    assert abs(rec.slope_phi - 1.25) < 0.05


def test_invalid_input_maps_to_value_error(grid):
    with pytest.raises(ValueError):
        fh.RadialGrid(300, 8.0)
    with pytest.raises(ValueError):
        fh.riesz_convolution(
            fh.RadialField(grid, np.zeros(grid.n_points, complex)), 3.5
        )
