import math

import numpy as np
import pytest
from scipy import signal

from diomhd.errors import LatticeMismatchError
from diomhd.random_fields import random_scalar
from diomhd.spectral import (
    SpectralScalar,
    SpectralVector2,
    WaveLattice,
    dealiased_product,
    directional_derivative,
    forward_transform,
    get_lattice,
    homogeneous_norm,
    inner_product,
    inverse_transform,
    partial_derivative,
    sobolev_norm,
    weighted_inner_product,
)

PHI = (1 + math.sqrt(5)) / 2


def grid(lat, P=None):
    P = P or lat.padded_dim
    x = 2 * np.pi * np.arange(P) / P
    return np.meshgrid(x, x, indexing="ij")


def brute_coeffs(samples, M):
    """Direct O(P^2 M^2) Fourier sum, independent of the FFT path."""
    P = samples.shape[0]
    x = 2 * np.pi * np.arange(P) / P
    ks = np.fft.fftfreq(M, 1.0 / M)
    E = np.exp(-1j * np.outer(ks, x))
    return E @ samples @ E.T / P**2


def test_lattice_rejects_odd_and_small():
    with pytest.raises(ValueError):
        WaveLattice(7)
    with pytest.raises(ValueError):
        WaveLattice(2)
    with pytest.raises(ValueError):
        WaveLattice(16, padded_dim=20)


def test_zero_samples_give_zero_coefficients():
    lat = get_lattice(16)
    assert not np.any(forward_transform(np.zeros((24, 24)), lat).coeffs)


def test_cos_coefficients_match_direct_sum():
    lat = get_lattice(16)
    X1, _ = grid(lat)
    f = forward_transform(np.cos(X1), lat)
    assert f.coeff((1, 0)) == pytest.approx(0.5, abs=1e-15)
    assert f.coeff((-1, 0)) == pytest.approx(0.5, abs=1e-15)
    c = f.coeffs.copy()
    c[lat.index((1, 0))] = c[lat.index((-1, 0))] = 0
    assert np.max(np.abs(c)) < 1e-15
    brute = brute_coeffs(np.cos(X1), 16)
    brute[lat.nyquist] = 0
    assert np.max(np.abs(brute - f.coeffs)) < 1e-14


def test_roundtrip_random_field():
    lat = get_lattice(32)
    f = random_scalar(lat, 3, decay=1.0)
    for P in (32, 48, 64):
        g = forward_transform(inverse_transform(f, P), lat)
        assert np.max(np.abs(g.coeffs - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))


def test_reality_and_nyquist_invariants():
    lat = get_lattice(16)
    f = random_scalar(lat, 0)
    assert f.hermitian_defect() == 0.0
    assert not np.any(f.coeffs[lat.nyquist])
    for g in (partial_derivative(f, 1), directional_derivative(f, (1, PHI)), dealiased_product(f, f)):
        assert g.hermitian_defect() < 1e-15 * np.max(np.abs(g.coeffs)) + 1e-300
        assert not np.any(g.coeffs[lat.nyquist])


def test_coefficients_read_only():
    f = random_scalar(get_lattice(8), 0)
    with pytest.raises(ValueError):
        f.coeffs[0, 0] = 1.0
    with pytest.raises(AttributeError):
        f.coeffs = None


def test_derivative_of_cos():
    lat = get_lattice(16)
    f = SpectralScalar.from_modes(lat, {(1, 0): 0.5})
    d = partial_derivative(f, 1)
    assert d.coeff((1, 0)) == pytest.approx(0.5j)
    assert d.coeff((-1, 0)) == pytest.approx(-0.5j)
    X1, _ = grid(lat)
    assert np.allclose(inverse_transform(d), -np.sin(X1), atol=1e-15)
    assert not np.any(partial_derivative(SpectralScalar.from_modes(lat, {(0, 0): 3.0}), 2).coeffs)


def test_mixed_partials_commute():
    f = random_scalar(get_lattice(16), 5)
    a = partial_derivative(partial_derivative(f, 1), 2)
    b = partial_derivative(partial_derivative(f, 2), 1)
    assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-15 * np.max(np.abs(a.coeffs))


def test_directional_derivative_examples():
    lat = get_lattice(16)
    f = SpectralScalar.from_modes(lat, {(1, 0): 0.5})
    X1, _ = grid(lat)
    assert np.allclose(inverse_transform(directional_derivative(f, (1, 0))), -np.sin(X1), atol=1e-15)
    assert not np.any(directional_derivative(random_scalar(lat, 1), (0, 0)).coeffs)
    g = SpectralScalar.from_modes(lat, {(1, -1): 1.0})
    d = directional_derivative(g, (1, PHI))
    assert abs(d.coeff((1, -1))) == pytest.approx(PHI - 1, rel=1e-15)


def test_norm_hand_values():
    lat = get_lattice(16)
    two_cos = SpectralScalar.from_modes(lat, {(1, 0): 1.0})
    assert sobolev_norm(two_cos, 1) == pytest.approx(2.0, rel=1e-15)
    assert homogeneous_norm(two_cos, 2) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert sobolev_norm(SpectralScalar.zeros(lat), 3.7) == 0.0
    assert homogeneous_norm(SpectralScalar.from_modes(lat, {(0, 0): 4.0}), 1) == 0.0


def test_plancherel_against_quadrature():
    lat = get_lattice(32)
    for seed in range(5):
        f = random_scalar(lat, seed, mean=0.3)
        vals = inverse_transform(f)
        assert sobolev_norm(f, 0) ** 2 == pytest.approx(np.mean(vals**2), rel=1e-10)


def test_sobolev_norm_matches_pseudodifferential_quadrature():
    lat = get_lattice(16)
    f = random_scalar(lat, 2)
    s = 1.5
    # apply (1 - Lap)^(s/2) on the grid via an independent full FFT and integrate
    P = 48
    vals = inverse_transform(f, P)
    k = np.fft.fftfreq(P, 1.0 / P)
    mult = (1 + k[:, None] ** 2 + k[None, :] ** 2) ** (s / 2)
    g = np.fft.ifft2(mult * np.fft.fft2(vals)).real
    assert sobolev_norm(f, s) ** 2 == pytest.approx(np.mean(g**2), rel=1e-10)


def test_homogeneous_equals_sobolev_at_zero_for_mean_zero():
    f = random_scalar(get_lattice(16), 4)
    assert homogeneous_norm(f, 0) == pytest.approx(sobolev_norm(f, 0), rel=1e-15)


def test_weighted_inner_product_examples():
    lat = get_lattice(16)
    f = random_scalar(lat, 7)
    assert weighted_inner_product(f, f, 1.5) == pytest.approx(homogeneous_norm(f, 1.5) ** 2, rel=1e-14)
    cos1 = SpectralScalar.from_modes(lat, {(1, 0): 0.5})
    sin1 = SpectralScalar.from_modes(lat, {(1, 0): -0.5j})
    cos2 = SpectralScalar.from_modes(lat, {(0, 1): 0.5})
    for s in (0, 1, 3.5):
        assert weighted_inner_product(cos1, sin1, s) == 0.0
        assert weighted_inner_product(cos1, cos2, s) == 0.0


def test_directional_derivative_skew_adjoint():
    lat = get_lattice(32)
    f, g = random_scalar(lat, 1), random_scalar(lat, 2)
    n = (1, PHI)
    for s in (0, 2, 5.5):
        a = weighted_inner_product(directional_derivative(f, n), g, s)
        b = -weighted_inner_product(f, directional_derivative(g, n), s)
        assert a == pytest.approx(b, rel=1e-12)


def test_product_identity_and_trig_identity():
    lat = get_lattice(16)
    one = SpectralScalar.from_modes(lat, {(0, 0): 1.0})
    g = random_scalar(lat, 3)
    assert np.max(np.abs(dealiased_product(one, g).coeffs - g.coeffs)) < 1e-15
    c = SpectralScalar.from_modes(lat, {(1, 0): 0.5})
    sq = dealiased_product(c, c)
    assert sq.coeff((0, 0)) == pytest.approx(0.5)
    assert sq.coeff((2, 0)) == pytest.approx(0.25)
    assert sq.coeff((-2, 0)) == pytest.approx(0.25)


@pytest.mark.parametrize("banded", [True, False])
def test_product_matches_truncated_exact_product(banded):
    lat = get_lattice(16)
    f, g = random_scalar(lat, 1), random_scalar(lat, 2)
    # exact product on a 2M grid (no aliasing), truncated to the lattice
    P = 32
    exact = forward_transform(inverse_transform(f, P) * inverse_transform(g, P), lat)
    got = dealiased_product(f, g, banded=banded)
    assert np.max(np.abs(got.coeffs - exact.coeffs)) < 1e-14


def test_product_adjointness_for_band_limited_fields():
    lat = get_lattice(32)
    f = random_scalar(lat, 1, max_mode=4)
    g = random_scalar(lat, 2, max_mode=4)
    h = random_scalar(lat, 3, max_mode=4)
    lhs = inner_product(dealiased_product(f, g), h)
    rhs = inner_product(f, dealiased_product(g, h))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def direct_convolution(lat, a, b):
    """Coefficient-space convolution truncated to the lattice, no FFT involved."""
    K = lat.max_mode
    sa = np.fft.fftshift(a)[1:, 1:]  # drop the Nyquist row/column
    sb = np.fft.fftshift(b)[1:, 1:]
    full = signal.convolve2d(sa, sb, mode="full")
    core = full[K: 3 * K + 1, K: 3 * K + 1]
    out = np.zeros_like(a)
    out[1:, 1:] = core
    return np.fft.ifftshift(out)


def test_banded_product_keeps_high_mode_accuracy():
    lat = get_lattice(32)
    f = random_scalar(lat, 1, decay=16)
    g = random_scalar(lat, 2, decay=16)
    exact = direct_convolution(lat, f.coeffs, g.coeffs)
    rel = np.abs(dealiased_product(f, g).coeffs - exact) / np.maximum(np.abs(exact), 1e-300)
    # coefficients here span ~25 orders of magnitude; banding keeps small modes accurate
    assert np.max(rel[lat.inf_norm <= 12]) < 1e-6
    plain = np.abs(dealiased_product(f, g, banded=False).coeffs - exact) / np.maximum(np.abs(exact), 1e-300)
    assert np.max(plain[lat.inf_norm <= 12]) > 1e-2


def test_lattice_mismatch_rejected():
    a = random_scalar(get_lattice(16), 0)
    b = random_scalar(get_lattice(32), 0)
    with pytest.raises(LatticeMismatchError):
        dealiased_product(a, b)
    with pytest.raises(LatticeMismatchError):
        inner_product(a, b)


def test_vector_flags_checked():
    lat = get_lattice(16)
    bad = np.zeros((2, 16, 16), complex)
    bad[0][lat.index((1, 0))] = bad[0][lat.index((-1, 0))] = 1.0
    with pytest.raises(ValueError):
        SpectralVector2.from_array(lat, bad, solenoidal=True)
    SpectralVector2.from_array(lat, bad)
    bad2 = np.zeros((2, 16, 16), complex)
    bad2[0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        SpectralVector2.from_array(lat, bad2, mean_zero=True)
