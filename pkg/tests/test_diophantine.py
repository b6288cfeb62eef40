import math

import numpy as np
import pytest

from diomhd.diophantine import (
    GOLDEN,
    DiophantineCertificate,
    continued_fraction,
    continued_fraction_value,
    diophantine_constant,
    golden_vector,
    noble_vector,
    verify_homogeneous_poincare,
    verify_poincare,
)
from diomhd.errors import InvalidCertificateError
from diomhd.random_fields import random_scalar
from diomhd.spectral import SpectralScalar, get_lattice

# brute-force scan result for n = (1, phi), r = 2, K = 1000, frozen as a regression value
GOLDEN_C_1000 = 1.0
GOLDEN_ARGMIN_1000 = (1, 0)


def naive_scan(n, r, K):
    best, arg = math.inf, None
    for k1 in range(0, K + 1):
        for k2 in range(-K, K + 1):
            if k1 == 0 and k2 <= 0:
                continue
            kk = k1 * k1 + k2 * k2
            if kk > K * K:
                continue
            v = abs(n[0] * k1 + n[1] * k2) * kk ** (r / 2)
            if v < best:
                best, arg = v, (k1, k2)
    return best, arg


def test_golden_vector():
    n = golden_vector()
    assert n[0] == 1.0
    assert n[1] == pytest.approx(1.6180339887498949, rel=1e-16)
    assert continued_fraction(n[1], 15) == [1] * 15


def test_rational_direction_invalid():
    for K in (1, 5, 40):
        cert = diophantine_constant((1.0, 0.0), 2.0, K)
        assert cert.c_K == 0.0
        assert cert.argmin_k == (0, 1)
        assert not cert.valid
        with pytest.raises(InvalidCertificateError):
            cert.require_valid()


def test_golden_K100_bound():
    assert diophantine_constant(golden_vector(), 2.0, 100).c_K > 0.4


def test_monotone_in_K():
    vals = [diophantine_constant(golden_vector(), 2.0, K).c_K for K in (10, 50, 100, 200, 500, 1000)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert diophantine_constant(golden_vector(), 2.0, 200).c_K <= diophantine_constant(golden_vector(), 2.0, 100).c_K


def test_golden_regression_value():
    cert = diophantine_constant(golden_vector(), 2.0, 1000)
    assert cert.c_K == GOLDEN_C_1000
    assert cert.argmin_k == GOLDEN_ARGMIN_1000


@pytest.mark.parametrize("n, r, K", [((1.0, GOLDEN), 2.0, 30), ((1.0, math.sqrt(2)), 1.5, 25), ((0.3, 0.7), 3.0, 20)])
def test_scan_matches_naive_loop(n, r, K):
    best, arg = naive_scan(n, r, K)
    cert = diophantine_constant(n, r, K)
    assert cert.c_K == pytest.approx(best, rel=1e-14)
    assert cert.argmin_k == arg


def test_bad_arguments():
    with pytest.raises(ValueError):
        diophantine_constant(golden_vector(), 2.0, 0)
    with pytest.raises(ValueError):
        diophantine_constant(golden_vector(), 1.0, 10)


def test_noble_vectors():
    assert noble_vector(3) == noble_vector(3)
    for seed in range(20):
        n = noble_vector(seed)
        assert max(continued_fraction(n[1], 8)[1:]) <= 2
        assert diophantine_constant(n, 2.0, 500).c_K > 0


def test_continued_fraction_value():
    assert continued_fraction_value([1], GOLDEN) == pytest.approx(1 + 1 / GOLDEN)
    assert continued_fraction_value([1, 1, 1]) == pytest.approx(GOLDEN, rel=1e-15)
    assert continued_fraction(math.sqrt(2), 6) == [1, 2, 2, 2, 2, 2]


def test_certificate_dict_roundtrip():
    cert = diophantine_constant(golden_vector(), 2.0, 50)
    d = cert.to_dict()
    assert d["valid"] is True
    assert DiophantineCertificate.from_dict(d) == cert


def test_poincare_two_mode_example():
    lat = get_lattice(16)
    cert = diophantine_constant(golden_vector(), 2.0, math.ceil(lat.radius))
    f = SpectralScalar.from_modes(lat, {(1, 1): 1.0})
    chk = verify_poincare(f, cert, 0.0)
    assert chk.lhs == pytest.approx(math.sqrt(2), rel=1e-15)
    # |n.k| = 1 + phi = phi^2, (1+|k|^2)^(r/2) = 3
    assert chk.rhs == pytest.approx(GOLDEN**2 * 3 * math.sqrt(2) / cert.c_K, rel=1e-14)
    assert chk.holds


def test_poincare_rejects_nonzero_mean():
    lat = get_lattice(16)
    cert = diophantine_constant(golden_vector(), 2.0, 22)
    with pytest.raises(ValueError, match="mean"):
        verify_poincare(SpectralScalar.from_modes(lat, {(0, 0): 1.0}), cert, 0.0)


def test_poincare_rejects_modes_beyond_certificate():
    lat = get_lattice(16)
    cert = diophantine_constant(golden_vector(), 2.0, 3)
    with pytest.raises(ValueError, match="certified radius"):
        verify_poincare(random_scalar(lat, 0), cert, 0.0)


def test_poincare_random_fields():
    lat = get_lattice(32)
    cert = diophantine_constant(golden_vector(), 2.0, math.ceil(lat.radius))
    for seed in range(20):
        f = random_scalar(lat, seed, decay=1.0)
        for s in (0.0, 1.0, 5.5):
            assert verify_poincare(f, cert, s).holds


def test_homogeneous_poincare():
    lat = get_lattice(16)
    cert = diophantine_constant(golden_vector(), 2.0, math.ceil(lat.radius))
    f = SpectralScalar.from_modes(lat, {(0, 0): 5.0, (1, 0): 1.0})
    g = SpectralScalar.from_modes(lat, {(1, 0): 1.0})
    a, b = verify_homogeneous_poincare(f, cert, 1.0), verify_homogeneous_poincare(g, cert, 1.0)
    assert a == b and a.holds
    assert verify_homogeneous_poincare(random_scalar(lat, 4, mean=17.0), cert, 2.0).holds
    with pytest.raises(ValueError):
        verify_homogeneous_poincare(f, cert, 0.0)


def test_poincare_saturated_on_argmin_mode():
    lat = get_lattice(16)
    cert = diophantine_constant(golden_vector(), 2.0, math.ceil(lat.radius))
    k = cert.argmin_k
    f = SpectralScalar.from_modes(lat, {k: 1.0})
    ksq = k[0] ** 2 + k[1] ** 2
    achievable = ksq ** (cert.r / 2) / (1 + ksq) ** (cert.r / 2)
    for s in (0.0, 2.0, 5.5):
        chk = verify_poincare(f, cert, s)
        assert chk.lhs / chk.rhs >= (1 - 1e-9) * achievable


def test_scale_covariance():
    lat = get_lattice(16)
    K = math.ceil(lat.radius)
    base = diophantine_constant(golden_vector(), 2.0, K)
    f = random_scalar(lat, 9)
    for lam in (0.5, 3.0):
        n = (lam, lam * GOLDEN)
        cert = diophantine_constant(n, 2.0, K)
        assert cert.c_K == pytest.approx(lam * base.c_K, rel=1e-14)
        assert verify_poincare(f, cert, 1.0).holds == verify_poincare(f, base, 1.0).holds


def test_certificate_covers_lattice():
    lat = get_lattice(32)
    n = golden_vector()
    cert = diophantine_constant(n, 2.0, math.ceil(lat.radius))
    nk = np.abs(n[0] * lat.k1 + n[1] * lat.k2)
    ksq = lat.ksq
    nz = ksq > 0
    assert np.all(nk[nz] * ksq[nz] ** (cert.r / 2) >= cert.c_K * (1 - 1e-15))
