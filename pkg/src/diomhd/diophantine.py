"""Diophantine background vectors and the anisotropic Poincare inequalities.

A vector n is Diophantine with exponent r > 1 when |n.k| >= c / |k|^r for
every nonzero integer k. Here c is certified on the finite disc |k| <= K by
exhaustive search, so certificates are K-dependent by construction.
"""

import math
from collections import namedtuple
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import InvalidCertificateError
from .spectral import directional_derivative, homogeneous_norm, sobolev_norm

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

PoincareCheck = namedtuple("PoincareCheck", ["lhs", "rhs", "holds"])


@dataclass(frozen=True)
class DiophantineCertificate:
    """Result of the finite scan ``min_{0<|k|<=K} |n.k| |k|^r``.

    ``argmin_k`` is reported in the half plane k1 > 0 or (k1 = 0, k2 > 0);
    its negative attains the same value.
    """

    n: tuple
    r: float
    K: int
    c_K: float
    argmin_k: tuple

    @property
    def valid(self):
        return self.c_K > 0.0

    def to_dict(self):
        d = asdict(self)
        d["n"] = list(self.n)
        d["argmin_k"] = list(self.argmin_k)
        d["valid"] = self.valid
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(float(x) for x in d["n"]), float(d["r"]), int(d["K"]), float(d["c_K"]),
                   tuple(int(x) for x in d["argmin_k"]))

    def require_valid(self):
        if not self.valid:
            raise InvalidCertificateError(
                f"n={self.n} is resonant: n.k = 0 at k={self.argmin_k} within K={self.K}"
            )
        return self


def diophantine_constant(n, r, K):
    """Exact minimum of |n.k| |k|^r over 0 < |k| <= K.

    A zero minimum (rational direction reached within K) yields a certificate
    with ``valid == False`` rather than an exception.
    """
    if int(K) < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if not r > 1:
        raise ValueError(f"r must exceed 1, got {r}")
    n1, n2 = float(n[0]), float(n[1])
    c, k1, k2 = kernels.diophantine_scan(n1, n2, float(r), int(K))
    return DiophantineCertificate((n1, n2), float(r), int(K), float(c), (int(k1), int(k2)))


def continued_fraction_value(partial_quotients, tail=GOLDEN):
    """[a0; a1, ..., aL, tail] evaluated from the back."""
    x = float(tail)
    for a in reversed(partial_quotients[1:]):
        x = a + 1.0 / x
    return partial_quotients[0] + 1.0 / x


def continued_fraction(x, terms=20):
    """Leading partial quotients of a positive real."""
    out = []
    for _ in range(terms):
        a = math.floor(x)
        out.append(int(a))
        frac = x - a
        if frac < 1e-12:
            break
        x = 1.0 / frac
    return out


def golden_vector():
    """(1, phi): slope with every partial quotient equal to 1."""
    return (1.0, GOLDEN)


def noble_vector(seed, length=6):
    """(1, x) with x = [a0; a1..aL, 1, 1, ...], a_i drawn from {1, 2}.

    Every partial quotient is at most 2, so x is badly approximable and (1, x)
    satisfies the Diophantine condition for any r > 1.
    """
    rng = np.random.default_rng(seed)
    quotients = [int(a) for a in rng.integers(1, 3, size=length + 1)]
    return (1.0, continued_fraction_value(quotients))


def _support_radius(f):
    lat = f.lattice
    nz = np.abs(f.coeffs) > 0
    if not nz.any():
        return 0.0
    return float(np.sqrt(np.max(lat.ksq[nz])))


def _check_band(f, cert):
    rad = _support_radius(f)
    if rad > cert.K:
        raise ValueError(f"field has modes at |k|={rad:.3f} beyond certified radius K={cert.K}")


def verify_poincare(f, cert, s):
    """Check ||f||_{H^s} <= (1/c_K) ||n.grad f||_{H^{s+r}} for mean-zero f.

    Raises:
        ValueError: f has nonzero mean or modes beyond the certified radius.
        InvalidCertificateError: c_K = 0.
    """
    cert.require_valid()
    _check_band(f, cert)
    scale = max(float(np.max(np.abs(f.coeffs))), 1e-300)
    if abs(f.coeffs[0, 0]) > 1e-14 * scale:
        raise ValueError(f"f has nonzero mean {f.coeffs[0, 0].real:.3e}; the inequality needs mean zero")
    lhs = sobolev_norm(f, s)
    rhs = sobolev_norm(directional_derivative(f, cert.n), s + cert.r) / cert.c_K
    return PoincareCheck(lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-12)))


def verify_homogeneous_poincare(f, cert, s):
    """Check ||f||_{H^s homogeneous} <= (1/c_K) ||n.grad f||_{H^{s+r}} for s > 0; no mean condition."""
    if not s > 0:
        raise ValueError(f"homogeneous form needs s > 0, got {s}")
    cert.require_valid()
    _check_band(f, cert)
    lhs = homogeneous_norm(f, s)
    rhs = sobolev_norm(directional_derivative(f, cert.n), s + cert.r) / cert.c_K
    return PoincareCheck(lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-12)))
