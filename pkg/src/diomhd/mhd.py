"""Perturbed MHD vector field around a constant background field n.

Velocity u and magnetic perturbation b evolve by

    du/dt = P( n.grad b + (b.grad) b - (u.grad) u )
    db/dt = Lap b + n.grad u + (b.grad) u - (u.grad) b

with P the Leray projector; the pressure is never formed.
"""

from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralScalar,
    SpectralVector2,
    bilinear_sums,
    inner_product,
    sobolev_norm,
    homogeneous_norm,
)
from .errors import LatticeMismatchError


@dataclass(frozen=True)
class BackgroundField:
    """Constant background magnetic field n and its Diophantine data.

    ``c_K`` is the empirical constant from a certificate, if one was computed.
    """

    n: tuple
    r: float = 2.0
    c_K: float = None

    def __post_init__(self):
        object.__setattr__(self, "n", (float(self.n[0]), float(self.n[1])))
        if not self.r > 1:
            raise ValueError(f"Diophantine exponent r must exceed 1, got {self.r}")

    @property
    def magnitude(self):
        return float(np.hypot(*self.n))


@dataclass(frozen=True)
class FlowState:
    """Time plus the perturbation pair (u, b) on one lattice."""

    t: float
    u: SpectralVector2
    b: SpectralVector2

    def __post_init__(self):
        if self.u.lattice != self.b.lattice:
            raise LatticeMismatchError("u and b must share a lattice")

    @property
    def lattice(self):
        return self.u.lattice

    def as_array(self):
        """Packed coefficients, shape (4, M, M): u1, u2, b1, b2."""
        return np.concatenate([self.u.as_array(), self.b.as_array()])

    @classmethod
    def from_array(cls, t, lattice, arr, check=False):
        flags = dict(solenoidal=check, mean_zero=check)
        return cls(
            float(t),
            SpectralVector2.from_array(lattice, arr[:2], **flags),
            SpectralVector2.from_array(lattice, arr[2:], **flags),
        )

    @classmethod
    def zeros(cls, lattice, t=0.0):
        return cls(float(t), SpectralVector2.zeros(lattice), SpectralVector2.zeros(lattice))


# --------------------------------------------------------------------------
# Array-level kernels (shape (..., 2, M, M) for vectors)


def project_array(lattice, v):
    """Leray projection of a (2, M, M) or (..., 2, M, M) coefficient stack."""
    k1, k2, ksq = lattice.k1, lattice.k2, lattice.ksq
    safe = np.where(ksq > 0, ksq, 1.0)
    kv = (k1 * v[..., 0, :, :] + k2 * v[..., 1, :, :]) / safe
    out = np.array(v, dtype=np.complex128)
    out[..., 0, :, :] -= k1 * kv
    out[..., 1, :, :] -= k2 * kv
    return out


def _deriv_index(m, c):
    # ys layout: [d1 u1, d1 u2, d1 b1, d1 b2, d2 u1, d2 u2, d2 b1, d2 b2]
    return c if m == 0 else 4 + c


# nonlinear outputs: Wu_i = (b.grad) b_i - (u.grad) u_i ; Wb_i = (b.grad) u_i - (u.grad) b_i
_NONLINEAR_COMBOS = [
    [(2 + m, _deriv_index(m, 2 + i), 1.0) for m in (0, 1)]
    + [(m, _deriv_index(m, i), -1.0) for m in (0, 1)]
    for i in (0, 1)
] + [
    [(2 + m, _deriv_index(m, i), 1.0) for m in (0, 1)]
    + [(m, _deriv_index(m, 2 + i), -1.0) for m in (0, 1)]
    for i in (0, 1)
]


def nonlinear_array(lattice, y, banded=True):
    """Quadratic terms for packed state y: (Wu1, Wu2, Wb1, Wb2), unprojected."""
    ys = np.concatenate([1j * lattice.k1 * y, 1j * lattice.k2 * y])
    return bilinear_sums(lattice, y, ys, _NONLINEAR_COMBOS, banded=banded)


def rhs_array(lattice, y, n, banded=True, diffusion=True):
    """Time derivative of packed state y (4, M, M).

    With ``diffusion=False`` the Lap b term is omitted (the integrating-factor
    stepper treats it exactly).
    """
    nk = n[0] * lattice.k1 + n[1] * lattice.k2
    W = nonlinear_array(lattice, y, banded=banded)
    W[:2] += 1j * nk * y[2:]
    W[2:] += 1j * nk * y[:2]
    out = np.concatenate([project_array(lattice, W[:2]), project_array(lattice, W[2:])])
    if diffusion:
        out[2:] -= lattice.ksq * y[2:]
    out[:, 0, 0] = 0.0
    return out


def advect_array(lattice, v, f, banded=True):
    """(v.grad) f for v of shape (2, M, M) and f of shape (nf, M, M)."""
    nf = f.shape[0]
    ys = np.concatenate([1j * lattice.k1 * f, 1j * lattice.k2 * f])
    combos = [[(0, c, 1.0), (1, nf + c, 1.0)] for c in range(nf)]
    return bilinear_sums(lattice, v, ys, combos, banded=banded)


# --------------------------------------------------------------------------
# Public operations on field objects


def leray_project(v):
    """Divergence-free part of v; the zero mode is left unchanged."""
    out = project_array(v.lattice, v.as_array())
    return SpectralVector2.from_array(v.lattice, out)


def advect(v, f, banded=True):
    """(v.grad) f, componentwise when f is a vector."""
    if v.lattice != f.lattice:
        raise LatticeMismatchError("advecting field and advected field differ in lattice")
    lat = v.lattice
    if isinstance(f, SpectralScalar):
        out = advect_array(lat, v.as_array(), f.coeffs[None], banded)
        return SpectralScalar(lat, out[0])
    out = advect_array(lat, v.as_array(), f.as_array(), banded)
    return SpectralVector2.from_array(lat, out)


def rhs(state, bg, banded=True):
    """(du/dt, db/dt) as SpectralVector2 pair."""
    lat = state.lattice
    out = rhs_array(lat, state.as_array(), bg.n, banded=banded)
    return SpectralVector2.from_array(lat, out[:2]), SpectralVector2.from_array(lat, out[2:])


def _D(lat, arr, s):
    if s == 0:
        return arr
    return np.sqrt(lat.ksq) ** s * arr


def _vec(lat, arr):
    return SpectralVector2.from_array(lat, arr)


def _safe_ratio(num, den):
    num = abs(num)
    if num == 0.0:
        return 0.0
    return num / den if den > 0 else float("inf")


def cancellation_suite(u, b, n, m=3, banded=True):
    """Normalized residuals of the exact cancellations behind the energy estimates.

    Each residual is |value| divided by the product of the L2 norms of the
    participating factors (summed over the terms of a pair), so tolerances
    are scale-free.

    Returns:
        List of ``(name, residual)``.
    """
    lat = u.lattice
    if b.lattice != lat:
        raise LatticeMismatchError("u and b differ in lattice")
    n = (float(n[0]), float(n[1]))
    nmag = float(np.hypot(*n))
    ua, ba = u.as_array(), b.as_array()
    nk = n[0] * lat.k1 + n[1] * lat.k2

    def nrm(a):
        return sobolev_norm(_vec(lat, a), 0)

    def grad_nrm(a):
        return homogeneous_norm(_vec(lat, a), 1)

    def ip(a, c):
        return inner_product(_vec(lat, a), _vec(lat, c))

    out = []
    adv = lambda v, f: advect_array(lat, v, f, banded)  # noqa: E731

    out.append(("<u.grad u, u>", _safe_ratio(ip(adv(ua, ua), ua), nrm(ua) * grad_nrm(ua) * nrm(ua))))
    out.append(("<u.grad b, b>", _safe_ratio(ip(adv(ua, ba), ba), nrm(ua) * grad_nrm(ba) * nrm(ba))))

    w = 1j * nk * ba + adv(ba, ba) - adv(ua, ua)
    grad_p = w - project_array(lat, w)
    out.append(("<grad p, u>", _safe_ratio(ip(grad_p, ua), nrm(w) * nrm(ua))))

    val = ip(adv(ba, ba), ua) + ip(adv(ba, ua), ba)
    den = nrm(ba) * grad_nrm(ba) * nrm(ua) + nrm(ba) * grad_nrm(ua) * nrm(ba)
    out.append(("<b.grad b, u> + <b.grad u, b>", _safe_ratio(val, den)))

    val = ip(1j * nk * ba, ua) + ip(1j * nk * ua, ba)
    den = nmag * (grad_nrm(ba) * nrm(ua) + grad_nrm(ua) * nrm(ba))
    out.append(("<n.grad b, u> + <n.grad u, b>", _safe_ratio(val, den)))

    for a in range(1, int(m) + 1):
        Du, Db = _D(lat, ua, a), _D(lat, ba, a)
        out.append((f"<u.grad D^{a}u, D^{a}u>", _safe_ratio(ip(adv(ua, Du), Du), nrm(ua) * grad_nrm(Du) * nrm(Du))))
        out.append((f"<u.grad D^{a}b, D^{a}b>", _safe_ratio(ip(adv(ua, Db), Db), nrm(ua) * grad_nrm(Db) * nrm(Db))))
        Dgp = _D(lat, grad_p, a)
        out.append((f"<D^{a} grad p, D^{a}u>", _safe_ratio(ip(Dgp, Du), nrm(_D(lat, w, a)) * nrm(Du))))
        val = ip(adv(ba, Db), Du) + ip(adv(ba, Du), Db)
        den = nrm(ba) * (grad_nrm(Db) * nrm(Du) + grad_nrm(Du) * nrm(Db))
        out.append((f"<b.grad D^{a}b, D^{a}u> + <b.grad D^{a}u, D^{a}b>", _safe_ratio(val, den)))
        val = ip(_D(lat, 1j * nk * ba, a), Du) + ip(_D(lat, 1j * nk * ua, a), Db)
        den = nmag * (grad_nrm(Db) * nrm(Du) + grad_nrm(Du) * nrm(Db))
        out.append((f"<D^{a}(n.grad b), D^{a}u> + <D^{a}(n.grad u), D^{a}b>", _safe_ratio(val, den)))
    return out
