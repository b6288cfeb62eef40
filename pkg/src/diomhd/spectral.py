"""Truncated Fourier representation of real periodic fields on [0, 2pi)^2.

Coefficients follow the convention ``f(x) = sum_k c(k) exp(i k.x)`` with no
2pi factors, so every norm below is a plain lattice sum and the L2 norm is
the root-mean-square of the physical field.

Coefficient arrays have shape ``(M, M)`` in FFT layout: axis 0 carries k1,
axis 1 carries k2, and index ``j`` holds wavenumber ``j`` for ``j < M/2`` and
``j - M`` otherwise. The index ``M/2`` on either axis is the unpaired Nyquist
wavenumber and is kept at exactly zero.
"""

import functools
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import LatticeMismatchError


@dataclass(frozen=True)
class WaveLattice:
    """The retained set of integer wavevectors for an M x M truncation.

    Attributes:
        modes_per_dim: Even number of Fourier modes per axis (M).
        padded_dim: Physical grid used for dealiased products, at least 3M/2.
    """

    modes_per_dim: int
    padded_dim: int = field(default=0)

    def __post_init__(self):
        M = self.modes_per_dim
        if not isinstance(M, (int, np.integer)) or M < 4 or M % 2:
            raise ValueError(f"modes_per_dim must be an even integer >= 4, got {M!r}")
        P = self.padded_dim or 3 * M // 2
        if P < 3 * M // 2:
            raise ValueError(f"padded_dim {P} < 3M/2 = {3 * M // 2}; products would alias")
        object.__setattr__(self, "padded_dim", int(P))

    @property
    def max_mode(self):
        """Largest retained |k_i| (the Nyquist index is excluded)."""
        return self.modes_per_dim // 2 - 1

    @property
    def radius(self):
        """Largest Euclidean |k| on the lattice."""
        return float(np.sqrt(2.0) * self.max_mode)

    @functools.cached_property
    def wavenumbers(self):
        return np.fft.fftfreq(self.modes_per_dim, 1.0 / self.modes_per_dim)

    @functools.cached_property
    def k1(self):
        return np.broadcast_to(self.wavenumbers[:, None], (self.modes_per_dim,) * 2)

    @functools.cached_property
    def k2(self):
        return np.broadcast_to(self.wavenumbers[None, :], (self.modes_per_dim,) * 2)

    @functools.cached_property
    def ksq(self):
        return self.k1**2 + self.k2**2

    @functools.cached_property
    def inf_norm(self):
        return np.maximum(np.abs(self.k1), np.abs(self.k2))

    @functools.cached_property
    def nyquist(self):
        half = -(self.modes_per_dim // 2)
        return (self.k1 == half) | (self.k2 == half)

    @functools.cached_property
    def neg_index(self):
        """Index permutation taking k to -k along one axis."""
        return (-np.arange(self.modes_per_dim)) % self.modes_per_dim

    @functools.cached_property
    def desc_order(self):
        """Flat indices sorted by descending |k| (stable), used for norm sums."""
        return np.argsort(-self.ksq.ravel(), kind="stable")

    @functools.cached_property
    def bands(self):
        """Dyadic shells in max-norm: [0, 1], [2, 3], [4, 7], ... up to max_mode."""
        out = [(0, 1)]
        lo = 2
        while lo <= self.max_mode:
            out.append((lo, min(2 * lo - 1, self.max_mode)))
            lo *= 2
        return tuple(out)

    def index(self, k):
        k1, k2 = int(k[0]), int(k[1])
        if max(abs(k1), abs(k2)) > self.max_mode:
            raise IndexError(f"wavevector {k} outside the retained lattice")
        return k1 % self.modes_per_dim, k2 % self.modes_per_dim

    @functools.lru_cache(maxsize=64)
    def ordered_weights(self, kind, s):
        """Flattened norm weights in ``desc_order``.

        ``kind`` is ``"inhom"`` for (1+|k|^2)^s, ``"hom"`` for |k|^(2s) with the
        zero mode dropped, or ``"grad_inhom"`` for (1+|k|^2)^s |k|^2.
        """
        ksq = self.ksq
        if kind == "inhom":
            w = (1.0 + ksq) ** s
        elif kind == "hom":
            w = np.where(ksq > 0, np.where(ksq > 0, ksq, 1.0) ** s, 0.0)
        elif kind == "grad_inhom":
            w = (1.0 + ksq) ** s * ksq
        else:
            raise ValueError(f"unknown weight kind {kind!r}")
        w = np.ascontiguousarray(w.ravel()[self.desc_order], dtype=np.float64)
        w.flags.writeable = False
        return w


@functools.lru_cache(maxsize=None)
def get_lattice(modes_per_dim, padded_dim=0):
    return WaveLattice(int(modes_per_dim), int(padded_dim))


def _check_same(a, b):
    if a != b:
        raise LatticeMismatchError(f"lattice mismatch: M={a.modes_per_dim} vs M={b.modes_per_dim}")


# --------------------------------------------------------------------------
# Transform plumbing on raw arrays


@functools.lru_cache(maxsize=None)
def _spread_index(M, K, P):
    ks = np.arange(-K, K + 1)
    return ks % M, ks % P, np.arange(K + 1)


@functools.lru_cache(maxsize=None)
def _gather_index(M, Q, P):
    ks = np.arange(-Q, Q + 1)
    pos = np.arange(1, Q + 1)
    return ks % M, ks % P, (-ks) % P, pos, (-pos) % M


def spread_to_grid(c, K, P):
    """Physical samples on a P x P grid of coefficients with |k_i| <= K.

    ``c`` may carry leading batch axes; only the block |k_i| <= K is read.
    """
    M = c.shape[-1]
    if P < 2 * K + 1:
        raise ValueError(f"grid {P} too small for modes up to {K}")
    src, dst, cols = _spread_index(M, K, P)
    H = np.zeros(c.shape[:-2] + (P, P // 2 + 1), dtype=np.complex128)
    H[..., dst[:, None], cols[None, :]] = c[..., src[:, None], cols[None, :]]
    return sfft.irfft2(H, s=(P, P), norm="forward")


def gather_from_grid(samples, Q, M):
    """Coefficients with |k_i| <= Q of real samples on a P x P grid.

    The k2 = 0 column is symmetrized so the result satisfies the reality
    condition exactly.
    """
    P = samples.shape[-1]
    if P < 2 * Q + 1:
        raise ValueError(f"grid {P} too small for modes up to {Q}")
    H = sfft.rfft2(samples, norm="forward")
    dst, src, src_neg, pos, neg_cols = _gather_index(M, Q, P)
    c = np.zeros(samples.shape[:-2] + (M, M), dtype=np.complex128)
    c[..., dst[:, None], np.arange(Q + 1)[None, :]] = H[..., src[:, None], np.arange(Q + 1)[None, :]]
    c[..., dst[:, None], neg_cols[None, :]] = np.conj(H[..., src_neg[:, None], pos[None, :]])
    col0 = c[..., :, 0]
    neg = (-np.arange(M)) % M
    c[..., :, 0] = 0.5 * (col0 + np.conj(col0[..., neg]))
    return c


@functools.lru_cache(maxsize=None)
def _band_grid(K, Q):
    # aliases of |q| <= 2K must miss [-Q, Q]
    P = sfft.next_fast_len(2 * K + Q + 1, real=True)
    while P % 2:
        P = sfft.next_fast_len(P + 1, real=True)
    return P


def bilinear_sums(lattice, xs, ys, combos, banded=True):
    """Dealiased sums of pointwise products.

    Args:
        lattice: The shared WaveLattice.
        xs, ys: Coefficient stacks of shape (nx, M, M) and (ny, M, M).
        combos: One entry per output; each is a list of ``(ix, iy, weight)``
            meaning ``weight * xs[ix] * ys[iy]``.
        banded: If True, split both factors into dyadic max-norm shells and
            evaluate shell pairs on the smallest alias-free grid. The result
            is the same truncated product, but round-off in each output mode
            scales with the shells that can reach it rather than with the
            whole field. If False, use one 3/2-padded grid.

    Returns:
        Array of shape (len(combos), M, M).
    """
    M = lattice.modes_per_dim
    Q = lattice.max_mode
    nx = xs.shape[0]
    out = np.zeros((len(combos), M, M), dtype=np.complex128)

    if not banded:
        P = lattice.padded_dim
        phys = spread_to_grid(np.concatenate([xs, ys]), Q, P)
        X, Y = phys[:nx], phys[nx:]
        prod = np.zeros((len(combos), P, P))
        for o, terms in enumerate(combos):
            for ix, iy, w in terms:
                prod[o] += w * (X[ix] * Y[iy])
        out += gather_from_grid(prod, Q, M)
        return out

    inf = lattice.inf_norm
    for lo, hi in lattice.bands:
        Qj = min(2 * hi, Q)
        P = _band_grid(hi, Qj)
        in_band = (inf >= lo) & (inf <= hi)
        upto = inf <= hi
        stack = np.concatenate([xs * in_band, xs * upto, ys * in_band, ys * upto])
        phys = spread_to_grid(stack, hi, P)
        ny = ys.shape[0]
        Xb, Xle = phys[:nx], phys[nx:2 * nx]
        Yb, Yle = phys[2 * nx:2 * nx + ny], phys[2 * nx + ny:]
        Xlt = Xle - Xb
        prod = np.zeros((len(combos), P, P))
        for o, terms in enumerate(combos):
            for ix, iy, w in terms:
                prod[o] += w * (Xb[ix] * Yle[iy] + Xlt[ix] * Yb[iy])
        out += gather_from_grid(prod, Qj, M)
    return out


# --------------------------------------------------------------------------
# Field types


class SpectralScalar:
    """Fourier coefficients of a real scalar field on a WaveLattice.

    Instances are immutable; ``coeffs`` is a read-only array.
    """

    __slots__ = ("lattice", "coeffs")

    def __init__(self, lattice, coeffs):
        c = np.array(coeffs, dtype=np.complex128)
        M = lattice.modes_per_dim
        if c.shape != (M, M):
            raise ValueError(f"coefficient array shape {c.shape} does not match lattice ({M}, {M})")
        c[lattice.nyquist] = 0.0
        c.flags.writeable = False
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralScalar is immutable")

    @classmethod
    def zeros(cls, lattice):
        return cls(lattice, np.zeros((lattice.modes_per_dim,) * 2, dtype=np.complex128))

    @classmethod
    def from_modes(cls, lattice, modes):
        """Build from ``{(k1, k2): c}``; the conjugate at -k is filled in."""
        c = np.zeros((lattice.modes_per_dim,) * 2, dtype=np.complex128)
        for k, val in modes.items():
            i = lattice.index(k)
            j = lattice.index((-k[0], -k[1]))
            if i == j:
                if abs(np.imag(val)) > 0:
                    raise ValueError("zero mode must be real")
                c[i] = val
                continue
            if (-k[0], -k[1]) in modes and not np.isclose(modes[(-k[0], -k[1])], np.conj(val)):
                raise ValueError(f"modes at {k} and its negative are not conjugate")
            c[i] = val
            c[j] = np.conj(val)
        return cls(lattice, c)

    @classmethod
    def from_function(cls, lattice, fn, grid=None):
        """Sample ``fn(x1, x2)`` on a grid and transform."""
        P = grid or lattice.padded_dim
        x = 2.0 * np.pi * np.arange(P) / P
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        return forward_transform(np.asarray(fn(X1, X2), dtype=np.float64) + 0.0 * X1, lattice)

    def coeff(self, k):
        return complex(self.coeffs[self.lattice.index(k)])

    def physical(self, grid=None):
        return inverse_transform(self, grid)

    def hermitian_defect(self):
        """max_k |c(-k) - conj(c(k))|; zero for a real field."""
        c = self.coeffs
        neg = self.lattice.neg_index
        return float(np.max(np.abs(c[np.ix_(neg, neg)] - np.conj(c))))

    def mean(self):
        return float(self.coeffs[0, 0].real)

    def _wrap(self, other):
        if isinstance(other, SpectralScalar):
            _check_same(self.lattice, other.lattice)
            return other.coeffs
        return NotImplemented

    def __add__(self, other):
        oc = self._wrap(other)
        if oc is NotImplemented:
            return oc
        return SpectralScalar(self.lattice, self.coeffs + oc)

    def __sub__(self, other):
        oc = self._wrap(other)
        if oc is NotImplemented:
            return oc
        return SpectralScalar(self.lattice, self.coeffs - oc)

    def __neg__(self):
        return SpectralScalar(self.lattice, -self.coeffs)

    def __mul__(self, a):
        if isinstance(a, (int, float, np.floating, np.integer)):
            return SpectralScalar(self.lattice, self.coeffs * float(a))
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralScalar(M={self.lattice.modes_per_dim})"


class SpectralVector2:
    """Two-component field on one lattice.

    Args:
        x1, x2: Component scalars.
        solenoidal: If True, the constructor checks k . v(k) = 0 for all k.
        mean_zero: If True, the constructor checks v(0) = 0.
        tol: Absolute-relative tolerance for the two checks.
    """

    __slots__ = ("x1", "x2", "solenoidal", "mean_zero")

    def __init__(self, x1, x2, solenoidal=False, mean_zero=False, tol=1e-10):
        _check_same(x1.lattice, x2.lattice)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        object.__setattr__(self, "solenoidal", bool(solenoidal))
        object.__setattr__(self, "mean_zero", bool(mean_zero))
        scale = max(float(np.max(np.abs(x1.coeffs))), float(np.max(np.abs(x2.coeffs))), 1e-300)
        if solenoidal and self.divergence_defect() > tol * scale * max(1, x1.lattice.max_mode):
            raise ValueError(f"field flagged divergence-free has max|k.v| = {self.divergence_defect():.3e}")
        if mean_zero and max(abs(x1.coeffs[0, 0]), abs(x2.coeffs[0, 0])) > tol * scale:
            raise ValueError("field flagged mean-zero has a nonzero k=0 coefficient")

    def __setattr__(self, name, value):
        raise AttributeError("SpectralVector2 is immutable")

    @property
    def lattice(self):
        return self.x1.lattice

    @property
    def components(self):
        return (self.x1, self.x2)

    @classmethod
    def from_array(cls, lattice, arr, **flags):
        return cls(SpectralScalar(lattice, arr[0]), SpectralScalar(lattice, arr[1]), **flags)

    @classmethod
    def zeros(cls, lattice):
        z = SpectralScalar.zeros(lattice)
        return cls(z, z, solenoidal=True, mean_zero=True)

    def as_array(self):
        return np.stack([self.x1.coeffs, self.x2.coeffs])

    def divergence(self):
        lat = self.lattice
        return SpectralScalar(lat, 1j * (lat.k1 * self.x1.coeffs + lat.k2 * self.x2.coeffs))

    def divergence_defect(self):
        lat = self.lattice
        return float(np.max(np.abs(lat.k1 * self.x1.coeffs + lat.k2 * self.x2.coeffs)))

    def mean(self):
        return (self.x1.mean(), self.x2.mean())

    def __add__(self, other):
        if not isinstance(other, SpectralVector2):
            return NotImplemented
        return SpectralVector2(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other):
        if not isinstance(other, SpectralVector2):
            return NotImplemented
        return SpectralVector2(self.x1 - other.x1, self.x2 - other.x2)

    def __neg__(self):
        return SpectralVector2(-self.x1, -self.x2, self.solenoidal, self.mean_zero)

    def __mul__(self, a):
        if isinstance(a, (int, float, np.floating, np.integer)):
            return SpectralVector2(self.x1 * a, self.x2 * a, self.solenoidal, self.mean_zero)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralVector2(M={self.lattice.modes_per_dim}, solenoidal={self.solenoidal})"


def _coeff_stack(f):
    if isinstance(f, SpectralScalar):
        return f.lattice, f.coeffs[None]
    if isinstance(f, SpectralVector2):
        return f.lattice, f.as_array()
    raise TypeError(f"expected SpectralScalar or SpectralVector2, got {type(f).__name__}")


# --------------------------------------------------------------------------
# Operations


def forward_transform(samples, lattice):
    """Coefficients of real samples taken on a P x P grid (P >= M)."""
    samples = np.asarray(samples, dtype=np.float64)
    M = lattice.modes_per_dim
    if samples.ndim != 2 or samples.shape[0] != samples.shape[1]:
        raise ValueError(f"expected square P x P samples, got shape {samples.shape}")
    if samples.shape[0] < M:
        raise ValueError(f"grid {samples.shape[0]} is coarser than the lattice M={M}")
    return SpectralScalar(lattice, gather_from_grid(samples, lattice.max_mode, M))


def inverse_transform(f, grid=None):
    """Samples of ``f`` on a P x P grid, default the lattice's padded grid."""
    lat = f.lattice
    P = lat.padded_dim if grid is None else int(grid)
    if P < lat.modes_per_dim:
        raise ValueError(f"grid {P} is coarser than the lattice M={lat.modes_per_dim}")
    return spread_to_grid(f.coeffs, lat.max_mode, P)


def partial_derivative(f, axis):
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    k = f.lattice.k1 if axis == 1 else f.lattice.k2
    return SpectralScalar(f.lattice, 1j * k * f.coeffs)


def directional_derivative(f, n):
    """n . grad f for a constant vector n: c(k) -> i (n.k) c(k)."""
    lat = f.lattice
    nk = float(n[0]) * lat.k1 + float(n[1]) * lat.k2
    return SpectralScalar(lat, 1j * nk * f.coeffs)


def laplacian(f):
    return SpectralScalar(f.lattice, -f.lattice.ksq * f.coeffs)


def fractional_derivative(f, s):
    """D^s f with D = sqrt(-Laplacian), i.e. c(k) -> |k|^s c(k)."""
    lat = f.lattice
    mult = np.where(lat.ksq > 0, np.sqrt(lat.ksq) ** s, 1.0 if s == 0 else 0.0)
    return SpectralScalar(lat, mult * f.coeffs)


def _lattice_sum(lattice, kind, s, values):
    return kernels.compensated_dot(
        lattice.ordered_weights(kind, float(s)), values.ravel()[lattice.desc_order]
    )


def _sq_norm(f, kind, s):
    lat, c = _coeff_stack(f)
    vals = np.sum(c.real**2 + c.imag**2, axis=0)
    return max(_lattice_sum(lat, kind, s, vals), 0.0)


def sobolev_norm(f, s):
    """sqrt(sum_k (1+|k|^2)^s |c(k)|^2); vectors sum over components."""
    return float(np.sqrt(_sq_norm(f, "inhom", s)))


def homogeneous_norm(f, s):
    """sqrt(sum_{k != 0} |k|^(2s) |c(k)|^2); vectors sum over components."""
    return float(np.sqrt(_sq_norm(f, "hom", s)))


def gradient_sobolev_norm(f, s):
    """||grad f||_{H^s} = sqrt(sum_k (1+|k|^2)^s |k|^2 |c(k)|^2)."""
    return float(np.sqrt(_sq_norm(f, "grad_inhom", s)))


def weighted_inner_product(f, g, s):
    """sum_{k != 0} |k|^(2s) Re(c_f(k) conj(c_g(k))); vectors sum over components."""
    lat, cf = _coeff_stack(f)
    lat_g, cg = _coeff_stack(g)
    _check_same(lat, lat_g)
    if cf.shape != cg.shape:
        raise ValueError("operands differ in number of components")
    vals = np.sum((cf * np.conj(cg)).real, axis=0)
    return float(_lattice_sum(lat, "hom", s, vals))


def inner_product(f, g):
    """L2 pairing sum_k Re(c_f conj c_g), equal to (2pi)^-2 times the integral of f g."""
    lat, cf = _coeff_stack(f)
    lat_g, cg = _coeff_stack(g)
    _check_same(lat, lat_g)
    if cf.shape != cg.shape:
        raise ValueError("operands differ in number of components")
    vals = np.sum((cf * np.conj(cg)).real, axis=0)
    return float(_lattice_sum(lat, "inhom", 0.0, vals))


def dealiased_product(f, g, banded=True):
    """Pointwise product f*g truncated back to the retained modes.

    Exact (up to round-off) for any pair of lattice fields; see
    ``bilinear_sums`` for the meaning of ``banded``.
    """
    _check_same(f.lattice, g.lattice)
    out = bilinear_sums(f.lattice, f.coeffs[None], g.coeffs[None], [[(0, 0, 1.0)]], banded=banded)
    return SpectralScalar(f.lattice, out[0])
