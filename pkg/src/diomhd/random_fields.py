"""Seeded random fields with prescribed spectral envelopes."""

import numpy as np

from .spectral import SpectralScalar, SpectralVector2
from .mhd import FlowState, project_array


def hermitian_from_half(lattice, values):
    """Real-field coefficients that agree with ``values`` on the half plane
    k1 > 0 or (k1 = 0, k2 > 0); the other half is the conjugate mirror and
    the zero mode keeps the real part of ``values``."""
    k1, k2 = lattice.k1, lattice.k2
    half = (k1 > 0) | ((k1 == 0) & (k2 > 0))
    c = np.where(half, values, 0.0).astype(np.complex128)
    neg = lattice.neg_index
    c = c + np.conj(c[..., neg[:, None], neg[None, :]])
    c[..., 0, 0] = np.real(values[..., 0, 0])
    c[..., lattice.nyquist] = 0.0
    return c


def envelope(lattice, decay, max_mode=None):
    """(1+|k|^2)^(-decay/2), zero outside max-norm ``max_mode``."""
    env = (1.0 + lattice.ksq) ** (-0.5 * decay)
    if max_mode is not None:
        env = np.where(lattice.inf_norm <= max_mode, env, 0.0)
    return env


def random_coeffs(lattice, rng, decay=2.0, max_mode=None, ncomp=1):
    """Gaussian coefficients under ``envelope``, Hermitian-symmetrized."""
    shape = (ncomp, lattice.modes_per_dim, lattice.modes_per_dim)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return hermitian_from_half(lattice, z * envelope(lattice, decay, max_mode))


def random_scalar(lattice, seed=0, decay=2.0, max_mode=None, mean=0.0):
    rng = np.random.default_rng(seed)
    c = random_coeffs(lattice, rng, decay, max_mode)[0]
    c[0, 0] = mean
    return SpectralScalar(lattice, c)


def random_solenoidal(lattice, seed=0, decay=2.0, max_mode=None, scale=1.0):
    """Divergence-free, mean-zero vector field with unit-L2 envelope times ``scale``."""
    rng = np.random.default_rng(seed)
    c = project_array(lattice, random_coeffs(lattice, rng, decay, max_mode, ncomp=2))
    c[:, 0, 0] = 0.0
    norm = np.sqrt(np.sum(np.abs(c) ** 2))
    if norm > 0:
        c *= scale / norm
    return SpectralVector2.from_array(lattice, c, solenoidal=True, mean_zero=True)


def random_state(lattice, seed=0, decay=2.0, max_mode=None, scale=1.0, t=0.0):
    """FlowState with independent random solenoidal u and b."""
    ss = np.random.SeedSequence(seed).spawn(2)
    u = random_solenoidal(lattice, ss[0], decay, max_mode, scale)
    b = random_solenoidal(lattice, ss[1], decay, max_mode, scale)
    return FlowState(float(t), u, b)
