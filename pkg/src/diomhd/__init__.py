"""Pseudo-spectral simulation and energy-method diagnostics for 2D MHD with
magnetic diffusion only, perturbed around a constant background field."""

__version__ = "0.1.0"
