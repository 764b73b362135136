"""Vortex-dipole inverse problem toolkit."""
