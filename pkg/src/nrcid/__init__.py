"""
nrcid - Non-fiducial biometric identification by relative compression

Signals are low-pass filtered, differentiated, quantized with a per-identity
Lloyd-Max codebook and modeled with extended-alphabet finite-context models.
A test segment is attributed to the identity whose model yields the minimum
Normalized Relative Compression (NRC).
"""

__version__ = "0.1.0"
