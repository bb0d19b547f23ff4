"""Phase-field fracture with an effective crack energy from the QR decomposition of F."""

__version__ = "0.1.0"
