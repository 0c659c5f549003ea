"""Hourglass micropillar single-photon source modeling."""

__version__ = "0.1.0"
