"""Gesture recognition from wireless-charger EM emissions: IQ ingestion,
averaged power spectra, VMD mode-wise denoising and tree-ensemble classification."""

__version__ = "0.1.0"
