"""
Probe-based evaluation of learned representations and latent exports.
"""

from .latent import autoencoder_from, export_latent, hidden_features
from .probe import ProbeParams, fit_probe, probe_accuracy, probe_cost

__all__ = [
    "ProbeParams",
    "autoencoder_from",
    "export_latent",
    "fit_probe",
    "hidden_features",
    "probe_accuracy",
    "probe_cost",
]
