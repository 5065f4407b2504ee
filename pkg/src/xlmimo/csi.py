"""CSI imperfection: temporal correlation, AR(1) aging, estimation error.

The channel evolves across coherence blocks as h[n+1] = alpha h[n] + z with
innovation z ~ CN(0, (1 - alpha^2) R_z) and alpha = J0(2 pi f_d T_s tau_s).
Least-squares training with an orthogonal sequence adds white noise of
variance sigma_n^2 / P_TX per antenna, so the one-block-ahead composite error
h[n+1] - alpha h_est[n] has covariance

    R_e = alpha^2 (sigma_n^2 / P_TX) I + (1 - alpha^2) R_z.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .nearfield import draw_complex_normal
from .special import bessel_j0


@dataclass(frozen=True)
class AgingConfig:
    speed_mps: float          # user speed
    wavelength: float         # m
    sampling_freq_hz: float   # f_s
    delay_samples: float      # CSI delay tau_s

    def __post_init__(self):
        for name in ("speed_mps", "wavelength", "sampling_freq_hz", "delay_samples"):
            if getattr(self, name) < 0 or (name != "speed_mps" and getattr(self, name) <= 0):
                raise ConfigError(f"AgingConfig.{name} must be positive, got {getattr(self, name)}")

    @property
    def doppler_hz(self):
        return self.speed_mps / self.wavelength


def temporal_correlation(cfg):
    """alpha = J0(2 pi f_d T_s tau_s); negative values are used as-is."""
    return bessel_j0(2.0 * np.pi * cfg.doppler_hz * cfg.delay_samples / cfg.sampling_freq_hz)


def innovation_covariance(response, corr_matrix):
    """R_z = sum_s hbar_s hbar_s^H + R for one user.

    ``response`` holds the specular responses as rows (S x M).
    """
    return response.T @ response.conj() + corr_matrix


def evolve_channel(channel, alpha, innovation_factor, rng):
    """h[n+1] = alpha h[n] + z, z ~ CN(0, (1 - alpha^2) R_z), z independent."""
    scale = np.sqrt(max(0.0, 1.0 - alpha * alpha))
    z = scale * (innovation_factor @ draw_complex_normal(rng, innovation_factor.shape[0]))
    return alpha * channel + z


def estimate_channel(channel, snr, rng):
    """Least-squares estimate: h + w with w ~ CN(0, I / snr) (training SNR = data SNR)."""
    if snr <= 0:
        raise ConfigError(f"snr must be positive, got {snr}")
    return channel + draw_complex_normal(rng, channel.shape[0]) / np.sqrt(snr)


def error_covariance(alpha, snr, innovation_cov):
    """Composite one-block-ahead error covariance R_e."""
    size = innovation_cov.shape[0]
    return (alpha * alpha / snr) * np.eye(size) + (1.0 - alpha * alpha) * innovation_cov


@dataclass(frozen=True)
class InnovationModel:
    """Per-user aging model: alpha plus innovation and composite covariances."""
    alpha: float
    innovation_cov: np.ndarray
    error_cov: np.ndarray


def innovation_model(alpha, snr, response, corr_matrix):
    r_z = innovation_covariance(response, corr_matrix)
    return InnovationModel(alpha=alpha, innovation_cov=r_z,
                           error_cov=error_covariance(alpha, snr, r_z))
