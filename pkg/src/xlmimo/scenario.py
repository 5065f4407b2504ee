"""Reproducible scenario generation.

A scenario is the static world of one Monte Carlo realization: user
positions, specular path geometry/amplitudes, per-user diffuse correlation
matrices calibrated to the configured specular-to-diffuse power ratio, and
the innovation statistics needed for channel aging.

Randomness is split counter-style: every consumer derives its generator as
``default_rng(SeedSequence(seed, spawn_key=(stream, index)))`` so parallel
and serial runs draw identical values.
"""
from dataclasses import dataclass, field

import numpy as np

from . import csi, nearfield
from .correlation import CorrelationMatrix, build_correlation_matrix, eigen_factor
from .errors import ConfigError

# spawn_key stream tags (documented; see README)
STREAM_USER = 0        # per-user geometry and path sampling
STREAM_PIPELINE = 1    # per-(realization, snr) channel/noise draws


def substream(seed, *key):
    """Deterministic child generator for (seed, key...) independent of call order."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA description; antenna indices are centered on the array midpoint."""
    num_antennas: int
    wavelength: float
    spacing: float

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ConfigError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if self.wavelength <= 0 or self.spacing <= 0:
            raise ConfigError("wavelength and spacing must be positive")

    def antenna_indices(self):
        # For even M the closed interval [-M/2, M/2] has M+1 integers; we use
        # m in {-M/2, ..., M/2 - 1} so there are exactly M of them.
        return np.arange(self.num_antennas) - self.num_antennas // 2


@dataclass(frozen=True)
class UserGeometry:
    radius: float   # m
    angle: float    # rad


@dataclass(frozen=True)
class SpecularPath:
    radius: float      # m, user location (LoS) or last-reflection point (NLoS)
    angle: float       # rad
    amplitude: float   # rho in (0, 1]
    is_los: bool


@dataclass(frozen=True)
class ScenarioConfig:
    """Static simulation parameters (defaults are the desk-scale setup)."""
    num_users: int = 50
    num_antennas: int = 64
    specular_paths: int = 4
    wavelength: float = 0.15                      # m
    antenna_spacing: float | None = None          # m; None -> wavelength / 2
    power_ratio: float = 2.0                      # kappa = specular/diffuse power
    angular_range: tuple = (-np.pi / 4, np.pi / 4)    # rad
    distance_range: tuple = (40.0, 230.0)         # m
    angular_spread_deg: float = 10.0              # sigma_delta
    spread_mapping: str = "std"                   # 'std': phi = sqrt(3) sigma; 'half-width': phi = sigma
    noise_power: float = 1.0                      # sigma_n^2, W
    tx_power: float = 1.0                         # P_TX, W
    coherence_block_len: int = 10000              # tau_c, samples
    per_user_training: int = 30                   # tau_dot, samples
    sampling_freq_hz: float = 1e6                 # f_s
    csi_delay_samples: float = 10000.0            # tau_s
    user_speed_kmh: float = 30.0                  # v
    constant_amplitude: float | None = None       # override: fixed rho for every path
    reflection_loss_range: tuple = (0.3, 0.9)     # NLoS amplitude factor gamma ~ U(...)
    inter_block: str = "ar1"                      # 'ar1' | 'redraw'
    # What stays constant when kappa varies across channel configurations:
    # 'specular-fixed' keeps the distance-based amplitudes and derives the
    # diffuse power as specular/kappa; 'diffuse-fixed' keeps the diffuse level
    # at its kappa_reference value and scales amplitudes by sqrt(k/k_ref), so
    # larger kappa means more specular power (the Fig.-1 style comparison).
    kappa_mode: str = "specular-fixed"
    kappa_reference: float = 4.0

    def __post_init__(self):
        if self.num_users < 1:
            raise ConfigError(f"num_users must be >= 1, got {self.num_users}")
        if self.specular_paths < 1:
            raise ConfigError(f"specular_paths must be >= 1, got {self.specular_paths}")
        if self.power_ratio <= 0:
            raise ConfigError(f"power_ratio must be positive, got {self.power_ratio}")
        if self.noise_power <= 0 or self.tx_power <= 0:
            raise ConfigError("noise_power and tx_power must be positive")
        if self.coherence_block_len <= 0 or self.per_user_training <= 0:
            raise ConfigError("coherence_block_len and per_user_training must be positive")
        for name, rng_ in (("angular_range", self.angular_range),
                           ("distance_range", self.distance_range),
                           ("reflection_loss_range", self.reflection_loss_range)):
            if len(rng_) != 2 or not rng_[0] < rng_[1]:
                raise ConfigError(f"{name} must be an increasing (lo, hi) pair, got {rng_}")
        if self.distance_range[0] <= 0:
            raise ConfigError("distance_range must be positive")
        if not 0 < np.deg2rad(self.angular_spread_deg) < np.pi / 12:
            raise ConfigError(
                f"angular_spread_deg must lie in (0, 15) degrees, got {self.angular_spread_deg}"
            )
        if self.spread_mapping not in ("std", "half-width"):
            raise ConfigError(f"unknown spread_mapping {self.spread_mapping!r}")
        if self.inter_block not in ("ar1", "redraw"):
            raise ConfigError(f"unknown inter_block mode {self.inter_block!r}")
        if self.constant_amplitude is not None and not 0 < self.constant_amplitude <= 1:
            raise ConfigError("constant_amplitude must lie in (0, 1]")
        if self.kappa_mode not in ("specular-fixed", "diffuse-fixed"):
            raise ConfigError(f"unknown kappa_mode {self.kappa_mode!r}")
        if self.kappa_mode == "diffuse-fixed" and self.power_ratio > self.kappa_reference:
            raise ConfigError(
                "diffuse-fixed mode needs power_ratio <= kappa_reference to keep "
                "amplitudes in (0, 1]")

    @property
    def geometry(self):
        spacing = self.antenna_spacing if self.antenna_spacing is not None else self.wavelength / 2.0
        return ArrayGeometry(self.num_antennas, self.wavelength, spacing)

    @property
    def phi_half(self):
        sigma = np.deg2rad(self.angular_spread_deg)
        return np.sqrt(3.0) * sigma if self.spread_mapping == "std" else sigma

    @property
    def snr(self):
        return self.tx_power / self.noise_power

    @property
    def aging(self):
        return csi.AgingConfig(
            speed_mps=self.user_speed_kmh / 3.6,
            wavelength=self.wavelength,
            sampling_freq_hz=self.sampling_freq_hz,
            delay_samples=self.csi_delay_samples,
        )


@dataclass(frozen=True)
class UserState:
    """Everything static about one user within a scenario."""
    geometry: UserGeometry
    paths: tuple
    response: np.ndarray = field(repr=False)           # (S, M) specular responses
    corr: CorrelationMatrix = field(repr=False)
    innovation_factor: np.ndarray = field(repr=False)  # L_z with L_z L_z^H = R_z
    equivalent_gain: float = 0.0


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    seed: int
    users: tuple
    alpha: float                                  # temporal correlation

    @property
    def gains(self):
        return np.array([u.equivalent_gain for u in self.users])


def _path_amplitude(cfg, radius, loss):
    if cfg.constant_amplitude is not None:
        rho = cfg.constant_amplitude
    else:
        rho = min(1.0, cfg.distance_range[0] / radius) * loss
    if cfg.kappa_mode == "diffuse-fixed":
        rho *= np.sqrt(cfg.power_ratio / cfg.kappa_reference)
    return rho


def sample_specular_paths(rng, user, n_paths, config):
    """Path 1 is LoS at the user location; the rest are uniform last-reflection
    points with a uniform reflection loss on the amplitude."""
    if n_paths < 1:
        raise ConfigError(f"n_paths must be >= 1, got {n_paths}")
    paths = [SpecularPath(
        radius=user.radius, angle=user.angle,
        amplitude=_path_amplitude(config, user.radius, 1.0), is_los=True,
    )]
    for _ in range(n_paths - 1):
        radius = rng.uniform(*config.distance_range)
        angle = rng.uniform(*config.angular_range)
        loss = rng.uniform(*config.reflection_loss_range)
        paths.append(SpecularPath(
            radius=radius, angle=angle,
            amplitude=_path_amplitude(config, radius, loss), is_los=False,
        ))
    return paths


def build_scenario(config, seed):
    """Deterministic scenario for (config, seed).

    Per-user correlation matrices are scaled so trace(R_k) = M * sum_s
    rho_{k,s}^2 / kappa, which makes the equivalent gain equal the exact
    expected gain.
    """
    geom = config.geometry
    aging = config.aging
    alpha = csi.temporal_correlation(aging)
    users = []
    for k in range(config.num_users):
        rng = substream(seed, STREAM_USER, k)
        geometry = UserGeometry(
            radius=rng.uniform(*config.distance_range),
            angle=rng.uniform(*config.angular_range),
        )
        paths = sample_specular_paths(rng, geometry, config.specular_paths, config)
        response = np.stack([nearfield.specular_response(p, geom) for p in paths])
        rho_sq = sum(p.amplitude ** 2 for p in paths)
        beta = rho_sq / config.power_ratio
        corr = build_correlation_matrix(geom, geometry.angle, config.phi_half,
                                        geometry.radius, beta)
        r_z = csi.innovation_covariance(response, corr.matrix)
        _, z_factor, _ = eigen_factor(r_z, clip_tol=1e-8, what="innovation covariance")
        users.append(UserState(
            geometry=geometry,
            paths=tuple(paths),
            response=response,
            corr=corr,
            innovation_factor=z_factor,
            equivalent_gain=config.num_antennas * (1.0 + 1.0 / config.power_ratio) * rho_sq,
        ))
    return Scenario(config=config, seed=int(seed), users=tuple(users), alpha=alpha)
