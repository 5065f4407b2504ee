"""Spherical-wavefront array responses and channel synthesis.

A channel realization is the phase-randomized sum of specular responses plus
a correlated diffuse term:

    h = sum_s exp(j phi_s) hbar_s + L u,   phi_s ~ U[0, 2pi), u ~ CN(0, I),

where L is the sampling factor of the diffuse correlation matrix.  Expected
and equivalent channel gains follow from the component powers.
"""
import numpy as np

from .errors import DomainError


def element_radius(radius, angle, m, spacing):
    """Distance from a source at (radius, angle) to antenna index m.

    Spherical wavefront: r * sqrt(1 - 2 m (d/r) sin(angle) + (d/r)^2 m^2).
    Broadcasts over m.
    """
    if np.any(np.asarray(radius) <= 0.0):
        raise DomainError(f"source radius must be positive, got {radius}")
    rel = spacing / radius
    m = np.asarray(m, dtype=float)
    return radius * np.sqrt(1.0 - 2.0 * m * rel * np.sin(angle) + (rel * m) ** 2)


def specular_response(path, geom):
    """Array response of one specular path: rho * exp(-j 2 pi r_m / lambda).

    The squared norm is M * rho^2 exactly (unit-modulus phasors).
    """
    radii = element_radius(path.radius, path.angle, geom.antenna_indices(), geom.spacing)
    return path.amplitude * np.exp(-2j * np.pi * radii / geom.wavelength)


def draw_complex_normal(rng, size):
    """Standard circularly-symmetric complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def draw_channel(scenario, user, rng, phases=None, diffuse=None):
    """One channel realization for a user (test hooks pin phases/diffuse).

    ``phases`` overrides the per-path U[0, 2pi) draws; ``diffuse`` overrides
    the correlated Gaussian term.  Production paths leave both None.
    """
    state = scenario.users[user]
    n_paths = state.response.shape[0]
    if phases is None:
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_paths)
    if diffuse is None:
        diffuse = state.corr.factor @ draw_complex_normal(rng, scenario.config.num_antennas)
    return np.exp(1j * np.asarray(phases)) @ state.response + diffuse


def expected_gain_exact(scenario, user):
    """E||h||^2 = sum_s ||hbar_s||^2 + trace(R): cross terms vanish in mean."""
    state = scenario.users[user]
    spec = float(np.sum(np.abs(state.response) ** 2))
    return spec + float(np.trace(state.corr.matrix).real)


def equivalent_gain(scenario, user):
    """Long-term scheduling priority g = M (1 + 1/kappa) sum_s rho_s^2."""
    cfg = scenario.config
    state = scenario.users[user]
    rho_sq = sum(p.amplitude ** 2 for p in state.paths)
    return cfg.num_antennas * (1.0 + 1.0 / cfg.power_ratio) * rho_sq
