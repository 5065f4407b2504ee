"""Zero-forcing precoding, waterfilling power allocation, and SE evaluation."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularMatrixError

# Gram matrices worse-conditioned than this produce garbage precoders; fail
# before they reach the scheduler.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class PrecoderSet:
    """Unit-norm directions plus powers for an ordered set of users."""
    user_ids: tuple
    directions: np.ndarray   # (L, M), unit-norm rows
    powers: np.ndarray       # (L,), p_k^2 in watts
    prelog: float


def zf_precoders(estimates, user_ids=None, condition_limit=CONDITION_LIMIT):
    """Unit-norm zero-forcing directions from stacked channel rows (L x M).

    Rows of (H H^H)^{-1} H, normalized.  Raises SingularMatrixError when the
    Gram matrix is rank-deficient or its condition number exceeds the limit.
    """
    estimates = np.atleast_2d(estimates)
    n_users, n_antennas = estimates.shape
    ids = tuple(user_ids) if user_ids is not None else tuple(range(n_users))
    if n_users > n_antennas:
        raise SingularMatrixError(
            f"cannot zero-force {n_users} users with {n_antennas} antennas", ids)
    gram = estimates @ estimates.conj().T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > condition_limit:
        raise SingularMatrixError(
            f"Gram matrix condition {cond:.3e} exceeds {condition_limit:.0e} "
            f"for users {list(ids)}", ids)
    directions = np.linalg.solve(gram, estimates)
    norms = np.linalg.norm(directions, axis=1)
    if np.any(norms == 0.0):
        raise SingularMatrixError(f"zero precoder for users {list(ids)}", ids)
    return directions / norms[:, None]


def waterfill(effective_gains, total_power, noise_power):
    """Exact waterfilling: p_k^2 = max(0, mu - sigma^2 / g_k), sum = P_TX.

    Solved by sorting the noise-to-gain levels and dropping users until the
    water level clears the worst active one.
    """
    gains = np.asarray(effective_gains, dtype=float)
    if gains.size == 0:
        raise DomainError("waterfill needs at least one gain")
    if np.any(gains <= 0.0):
        raise DomainError("waterfill gains must be positive")
    levels = noise_power / gains
    order = np.argsort(levels)
    sorted_levels = levels[order]
    cumsum = np.cumsum(sorted_levels)
    active = gains.size
    while active > 1:
        mu = (total_power + cumsum[active - 1]) / active
        if mu > sorted_levels[active - 1]:
            break
        active -= 1
    mu = (total_power + cumsum[active - 1]) / active
    powers = np.zeros_like(gains)
    powers[order[:active]] = mu - sorted_levels[:active]
    return powers


def sum_se(directions, powers, channels, noise_power, prelog):
    """Per-user and sum spectral efficiency of a precoded downlink.

    ``channels`` holds the evaluation channels (true or estimated) in the same
    row order as ``directions``.  Returns (per_user_se, total).
    """
    directions = np.atleast_2d(directions)
    channels = np.atleast_2d(channels)
    if directions.shape != channels.shape:
        raise DomainError(
            f"precoders {directions.shape} and channels {channels.shape} mismatch")
    cross = directions.conj() @ channels.T          # [j, k] = f_j^H h_k
    cross_power = np.asarray(powers)[:, None] * np.abs(cross) ** 2
    signal = np.diag(cross_power)
    interference = cross_power.sum(axis=0) - signal
    per_user = prelog * np.log2(1.0 + signal / (noise_power + interference))
    return per_user, float(per_user.sum())
