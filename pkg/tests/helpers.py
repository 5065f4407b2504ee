"""Shared oracles for the test suite: brute-force schedulers, series
implementations of the special functions, and complex-Gaussian statistics."""
import itertools

import numpy as np

from xlmimo.precoding import sum_se, waterfill, zf_precoders


def erf_taylor(z, terms=120):
    """Maclaurin-series error function (oracle; adequate for |z| <~ 4)."""
    z = complex(z)
    total = 0.0 + 0.0j
    term = z
    for k in range(terms):
        total += term / (2 * k + 1)
        term *= -z * z / (k + 1)
    return 2.0 / np.sqrt(np.pi) * total


def j0_series(x, terms=120):
    """Power-series Bessel J0 (oracle; adequate for |x| <~ 12)."""
    q = -0.25 * float(x) * float(x)
    term, total = 1.0, 1.0
    for k in range(1, terms):
        term *= q / (k * k)
        total += term
    return total


def brute_force_best_subset(channels, tx_power, noise_power):
    """Exhaustive ZF+waterfilling search over all non-empty subsets.

    Returns (best_sum_se, best_subset); singular subsets are skipped.
    """
    n_users = channels.shape[0]
    best_val, best_set = -np.inf, None
    for size in range(1, n_users + 1):
        for subset in itertools.combinations(range(n_users), size):
            rows = channels[list(subset)]
            try:
                directions = zf_precoders(rows, subset)
            except Exception:
                continue
            effective = np.abs(np.einsum("im,im->i", directions.conj(), rows)) ** 2
            if np.any(effective <= 0):
                continue
            powers = waterfill(effective, tx_power, noise_power)
            _, total = sum_se(directions, powers, rows, noise_power, 1.0)
            if total > best_val:
                best_val, best_set = total, subset
    return best_val, best_set


def full_refresh_greedy(scenario, estimates, cfg):
    """Reference scheduler: like the lazy greedy but refreshes EVERY unscheduled
    gain with the current precoder sum before each argmax."""
    from xlmimo.precoding import CONDITION_LIMIT
    from xlmimo.scheduling import _candidate_budget, _internal_metric, prelog_factor, update_equivalent_gain

    config = scenario.config
    n_users = config.num_users
    gains = scenario.gains
    available = np.ones(n_users, dtype=bool)
    precoder_sum = np.zeros((config.num_antennas, config.num_antennas), dtype=complex)
    selected = []
    prev_metric = None
    while np.any(available) and len(selected) < n_users:
        refreshed = np.full(n_users, -np.inf)
        for k in np.flatnonzero(available):
            user = scenario.users[k]
            refreshed[k] = update_equivalent_gain(
                gains[k], user.response, user.corr.matrix, precoder_sum)
        pick = int(np.argmax(refreshed))
        trial = selected + [pick]
        try:
            directions = zf_precoders(estimates[trial], trial, cfg.zf_condition_limit)
            prelog = 1.0
            if cfg.overhead_aware:
                prelog = prelog_factor(cfg.coherence_block_len, cfg.per_user_training,
                                       len(trial) + _candidate_budget(cfg, gains, trial))
            _, metric = _internal_metric(directions, estimates[trial],
                                         config.noise_power, config.tx_power, prelog)
        except Exception:
            available[pick] = False
            continue
        if prev_metric is not None and metric < prev_metric:
            break
        selected.append(pick)
        available[pick] = False
        precoder_sum += np.outer(directions[-1], directions[-1].conj())
        prev_metric = metric
    return tuple(selected)


def empirical_covariance(samples):
    """Sample covariance E[x x^H] estimate for zero-mean complex rows (N, M)."""
    return (samples.T @ samples.conj()) / samples.shape[0]


def covariance_within_3_sigma(samples, target):
    """Entrywise |C_hat - target| <= 3 sqrt(C_ii C_jj / N) check."""
    n = samples.shape[0]
    est = (samples.T @ samples.conj()) / n
    diag = np.real(np.diag(target)).copy()
    diag[diag <= 0] = np.max(diag) * 1e-12 + 1e-30
    sigma = np.sqrt(np.outer(diag, diag) / n)
    return np.all(np.abs(est - target) <= 3.0 * sigma), est, sigma
