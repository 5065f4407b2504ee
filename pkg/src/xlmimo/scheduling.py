"""Joint user scheduling and precoding.

The primary scheduler greedily grows the served set using long-term
equivalent gains, refreshed lazily with an interference penalty built from
the precoders of already-selected users.  Because the penalty only grows as
users are added, stale gains are upper bounds and the classic lazy-greedy
argmax remains exact.  Semi-orthogonal user selection (SUS) variants serve as
benchmarks, and a two-block pipeline evaluates every scheduler on aged,
noisily re-estimated channels.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import csi, nearfield
from .errors import ConfigError, DomainError, SingularMatrixError
from .precoding import CONDITION_LIMIT, PrecoderSet, sum_se, waterfill, zf_precoders

MODE_ISP = "ISP"
MODE_ISP_P = "ISP-P"
MODE_SUS_K = "SUS-K"
MODE_SUS_S = "SUS-S"
MODE_PERFECT = "PERFECT"
MODES = (MODE_ISP, MODE_ISP_P, MODE_SUS_K, MODE_SUS_S, MODE_PERFECT)


@dataclass(frozen=True)
class SchedulerConfig:
    mode: str = MODE_ISP
    candidate_policy: str = "fixed"      # 'fixed' | 'threshold'
    candidate_size: int = 15             # |G| for the fixed policy
    candidate_threshold: float = 0.0     # nu for the threshold policy
    per_user_training: int = 30          # tau_dot, samples
    coherence_block_len: int = 10000     # tau_c, samples
    overhead_aware: bool = False         # apply the training pre-log
    sus_epsilon: float = 0.3             # SUS semi-orthogonality threshold
    zf_condition_limit: float = CONDITION_LIMIT

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown scheduler mode {self.mode!r}; expected one of {MODES}")
        if self.candidate_policy not in ("fixed", "threshold"):
            raise ConfigError(f"unknown candidate policy {self.candidate_policy!r}")
        if self.candidate_size < 0:
            raise ConfigError("candidate_size must be >= 0")
        if not 0.0 < self.sus_epsilon < 1.0:
            raise ConfigError(f"sus_epsilon must lie in (0, 1), got {self.sus_epsilon}")


@dataclass(frozen=True)
class ScheduleResult:
    """Outcome of one scheduling pass (before block-(n+1) retraining)."""
    selected: tuple                      # S, in selection order
    candidates: tuple                    # G, disjoint from S
    precoders: PrecoderSet               # computed on the scheduling channels
    metric_trace: tuple                  # internal metric at each accepted iteration
    initial_gains: np.ndarray            # g_k at iteration 0
    gain_history: tuple                  # (user, refreshed gain) per acceptance


def prelog_factor(coherence_len, per_user_training, n_trained):
    """(tau_c - n * tau_dot) / tau_c; errors out when training eats the block."""
    used = n_trained * per_user_training
    if used >= coherence_len:
        raise DomainError(
            f"training {n_trained} users costs {used} samples >= block length {coherence_len}")
    return (coherence_len - used) / coherence_len


def candidate_set(gains, selected, cfg):
    """Users to keep training although unscheduled; ties go to the lowest id."""
    remaining = [k for k in range(len(gains)) if k not in set(selected)]
    if cfg.candidate_policy == "threshold":
        return tuple(k for k in remaining if gains[k] >= cfg.candidate_threshold)
    order = sorted(remaining, key=lambda k: (-gains[k], k))
    return tuple(order[:cfg.candidate_size])


def update_equivalent_gain(gain, response, corr_matrix, precoder_sum):
    """Penalized gain g - sum_s hbar_s^H F hbar_s - trace(R F)."""
    spec_penalty = np.einsum("sm,mn,sn->", response.conj(), precoder_sum, response).real
    diffuse_penalty = np.einsum("ij,ji->", corr_matrix, precoder_sum).real
    return gain - spec_penalty - diffuse_penalty


def _candidate_budget(cfg, gains, trial):
    """Nominal |G| used in the pre-log while the schedule is still growing."""
    outside = np.ones(len(gains), dtype=bool)
    outside[list(trial)] = False
    if cfg.candidate_policy == "threshold":
        return int(np.sum(outside & (gains >= cfg.candidate_threshold)))
    return min(int(outside.sum()), cfg.candidate_size)


def _internal_metric(directions, channels, noise_power, tx_power, prelog):
    """Estimated sum SE used as the stopping metric (ZF leaves no estimated
    interference, but evaluate the full expression anyway)."""
    effective = np.abs(np.einsum("im,im->i", directions.conj(), channels)) ** 2
    powers = waterfill(effective, tx_power, noise_power)
    _, metric = sum_se(directions, powers, channels, noise_power, prelog)
    return powers, metric


def isp_schedule(scenario, estimates, cfg):
    """Greedy scheduling on equivalent gains with lazy, penalty-refreshed picks.

    ``estimates`` holds the scheduling-time channel estimates as rows (K x M);
    the internal metric, ZF precoders and waterfilling all use these rows.
    Candidates whose Gram matrix is singular are dropped and the greedy
    continues with the rest.
    """
    config = scenario.config
    n_users = config.num_users
    noise, tx = config.noise_power, config.tx_power
    initial_gains = scenario.gains
    working = initial_gains.astype(float).copy()
    available = np.ones(n_users, dtype=bool)
    precoder_sum = np.zeros((config.num_antennas, config.num_antennas), dtype=complex)

    selected = []
    metric_trace = []
    gain_history = []
    best = None
    prev_metric = None

    while np.any(available) and len(selected) < n_users:
        fresh = np.zeros(n_users, dtype=bool)
        added = False
        while np.any(available):
            masked = np.where(available, working, -np.inf)
            pick = int(np.argmax(masked))            # first max -> lowest id
            if not fresh[pick]:
                user = scenario.users[pick]
                working[pick] = update_equivalent_gain(
                    initial_gains[pick], user.response, user.corr.matrix, precoder_sum)
                fresh[pick] = True
                continue
            trial = selected + [pick]
            try:
                directions = zf_precoders(estimates[trial], trial, cfg.zf_condition_limit)
                budget = _candidate_budget(cfg, initial_gains, trial)
                prelog = 1.0
                if cfg.overhead_aware:
                    prelog = prelog_factor(cfg.coherence_block_len,
                                           cfg.per_user_training, len(trial) + budget)
                powers, metric = _internal_metric(
                    directions, estimates[trial], noise, tx, prelog)
            except (SingularMatrixError, DomainError):
                available[pick] = False              # reject candidate, keep going
                continue
            if prev_metric is not None and metric < prev_metric:
                available[pick] = False              # would decrease the metric: stop
                added = False
            else:
                selected.append(pick)
                available[pick] = False
                metric_trace.append(metric)
                gain_history.append((pick, float(working[pick])))
                precoder_sum += np.outer(directions[-1], directions[-1].conj())
                best = PrecoderSet(tuple(trial), directions, powers, prelog)
                prev_metric = metric
                added = True
            break
        if not added:
            break

    if best is None:
        raise SingularMatrixError("no user could be scheduled", [])
    candidates = candidate_set(initial_gains, selected, cfg)
    return ScheduleResult(
        selected=tuple(selected),
        candidates=candidates,
        precoders=best,
        metric_trace=tuple(metric_trace),
        initial_gains=initial_gains,
        gain_history=tuple(gain_history),
    )


def sus_schedule(channels, cfg, noise_power, tx_power):
    """Semi-orthogonal user selection benchmark.

    Picks the user with the largest channel component orthogonal to the span
    of previous picks, prunes candidates correlated with the pick beyond
    ``sus_epsilon``, and stops when the (overhead-free) sum SE would drop.
    """
    channels = np.atleast_2d(channels)
    n_users, n_antennas = channels.shape
    pool = list(range(n_users))
    selected = []
    basis = []
    metric_trace = []
    best = None
    prev_metric = None

    while pool and len(selected) < min(n_users, n_antennas):
        best_k, best_resid, best_norm = None, None, -1.0
        for k in pool:
            resid = channels[k].copy()
            for b in basis:
                resid -= (b.conj() @ channels[k]) * b
            norm = float(np.linalg.norm(resid))
            if norm > best_norm:
                best_k, best_resid, best_norm = k, resid, norm
        if best_norm <= 0.0:
            break
        trial = selected + [best_k]
        try:
            directions = zf_precoders(channels[trial], trial, cfg.zf_condition_limit)
            powers, metric = _internal_metric(
                directions, channels[trial], noise_power, tx_power, 1.0)
        except (SingularMatrixError, DomainError):
            pool.remove(best_k)
            continue
        if prev_metric is not None and metric < prev_metric:
            break
        selected.append(best_k)
        metric_trace.append(metric)
        best = PrecoderSet(tuple(trial), directions, powers, 1.0)
        prev_metric = metric
        pool.remove(best_k)
        direction = best_resid / best_norm
        pool = [
            k for k in pool
            if abs(channels[k].conj() @ direction) / np.linalg.norm(channels[k]) <= cfg.sus_epsilon
        ]
        basis.append(direction)

    if best is None:
        raise SingularMatrixError("SUS could not schedule any user", [])
    return ScheduleResult(
        selected=tuple(selected),
        candidates=(),
        precoders=best,
        metric_trace=tuple(metric_trace),
        initial_gains=np.linalg.norm(channels, axis=1) ** 2,
        gain_history=tuple((k, m) for k, m in zip(selected, metric_trace)),
    )


@dataclass(frozen=True)
class ChannelState:
    """Per-block channel knowledge: truth for everyone, estimates only for
    the users that were actually trained in that block."""
    block: int
    true_channels: np.ndarray     # (K, M)
    estimates: dict               # user id -> estimated channel row

    def estimate_rows(self, users):
        missing = [k for k in users if k not in self.estimates]
        if missing:
            raise ConfigError(
                f"block {self.block}: no estimates for untrained users {missing}")
        return np.stack([self.estimates[k] for k in users])


@dataclass(frozen=True)
class PipelineResult:
    mode: str
    sum_se: float
    per_user_se: np.ndarray
    selected: tuple
    candidates: tuple
    prelog: float
    schedule: ScheduleResult
    block_state: ChannelState


def _final_prelog(cfg, mode, n_users, schedule):
    if not cfg.overhead_aware or mode == MODE_PERFECT:
        return 1.0
    if mode == MODE_SUS_K:
        trained = n_users
    elif mode == MODE_SUS_S:
        trained = len(schedule.selected)
    else:
        trained = len(schedule.selected) + len(schedule.candidates)
    return prelog_factor(cfg.coherence_block_len, cfg.per_user_training, trained)


def run_block_pipeline(scenario, cfg, rng):
    """Schedule during block n, retrain, precode and evaluate at block n+1.

    Block 0 is a warm-up in which every user is trained; the returned SE uses
    the true block-1 channels with the mode's pre-log.  Random draws happen in
    a mode-independent order so modes can be compared on identical worlds.
    """
    config = scenario.config
    n_users, n_antennas = config.num_users, config.num_antennas
    snr = config.snr
    if cfg.overhead_aware and cfg.mode == MODE_SUS_K:
        # SUS-K retrains everyone; make sure that even fits in the block
        prelog_factor(cfg.coherence_block_len, cfg.per_user_training, n_users)

    h0 = np.stack([nearfield.draw_channel(scenario, k, rng) for k in range(n_users)])
    noise_warm = np.stack([nearfield.draw_complex_normal(rng, n_antennas) for _ in range(n_users)])
    if config.inter_block == "ar1":
        h1 = np.stack([
            csi.evolve_channel(h0[k], scenario.alpha, scenario.users[k].innovation_factor, rng)
            for k in range(n_users)
        ])
    else:
        h1 = np.stack([nearfield.draw_channel(scenario, k, rng) for k in range(n_users)])
    noise_next = np.stack([nearfield.draw_complex_normal(rng, n_antennas) for _ in range(n_users)])

    est0 = h0 + noise_warm / np.sqrt(snr)
    est1_all = h1 + noise_next / np.sqrt(snr)

    mode = cfg.mode
    if mode in (MODE_ISP, MODE_ISP_P):
        schedule = isp_schedule(scenario, est0, cfg)
        trained = tuple(schedule.selected) + tuple(schedule.candidates)
    elif mode == MODE_PERFECT:
        # genie: schedule and precode on the true block-1 channels, no overhead
        genie_cfg = replace(cfg, mode=MODE_ISP, overhead_aware=False)
        schedule = isp_schedule(scenario, h1, genie_cfg)
        schedule = ScheduleResult(
            selected=schedule.selected, candidates=(), precoders=schedule.precoders,
            metric_trace=schedule.metric_trace, initial_gains=schedule.initial_gains,
            gain_history=schedule.gain_history)
        trained = ()
    elif mode in (MODE_SUS_K, MODE_SUS_S):
        schedule = sus_schedule(est0, cfg, config.noise_power, config.tx_power)
        trained = (tuple(range(n_users)) if mode == MODE_SUS_K
                   else tuple(schedule.selected))
    else:
        raise ConfigError(f"unknown scheduler mode {mode!r}")

    state = ChannelState(block=1, true_channels=h1,
                         estimates={k: est1_all[k] for k in trained})
    rows = list(schedule.selected)
    if mode in (MODE_ISP_P, MODE_PERFECT):
        design = h1[rows]
    else:
        design = state.estimate_rows(rows)
    directions = zf_precoders(design, rows, cfg.zf_condition_limit)
    effective = np.abs(np.einsum("im,im->i", directions.conj(), design)) ** 2
    powers = waterfill(effective, config.tx_power, config.noise_power)
    prelog = _final_prelog(cfg, mode, n_users, schedule)
    per_user, total = sum_se(directions, powers, h1[rows], config.noise_power, prelog)
    return PipelineResult(
        mode=mode, sum_se=total, per_user_se=per_user,
        selected=schedule.selected, candidates=schedule.candidates,
        prelog=prelog, schedule=schedule, block_state=state)
