"""Throughput of Wi-Fi beside LTE-DC, of LTE-DC itself, and of Wi-Fi alone."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import PacketTiming, ScenarioConfig, lte_timing, packet_airtime
from .markov import saturated_tau_limit, solve_coex, solve_wifi_only
from .offperiod import (
    collision_prob_lte,
    expected_packets,
    geometry,
    hit_prob,
    success_seq_multi,
    success_seq_single,
)

# one PDCCH symbol out of 14 per subframe carries no data
LTE_DATA_FRACTION = 13 / 14


@dataclass(frozen=True)
class ThroughputReport:
    tput_wifi_coex: float
    tput_lte: float
    tput_wifi_only: float | None
    p_trw: float
    p_sw: float
    e_n: float
    p_c_total: float
    p_cwl: float
    tau_w: float


def p_trw(tau: float, n_w: int) -> float:
    """Probability that at least one of ``n_w`` stations transmits in a slot."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    return 1.0 - (1.0 - tau) ** n_w


def p_sw(tau: float, n_w: int) -> float:
    """Probability that a busy slot holds exactly one transmission."""
    busy = p_trw(tau, n_w)
    if n_w == 1 or busy == 0.0:
        return 1.0
    return n_w * tau * (1.0 - tau) ** (n_w - 1) / busy


def lte_throughput(alpha: float, r_l: float) -> float:
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return LTE_DATA_FRACTION * alpha * r_l


@lru_cache(maxsize=4096)
def _edge(t_off: float, t_p: float, difs: float, sigma: float, W0: int):
    # depends only on timing, not on the number of stations
    geom = geometry(t_off, PacketTiming(0.0, 0.0, 0.0, t_p, 0.0), difs, sigma, W0)
    hit = np.array([hit_prob(k, geom, W0) for k in range(1, geom.n_k + 2)])
    single = np.array([success_seq_single(k, geom, W0) for k in range(1, geom.n_k + 1)])
    return geom, collision_prob_lte(geom, W0, hit), single


def lte_collision(cfg: ScenarioConfig) -> float:
    _, t_off = lte_timing(cfg.lte)
    w = cfg.wifi
    return _edge(t_off, packet_airtime(cfg).t_p, w.difs, w.sigma, w.W0)[1]


def wifi_only_throughput(N: int, cfg: ScenarioConfig) -> float:
    """Saturation throughput (Mbps) of ``N`` stations with the channel to themselves."""
    w = cfg.wifi
    timing = packet_airtime(cfg)
    tau = solve_wifi_only(N, w.W0, w.m).tau
    p_tr = p_trw(tau, N)
    p_s = p_sw(tau, N)
    t_sw = timing.t_p + w.delta + w.difs + w.delta
    t_cw = t_sw
    slot = (1 - p_tr) * w.sigma + p_tr * (1 - p_s) * t_cw + p_tr * p_s * t_sw
    return p_tr * p_s * timing.t_d / slot * cfg.r_w


def wifi_coex_throughput(cfg: ScenarioConfig, with_wifi_only: bool = False) -> ThroughputReport:
    w = cfg.wifi
    timing = packet_airtime(cfg)
    _, t_off = lte_timing(cfg.lte)
    geom, p_cwl, single = _edge(t_off, timing.t_p, w.difs, w.sigma, w.W0)

    if p_cwl >= 1.0:
        # the first frame always overlaps the ON edge
        tau, p_total = saturated_tau_limit(w.W0, w.m), 1.0
    else:
        sol = solve_coex(cfg.n_w, p_cwl, w.W0, w.m)
        tau, p_total = sol.tau, sol.p_coll
    busy = p_trw(tau, cfg.n_w)
    win = p_sw(tau, cfg.n_w)

    if cfg.n_w == 1:
        succ = single
    else:
        succ = np.array([success_seq_multi(k, busy, geom) for k in range(1, geom.n_k + 1)])
    e_n = expected_packets(succ, geom.n_k)
    tput = e_n * timing.t_d * win / cfg.lte.t_cycle * cfg.r_w

    return ThroughputReport(
        tput_wifi_coex=tput,
        tput_lte=lte_throughput(cfg.lte.alpha, cfg.lte.r_l),
        tput_wifi_only=wifi_only_throughput(cfg.n_w, cfg) if with_wifi_only else None,
        p_trw=busy,
        p_sw=win,
        e_n=e_n,
        p_c_total=p_total,
        p_cwl=p_cwl,
        tau_w=tau,
    )
