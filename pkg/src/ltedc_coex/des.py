"""Discrete-event simulator of saturated DCF stations beside a duty-cycled LTE eNB.

All stations hear each other and the eNB.  Time is kept in integer
nanoseconds.  Each LTE cycle is ``[ON | OFF]`` starting at ``t = 0``; the eNB
ignores the channel.  A Wi-Fi station needs DIFS of idle medium and then
counts its backoff down in whole slots, freezing whenever the medium turns
busy.  A frame is lost if another station finishes its countdown in the
same slot, or if any part of its airtime falls into an ON interval.  A
countdown ending exactly at an ON edge still transmits.

Backoffs come from numpy's PCG64 bit generator seeded with ``seed``; each
draw is the low bits of one 32-bit output, which is exactly uniform since
contention windows are powers of two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy import stats

from .config import ConfigError, ScenarioConfig, lte_timing, packet_airtime

NS_PER_US = 1000
NS_PER_S = 1_000_000_000
_BATCH = 1 << 14


@dataclass(frozen=True)
class SimConfig:
    scenario: ScenarioConfig
    sim_time: float = 200.0  # s
    seed: int = 1
    warmup: float = 1.0  # s
    lte_enabled: bool = True

    def __post_init__(self) -> None:
        if not self.sim_time > self.warmup >= 0:
            raise ConfigError("need sim_time > warmup >= 0")


@dataclass(frozen=True)
class SimStats:
    tx_attempts: int
    successes: int
    lte_edge_collisions: int
    wifi_wifi_collisions: int
    p_coll_total: float
    p_coll_lte: float
    tput_wifi: float  # Mbps
    per_station: tuple[float, ...]
    ci95_tput: float = 0.0
    ci95_p_coll_total: float = 0.0
    ci95_p_coll_lte: float = 0.0
    runs: int = 1
    busy_ns: int = 0
    idle_ns: int = 0


class _Backoffs:
    def __init__(self, seed: int):
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._buf: list[int] = []
        self._pos = 0

    def draw(self, cw: int) -> int:
        if self._pos == len(self._buf):
            self._buf = self._rng.integers(0, 1 << 32, size=_BATCH, dtype=np.uint64).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v & (cw - 1)


def run(cfg: SimConfig, trace: TextIO | None = None, backoff_log: dict | None = None) -> SimStats:
    """Simulate one seeded replication.

    ``trace`` receives one ``t_ns event station detail`` line per event;
    ``backoff_log`` (a dict) collects every backoff drawn, keyed by stage.
    """
    sc = cfg.scenario
    w = sc.wifi
    n = sc.n_w
    timing = packet_airtime(sc)
    t_p = round(timing.t_p * NS_PER_US)
    slot = round(w.sigma * NS_PER_US)
    difs = round(w.difs * NS_PER_US)
    end_ns = round(cfg.sim_time * NS_PER_S)
    warm_ns = round(cfg.warmup * NS_PER_S)
    bits = sc.packet_bytes * 8

    if cfg.lte_enabled:
        t_c = round(sc.lte.t_cycle * NS_PER_US)
        t_on = round(lte_timing(sc.lte)[0] * NS_PER_US)
        if not 0 < t_on < t_c:
            raise ConfigError("duty cycle rounds to an empty ON or OFF interval")
    else:
        t_c, t_on = end_ns + 1, 0

    rng = _Backoffs(cfg.seed)
    W0, m = w.W0, w.m
    stages = [0] * n
    counters = [rng.draw(W0) for _ in range(n)]
    if backoff_log is not None:
        backoff_log.setdefault(0, []).extend(counters)
    succ_by_sta = [0] * n
    attempts = successes = lte_losses = wifi_losses = 0
    busy = idle = 0
    emit = trace.write if trace is not None else None

    t = 0
    while t < end_ns:
        cycle_start = t - t % t_c
        if t - cycle_start < t_on:
            on_end = cycle_start + t_on
            busy += min(on_end, end_ns) - t
            if emit:
                emit(f"{t} lte_busy - until={on_end}\n")
            t = on_end
            continue
        on_start = cycle_start + t_c

        cmin = min(counters)
        t_tx = t + difs + cmin * slot
        if t_tx > on_start:
            # frozen by the ON edge; only whole idle slots after DIFS count down
            elapsed = (on_start - t - difs) // slot
            if elapsed > 0:
                counters = [c - elapsed for c in counters]
            idle += min(on_start, end_ns) - t
            t = on_start
            continue
        if t_tx >= end_ns:
            idle += end_ns - t
            break

        idle += t_tx - t
        frame_end = t_tx + t_p
        # any ON time under the frame is counted here, the rest of ON on resume
        busy += min(frame_end, end_ns) - t_tx
        senders = [i for i in range(n) if counters[i] == cmin]
        if cmin:
            counters = [c - cmin for c in counters]
        hit_lte = cfg.lte_enabled and frame_end > on_start
        if hit_lte:
            outcome = "coll_lte"
        elif len(senders) > 1:
            outcome = "coll_wifi"
        else:
            outcome = "success"
        counted = t_tx >= warm_ns
        if counted:
            attempts += len(senders)
            if outcome == "success":
                successes += 1
                succ_by_sta[senders[0]] += 1
            elif outcome == "coll_lte":
                lte_losses += len(senders)
            else:
                wifi_losses += len(senders)
        for i in senders:
            if outcome == "success":
                stages[i] = 0
            else:
                stages[i] += 1
                if stages[i] > m + 1:
                    stages[i] = 0  # retry limit reached: drop the frame
            counters[i] = rng.draw(W0 << min(stages[i], m))
            if backoff_log is not None:
                backoff_log.setdefault(stages[i], []).append(counters[i])
            if emit:
                emit(f"{t_tx} {outcome} {i} end={frame_end}\n")
        t = frame_end

    span_us = (end_ns - warm_ns) / NS_PER_US
    per_station = tuple(s * bits / span_us for s in succ_by_sta)
    return SimStats(
        tx_attempts=attempts,
        successes=successes,
        lte_edge_collisions=lte_losses,
        wifi_wifi_collisions=wifi_losses,
        p_coll_total=1.0 - successes / attempts if attempts else 0.0,
        p_coll_lte=lte_losses / attempts if attempts else 0.0,
        tput_wifi=successes * bits / span_us,
        per_station=per_station,
        busy_ns=busy,
        idle_ns=idle,
    )


def _half_width(values: list[float]) -> float:
    k = len(values)
    sd = float(np.std(values, ddof=1))
    if sd == 0.0:
        return 0.0
    return float(stats.t.ppf(0.975, k - 1) * sd / math.sqrt(k))


def aggregate(runs: list[SimStats]) -> SimStats:
    """Pool replications; CI half-widths come from a Student-t interval over runs."""
    if len(runs) < 2:
        raise ValueError("aggregate needs at least two runs")
    attempts = sum(r.tx_attempts for r in runs)
    successes = sum(r.successes for r in runs)
    lte_losses = sum(r.lte_edge_collisions for r in runs)
    per_station = tuple(float(np.mean(col)) for col in zip(*(r.per_station for r in runs)))
    return SimStats(
        tx_attempts=attempts,
        successes=successes,
        lte_edge_collisions=lte_losses,
        wifi_wifi_collisions=sum(r.wifi_wifi_collisions for r in runs),
        p_coll_total=1.0 - successes / attempts if attempts else 0.0,
        p_coll_lte=lte_losses / attempts if attempts else 0.0,
        tput_wifi=float(np.mean([r.tput_wifi for r in runs])),
        per_station=per_station,
        ci95_tput=_half_width([r.tput_wifi for r in runs]),
        ci95_p_coll_total=_half_width([r.p_coll_total for r in runs]),
        ci95_p_coll_lte=_half_width([r.p_coll_lte for r in runs]),
        runs=sum(r.runs for r in runs),
        busy_ns=sum(r.busy_ns for r in runs),
        idle_ns=sum(r.idle_ns for r in runs),
    )


def run_many(cfg: SimConfig, runs: int) -> SimStats:
    """``runs`` replications with seeds ``seed, seed+1, ...``; one run is returned as is."""
    results = [run(_with_seed(cfg, cfg.seed + i)) for i in range(runs)]
    return results[0] if runs == 1 else aggregate(results)


def _with_seed(cfg: SimConfig, seed: int) -> SimConfig:
    return SimConfig(cfg.scenario, cfg.sim_time, seed, cfg.warmup, cfg.lte_enabled)
