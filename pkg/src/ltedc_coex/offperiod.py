"""Packet placement inside one LTE OFF period.

A station that lost its last frame to the ON edge starts the OFF period at
backoff stage 1, so the first backoff ``z1`` is uniform on ``0..2*W0-1``;
each later frame follows a success and draws from ``0..W0-1``.  Frame ``k``
starts at ``k*DIFS + (k-1)*T_p + sigma*(z1 + Z(k))`` with ``Z(k)`` the sum of
the later backoffs.  In slot units the frame

* hits the ON edge iff ``L_b(k) < z1 + Z(k) <= U_b(k)``,
* completes (together with all earlier frames) iff ``z1 + Z(k) <= L_b(k)``.

For several stations the per-frame idle gap is instead modelled as
geometric in the probability that any station transmits in a slot, so the
total idle count before ``k`` transmissions is negative binomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import PacketTiming, ScenarioConfig, lte_timing, packet_airtime


class ModelConsistencyError(ArithmeticError):
    """A derived probability sequence violates a property it must have."""


@dataclass(frozen=True)
class OffPeriodGeometry:
    n_k: int
    l_b: np.ndarray  # index k-1, k = 1..n_k+1
    u_b: np.ndarray
    w_s: np.ndarray

    def lb(self, k: int) -> int:
        return int(self.l_b[k - 1])

    def ub(self, k: int) -> int:
        return int(self.u_b[k - 1])


@dataclass(frozen=True)
class OffPeriodDistributions:
    hit: np.ndarray  # p'_h(k), k = 1..n_k+1
    succ: np.ndarray  # P'_s(k), k = 1..n_k
    e_n: float
    p_cwl: float


def geometry(t_off: float, timing: PacketTiming, difs: float, sigma: float, W0: int) -> OffPeriodGeometry:
    if not (t_off > 0 and timing.t_p > 0):
        raise ValueError("OFF duration and packet airtime must be positive")
    t_p = timing.t_p
    n_k = math.floor(t_off / t_p)
    ks = range(1, n_k + 2)
    l_b = [math.floor((t_off - k * (t_p + difs)) / sigma) for k in ks]
    u_b = [math.floor((t_off - (k - 1) * t_p - k * difs) / sigma) for k in ks]
    w_s = [(k - 1) * W0 - 1 for k in ks]
    return OffPeriodGeometry(n_k, np.array(l_b), np.array(u_b), np.array(w_s))


@lru_cache(maxsize=64)
def _uniform_sums(W0: int, upto: int) -> tuple[np.ndarray, ...]:
    unit = np.full(W0, 1.0 / W0)
    pmfs = [np.ones(1)]
    for _ in range(upto):
        pmfs.append(np.convolve(pmfs[-1], unit))
    for p in pmfs:
        p.setflags(write=False)
    return tuple(pmfs)


def uniform_sum_pmf(count: int, W0: int) -> np.ndarray:
    """PMF (index = value) of the sum of ``count`` iid uniforms on ``0..W0-1``.

    Every mass is a multiple of ``W0**-count``, so with a power-of-two
    window the convolution is exact in binary floating point.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    # share one cache entry per power-of-two bucket of counts
    upto = 1 << max(count, 1).bit_length()
    return _uniform_sums(W0, upto)[count]


def _cdf_at(cdf: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``P(Z <= x)`` for integer arrays ``x`` given the cumulative table."""
    idx = np.clip(x, -1, len(cdf) - 1)
    return np.where(idx < 0, 0.0, cdf[np.maximum(idx, 0)])


def _first_backoffs(geom: OffPeriodGeometry, k: int, W0: int) -> np.ndarray:
    return np.arange(0, max(min(2 * W0 - 1, geom.ub(k)), -1) + 1)


def _prob(x) -> float:
    # summed CDF tables can overshoot 1 by a few ulps
    return min(1.0, max(0.0, float(x)))


def _check_k(k: int, top: int) -> None:
    if not 1 <= k <= top:
        raise ValueError(f"k={k} outside 1..{top}")


def hit_prob(k: int, geom: OffPeriodGeometry, W0: int) -> float:
    """Probability that the ``k``-th frame of the OFF period overlaps the ON edge."""
    _check_k(k, geom.n_k + 1)
    lo, hi = geom.lb(k), geom.ub(k)
    if k == 1:
        # the first frame of the OFF period is always sent
        return min(max(2 * W0 - 1 - lo, 0), 2 * W0) / (2 * W0)
    z1 = _first_backoffs(geom, k, W0)
    if z1.size == 0:
        return 0.0
    cdf = np.cumsum(uniform_sum_pmf(k - 1, W0))
    inside = _cdf_at(cdf, hi - z1) - _cdf_at(cdf, lo - z1)
    return _prob(inside.sum() / (2 * W0))


def collision_prob_lte(geom: OffPeriodGeometry, W0: int, hit: np.ndarray | None = None) -> float:
    """Per-attempt LTE loss: only the last of ``k`` frames is lost when frame ``k`` hits."""
    if hit is None:
        hit = np.array([hit_prob(k, geom, W0) for k in range(1, geom.n_k + 2)])
    return float(sum(h / k for k, h in enumerate(hit, start=1)))


def success_seq_single(k: int, geom: OffPeriodGeometry, W0: int) -> float:
    """Probability that frames ``1..k`` all complete before the ON edge (one station)."""
    _check_k(k, geom.n_k)
    z1 = _first_backoffs(geom, k, W0)
    if z1.size == 0:
        return 0.0
    cdf = np.cumsum(uniform_sum_pmf(k - 1, W0))
    return _prob(_cdf_at(cdf, geom.lb(k) - z1).sum() / (2 * W0))


def negbin_tail(k: int, p_trw: float, limit: int) -> float:
    """``P(Z' <= limit)`` for ``Z'`` the number of failures before the ``k``-th success.

    Terms follow ``t(i+1) = t(i) (i+k)/(i+1) (1-p)`` on a rescaled running
    value so neither the binomial coefficients nor ``p**k`` under/overflow.
    The sum stops once the remaining terms cannot change it.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < p_trw <= 1.0:
        raise ValueError(f"p_trw must lie in (0, 1], got {p_trw!r}")
    if limit < 0:
        return 0.0
    if p_trw == 1.0:
        return 1.0
    q = 1.0 - p_trw
    log_scale = k * math.log(p_trw)
    term, total = 1.0, 1.0
    mode = (k - 1) * q / p_trw
    for i in range(limit):
        term *= (i + k) / (i + 1) * q
        total += term
        if i > mode and term < total * 1e-18:
            break
        if total > 1e250:
            log_scale += math.log(total)
            term /= total
            total = 1.0
    return min(1.0, math.exp(log_scale + math.log(total)))


def success_seq_multi(k: int, p_trw: float, geom: OffPeriodGeometry) -> float:
    _check_k(k, geom.n_k)
    return negbin_tail(k, p_trw, geom.lb(k) - k)


def expected_packets(succ, n_k: int) -> float:
    """Mean number of frames completed per OFF period.

    ``succ[k-1]`` is the probability that the first ``k`` frames complete;
    the ``n_k+1``-th can never fit, so its term is zero.
    """
    s = np.asarray(succ, dtype=float)
    if s.shape != (n_k,):
        raise ValueError(f"expected {n_k} success probabilities, got {s.shape}")
    if np.any(np.diff(s) > 1e-12):
        raise ModelConsistencyError(f"success probabilities increase with k: {s.tolist()}")
    nxt = np.append(s[1:], 0.0)
    ks = np.arange(1, n_k + 1)
    return float(np.sum(ks * (s - nxt)))


def off_period(
    t_off: float,
    timing: PacketTiming,
    difs: float,
    sigma: float,
    W0: int,
    p_trw: float | None = None,
) -> OffPeriodDistributions:
    """All OFF-period quantities; ``p_trw=None`` selects the single-station model."""
    geom = geometry(t_off, timing, difs, sigma, W0)
    hit = np.array([hit_prob(k, geom, W0) for k in range(1, geom.n_k + 2)])
    ks = range(1, geom.n_k + 1)
    if p_trw is None:
        succ = np.array([success_seq_single(k, geom, W0) for k in ks])
    else:
        succ = np.array([success_seq_multi(k, p_trw, geom) for k in ks])
    return OffPeriodDistributions(
        hit=hit,
        succ=succ,
        e_n=expected_packets(succ, geom.n_k),
        p_cwl=collision_prob_lte(geom, W0, hit),
    )


def scenario_geometry(cfg: ScenarioConfig) -> OffPeriodGeometry:
    _, t_off = lte_timing(cfg.lte)
    return geometry(t_off, packet_airtime(cfg), cfg.wifi.difs, cfg.wifi.sigma, cfg.wifi.W0)
