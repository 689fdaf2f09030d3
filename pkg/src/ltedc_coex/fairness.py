"""Duty cycles that make LTE-DC as fair to a Wi-Fi network as a second Wi-Fi network.

The reference is a Wi-Fi-only channel with twice the stations.  Both
objectives are piecewise constant or discontinuous in the duty cycle
(packet counts change by whole frames), so they are minimised by an
exhaustive grid followed by a dense local grid around the best point.
Among equal minima the smallest duty cycle wins.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import ScenarioConfig, lteu_alpha_interval
from .markov import solve_wifi_only
from .throughput import wifi_coex_throughput, wifi_only_throughput

COARSE_STEP = 1e-3
FINE_STEP = 1e-5


@dataclass(frozen=True)
class FairnessResult:
    alpha_star: float
    objective_residual: float
    metric_at_optimum: float
    target: float
    bracketed: bool  # metric - target changes sign somewhere on the grid
    at_boundary: bool


def alpha_interval(cfg: ScenarioConfig) -> tuple[float, float]:
    if cfg.enforce_lteu_limits:
        return lteu_alpha_interval(cfg.lte.t_cycle)
    return COARSE_STEP, 1.0 - COARSE_STEP


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(np.floor((hi - lo) / step + 1e-9))
    pts = np.round(lo + step * np.arange(count + 1), 10)
    return pts[(pts >= lo) & (pts <= hi)]


def _minimise(metric: Callable[[float], float], target: float, lo: float, hi: float) -> FairnessResult:
    coarse = _grid(lo, hi, COARSE_STEP)
    values = np.array([metric(a) for a in coarse])
    gaps = values - target
    best = int(np.argmin(np.abs(gaps)))
    a0 = coarse[best]
    fine = _grid(max(lo, a0 - COARSE_STEP), min(hi, a0 + COARSE_STEP), FINE_STEP)
    fine_values = np.array([metric(a) for a in fine])

    alphas = np.concatenate([coarse, fine])
    metrics = np.concatenate([values, fine_values])
    order = np.lexsort((alphas, np.abs(metrics - target)))
    i = order[0]
    alpha = float(alphas[i])
    return FairnessResult(
        alpha_star=alpha,
        objective_residual=float(abs(metrics[i] - target)),
        metric_at_optimum=float(metrics[i]),
        target=float(target),
        bracketed=bool(gaps.min() <= 0.0 <= gaps.max()),
        at_boundary=alpha <= coarse[0] or alpha >= coarse[-1],
    )


def _reference_size(n_w: int, reference_n: int | None) -> int:
    return 2 * n_w if reference_n is None else reference_n


def access_fair_alpha(cfg: ScenarioConfig, n_w: int, reference_n: int | None = None) -> FairnessResult:
    """Duty cycle giving each coexisting station the per-slot access
    probability it would have among ``2*n_w`` Wi-Fi stations."""
    w = cfg.wifi
    base = cfg.replace(n_w=n_w, enforce_lteu_limits=False)
    target = solve_wifi_only(_reference_size(n_w, reference_n), w.W0, w.m).tau

    def tau_w(alpha: float) -> float:
        return wifi_coex_throughput(base.replace(alpha=alpha)).tau_w

    return _minimise(tau_w, target, *alpha_interval(cfg))


def throughput_fair_alpha(cfg: ScenarioConfig, n_w: int, reference_n: int | None = None) -> FairnessResult:
    """Duty cycle at which the coexisting network gets half the throughput
    of a Wi-Fi-only channel shared by ``2*n_w`` stations."""
    base = cfg.replace(n_w=n_w, enforce_lteu_limits=False)
    target = wifi_only_throughput(_reference_size(n_w, reference_n), cfg) / 2

    def tput_w(alpha: float) -> float:
        return wifi_coex_throughput(base.replace(alpha=alpha)).tput_wifi_coex

    return _minimise(tput_w, target, *alpha_interval(cfg))


__all__ = [
    "FairnessResult",
    "access_fair_alpha",
    "alpha_interval",
    "throughput_fair_alpha",
]
