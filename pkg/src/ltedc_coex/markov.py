"""Saturated DCF Markov chain with the 802.11 retry limit, and its fixed points.

The chain has stages ``0..m+1``: stage ``m`` is reused once (stage ``m+1``
has the same window) and a failure there drops the frame and returns to
stage 0.  Its stationary transmit probability has a closed form in the
collision probability ``p``; the fixed points couple that form with how
``p`` depends on the other stations' ``tau``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

DAMPING = 0.5
TOLERANCE = 1e-10
MAX_ITER = 10_000


class SolverError(RuntimeError):
    def __init__(self, message: str, tau: float, residual: float, iterations: int):
        super().__init__(f"{message} (tau={tau!r}, residual={residual:.3e}, iterations={iterations})")
        self.tau = tau
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class FixedPointSolution:
    tau: float
    p_coll: float
    iterations: int
    residual: float


def tau_from_pc(p_c: float, W0: int, m: int) -> float:
    """Per-slot transmission probability of a saturated station.

    The closed form has removable singularities at ``p = 1/2`` and, after
    cancelling, ``(1 - p) / (1 - p**(m+2))``; both ratios are written here as
    finite geometric sums so the function is smooth on the whole of [0, 1).
    """
    if not 0.0 <= p_c < 1.0:
        raise ValueError(f"collision probability must lie in [0, 1), got {p_c!r}")
    return _tau(float(p_c), W0, m)


def saturated_tau_limit(W0: int, m: int) -> float:
    """Limit of :func:`tau_from_pc` as every attempt collides (``p -> 1``)."""
    return _tau(1.0, W0, m)


def _tau(p: float, W0: int, m: int) -> float:
    # sum_{i<=m} (2p)^i + 2^m p^{m+1}  ==  sum_j p^j W_j / W0 over stages 0..m+1
    window_mass = sum((2.0 * p) ** i for i in range(m + 1)) + 2.0**m * p ** (m + 1)
    stage_mass = sum(p**i for i in range(m + 2))
    return 2.0 / (W0 * window_mass / stage_mass + 1.0)


def _solve(pc_of_tau: Callable[[float], float], W0: int, m: int) -> FixedPointSolution:
    def image(tau: float) -> float:
        return tau_from_pc(pc_of_tau(tau), W0, m)

    tau = 2.0 / (W0 + 1)
    prev_residual = float("inf")
    rising = 0
    for it in range(1, MAX_ITER + 1):
        f_tau = image(tau)
        residual = abs(tau - f_tau)
        if residual <= TOLERANCE:
            return FixedPointSolution(tau, pc_of_tau(tau), it, residual)
        rising = rising + 1 if residual >= prev_residual else 0
        if rising >= 3:
            break
        prev_residual = residual
        tau = (1.0 - DAMPING) * tau + DAMPING * f_tau
    return _bisect(image, pc_of_tau, W0, it)


def _bisect(image, pc_of_tau, W0: int, spent: int) -> FixedPointSolution:
    # tau - image(tau) is increasing: negative at 0, >= 0 at the collision-free value
    lo, hi = 0.0, 2.0 / (W0 + 1)
    tau = hi
    residual = abs(hi - image(hi))
    for it in range(1, 200):
        if residual <= TOLERANCE:
            return FixedPointSolution(tau, pc_of_tau(tau), spent + it, residual)
        tau = 0.5 * (lo + hi)
        gap = tau - image(tau)
        residual = abs(gap)
        if gap < 0:
            lo = tau
        else:
            hi = tau
    raise SolverError("fixed point did not converge", tau, residual, spent + it)


def solve_wifi_only(n: int, W0: int, m: int) -> FixedPointSolution:
    """Classic fixed point for ``n`` stations contending among themselves."""
    if n < 1:
        raise ValueError("need at least one station")
    return _solve(lambda tau: 1.0 - (1.0 - tau) ** (n - 1), W0, m)


def solve_coex(n_w: int, p_cwl: float, W0: int, m: int) -> FixedPointSolution:
    """Fixed point when an independent LTE edge loss ``p_cwl`` adds to contention.

    ``p_coll`` of the result is the total collision probability
    ``1 - (1 - tau)^(n_w - 1) (1 - p_cwl)``.
    """
    if n_w < 1:
        raise ValueError("need at least one station")
    if not 0.0 <= p_cwl < 1.0:
        raise ValueError(f"LTE collision probability must lie in [0, 1), got {p_cwl!r}")
    survive = 1.0 - p_cwl
    return _solve(lambda tau: 1.0 - (1.0 - tau) ** (n_w - 1) * survive, W0, m)
