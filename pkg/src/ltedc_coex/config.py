"""Scenario parameters, airtime arithmetic and JSON scenario files.

All durations are microseconds, rates are Mbps (bits per microsecond) and
sizes are bytes, so ``bytes * 8 / rate`` is directly an airtime in µs.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

# LTE-U Forum duty-cycle limits (µs)
LTEU_MIN_ON = 4000.0
LTEU_MAX_ON = 20000.0
LTEU_MIN_OFF = 1000.0


class ConfigError(ValueError):
    """Raised for any invalid or inconsistent scenario parameter."""


@dataclass(frozen=True)
class WifiMacParams:
    """802.11a DCF constants (Table of Wi-Fi parameters, 20 MHz OFDM PHY)."""

    W0: int = 16
    m: int = 6
    sigma: float = 9.0
    difs: float = 34.0
    sifs: float = 16.0
    phy_header: float = 20.0
    mac_header_bytes: int = 34
    ack_bytes: int = 14
    ack_extra: float = 20.0
    delta: float = 0.1
    basic_rates: tuple[float, ...] = (6.0, 12.0, 24.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "basic_rates", tuple(float(r) for r in self.basic_rates))
        if self.W0 < 2 or self.W0 & (self.W0 - 1):
            raise ConfigError(f"W0 must be a power of two >= 2, got {self.W0}")
        if self.m < 0:
            raise ConfigError(f"m must be >= 0, got {self.m}")
        for name in ("sigma", "difs", "sifs", "phy_header", "ack_extra"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.mac_header_bytes <= 0 or self.ack_bytes <= 0:
            raise ConfigError("header and ACK sizes must be positive")
        if self.delta < 0:
            raise ConfigError("delta must be >= 0")
        if not self.basic_rates:
            raise ConfigError("basic_rates must be nonempty")
        if list(self.basic_rates) != sorted(self.basic_rates) or self.basic_rates[0] <= 0:
            raise ConfigError("basic_rates must be positive and sorted ascending")


@dataclass(frozen=True)
class LteDcParams:
    """Fixed duty-cycle LTE downlink: ON for ``alpha * t_cycle``, then OFF."""

    alpha: float = 0.5
    t_cycle: float = 10000.0
    r_l: float = 100.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.t_cycle > 0:
            raise ConfigError("t_cycle must be positive")
        if not self.r_l > 0:
            raise ConfigError("r_l must be positive")

    @property
    def t_on(self) -> float:
        return lte_timing(self)[0]

    @property
    def t_off(self) -> float:
        return lte_timing(self)[1]


@dataclass(frozen=True)
class ScenarioConfig:
    wifi: WifiMacParams = field(default_factory=WifiMacParams)
    lte: LteDcParams = field(default_factory=LteDcParams)
    n_w: int = 1
    r_w: float = 6.0
    packet_bytes: int = 1500
    enforce_lteu_limits: bool = False

    def __post_init__(self) -> None:
        if self.n_w < 1:
            raise ConfigError(f"n_w must be >= 1, got {self.n_w}")
        if self.packet_bytes <= 0:
            raise ConfigError("packet_bytes must be positive")
        if not self.r_w > 0:
            raise ConfigError("r_w must be positive")
        # fails early when r_w is below every basic rate
        ack_basic_rate(self.r_w, self.wifi.basic_rates)
        if self.enforce_lteu_limits:
            check_lteu_limits(self.lte)

    def replace(self, **changes: Any) -> "ScenarioConfig":
        """Copy with top-level or LTE fields changed (``alpha``, ``t_cycle``, ``r_l``)."""
        lte_changes = {k: changes.pop(k) for k in ("alpha", "t_cycle", "r_l") if k in changes}
        lte = dataclasses.replace(self.lte, **lte_changes) if lte_changes else self.lte
        return dataclasses.replace(self, lte=lte, **changes)


@dataclass(frozen=True)
class PacketTiming:
    t_d: float
    t_mach: float
    t_ack: float
    t_p: float
    r_0: float


def ack_basic_rate(r_w: float, basic_rates) -> float:
    """Highest basic rate not exceeding the data rate; the ACK is sent at it."""
    eligible = [r for r in basic_rates if r <= r_w]
    if not eligible:
        raise ConfigError(f"data rate {r_w} Mbps is below every basic rate {list(basic_rates)}")
    return max(eligible)


def packet_airtime(cfg: ScenarioConfig) -> PacketTiming:
    """Airtime of one data frame exchange, ``MACH + PhyH + T_d + SIFS + ACK``.

    DIFS and propagation delay are deliberately left out; they are added by
    the callers that need them.
    """
    w = cfg.wifi
    r_0 = ack_basic_rate(cfg.r_w, w.basic_rates)
    t_d = cfg.packet_bytes * 8 / cfg.r_w
    t_mach = w.mac_header_bytes * 8 / cfg.r_w
    t_ack = w.ack_bytes * 8 / r_0 + w.ack_extra
    t_p = t_mach + w.phy_header + t_d + w.sifs + t_ack
    return PacketTiming(t_d=t_d, t_mach=t_mach, t_ack=t_ack, t_p=t_p, r_0=r_0)


def lte_timing(lte: LteDcParams) -> tuple[float, float]:
    t_on = lte.alpha * lte.t_cycle
    return t_on, lte.t_cycle - t_on


def check_lteu_limits(lte: LteDcParams) -> None:
    t_on, t_off = lte_timing(lte)
    problems = []
    if t_on < LTEU_MIN_ON:
        problems.append(f"T_on={t_on:g} us < {LTEU_MIN_ON:g} us")
    if t_on > LTEU_MAX_ON:
        problems.append(f"T_on={t_on:g} us > {LTEU_MAX_ON:g} us")
    if t_off < LTEU_MIN_OFF:
        problems.append(f"T_off={t_off:g} us < {LTEU_MIN_OFF:g} us")
    if problems:
        raise ConfigError("LTE-U limits violated: " + "; ".join(problems))


def lteu_alpha_interval(t_cycle: float) -> tuple[float, float]:
    """Closed duty-cycle interval allowed by the LTE-U ON/OFF limits."""
    lo = LTEU_MIN_ON / t_cycle
    hi = min(LTEU_MAX_ON / t_cycle, 1.0 - LTEU_MIN_OFF / t_cycle)
    if lo > hi:
        raise ConfigError(f"no duty cycle satisfies the LTE-U limits for T_C={t_cycle:g} us")
    return lo, hi


# --- JSON ---------------------------------------------------------------

def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    return data


def scenario_from_dict(data: dict) -> ScenarioConfig:
    data = dict(_build(ScenarioConfig, data, "scenario"))
    try:
        if "wifi" in data:
            data["wifi"] = WifiMacParams(**_build(WifiMacParams, data["wifi"], "scenario.wifi"))
        if "lte" in data:
            data["lte"] = LteDcParams(**_build(LteDcParams, data["lte"], "scenario.lte"))
        return ScenarioConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["wifi"]["basic_rates"] = list(cfg.wifi.basic_rates)
    return d


def dumps_scenario(cfg: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(cfg), indent=2, sort_keys=True)


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(data)


def load_scenario(path) -> ScenarioConfig:
    return loads_scenario(Path(path).read_text())


def config_hash(obj: Any) -> str:
    """Stable short digest of a JSON-serialisable configuration."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
