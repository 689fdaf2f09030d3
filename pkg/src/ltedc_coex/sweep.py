"""Sweep specifications and the per-point rows written by the CLI."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .config import ConfigError, ScenarioConfig, config_hash, scenario_from_dict, scenario_to_dict
from .des import SimConfig, run_many
from .fairness import access_fair_alpha, throughput_fair_alpha
from .throughput import wifi_coex_throughput, wifi_only_throughput

SWEEP_VARS = ("packet_bytes", "alpha", "n_w")
MODES = ("analytical", "simulate", "fairness_access", "fairness_throughput")

KEY_COLUMNS = ["sweep_value", "alpha", "t_cycle_us", "n_w", "r_w_mbps", "packet_bytes"]
ANALYZE_COLUMNS = KEY_COLUMNS + [
    "p_cwl",
    "p_c_total",
    "tau_w",
    "e_n",
    "tput_wifi_mbps",
    "tput_lte_mbps",
    "tput_wifi_only_scaled_mbps",
]
SIMULATE_COLUMNS = KEY_COLUMNS + [
    "p_coll_lte",
    "p_coll_total",
    "tput_wifi_mbps",
    "ci95_p_coll_lte",
    "ci95_p_coll_total",
    "ci95_tput_wifi_mbps",
    "runs",
    "sim_time_s",
    "seed",
]
FAIRNESS_COLUMNS = [
    "sweep_value",
    "t_cycle_us",
    "n_w",
    "r_w_mbps",
    "packet_bytes",
    "mode",
    "alpha_star",
    "residual",
    "metric_at_optimum",
    "target",
    "bracketed",
]


@dataclass(frozen=True)
class SweepSpec:
    """One figure's worth of grid points.

    ``alphas`` optionally adds a family of curves (one per duty cycle) when
    the swept variable is not the duty cycle itself.
    """

    base: ScenarioConfig
    sweep_var: str
    values: tuple
    modes: tuple[str, ...] = MODES
    alphas: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.sweep_var not in SWEEP_VARS:
            raise ConfigError(f"sweep_var must be one of {SWEEP_VARS}, got {self.sweep_var!r}")
        if not self.values:
            raise ConfigError("values must be nonempty")
        bad = sorted(set(self.modes) - set(MODES))
        if bad or not self.modes:
            raise ConfigError(f"modes must be a nonempty subset of {MODES}, got {list(self.modes)}")
        if self.alphas is not None:
            if self.sweep_var == "alpha":
                raise ConfigError("'alphas' cannot be combined with sweep_var 'alpha'")
            if not self.alphas:
                raise ConfigError("alphas must be nonempty when given")
        for _, cfg in self.points():
            pass  # builds every scenario, so domain errors surface here

    def points(self) -> list[tuple[Any, ScenarioConfig]]:
        """Grid in output order: duty-cycle family outermost, swept value inner."""
        families = self.alphas if self.alphas is not None else (None,)
        out = []
        for alpha in families:
            for v in self.values:
                changes = {self.sweep_var: v}
                if alpha is not None:
                    changes["alpha"] = alpha
                out.append((v, self.base.replace(**changes)))
        return out

    def to_dict(self) -> dict:
        d = {
            "base": scenario_to_dict(self.base),
            "sweep_var": self.sweep_var,
            "values": list(self.values),
            "modes": list(self.modes),
        }
        if self.alphas is not None:
            d["alphas"] = list(self.alphas)
        return d

    def digest(self) -> str:
        return config_hash(self.to_dict())


_SPEC_KEYS = {"base", "sweep_var", "values", "modes", "alphas"}


def sweep_from_dict(data: dict) -> SweepSpec:
    if not isinstance(data, dict):
        raise ConfigError("sweep spec must be a JSON object")
    unknown = sorted(set(data) - _SPEC_KEYS)
    if unknown:
        raise ConfigError(f"sweep spec: unknown keys {unknown}")
    if "base" not in data or "sweep_var" not in data or "values" not in data:
        raise ConfigError("sweep spec needs 'base', 'sweep_var' and 'values'")
    if not isinstance(data["values"], list):
        raise ConfigError("'values' must be a list")
    alphas = data.get("alphas")
    return SweepSpec(
        base=scenario_from_dict(data["base"]),
        sweep_var=data["sweep_var"],
        values=tuple(data["values"]),
        modes=tuple(data.get("modes", MODES)),
        alphas=tuple(alphas) if alphas is not None else None,
    )


def load_sweep(path) -> SweepSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return sweep_from_dict(data)


def _keys(value, cfg: ScenarioConfig) -> dict:
    return {
        "sweep_value": value,
        "alpha": cfg.lte.alpha,
        "t_cycle_us": cfg.lte.t_cycle,
        "n_w": cfg.n_w,
        "r_w_mbps": cfg.r_w,
        "packet_bytes": cfg.packet_bytes,
    }


def analyze_point(value, cfg: ScenarioConfig) -> dict:
    rep = wifi_coex_throughput(cfg)
    bound = (1.0 - cfg.lte.alpha) * wifi_only_throughput(cfg.n_w, cfg)
    return {
        **_keys(value, cfg),
        "p_cwl": rep.p_cwl,
        "p_c_total": rep.p_c_total,
        "tau_w": rep.tau_w,
        "e_n": rep.e_n,
        "tput_wifi_mbps": rep.tput_wifi_coex,
        "tput_lte_mbps": rep.tput_lte,
        "tput_wifi_only_scaled_mbps": bound,
    }


def simulate_point(value, cfg: ScenarioConfig, runs: int, sim_time: float, seed: int, warmup: float = 1.0) -> dict:
    st = run_many(SimConfig(cfg, sim_time=sim_time, seed=seed, warmup=warmup), runs)
    return {
        **_keys(value, cfg),
        "p_coll_lte": st.p_coll_lte,
        "p_coll_total": st.p_coll_total,
        "tput_wifi_mbps": st.tput_wifi,
        "ci95_p_coll_lte": st.ci95_p_coll_lte,
        "ci95_p_coll_total": st.ci95_p_coll_total,
        "ci95_tput_wifi_mbps": st.ci95_tput,
        "runs": runs,
        "sim_time_s": sim_time,
        "seed": seed,
    }


def fairness_point(value, cfg: ScenarioConfig, mode: str) -> dict:
    solve = {"access": access_fair_alpha, "throughput": throughput_fair_alpha}[mode]
    res = solve(cfg, cfg.n_w)
    return {
        "sweep_value": value,
        "t_cycle_us": cfg.lte.t_cycle,
        "n_w": cfg.n_w,
        "r_w_mbps": cfg.r_w,
        "packet_bytes": cfg.packet_bytes,
        "mode": mode,
        "alpha_star": res.alpha_star,
        "residual": res.objective_residual,
        "metric_at_optimum": res.metric_at_optimum,
        "target": res.target,
        "bracketed": int(res.bracketed),
    }
