import io

import numpy as np
import pytest
from scipy import stats

from ltedc_coex.config import ConfigError, LteDcParams, ScenarioConfig
from ltedc_coex.des import SimConfig, SimStats, aggregate, run, run_many
from ltedc_coex.throughput import wifi_only_throughput


def scen(alpha=0.5, n_w=1, r_w=6.0, pb=1500, t_cycle=10000):
    return ScenarioConfig(lte=LteDcParams(alpha=alpha, t_cycle=t_cycle), n_w=n_w, r_w=r_w, packet_bytes=pb)


def test_same_seed_same_result():
    cfg = SimConfig(scen(alpha=0.45, n_w=3, pb=700), sim_time=5.0, seed=42)
    assert run(cfg) == run(cfg)
    assert run(cfg) != run(SimConfig(cfg.scenario, sim_time=5.0, seed=43))


@pytest.mark.parametrize("n_w,alpha", [(1, 0.4), (3, 0.55), (6, 0.7)])
def test_outcomes_and_time_are_conserved(n_w, alpha):
    cfg = SimConfig(scen(alpha=alpha, n_w=n_w, pb=800), sim_time=4.0, warmup=0.5)
    s = run(cfg)
    assert s.successes + s.lte_edge_collisions + s.wifi_wifi_collisions == s.tx_attempts
    assert s.p_coll_total == pytest.approx(1 - s.successes / s.tx_attempts)
    assert s.busy_ns + s.idle_ns == 4_000_000_000
    assert sum(s.per_station) == pytest.approx(s.tput_wifi)


def _intervals(trace_text, event):
    out = []
    for line in trace_text.splitlines():
        t, ev, sta, detail = line.split(" ", 3)
        if ev == event:
            out.append((int(t), int(detail.split("=")[1]), sta))
    return out


def test_trace_successes_never_overlap_each_other_or_on_periods():
    cfg = SimConfig(scen(alpha=0.4, n_w=4, pb=600), sim_time=2.0, warmup=0.0)
    buf = io.StringIO()
    s = run(cfg, trace=buf)
    text = buf.getvalue()
    ok = sorted(_intervals(text, "success"))
    assert len(ok) == s.successes
    for (a0, a1, _), (b0, _, _) in zip(ok, ok[1:]):
        assert a1 <= b0
    t_c, t_on = 10_000_000, 4_000_000
    for start, end, _ in ok:
        cycle = start - start % t_c
        assert start >= cycle + t_on and end <= cycle + t_c
    for start, end, _ in _intervals(text, "coll_lte"):
        cycle = start - start % t_c
        assert start <= cycle + t_c < end


def test_trace_lines_are_well_formed():
    buf = io.StringIO()
    run(SimConfig(scen(n_w=2), sim_time=0.2, warmup=0.0), trace=buf)
    events = {ln.split(" ")[1] for ln in buf.getvalue().splitlines()}
    assert events <= {"lte_busy", "success", "coll_lte", "coll_wifi"}
    assert "lte_busy" in events and "success" in events


def test_backoff_draws_uniform_per_stage():
    log = {}
    run(SimConfig(scen(alpha=0.6, n_w=5, pb=400), sim_time=20.0, warmup=0.0), backoff_log=log)
    W0, m = 16, 6
    for stage, draws in log.items():
        if len(draws) < 2000:
            continue
        cw = W0 << min(stage, m)
        counts = np.bincount(draws, minlength=cw)
        assert len(counts) == cw
        assert stats.chisquare(counts).pvalue > 1e-3


def test_retry_limit_resets_stage():
    log = {}
    # nothing fits in the OFF period, so every attempt fails
    run(SimConfig(scen(alpha=0.85, n_w=1), sim_time=2.0, warmup=0.0), backoff_log=log)
    assert max(log) == 7  # stages 0..m+1 with m = 6
    assert all(max(v) < (16 << min(s, 6)) for s, v in log.items())


def test_no_room_in_off_period():
    s = run(SimConfig(scen(alpha=0.85), sim_time=3.0))
    assert s.tx_attempts > 0
    assert s.tput_wifi == 0.0 and s.p_coll_lte == 1.0


def test_single_station_without_lte_matches_closed_form():
    cfg = scen()
    s = run(SimConfig(cfg, sim_time=200.0, lte_enabled=False))
    assert s.p_coll_total == 0.0 and s.lte_edge_collisions == 0
    assert s.tput_wifi == pytest.approx(wifi_only_throughput(1, cfg), rel=0.01)


def test_invalid_time_window():
    with pytest.raises(ConfigError):
        SimConfig(scen(), sim_time=1.0, warmup=1.0)


def test_aggregate_identical_runs_have_zero_width():
    one = run(SimConfig(scen(alpha=0.55, n_w=2), sim_time=2.0, warmup=0.2))
    agg = aggregate([one, one])
    assert agg.ci95_tput == 0.0 and agg.ci95_p_coll_total == 0.0
    assert agg.tput_wifi == pytest.approx(one.tput_wifi)
    assert agg.tx_attempts == 2 * one.tx_attempts and agg.runs == 2


def test_aggregate_needs_two_runs():
    one = run(SimConfig(scen(), sim_time=1.5))
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([one])


def test_interval_narrows_with_more_runs():
    cfg = SimConfig(scen(alpha=0.5, n_w=3, pb=1000), sim_time=3.0, warmup=0.2, seed=100)
    runs = [run(SimConfig(cfg.scenario, 3.0, cfg.seed + i, 0.2)) for i in range(10)]
    assert aggregate(runs).ci95_tput < aggregate(runs[:3]).ci95_tput


def test_run_many_uses_consecutive_seeds():
    cfg = SimConfig(scen(n_w=2), sim_time=1.5, seed=9)
    agg = run_many(cfg, 2)
    parts = [run(SimConfig(cfg.scenario, 1.5, s)) for s in (9, 10)]
    assert agg == aggregate(parts)
    assert isinstance(run_many(cfg, 1), SimStats) and run_many(cfg, 1).runs == 1
