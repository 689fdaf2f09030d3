import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltedc_coex.config import LteDcParams, ScenarioConfig, packet_airtime
from ltedc_coex.markov import solve_wifi_only
from ltedc_coex.throughput import (
    LTE_DATA_FRACTION,
    lte_collision,
    lte_throughput,
    p_sw,
    p_trw,
    wifi_coex_throughput,
    wifi_only_throughput,
)


def scen(alpha=0.5, t_cycle=10000, n_w=1, r_w=6.0, pb=1500):
    return ScenarioConfig(lte=LteDcParams(alpha=alpha, t_cycle=t_cycle), n_w=n_w, r_w=r_w, packet_bytes=pb)


def test_lte_throughput_excludes_control_symbol():
    assert lte_throughput(0.5, 100) == pytest.approx(0.5 * 100 * 13 / 14)
    assert LTE_DATA_FRACTION == pytest.approx(13 / 14)
    with pytest.raises(ValueError):
        lte_throughput(1.0, 100)


def test_slot_probabilities():
    assert p_trw(0.1, 1) == pytest.approx(0.1)
    assert p_trw(0.1, 3) == pytest.approx(1 - 0.9**3)
    assert p_sw(0.2, 1) == 1.0
    assert p_sw(0.1, 2) == pytest.approx(2 * 0.1 * 0.9 / (1 - 0.81))
    assert p_sw(0.0, 4) == 1.0


def test_single_station_wifi_only_closed_form():
    cfg = scen()
    t = packet_airtime(cfg)
    tau = 2 / 17
    slot = (1 - tau) * 9 + tau * (t.t_p + 34 + 0.2)
    assert wifi_only_throughput(1, cfg) == pytest.approx(tau * t.t_d / slot * 6.0, rel=1e-12)


def test_wifi_only_throughput_below_link_rate():
    for n in (1, 2, 5, 20):
        for r in (6.0, 54.0):
            assert 0 < wifi_only_throughput(n, scen(r_w=r)) < r


def test_two_full_frames_fit_deterministically():
    # 1500 B at 6 Mbps: two frames always fit in 6 ms, the third always hits
    r = wifi_coex_throughput(scen(alpha=0.4))
    assert r.e_n == pytest.approx(2.0)
    assert r.p_cwl == pytest.approx(1 / 3)
    assert r.tput_wifi_coex == pytest.approx(2 * 2000 / 10000 * 6)


def test_nothing_fits_in_a_short_off_period():
    r = wifi_coex_throughput(scen(alpha=0.85))
    assert r.e_n == 0.0 and r.tput_wifi_coex == 0.0
    assert r.p_cwl == 1.0 and r.p_c_total == 1.0


def test_report_fields_consistent():
    cfg = scen(alpha=0.55, n_w=4, pb=900)
    r = wifi_coex_throughput(cfg, with_wifi_only=True)
    assert r.p_cwl == lte_collision(cfg)
    assert r.p_c_total == pytest.approx(1 - (1 - r.tau_w) ** 3 * (1 - r.p_cwl))
    assert r.p_trw == pytest.approx(p_trw(r.tau_w, 4))
    assert r.tput_wifi_only == pytest.approx(wifi_only_throughput(4, cfg))
    assert r.tput_lte == pytest.approx(lte_throughput(0.55, 100))


def test_edge_loss_makes_stations_less_aggressive():
    for n in (1, 3, 8):
        cfg = scen(alpha=0.6, n_w=n)
        assert wifi_coex_throughput(cfg).tau_w < solve_wifi_only(n, 16, 6).tau


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(0.05, 0.95),
    n_w=st.integers(1, 3),
    pb=st.integers(50, 2300),
    r_w=st.sampled_from([6.0, 12.0, 54.0]),
    t_cycle=st.sampled_from([10000.0, 30000.0]),
)
def test_coexistence_throughput_bounded_by_scaled_wifi_only(alpha, n_w, pb, r_w, t_cycle):
    cfg = scen(alpha, t_cycle, n_w, r_w, pb)
    r = wifi_coex_throughput(cfg)
    assert 0 <= r.p_cwl <= 1 and 0 <= r.p_c_total <= 1
    assert r.p_c_total >= r.p_cwl - 1e-12
    assert 0 <= r.tput_wifi_coex <= (1 - alpha) * wifi_only_throughput(n_w, cfg) + 1e-9


@pytest.mark.xfail(
    strict=True,
    reason="with many stations the OFF-period packing lets the model beat the scaled "
    "Wi-Fi-only rate (3.98711 > 3.98627 Mbps here)",
)
def test_scaled_bound_with_many_stations():
    cfg = scen(alpha=0.5, n_w=10, r_w=12.0, pb=1224)
    assert wifi_coex_throughput(cfg).tput_wifi_coex <= 0.5 * wifi_only_throughput(10, cfg) + 1e-9


def test_lte_throughput_linear():
    assert lte_throughput(0.6, 150) == pytest.approx(2 * lte_throughput(0.3, 150))
    assert lte_throughput(0.6, 150) == pytest.approx(1.5 * lte_throughput(0.6, 100))


def test_mean_throughput_over_packet_sizes_falls_with_duty_cycle():
    means = []
    for alpha in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
        tp = [wifi_coex_throughput(scen(alpha=alpha, pb=pb)).tput_wifi_coex for pb in range(500, 2001, 100)]
        means.append(sum(tp) / len(tp))
    assert all(a > b for a, b in zip(means, means[1:]))
