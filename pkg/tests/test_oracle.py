import numpy as np
import pytest

from swiptsec.harness import solve_instance
from swiptsec.model import ChannelSet, SystemParams, dbm_to_watts, generate_channels
from swiptsec.oracle import brute_force_oracle, design_from_point
from swiptsec.metrics import achievable_secrecy_rate

TINY = SystemParams(n_tx=2, n_users=1, n_eves=1, n_eve_rx=1, p_total=dbm_to_watts(10.0),
                    e_bar_s=dbm_to_watts(-30.0), e_bar_e=dbm_to_watts(-30.0))


def test_no_eavesdropper_no_harvesting_is_miso_capacity():
    params = TINY.replace(e_bar_s=0.0, e_bar_e=0.0)
    ch0 = generate_channels(params, 0)
    ch = ChannelSet(ch0.h_users, np.zeros_like(ch0.h_eves))
    res = brute_force_oracle(params, ch)
    h = ch.h_users[0]
    cap = np.log2(1 + params.p_total * np.linalg.norm(h) ** 2 / (params.sigma2_sa[0] + params.sigma2_sp[0]))
    assert res.feasible
    assert res.rate == pytest.approx(cap, abs=1e-6)


def test_unreachable_energy_is_infeasible():
    params = TINY.replace(e_bar_s=1.0)
    res = brute_force_oracle(params, generate_channels(params, 0))
    assert not res.feasible and res.rate == 0.0 and res.design is None


def test_rejects_non_tiny():
    params = SystemParams()
    with pytest.raises(ValueError):
        brute_force_oracle(params, generate_channels(params, 0))


def test_result_matches_metric_evaluation():
    ch = generate_channels(TINY, 1)
    res = brute_force_oracle(TINY, ch)
    again = achievable_secrecy_rate(design_from_point(res.x, TINY, ch), ch, TINY).secrecy_rate
    assert res.rate == pytest.approx(max(0.0, again), abs=1e-12)
    d = res.design
    assert d.total_power == pytest.approx(TINY.p_total)


def test_insensitive_to_resolution():
    ch = generate_channels(TINY, 2)
    a, b = brute_force_oracle(TINY, ch, 8).rate, brute_force_oracle(TINY, ch, 12).rate
    assert abs(a - b) < 0.01


@pytest.mark.parametrize("seed", [0, 3])
def test_pipeline_agrees_with_oracle(seed):
    ch = generate_channels(TINY, seed)
    oracle = brute_force_oracle(TINY, ch).rate
    res = solve_instance(TINY, ch)
    assert abs(res.rate_upper - oracle) <= 0.05
    assert res.rate_sdr_gr <= oracle + 0.05
