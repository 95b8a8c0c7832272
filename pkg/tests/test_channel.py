import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beamgame.channel import (
    AntennaPattern,
    LinkGainTable,
    PathLossParams,
    RadioParams,
    angular_distance,
    antenna_gain,
    build_gain_table,
    path_loss_db,
    rate,
    sinr,
    to_linear_gain,
)
from beamgame.geometry import LinkState, TopologyConfig, generate_topology

PL = PathLossParams(a_los=32.5, n_los=2.0, shadow_sigma=0.0, carrier_freq=60.0)
WIDE = AntennaPattern(2 * math.pi / 3, 10.0, 0.1)


def test_path_loss_reference_value():
    # 32.5 + 20*log10(60) = 32.5 + 35.563025...
    assert path_loss_db(PL, LinkState.LOS, 1.0, 0.0) == pytest.approx(68.063, abs=1e-3)


def test_path_loss_per_decade():
    assert path_loss_db(PL, LinkState.LOS, 10.0) == pytest.approx(88.063, abs=1e-3)


def test_path_loss_unit_frequency_and_distance_is_a():
    p = PathLossParams(a_los=41.25, carrier_freq=1.0)
    assert path_loss_db(p, LinkState.LOS, 1.0) == 41.25


def test_path_loss_nlos_constants_and_shadowing():
    p = PathLossParams(a_nlos=45.5, n_nlos=2.5, carrier_freq=1.0)
    assert path_loss_db(p, LinkState.NLOS, 10.0, shadow_draw=-2.0) == pytest.approx(45.5 + 25.0 - 2.0)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_path_loss_rejects_nonpositive_distance(d):
    with pytest.raises(ValueError):
        path_loss_db(PL, LinkState.LOS, d)


@given(st.floats(0.01, 100), st.floats(1e-6, 10))
def test_path_loss_increasing_in_distance(lo, factor):
    hi = lo * (1 + factor)
    for state in LinkState:
        assert path_loss_db(PL, state, lo) < path_loss_db(PL, state, hi)


def test_to_linear_gain():
    assert to_linear_gain(0.0) == 1.0
    assert to_linear_gain(10.0) == pytest.approx(0.1, rel=1e-15)
    oracle = math.exp(-6.8063 * math.log(10))
    assert to_linear_gain(68.063) == pytest.approx(oracle, rel=1e-10)
    assert to_linear_gain(68.063) == pytest.approx(1.562e-7, rel=1e-3)


@pytest.mark.parametrize("bearing_angle, expected", [
    (math.pi / 3, 10.0),             # mainlobe edge, inclusive
    (math.pi, 0.1),                  # opposite direction
    (2 * math.pi - 0.1, 10.0),       # wraps around zero
    (math.pi / 3 + 1e-6, 0.1),
])
def test_antenna_gain(bearing_angle, expected):
    assert antenna_gain(WIDE, 0.0, bearing_angle) == expected


@given(st.floats(0, 2 * math.pi, exclude_max=True), st.sampled_from([1, 2, 3, 4, 6, 8, 12]))
def test_sector_strategies_cover_circle(b, k):
    pattern = AntennaPattern(2 * math.pi / k, 4.0, 0.5)
    assert any(antenna_gain(pattern, s * pattern.beamwidth, b) == 4.0 for s in range(k))


def test_angular_distance_wraps():
    assert angular_distance(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
    assert angular_distance(0.0, math.pi) == pytest.approx(math.pi)


def test_pattern_validation():
    with pytest.raises(ValueError):
        AntennaPattern(1.0, 10, 0.1)  # does not divide 2*pi
    with pytest.raises(ValueError):
        AntennaPattern(math.pi, 0.1, 10)  # mainlobe weaker than sidelobe
    assert AntennaPattern.from_db(math.pi, 10, -10).main_gain == pytest.approx(10.0)


def test_thermal_noise_default():
    # -174 dBm/Hz + 10 log10(2.16e9) + 6 dB NF = -74.6554 dBm
    noise_dbm = -174 + 10 * math.log10(2.16e9) + 6
    assert RadioParams().noise_power == pytest.approx(10 ** ((noise_dbm - 30) / 10))
    assert RadioParams.thermal().noise_power == pytest.approx(RadioParams().noise_power)


def _table(gain, bearings=None):
    gain = np.asarray(gain, dtype=float)
    n = gain.shape[0]
    b = np.zeros((n, n)) if bearings is None else np.asarray(bearings, dtype=float)
    return LinkGainTable(gain, np.zeros((n, n), dtype=bool), b)


def test_sinr_single_user_is_snr():
    radio = RadioParams(tx_power=2.0, noise_power=0.5)
    t = _table([[1e-3]])
    assert sinr(0, [0.0], t, WIDE, radio) == pytest.approx(10.0 * 1e-3 * 2.0 / 0.5)


def test_sinr_zero_interference_links_match_single_user():
    radio = RadioParams(tx_power=2.0, noise_power=0.5)
    t = _table([[1e-3, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert sinr(0, [0.0, 0.0, 0.0], t, WIDE, radio) == pytest.approx(10.0 * 1e-3 * 2.0 / 0.5)


def test_sinr_hand_value():
    # every gain 1 and P = noise = 1: 1 / (1 + 1)
    unit = AntennaPattern(math.pi, 1.0, 0.5)
    t = _table(np.ones((2, 2)))
    assert sinr(0, [0.0, 0.0], t, unit, RadioParams(1.0, 1.0)) == pytest.approx(0.5)


def test_sinr_uses_interferer_bearing_at_own_receiver():
    radio = RadioParams(1.0, 1.0)
    bearings = np.array([[0.0, 0.0], [math.pi, 0.0]])  # tx1 sees rx0 at pi
    t = _table(np.ones((2, 2)), bearings)
    toward = sinr(0, [0.0, math.pi], t, WIDE, radio)
    away = sinr(0, [0.0, 0.0], t, WIDE, radio)
    assert toward == pytest.approx(10 / (1 + 10))
    assert away == pytest.approx(10 / (1 + 0.1))


def test_sinr_index_errors():
    t = _table(np.ones((2, 2)))
    with pytest.raises(IndexError):
        sinr(2, [0.0, 0.0], t, WIDE, RadioParams())
    with pytest.raises(ValueError):
        sinr(0, [0.0], t, WIDE, RadioParams())


@given(st.integers(0, 2**32 - 1))
def test_sinr_monotone_in_interferer_gain(seed):
    rng = np.random.default_rng(seed)
    n = 3
    gain = rng.uniform(1e-9, 1e-5, (n, n))
    bearings = rng.uniform(0, 2 * math.pi, (n, n))
    t = _table(gain, bearings)
    radio = RadioParams()
    profile = [float(bearings[k, 0]) + math.pi for k in range(n)]  # everyone looks away from rx0
    profile[0] = float(bearings[0, 0])
    base = sinr(0, profile, t, WIDE, radio)
    for k in (1, 2):
        p = list(profile)
        p[k] = float(bearings[k, 0])  # interferer k now hits rx0 with its mainlobe
        assert sinr(0, p, t, WIDE, radio) <= base


@pytest.mark.parametrize("x, expected", [(0, 0), (1, 1), (3, 2)])
def test_rate(x, expected):
    assert rate(x) == expected


def test_rate_negative():
    with pytest.raises(ValueError):
        rate(-0.1)


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_rate_increasing(a, b):
    if a < b:
        assert rate(a) < rate(b)


def test_gain_table_shapes_and_determinism():
    topo = generate_topology(TopologyConfig(n_users=1), np.random.default_rng(0))
    t = build_gain_table(topo, PathLossParams(), np.random.default_rng(1))
    assert t.gain.shape == (1, 1)

    topo = generate_topology(TopologyConfig(n_users=4), np.random.default_rng(0))
    a = build_gain_table(topo, PathLossParams(), np.random.default_rng(9))
    b = build_gain_table(topo, PathLossParams(), np.random.default_rng(9))
    np.testing.assert_array_equal(a.gain, b.gain)
    assert np.all(a.gain > 0)


def test_gain_table_without_shadowing_ignores_seed():
    topo = generate_topology(TopologyConfig(n_users=3), np.random.default_rng(0))
    p = PathLossParams(shadow_sigma=0.0)
    a = build_gain_table(topo, p, np.random.default_rng(1))
    b = build_gain_table(topo, p, np.random.default_rng(2))
    c = build_gain_table(topo, p)
    np.testing.assert_array_equal(a.gain, b.gain)
    np.testing.assert_array_equal(a.gain, c.gain)


def test_gain_table_matches_direct_evaluation():
    from beamgame.geometry import bearing, los_state

    topo = generate_topology(TopologyConfig(n_users=3), np.random.default_rng(4))
    p = PathLossParams(shadow_sigma=0.0)
    t = build_gain_table(topo, p)
    for i, src in enumerate(topo.pairs):
        for j, dst in enumerate(topo.pairs):
            st_ = los_state(src.tx, dst.rx, topo.disks)
            assert t.state(i, j) is st_
            loss = path_loss_db(p, st_, src.tx.distance(dst.rx))
            assert t.gain[i, j] == pytest.approx(10 ** (-loss / 10))
            assert t.bearing[i, j] == bearing(src.tx, dst.rx)


def test_gain_table_csv():
    topo = generate_topology(TopologyConfig(n_users=2), np.random.default_rng(4))
    text = build_gain_table(topo, PathLossParams(shadow_sigma=0.0)).to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "tx,rx,state,gain,bearing"
    assert len(lines) == 5
