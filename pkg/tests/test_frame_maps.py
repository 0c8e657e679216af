import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgwave import momentum_rep as mr
from kgwave.errors import DomainError
from kgwave.frame_maps import (
    BoostParams,
    PacketMapParams,
    boost_event,
    boost_momentum,
    boosted_stationary,
    compose_residual,
    map_identities,
    packet_coord_map,
    packet_map_residual,
    pair_specificity,
)
from kgwave.wavepacket import PacketParams, eval_psi

speeds = st.floats(-0.95, 0.95)
coord = st.floats(-10, 10)
points = st.tuples(coord, coord, coord)


def test_boost_examples():
    t, x = boost_event(1.0, np.array([0.0, 0.0, 1.0]), BoostParams(0.6))
    assert t == pytest.approx(0.5) and x[2] == pytest.approx(0.5)
    t, x = boost_event(0.3, np.array([1.0, 2.0, 3.0]), BoostParams(0.0))
    assert t == 0.3 and np.array_equal(x, [1.0, 2.0, 3.0])


@given(speeds, st.floats(-10, 10), points)
@settings(max_examples=200)
def test_boost_inverse_and_interval(v, t, x):
    x = np.array(x)
    t1, x1 = boost_event(t, x, BoostParams(v))
    t2, x2 = boost_event(t1, x1, BoostParams(-v))
    assert abs(t2 - t) < 1e-13 * (1 + abs(t) + np.abs(x).max()) * BoostParams(v).gamma ** 2
    assert np.allclose(x2, x, atol=1e-12 * BoostParams(v).gamma ** 2 * (1 + abs(t)))
    s0 = t * t - x @ x
    s1 = t1 * t1 - x1 @ x1
    assert abs(s1 - s0) < 1e-12 * BoostParams(v).gamma ** 2 * (1 + t * t + x @ x)


def test_boost_momentum_examples():
    k, w = boost_momentum(np.zeros(3), 1.0, BoostParams(0.6))
    assert k[2] == pytest.approx(-0.75) and w == pytest.approx(1.25)


@given(speeds, points)
@settings(max_examples=200)
def test_boost_momentum_preserves_mass_shell(v, k):
    kb, wb = boost_momentum(np.array(k), 1.0, BoostParams(v))
    assert wb == pytest.approx(np.sqrt(1 + kb @ kb), rel=1e-12)


@pytest.mark.parametrize("v", [0.3, 0.6, 0.9])
def test_rest_sphere_boosts_onto_shell(v):
    params = PacketParams(1.0, (0.0, 0.0, v))
    sh = mr.shell_of(params)
    u = np.random.default_rng(2).normal(size=(100, 3))
    rest = u / np.linalg.norm(u, axis=-1)[:, None] * params.envelope_wavenumber
    kb, _ = boost_momentum(rest, 1.0, BoostParams(-v))
    assert np.max(np.abs(sh.residual(kb))) < 1e-13
    poles = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]]) * params.envelope_wavenumber
    kp, _ = boost_momentum(poles, 1.0, BoostParams(-v))
    assert kp[0, 2] == pytest.approx(0.0, abs=1e-14)
    assert kp[1, 2] == pytest.approx(sh.k_max, rel=1e-14)


@pytest.mark.parametrize("v", [0.3, 0.6, 0.9])
def test_boosted_stationary_is_the_packet(v):
    rng = np.random.default_rng(5)
    x = rng.uniform(-6, 6, (200, 3))
    t = rng.uniform(-3, 3, 200)
    diff = boosted_stationary(1.0, v, t, x) - eval_psi(PacketParams(1.0, (0, 0, v)), t, x)
    assert np.max(np.abs(diff)) < 1e-12


def test_packet_map_example():
    t, x = packet_coord_map(0.0, np.array([1.0, 1.0, 1.0]), PacketMapParams(0.6, 0.8))
    assert t == 0.0
    assert x[2] == pytest.approx((0.8 / 0.36) / (1.5625 * 0.6), rel=1e-14)
    assert x[0] == pytest.approx((0.8 / 0.6) / (1.25 * 0.6), rel=1e-14)
    assert x[0] == pytest.approx(1.7778, abs=1e-4) and x[2] == pytest.approx(2.3704, abs=1e-4)


def test_packet_map_rejects_zero_source():
    with pytest.raises(DomainError):
        PacketMapParams(0.0, 0.5)
    assert PacketMapParams(0.5, -0.5).mixed_sign


@given(st.floats(0.05, 0.95), st.floats(-5, 5), points)
@settings(max_examples=100)
def test_identity_map_when_speeds_agree(v, t, x):
    t2, x2 = packet_coord_map(t, np.array(x), PacketMapParams(v, v))
    assert t2 == t and np.allclose(x2, x, rtol=1e-14, atol=1e-13)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(-5, 5), points)
@settings(max_examples=200)
def test_map_identities_and_time_untouched(v, vp, t, x):
    pm = PacketMapParams(v, vp)
    t2, _ = packet_coord_map(t, np.array(x), pm)
    assert t2 == t
    r1, r2 = map_identities(t, np.array(x), pm)
    g = max(BoostParams(v).gamma, BoostParams(vp).gamma) ** 4 / min(v, vp)
    assert abs(r1) < 1e-12 * g * (1 + abs(t) + np.abs(x).max())
    assert abs(r2) < 1e-12 * g * (1 + abs(t) + np.abs(x).max())


@pytest.mark.parametrize("v, vp", [(0.6, 0.8), (0.3, 0.6), (-0.4, -0.7)])
def test_packet_map_residual_vanishes(v, vp):
    rng = np.random.default_rng(7)
    x = rng.uniform(-5, 5, (100, 3))
    t = rng.uniform(-2, 2, 100)
    assert np.max(np.abs(packet_map_residual(PacketMapParams(v, vp), t, x))) < 1e-12


@pytest.mark.parametrize("l", [1, 2, 3])
def test_spin_packets_map_too(l):
    rng = np.random.default_rng(8)
    x = rng.uniform(-5, 5, (100, 3))
    t = rng.uniform(-2, 2, 100)
    assert np.max(np.abs(packet_map_residual(PacketMapParams(0.6, 0.8), t, x, l=l))) < 1e-12


def test_composition_law():
    rng = np.random.default_rng(9)
    x = rng.uniform(-5, 5, (100, 3))
    t = rng.uniform(-2, 2, 100)
    assert np.max(compose_residual(0.3, 0.6, 0.8, t, x)) < 1e-12


def test_map_is_pair_specific():
    rng = np.random.default_rng(10)
    x = rng.uniform(-5, 5, (400, 3))
    t = rng.uniform(-2.5, 2.5, 400)
    best = pair_specificity(PacketMapParams(0.6, 0.8), 0.4, t, x, np.linspace(0.01, 0.99, 99))
    assert best > 0.1
    # sanity: applied to the packet it was built for, the map lands on the family
    same = pair_specificity(PacketMapParams(0.6, 0.8), 0.6, t, x, [0.8])
    assert same < 1e-12
