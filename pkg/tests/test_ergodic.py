import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bicoop.channel import ChannelProfile, SeededRng
from bicoop.ergodic import (closed_rates, ergodic_bi_r1_closed, ergodic_bi_sum_closed,
                            ergodic_noma_bounds, ergodic_noma_closed, ergodic_oma_closed,
                            ergodic_r2_closed, ergodic_uni_closed, monte_carlo_ergodic,
                            monte_carlo_ergodic_many)
from bicoop.numerics import c1
from bicoop.rates import OmaSplit, PowerSplit, SchemeKind

profiles = st.tuples(st.floats(1e-4, 1e-1), st.floats(1e-4, 1e-1), st.floats(1e-3, 1.0),
                     st.floats(0.01, 0.99))


@settings(max_examples=100, deadline=None)
@given(profiles)
def test_sum_identity_and_symmetry(cfg):
    l1, l2, s, g2 = cfg
    p, q = ChannelProfile.two_user(l1, l2, s), ChannelProfile.two_user(l2, l1, s)
    split = PowerSplit.two_user(g2)
    total = ergodic_bi_r1_closed(p, split) + ergodic_r2_closed(p, split)
    assert ergodic_bi_sum_closed(p, split) == pytest.approx(total, rel=1e-12, abs=1e-15)
    assert ergodic_bi_r1_closed(p, split) == pytest.approx(ergodic_bi_r1_closed(q, split),
                                                           rel=1e-12, abs=1e-15)


def test_limits():
    p = ChannelProfile.two_user(1.0, 2.0, 0.1)
    near_one = PowerSplit.two_user(1 - 1e-12)
    assert abs(ergodic_bi_r1_closed(p, near_one)) < 1e-9
    assert ergodic_bi_sum_closed(p, near_one) == pytest.approx(c1(20.0), rel=1e-9)
    assert ergodic_r2_closed(p, PowerSplit.two_user(1e-12)) < 1e-9
    assert ergodic_r2_closed(ChannelProfile.two_user(1, 1, 0.1), PowerSplit.two_user(0.2)) == \
        pytest.approx(1.33148, abs=5e-6)


def test_uni_forms():
    p = ChannelProfile.two_user(0.3, 1.2, 0.1)
    sums = [ergodic_uni_closed(p, PowerSplit.two_user(g)).total for g in (0.1, 0.3, 0.7)]
    assert np.allclose(sums, c1(12.0), rtol=1e-12)
    assert ergodic_uni_closed(p, PowerSplit.two_user(1 - 1e-12)).r1 < 1e-9
    own = ergodic_uni_closed(p, PowerSplit.two_user(0.3), decode_via="own_channel")
    assert own.r1 == pytest.approx(c1(3.0) - c1(0.9))
    with pytest.raises(ValueError):
        ergodic_uni_closed(p, PowerSplit.two_user(0.3), decode_via="x")


def test_oma_symmetric():
    p = ChannelProfile.two_user(0.5, 0.5, 0.1)
    assert ergodic_oma_closed(p, OmaSplit.equal()) == pytest.approx(c1(5.0), rel=1e-12)


def test_noma_bounds_chain():
    rng = np.random.default_rng(0)
    for _ in range(100):
        l1, l2 = 10 ** rng.uniform(-4, -1, 2)
        s, g2 = 10 ** rng.uniform(-3, 0), rng.uniform(0.05, 0.45)
        p, split = ChannelProfile.two_user(l1, l2, s), PowerSplit.two_user(g2)
        lo, hi = ergodic_noma_bounds(p, split)
        exact = ergodic_noma_closed(p, split).r1
        assert lo <= exact <= hi + 1e-15
        assert hi <= ergodic_bi_r1_closed(p, split) + 1e-15


def test_vectorized_closed_rates_match_scalar():
    p = ChannelProfile.two_user(0.3, 1.2, 0.1)
    g = np.array([0.1, 0.3, 0.6])
    r1, r2 = closed_rates(p, SchemeKind.BI_COOP_NEAR_APPROX, g)
    for i, gi in enumerate(g):
        split = PowerSplit.two_user(gi)
        assert r1[i] == pytest.approx(ergodic_bi_r1_closed(p, split), rel=1e-14)
        assert r2[i] == pytest.approx(ergodic_r2_closed(p, split), rel=1e-14)
    o1, o2 = closed_rates(p, SchemeKind.OMA, 0.3)
    assert o1 + o2 == pytest.approx(ergodic_oma_closed(p, OmaSplit.coupled([0.7, 0.3])))
    with pytest.raises(ValueError):
        closed_rates(p, SchemeKind.BI_COOP_MRC, 0.3)


def test_rates_monotone_in_gamma2():
    p = ChannelProfile.from_distances(40, 20, 10)
    g = np.linspace(0.01, 0.99, 100)
    r1, r2 = closed_rates(p, SchemeKind.BI_COOP_NEAR_APPROX, g)
    assert np.all(np.diff(r1) < 0) and np.all(np.diff(r2) > 0)
    assert np.all(np.diff(r1 + r2) < 0)


def test_monte_carlo_matches_closed_forms():
    p = ChannelProfile.two_user(1.0, 1.0, 0.1)
    split = PowerSplit.two_user(0.25)
    oma = OmaSplit.equal()
    res = monte_carlo_ergodic_many(p, split, oma, [SchemeKind.BI_COOP_NEAR_APPROX,
                                                   SchemeKind.CONV_NOMA, SchemeKind.OMA],
                                   10**6, SeededRng(3))
    bi = res[SchemeKind.BI_COOP_NEAR_APPROX]
    assert abs(bi.r1_mean - ergodic_bi_r1_closed(p, split)) < 3 * bi.r1_std_error
    assert abs(bi.sum_mean - ergodic_bi_sum_closed(p, split)) < 3 * bi.std_error
    noma = res[SchemeKind.CONV_NOMA]
    assert abs(noma.r1_mean - ergodic_noma_closed(p, split).r1) < 3 * noma.r1_std_error
    o = res[SchemeKind.OMA]
    assert abs(o.sum_mean - ergodic_oma_closed(p, oma)) < 3 * o.std_error
    assert bi.sum_mean == pytest.approx(bi.r1_mean + bi.r2_mean, abs=1e-12)


def test_single_sample_and_sqrt_law():
    p = ChannelProfile.two_user(1.0, 1.0, 0.1)
    split = PowerSplit.two_user(0.25)
    one = monte_carlo_ergodic(p, split, None, SchemeKind.UNI_COOP, 1, SeededRng(0))
    assert one.std_error == 0 and one.sample_count == 1
    ratios = []
    for seed in range(5):
        a = monte_carlo_ergodic(p, split, None, SchemeKind.UNI_COOP, 20000, SeededRng(seed, 1))
        b = monte_carlo_ergodic(p, split, None, SchemeKind.UNI_COOP, 40000, SeededRng(seed, 2))
        ratios.append(b.std_error / a.std_error)
    assert 0.6 <= np.mean(ratios) <= 0.85


def test_thread_count_does_not_change_result():
    p = ChannelProfile.two_user(0.3, 1.0, 0.1)
    split = PowerSplit.two_user(0.3)
    args = (p, split, OmaSplit.equal(), SchemeKind.BI_COOP_SELECTION, 50_000, SeededRng(9))
    a = monte_carlo_ergodic(*args, threads=1, chunk_size=4096)
    b = monte_carlo_ergodic(*args, threads=4, chunk_size=4096)
    assert a == b
