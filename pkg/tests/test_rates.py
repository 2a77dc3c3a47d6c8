import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bicoop.channel import ChannelProfile, FadingRealization, SeededRng, sample_fading
from bicoop.numerics import DomainError
from bicoop.rates import (OmaSplit, PowerSplit, SchemeKind, TwoUserSinrs, direct_sinrs,
                          scheme_rates, z1_bi_mrc, z1_bi_near_approx, z1_bi_selection,
                          z1_conv_noma, z1_uni)


def sinrs(v11=0.0, v21=0.0, w1=0.0, w2=0.0, v22=0.0):
    return TwoUserSinrs(np.float64(v11), np.float64(v22), np.float64(v21), np.float64(w1),
                        np.float64(w2))


def realization(h1, h2, g12=1.0, g21=1.0):
    return FadingRealization(np.array([h1, h2], dtype=float),
                             np.array([[0.0, g12], [g21, 0.0]]))


def test_split_validation():
    with pytest.raises(DomainError):
        PowerSplit(np.array([0.5, 0.6]))
    with pytest.raises(DomainError):
        PowerSplit(np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        OmaSplit(np.array([0.5, 0.5]), np.array([0.3, 0.3, 0.4]))
    assert PowerSplit.two_user(0.25).gamma1 == 0.75


def test_direct_sinrs_limits():
    p = ChannelProfile.two_user(1, 1, 0.5)
    s = direct_sinrs(realization(2.0, 2.0), p, PowerSplit.two_user(1e-15))
    assert s.v11 == pytest.approx(2.0 / 0.5)
    assert s.v11 == s.v21
    s = direct_sinrs(realization(1.0, 0.0), p, PowerSplit.two_user(0.3))
    assert s.v22 == 0 and s.v21 == 0
    with pytest.raises(DomainError):
        direct_sinrs(FadingRealization(np.ones(3), np.zeros((3, 3))), p, PowerSplit.two_user(0.3))


def test_selection_examples():
    assert z1_bi_selection(sinrs(0.8, 0.5, w2=0.9), 2, 1) == pytest.approx(0.8)
    assert z1_bi_selection(sinrs(0.3, 0.6, w1=1e300), 1, 2) == pytest.approx(0.6)
    assert z1_bi_selection(sinrs(0.3, 0.6), 1, 2) == pytest.approx(0.3)


def test_selection_tie_takes_second_branch():
    s = sinrs(0.5, 0.5, w1=9.0, w2=0.1)
    assert z1_bi_selection(s, 1.0, 1.0) == min(0.5, max(0.5, 0.1))


def test_mrc_examples():
    assert z1_bi_mrc(sinrs(0.3, 0.6, w1=0.4), 1, 2) == pytest.approx(0.6)
    assert z1_bi_mrc(sinrs(0.3, 0.6), 1, 2) == z1_conv_noma(sinrs(0.3, 0.6))


def test_other_rules():
    assert z1_bi_near_approx(sinrs(0.2, 0.9)) == 0.9
    assert z1_uni(sinrs(0.5, 0.4, w1=0.2)) == pytest.approx(0.4)
    assert z1_uni(sinrs(0.5, 0.4, w1=0.2), near_approx=True) == 0.4
    assert z1_conv_noma(sinrs(0.3, 0.7)) == 0.3


def test_oma_arithmetic():
    p = ChannelProfile.two_user(1, 1, 1.0)
    r1, r2 = scheme_rates(realization(6.0, 6.0), p, PowerSplit.two_user(0.5), OmaSplit.equal(),
                          SchemeKind.OMA)
    assert r1 == pytest.approx(0.5 * np.log2(7.0)) and r2 == r1
    r1, _ = scheme_rates(realization(3.0, 3.0), p, PowerSplit.two_user(0.5), OmaSplit.equal(),
                         SchemeKind.OMA)
    assert r1 == pytest.approx(1.0)


@pytest.fixture(scope="module")
def batch():
    p = ChannelProfile.two_user(0.4, 1.3, 0.2, coop_variance=0.8)
    return p, sample_fading(p, SeededRng(11), 10**6)


def test_per_realization_ordering(batch):
    p, f = batch
    for g2 in (0.1, 0.3, 0.45):
        s = direct_sinrs(f, p, PowerSplit.two_user(g2))
        h1, h2 = f.direct[:, 0], f.direct[:, 1]
        bi = z1_bi_selection(s, h1, h2)
        uni = z1_uni(s)
        noma = z1_conv_noma(s)
        assert np.count_nonzero(bi < uni) == 0
        assert np.count_nonzero(uni < noma) == 0
        assert np.count_nonzero(z1_bi_mrc(s, h1, h2) < bi) == 0


def test_r2_common_to_noma_schemes(batch):
    p, f = batch
    split = PowerSplit.two_user(0.3)
    r2s = [scheme_rates(f, p, split, None, k)[1] for k in SchemeKind if k is not SchemeKind.OMA]
    for r in r2s[1:]:
        assert np.array_equal(r, r2s[0])


def test_near_approx_consistency(batch):
    p, f = batch
    s = direct_sinrs(f, p, PowerSplit.two_user(0.3))
    big = np.minimum(s.w1, s.w2) > 10 * np.maximum(s.v11, s.v21)
    sel = z1_bi_selection(s, f.direct[:, 0], f.direct[:, 1])
    assert big.sum() > 1000
    assert np.array_equal(sel[big], z1_bi_near_approx(s)[big])


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(0.01, 0.99),
       st.floats(1e-3, 1e3))
def test_scale_covariance(h1, h2, s, g2, c):
    p = ChannelProfile.two_user(1, 1, s)
    q = ChannelProfile.two_user(1, 1, s * c)
    split = PowerSplit.two_user(g2)
    a = direct_sinrs(realization(h1, h2, 0.7, 0.9), p, split)
    b = direct_sinrs(FadingRealization(np.array([h1, h2]) * c,
                                       np.array([[0, 0.7], [0.9, 0]]) * c), q, split)
    for name in ("v11", "v22", "v21", "w1", "w2"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 10), st.floats(1e-3, 10), st.floats(0.01, 0.99), st.floats(1.0, 1e3),
       st.floats(1.0, 1e3))
def test_near_equals_selection_with_strong_links(h1, h2, g2, k1, k2):
    p = ChannelProfile.two_user(1, 1, 0.1)
    split = PowerSplit.two_user(g2)
    s0 = direct_sinrs(realization(h1, h2), p, split)
    m = max(s0.v11, s0.v21) * 0.1
    s = direct_sinrs(realization(h1, h2, g12=m * k2 * 1.0001, g21=m * k1 * 1.0001), p, split)
    assert z1_bi_selection(s, h1, h2) == z1_bi_near_approx(s)
