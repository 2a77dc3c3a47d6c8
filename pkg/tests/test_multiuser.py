import numpy as np
import pytest

from bicoop.channel import ChannelProfile, FadingRealization, SeededRng, sample_fading
from bicoop.multiuser import (MultiUserScenario, annulus_rates, coordinate_power_search,
                              geometric_split, multiuser_rates, objective_value,
                              split_from_ratios, z_bi_multi, z_noma_multi, z_uni_multi)
from bicoop.numerics import DomainError
from bicoop.rates import OmaSplit, PowerSplit, SchemeKind, scheme_rates


@pytest.fixture(scope="module")
def two_user():
    p = ChannelProfile.two_user(0.3, 1.1, 0.1, coop_variance=0.7)
    return p, sample_fading(p, SeededRng(2), 200_000)


@pytest.fixture(scope="module")
def four_user():
    p = ChannelProfile(np.array([0.2, 0.4, 0.9, 1.5]), 0.6, 0.1)
    return p, sample_fading(p, SeededRng(3), 100_000)


def test_scenario_validation():
    p = ChannelProfile(np.array([0.2, 0.4, 0.9]), 0.6, 0.1)
    with pytest.raises(DomainError):
        MultiUserScenario(p, PowerSplit(np.array([0.2, 0.3, 0.5])))
    with pytest.raises(DomainError):
        MultiUserScenario(p, geometric_split(3), csit="x")
    MultiUserScenario(p, PowerSplit(np.array([0.2, 0.3, 0.5])), csit="none")
    q = ChannelProfile(np.array([0.9, 0.4, 0.2]), 0.6, 0.1)
    with pytest.raises(DomainError):
        MultiUserScenario(q, geometric_split(3))


@pytest.mark.parametrize("scheme", list(SchemeKind))
def test_two_user_reduces_to_pairwise(two_user, scheme):
    p, f = two_user
    split = PowerSplit.two_user(0.3)
    sc = MultiUserScenario(p, split)
    oma = OmaSplit.equal()
    got = multiuser_rates(f, sc, scheme, oma)
    r1, r2 = scheme_rates(f, p, split, oma, scheme)
    assert np.array_equal(got[:, 0], r1) and np.array_equal(got[:, 1], r2)


def test_two_user_uni_near_approx(two_user):
    p, f = two_user
    split = PowerSplit.two_user(0.3)
    got = multiuser_rates(f, MultiUserScenario(p, split), SchemeKind.UNI_COOP,
                          uni_near_approx=True)
    r1, _ = scheme_rates(f, p, split, None, SchemeKind.UNI_COOP, uni_near_approx=True)
    assert np.array_equal(got[:, 0], r1)


def test_last_signal_is_singleton(four_user):
    p, f = four_user
    sc = MultiUserScenario(p, geometric_split(4))
    v_last = z_noma_multi(f, sc, 3)
    assert np.array_equal(z_bi_multi(f, sc, 3), v_last)
    assert np.array_equal(z_uni_multi(f, sc, 3), v_last)
    with pytest.raises(DomainError):
        z_noma_multi(f, sc, 4)


def test_strong_links_make_exact_equal_near(four_user):
    p, f = four_user
    sc = MultiUserScenario(p, geometric_split(4))
    strong = FadingRealization(f.direct, f.coop * 1e12 + np.where(np.eye(4), 0, 1e6))
    for j in range(4):
        assert np.array_equal(z_bi_multi(strong, sc, j), z_bi_multi(strong, sc, j, True))


def test_ordering(four_user):
    p, f = four_user
    sc = MultiUserScenario(p, geometric_split(4))
    for j in range(4):
        noma = z_noma_multi(f, sc, j)
        uni = z_uni_multi(f, sc, j)
        bi = z_bi_multi(f, sc, j)
        mrc = z_bi_multi(f, sc, j, combining="mrc")
        near = z_bi_multi(f, sc, j, near_approx=True)
        assert np.all(uni >= noma) and np.all(bi >= noma)
        assert np.all(mrc >= bi) and np.all(near >= bi)
    mean = {s: multiuser_rates(f, sc, s).mean(axis=0).sum()
            for s in (SchemeKind.BI_COOP_SELECTION, SchemeKind.UNI_COOP, SchemeKind.CONV_NOMA)}
    assert mean[SchemeKind.BI_COOP_SELECTION] >= mean[SchemeKind.UNI_COOP]
    assert mean[SchemeKind.UNI_COOP] >= mean[SchemeKind.CONV_NOMA]


def test_uni_coop_index_variants(four_user):
    p, f = four_user
    sc = MultiUserScenario(p, geometric_split(4))
    a = z_uni_multi(f, sc, 0, coop_index="receiver")
    b = z_uni_multi(f, sc, 0, coop_index="signal")
    assert a.shape == b.shape and not np.array_equal(a, b)
    with pytest.raises(DomainError):
        z_uni_multi(f, sc, 0, coop_index="x")


def test_scale_homogeneity(four_user):
    p, f = four_user
    q = ChannelProfile(p.variances * 10, p.coop_variance * 10, p.noise_variance * 10)
    g = FadingRealization(f.direct * 10, f.coop * 10)
    split = geometric_split(4)
    for s in SchemeKind:
        a = multiuser_rates(f, MultiUserScenario(p, split), s)
        b = multiuser_rates(g, MultiUserScenario(q, split), s)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_duplicate_peak_tie_break():
    p = ChannelProfile(np.ones(3), 1.0, 1.0)
    sc = MultiUserScenario(p, PowerSplit(np.array([0.6, 0.3, 0.1])), csit="none")
    coop = np.array([[[0, 5.0, 9.0], [7.0, 0, 0.1], [2.0, 3.0, 0]]])
    f = FadingRealization(np.array([[2.0, 2.0, 1.0]]), coop)
    # users 0 and 1 tie; user 0 relays, so user 2 gets the strong 0 -> 2 link
    direct = 1.2 / 1.8
    assert z_bi_multi(f, sc, 0)[0] == pytest.approx(direct)
    assert z_noma_multi(f, sc, 0)[0] == pytest.approx(0.6 / 1.4)


def test_split_helpers():
    s = split_from_ratios([0.5, 0.5])
    assert np.allclose(s.gamma, np.array([4, 2, 1]) / 7)
    assert np.array_equal(geometric_split(3).gamma, s.gamma)


def test_coordinate_search_finds_grid_optimum():
    target = np.array([0.3, 0.7])

    def obj(split):
        r = split.gamma[1:] / split.gamma[:-1]
        return -float(np.sum((r - target) ** 2))
    res = coordinate_power_search(obj, 3, np.linspace(0.1, 0.9, 9))
    assert np.allclose(res.split.gamma[1:] / res.split.gamma[:-1], target)
    with pytest.raises(DomainError):
        coordinate_power_search(obj, 3, [0.0, 0.5])


def test_objective_value():
    assert objective_value(np.array([1.0, 2.0]), "fairness") == 1.0
    assert objective_value(np.array([1.0, 2.0]), "sum-rate") == 3.0
    with pytest.raises(DomainError):
        objective_value(np.array([1.0]), "max")


def test_annulus_small_run():
    schemes = [SchemeKind.BI_COOP_SELECTION, SchemeKind.UNI_COOP, SchemeKind.CONV_NOMA,
               SchemeKind.OMA]
    args = dict(cell_radius=50, ring_width=25, max_angle=0.35, users=3, noise_variance=0.1,
                schemes=schemes, placements=4, fading_samples=300, ratio_grid=[0.3, 0.6],
                max_sweeps=1)
    a = annulus_rates(rng=SeededRng(1), threads=1, **args)
    b = annulus_rates(rng=SeededRng(1), threads=3, **args)
    assert a == b
    m = a.mean
    assert m[schemes[0]] >= m[schemes[1]] >= m[schemes[2]]
    c = annulus_rates(rng=SeededRng(1), csit="none", **args)
    assert c.placements == 4 and all(np.isfinite(list(c.mean.values())))
    with pytest.raises(DomainError):
        annulus_rates(rng=SeededRng(1), **{**args, "placements": 0})
