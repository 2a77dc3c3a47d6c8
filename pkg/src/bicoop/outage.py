"""Outage probabilities of the two-user schemes.

Closed forms use |h_i|^2 ~ Exp(mean L_i). Writing xi = s*eps1/(g1 - eps1*g2)
and eta = s*eps2/g2, the NOMA events reduce to thresholds on channel power:
V_{i,1} < eps1 iff |h_i|^2 < xi, V22 < eps2 iff |h2|^2 < eta, and
W < eps1 iff |g|^2 < s*eps1. When g1/g2 <= eps1 no channel can reach eps1,
so every NOMA-family probability is 1 (the boundary counts as infeasible).

The empirical estimator counts the events directly with conditional
cooperation: user 2 relays s1 only if it decoded s1 (V21 >= eps1), and
user 1 relays s1 only if it decoded it (V11 >= eps1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import ChannelProfile, SeededRng, sample_fading
from .montecarlo import DEFAULT_CHUNK, chunked_sums
from .numerics import DomainError
from .rates import OmaSplit, PowerSplit, SchemeKind, direct_sinrs

OUTAGE_SCHEMES = (SchemeKind.BI_COOP_SELECTION, SchemeKind.UNI_COOP, SchemeKind.CONV_NOMA,
                  SchemeKind.OMA)


class Regime(enum.Enum):
    FEASIBLE_POWER = "feasible"
    INFEASIBLE_POWER = "infeasible"
    THRESHOLD_CASE_A = "case-a"  # SIC user limited by its own signal (eta > xi)
    THRESHOLD_CASE_B = "case-b"  # SIC user limited by decoding s1 (eta <= xi)


@dataclass(frozen=True)
class RateTargets:
    rt1: float
    rt2: float
    alpha1: float = 0.5
    alpha2: float = 0.5

    def __post_init__(self):
        if self.rt1 < 0 or self.rt2 < 0:
            raise DomainError("target rates must be >= 0")
        if not (self.alpha1 > 0 and self.alpha2 > 0):
            raise DomainError("OMA fractions must be > 0")

    @classmethod
    def from_rates(cls, rt1, rt2, alpha=(0.5, 0.5)) -> "RateTargets":
        return cls(float(rt1), float(rt2), float(alpha[0]), float(alpha[1]))

    @property
    def eps1(self) -> float:
        return float(np.expm1(self.rt1 * np.log(2.0)))

    @property
    def eps2(self) -> float:
        return float(np.expm1(self.rt2 * np.log(2.0)))

    @property
    def eps_o1(self) -> float:
        return float(np.expm1(self.rt1 / self.alpha1 * np.log(2.0)))

    @property
    def eps_o2(self) -> float:
        return float(np.expm1(self.rt2 / self.alpha2 * np.log(2.0)))

    def with_alpha(self, oma: OmaSplit) -> "RateTargets":
        return RateTargets(self.rt1, self.rt2, float(oma.alpha[0]), float(oma.alpha[1]))


@dataclass(frozen=True)
class OutageReport:
    probability: float
    regime: Regime
    xi: float
    high_snr_approx: float


def _p(a):
    """P{Exp(1) < a} = 1 - e^{-a}, accurate for tiny a."""
    return float(-np.expm1(-a))


def _xi(profile: ChannelProfile, split: PowerSplit, targets: RateTargets) -> float:
    g1, g2 = split.gamma1, split.gamma2
    e1 = targets.eps1
    denom = g1 - e1 * g2
    if not denom > 0:
        return float("inf")
    return profile.noise_variance * e1 / denom


def _infeasible() -> OutageReport:
    return OutageReport(1.0, Regime.INFEASIBLE_POWER, float("inf"), 1.0)


def outage_bi_user1(profile: ChannelProfile, split: PowerSplit,
                    targets: RateTargets) -> OutageReport:
    xi = _xi(profile, split, targets)
    if np.isinf(xi):
        return _infeasible()
    l1, l2, lc, s = profile.l1, profile.l2, profile.lc, profile.noise_variance
    w = s * targets.eps1 / lc
    p = _p(xi / l1) * _p(w + xi / l2)
    approx = xi / l1 * (w + xi / l2)
    return OutageReport(p, Regime.FEASIBLE_POWER, xi, min(approx, 1.0))


def outage_uni_user1(profile: ChannelProfile, split: PowerSplit,
                     targets: RateTargets) -> OutageReport:
    """User 1 receives the same relayed copy as in the bi-directional scheme."""
    return outage_bi_user1(profile, split, targets)


def outage_noma_user1(profile: ChannelProfile, split: PowerSplit,
                      targets: RateTargets) -> OutageReport:
    xi = _xi(profile, split, targets)
    if np.isinf(xi):
        return _infeasible()
    return OutageReport(_p(xi / profile.l1), Regime.FEASIBLE_POWER, xi,
                        min(xi / profile.l1, 1.0))


def _oma(profile, oma: OmaSplit, targets: RateTargets, i: int) -> OutageReport:
    t = targets.with_alpha(oma)
    eps = t.eps_o1 if i == 0 else t.eps_o2
    # xi here is the |h_i|^2 threshold of the orthogonal link
    thr = oma.alpha[i] * profile.noise_variance * eps / oma.gamma[i]
    a = thr / profile.variances[i]
    return OutageReport(_p(a), Regime.FEASIBLE_POWER, float(thr), min(float(a), 1.0))


def outage_oma_user1(profile: ChannelProfile, oma: OmaSplit,
                     targets: RateTargets) -> OutageReport:
    return _oma(profile, oma, targets, 0)


def outage_oma_user2(profile: ChannelProfile, oma: OmaSplit,
                     targets: RateTargets) -> OutageReport:
    return _oma(profile, oma, targets, 1)


def _eta(profile, split, targets):
    return profile.noise_variance * targets.eps2 / split.gamma2


def outage_uni_user2(profile: ChannelProfile, split: PowerSplit,
                     targets: RateTargets) -> OutageReport:
    """Also the conventional-NOMA user-2 outage: no relay reaches the SIC user."""
    xi = _xi(profile, split, targets)
    if np.isinf(xi):
        return _infeasible()
    eta = _eta(profile, split, targets)
    l2 = profile.l2
    if eta > xi:
        return OutageReport(_p(eta / l2), Regime.THRESHOLD_CASE_A, xi, min(eta / l2, 1.0))
    return OutageReport(_p(xi / l2), Regime.THRESHOLD_CASE_B, xi, min(xi / l2, 1.0))


outage_noma_user2 = outage_uni_user2


def outage_bi_user2(profile: ChannelProfile, split: PowerSplit,
                    targets: RateTargets) -> OutageReport:
    xi = _xi(profile, split, targets)
    if np.isinf(xi):
        return _infeasible()
    eta = _eta(profile, split, targets)
    l1, l2, lc, s = profile.l1, profile.l2, profile.lc, profile.noise_variance
    if eta > xi:
        return OutageReport(_p(eta / l2), Regime.THRESHOLD_CASE_A, xi, min(eta / l2, 1.0))
    w = s * targets.eps1 / lc
    # e^{-eta/L2} - e^{-xi/L2} written without cancellation
    gap = np.exp(-eta / l2) * _p((xi - eta) / l2)
    p = _p(xi / l2) - np.exp(-w - xi / l1) * gap
    a, b = xi / l2, eta / l2
    approx = a - (a - b) * (1.0 - w - xi / l1)
    return OutageReport(float(min(max(p, 0.0), 1.0)), Regime.THRESHOLD_CASE_B, xi,
                        float(min(max(approx, 0.0), 1.0)))


def outage_closed(profile: ChannelProfile, split: PowerSplit, oma: OmaSplit | None,
                  targets: RateTargets, scheme: SchemeKind, user_index: int) -> OutageReport:
    """Dispatch to the closed form of (scheme, user); ``user_index`` is 1 or 2."""
    table: dict[tuple[SchemeKind, int], Callable] = {
        (SchemeKind.BI_COOP_SELECTION, 1): outage_bi_user1,
        (SchemeKind.BI_COOP_SELECTION, 2): outage_bi_user2,
        (SchemeKind.UNI_COOP, 1): outage_uni_user1,
        (SchemeKind.UNI_COOP, 2): outage_uni_user2,
        (SchemeKind.CONV_NOMA, 1): outage_noma_user1,
        (SchemeKind.CONV_NOMA, 2): outage_noma_user2,
    }
    if scheme is SchemeKind.OMA:
        if oma is None:
            raise DomainError("OMA outage needs an OmaSplit")
        fn = {1: outage_oma_user1, 2: outage_oma_user2}.get(user_index)
        if fn is None:
            raise DomainError(f"user_index must be 1 or 2, got {user_index}")
        return fn(profile, oma, targets)
    try:
        fn = table[(scheme, user_index)]
    except KeyError:
        raise DomainError(f"no outage closed form for {scheme} user {user_index}") from None
    return fn(profile, split, targets)


def outage_events(realization, profile: ChannelProfile, split: PowerSplit,
                  oma: OmaSplit | None, targets: RateTargets, scheme: SchemeKind):
    """Boolean outage indicators (user1, user2) per realization."""
    if scheme is SchemeKind.OMA:
        if oma is None:
            raise DomainError("OMA outage needs an OmaSplit")
        t = targets.with_alpha(oma)
        h = np.asarray(realization.direct, dtype=float)
        snr = oma.gamma * h / (oma.alpha * profile.noise_variance)
        return snr[..., 0] < t.eps_o1, snr[..., 1] < t.eps_o2
    if scheme not in OUTAGE_SCHEMES:
        raise DomainError(f"no outage event model for {scheme}")
    sn = direct_sinrs(realization, profile, split)
    e1, e2 = targets.eps1, targets.eps2
    miss11 = sn.v11 < e1
    miss21 = sn.v21 < e1
    miss22 = sn.v22 < e2
    if scheme is SchemeKind.CONV_NOMA:
        return miss11, miss22 | miss21
    # user 2 relays s1 to user 1 only after decoding it
    out1 = miss11 & (miss21 | (sn.w1 < e1))
    if scheme is SchemeKind.UNI_COOP:
        return out1, miss22 | miss21
    # user 1 relays s1 to user 2 only after decoding it
    sic_fail = miss21 & (miss11 | (sn.w2 < e1))
    return out1, miss22 | sic_fail


def _binomial(count: float, n: int) -> tuple[float, float]:
    p = float(count) / n
    return p, float(np.sqrt(p * (1.0 - p) / n))


def empirical_outage_many(profile: ChannelProfile, split: PowerSplit, oma: OmaSplit | None,
                          targets: RateTargets, schemes: Iterable[SchemeKind], samples: int,
                          rng: SeededRng, threads: int | None = None,
                          chunk_size: int = DEFAULT_CHUNK
                          ) -> dict[tuple[SchemeKind, int], tuple[float, float]]:
    """Outage fractions and binomial std. errors for several schemes on shared draws."""
    schemes = list(schemes)
    if samples < 1:
        raise DomainError("samples must be >= 1")

    def kernel(sub: SeededRng, n: int):
        fading = sample_fading(profile, sub, n)
        out = []
        for sch in schemes:
            o1, o2 = outage_events(fading, profile, split, oma, targets, sch)
            out += [np.count_nonzero(o1), np.count_nonzero(o2)]
        return np.array(out, dtype=float)

    counts = chunked_sums(kernel, samples, rng, chunk_size, threads)
    res = {}
    for i, sch in enumerate(schemes):
        res[(sch, 1)] = _binomial(counts[2 * i], samples)
        res[(sch, 2)] = _binomial(counts[2 * i + 1], samples)
    return res


def empirical_outage(profile: ChannelProfile, split: PowerSplit, oma: OmaSplit | None,
                     targets: RateTargets, scheme: SchemeKind, user_index: int, samples: int,
                     rng: SeededRng, threads: int | None = None,
                     chunk_size: int = DEFAULT_CHUNK) -> tuple[float, float]:
    if user_index not in (1, 2):
        raise DomainError(f"user_index must be 1 or 2, got {user_index}")
    return empirical_outage_many(profile, split, oma, targets, [scheme], samples, rng,
                                 threads, chunk_size)[(scheme, user_index)]


def diversity_order_fit(scheme: SchemeKind, user_index: int,
                        profile_family: Callable[[float], ChannelProfile], split: PowerSplit,
                        targets: RateTargets, snr_grid_db: Sequence[float],
                        oma: OmaSplit | None = None, min_points: int = 10) -> float:
    """Negated least-squares slope of log10(outage) against snr_db/10.

    The grid must span >= 20 dB with >= ``min_points`` points, every closed-form
    probability must be below 0.1 and positive.
    """
    snr = np.asarray(sorted(snr_grid_db), dtype=float)
    if snr.size < min_points:
        raise DomainError(f"need at least {min_points} SNR points, got {snr.size}")
    if snr[-1] - snr[0] < 20.0:
        raise DomainError("SNR grid must span at least two decades (20 dB)")
    p = np.array([outage_closed(profile_family(x), split, oma, targets, scheme,
                                user_index).probability for x in snr])
    bad = ~((p > 0) & (p < 0.1))
    if bad.any():
        raise DomainError(
            f"outside the high-SNR window at {snr[bad].tolist()} dB (probabilities {p[bad]})")
    slope = np.polyfit(snr / 10.0, np.log10(p), 1)[0]
    return float(-slope)
