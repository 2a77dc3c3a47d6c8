"""Ergodic capacities: closed forms in terms of C1 and a Monte Carlo estimator.

All closed forms assume the near-user regime for the cooperative schemes,
i.e. user 1 decodes s1 at SINR max(V11, V21) (bi-directional) or V21
(uni-directional). Arguments of C1 are mean SNRs such as L1/sigma^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import ChannelProfile, SeededRng, sample_fading
from .montecarlo import DEFAULT_CHUNK, chunked_sums, mean_and_stderr
from .numerics import DomainError, c1
from .rates import OmaSplit, PowerSplit, SchemeKind, scheme_rates


@dataclass(frozen=True)
class ErgodicResult:
    r1_mean: float
    r2_mean: float
    sum_mean: float
    std_error: float
    sample_count: int
    r1_std_error: float = 0.0
    r2_std_error: float = 0.0

    @classmethod
    def closed(cls, r1: float, r2: float) -> "ErgodicResult":
        return cls(float(r1), float(r2), float(r1 + r2), 0.0, 0)


@dataclass(frozen=True)
class UserRates:
    r1: float
    r2: float

    @property
    def total(self) -> float:
        return self.r1 + self.r2


def _snrs(profile: ChannelProfile):
    if profile.user_count != 2:
        raise DomainError("two-user closed forms need a two-user profile")
    l1, l2, s = profile.l1, profile.l2, profile.noise_variance
    return l1 / s, l2 / s, l1 * l2 / ((l1 + l2) * s)


def bi_r1_terms(x1, x2, xm, g2):
    """User-1 bi-directional rate from mean SNRs; ``g2`` may be an array."""
    return c1(x1) - c1(g2 * x1) + c1(x2) - c1(g2 * x2) - c1(xm) + c1(g2 * xm)


def ergodic_bi_r1_closed(profile: ChannelProfile, split: PowerSplit) -> float:
    x1, x2, xm = _snrs(profile)
    return float(bi_r1_terms(x1, x2, xm, split.gamma2))


def ergodic_r2_closed(profile: ChannelProfile, split: PowerSplit) -> float:
    """Rate of s2 at the SIC user; identical for every NOMA scheme."""
    _, x2, _ = _snrs(profile)
    return float(c1(split.gamma2 * x2))


def ergodic_bi_sum_closed(profile: ChannelProfile, split: PowerSplit) -> float:
    x1, x2, xm = _snrs(profile)
    g2 = split.gamma2
    return float(c1(x1) - c1(g2 * x1) + c1(x2) - c1(xm) + c1(g2 * xm))


def closed_rates(profile: ChannelProfile, scheme: SchemeKind, g2, oma_alpha2=None):
    """Vectorized (r1, r2) over an array of gamma2 values.

    Cooperative schemes use their near-user closed forms. For OMA, ``g2`` is
    the power fraction of user 2 and ``oma_alpha2`` its resource fraction
    (defaults to ``g2``, i.e. coupled power and resource).
    """
    x1, x2, xm = _snrs(profile)
    g2 = np.asarray(g2, dtype=float)
    if scheme is SchemeKind.OMA:
        a2 = g2 if oma_alpha2 is None else np.asarray(oma_alpha2, dtype=float)
        a1, g1 = 1.0 - a2, 1.0 - g2
        return a1 * c1(g1 * x1 / a1), a2 * c1(g2 * x2 / a2)
    r2 = c1(g2 * x2)
    if scheme is SchemeKind.BI_COOP_NEAR_APPROX:
        r1 = bi_r1_terms(x1, x2, xm, g2)
    elif scheme is SchemeKind.UNI_COOP:
        r1 = c1(x2) - c1(g2 * x2)
    elif scheme is SchemeKind.CONV_NOMA:
        r1 = c1(xm) - c1(g2 * xm)
    else:
        raise ValueError(f"no closed form for {scheme}")
    return r1, r2


def ergodic_uni_closed(profile: ChannelProfile, split: PowerSplit,
                       decode_via: str = "sic_user") -> UserRates:
    """Uni-directional cooperative NOMA, per user.

    ``decode_via="sic_user"`` (default, matches Monte Carlo) gives user 1 the
    rate of s1 as decoded over the SIC user's channel,
    C1(L2/s) - C1(g2 L2/s), so the sum collapses to C1(L2/s).
    ``decode_via="own_channel"`` is the alternative with L1 in place of L2 in
    the user-1 terms; it is kept only for comparison.
    """
    x1, x2, _ = _snrs(profile)
    g2 = split.gamma2
    if decode_via == "sic_user":
        r1 = c1(x2) - c1(g2 * x2)
    elif decode_via == "own_channel":
        r1 = c1(x1) - c1(g2 * x1)
    else:
        raise ValueError(f"unknown decode_via {decode_via!r}")
    return UserRates(float(r1), float(c1(g2 * x2)))


def ergodic_noma_bounds(profile: ChannelProfile, split: PowerSplit) -> tuple[float, float]:
    """Bounds (0, min of single-channel forms) on the conventional-NOMA user-1 rate."""
    x1, x2, _ = _snrs(profile)
    g2 = split.gamma2
    upper = min(c1(x1) - c1(g2 * x1), c1(x2) - c1(g2 * x2))
    return 0.0, float(upper)


def ergodic_noma_closed(profile: ChannelProfile, split: PowerSplit) -> UserRates:
    """Exact conventional-NOMA rates.

    The SINR map is increasing in channel power, so min(V11, V21) is the SINR
    at min(|h1|^2, |h2|^2), an exponential with mean L1 L2 / (L1 + L2).
    """
    _, x2, xm = _snrs(profile)
    g2 = split.gamma2
    return UserRates(float(c1(xm) - c1(g2 * xm)), float(c1(g2 * x2)))


def ergodic_oma_users(profile: ChannelProfile, oma: OmaSplit) -> UserRates:
    s = profile.noise_variance
    a, g, var = oma.alpha, oma.gamma, profile.variances
    r = [float(a[i] * c1(g[i] * var[i] / (a[i] * s))) for i in range(2)]
    return UserRates(*r)


def ergodic_oma_closed(profile: ChannelProfile, oma: OmaSplit) -> float:
    return ergodic_oma_users(profile, oma).total


def monte_carlo_ergodic_many(profile: ChannelProfile, split: PowerSplit, oma: OmaSplit | None,
                             schemes: Iterable[SchemeKind], samples: int, rng: SeededRng,
                             uni_near_approx: bool = False, threads: int | None = None,
                             chunk_size: int = DEFAULT_CHUNK) -> dict[SchemeKind, ErgodicResult]:
    """Ergodic rates of several schemes from one shared set of fading draws."""
    schemes = list(schemes)

    def kernel(sub: SeededRng, n: int):
        fading = sample_fading(profile, sub, n)
        out = []
        for scheme in schemes:
            r1, r2 = scheme_rates(fading, profile, split, oma, scheme, uni_near_approx)
            tot = r1 + r2
            out += [r1.sum(), (r1 * r1).sum(), r2.sum(), (r2 * r2).sum(),
                    tot.sum(), (tot * tot).sum()]
        return np.array(out)

    sums = chunked_sums(kernel, samples, rng, chunk_size, threads)
    results = {}
    for i, scheme in enumerate(schemes):
        s = sums[6 * i: 6 * i + 6]
        m1, e1 = mean_and_stderr(s[0], s[1], samples)
        m2, e2 = mean_and_stderr(s[2], s[3], samples)
        _, et = mean_and_stderr(s[4], s[5], samples)
        results[scheme] = ErgodicResult(m1, m2, m1 + m2, et, samples, e1, e2)
    return results


def monte_carlo_ergodic(profile: ChannelProfile, split: PowerSplit, oma: OmaSplit | None,
                        scheme: SchemeKind, samples: int, rng: SeededRng,
                        uni_near_approx: bool = False, threads: int | None = None,
                        chunk_size: int = DEFAULT_CHUNK) -> ErgodicResult:
    """Sample mean and standard error of the scheme's rates (0 std error for one sample)."""
    return monte_carlo_ergodic_many(profile, split, oma, [scheme], samples, rng,
                                    uni_near_approx, threads, chunk_size)[scheme]
