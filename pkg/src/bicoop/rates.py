"""Per-realization SINRs and achievable rates of the two-user schemes.

User 1 is the non-SIC user (signal s1 carries power fraction gamma_1) and
user 2 the SIC user. Every function here is elementwise, so it works on a
single realization or on a batch with a leading sample axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelProfile, FadingRealization
from .numerics import DomainError

_SUM_TOL = 1e-12


class SchemeKind(enum.Enum):
    BI_COOP_SELECTION = "bi-selection"
    BI_COOP_MRC = "bi-mrc"
    BI_COOP_NEAR_APPROX = "bi-near"
    UNI_COOP = "uni"
    CONV_NOMA = "noma"
    OMA = "oma"

    @property
    def is_bi(self) -> bool:
        return self in (SchemeKind.BI_COOP_SELECTION, SchemeKind.BI_COOP_MRC,
                        SchemeKind.BI_COOP_NEAR_APPROX)


def _check_fractions(name, values):
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size < 2:
        raise DomainError(f"{name} needs at least two entries")
    if np.any(~(arr > 0)) or np.any(~(arr < 1)):
        raise DomainError(f"every {name} entry must lie in (0, 1), got {arr}")
    if abs(arr.sum() - 1.0) > _SUM_TOL:
        raise DomainError(f"{name} must sum to 1, got {arr.sum()!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PowerSplit:
    """NOMA power fractions, one per user, summing to one."""

    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_fractions("gamma", self.gamma))

    @classmethod
    def two_user(cls, gamma2: float) -> "PowerSplit":
        return cls(np.array([1.0 - gamma2, gamma2]))

    @property
    def gamma1(self) -> float:
        return float(self.gamma[0])

    @property
    def gamma2(self) -> float:
        return float(self.gamma[1])


@dataclass(frozen=True, eq=False)
class OmaSplit:
    """Orthogonal resource fractions ``alpha`` and power fractions ``gamma``."""

    alpha: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        alpha = _check_fractions("alpha", self.alpha)
        gamma = _check_fractions("gamma", self.gamma)
        if alpha.size != gamma.size:
            raise DomainError("alpha and gamma must have the same length")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def equal(cls, users: int = 2) -> "OmaSplit":
        f = np.full(users, 1.0 / users)
        return cls(f, f)

    @classmethod
    def coupled(cls, fractions) -> "OmaSplit":
        """gamma_i = alpha_i: equal power per unit of resource."""
        return cls(np.asarray(fractions, dtype=float), np.asarray(fractions, dtype=float))


@dataclass(frozen=True, eq=False)
class TwoUserSinrs:
    v11: np.ndarray
    v22: np.ndarray
    v21: np.ndarray
    w1: np.ndarray
    w2: np.ndarray


def sic_sinr(h, gamma_j, interference, noise):
    """SINR for decoding a signal with power ``gamma_j`` under ``interference``."""
    return h * gamma_j / (h * interference + noise)


def oma_rate(h, gamma, alpha, noise):
    return alpha * np.log2(1.0 + gamma * h / (alpha * noise))


def direct_sinrs(realization: FadingRealization, profile: ChannelProfile,
                 split: PowerSplit) -> TwoUserSinrs:
    direct = np.asarray(realization.direct, dtype=float)
    coop = np.asarray(realization.coop, dtype=float)
    if direct.shape[-1] != 2 or coop.shape[-2:] != (2, 2) or split.gamma.size != 2:
        raise DomainError("direct_sinrs needs two-user inputs")
    if profile.user_count != 2:
        raise DomainError("direct_sinrs needs a two-user profile")
    s = profile.noise_variance
    g1, g2 = split.gamma
    h1, h2 = direct[..., 0], direct[..., 1]
    return TwoUserSinrs(
        v11=sic_sinr(h1, g1, g2, s),
        v22=sic_sinr(h2, g2, 0.0, s),
        v21=sic_sinr(h2, g1, g2, s),
        w1=coop[..., 1, 0] / s,
        w2=coop[..., 0, 1] / s,
    )


def z1_bi_selection(s: TwoUserSinrs, h1_sq, h2_sq):
    """The stronger user relays s1; the receiver keeps the better copy.

    Ties go to the second branch (user 1 treated as the stronger one).
    """
    weak1 = np.minimum(np.maximum(s.v11, s.w1), s.v21)
    weak2 = np.minimum(s.v11, np.maximum(s.v21, s.w2))
    return np.where(np.asarray(h1_sq) < np.asarray(h2_sq), weak1, weak2)


def z1_bi_mrc(s: TwoUserSinrs, h1_sq, h2_sq):
    weak1 = np.minimum(s.v11 + s.w1, s.v21)
    weak2 = np.minimum(s.v11, s.v21 + s.w2)
    return np.where(np.asarray(h1_sq) < np.asarray(h2_sq), weak1, weak2)


def z1_bi_near_approx(s: TwoUserSinrs):
    return np.maximum(s.v11, s.v21)


def z1_uni(s: TwoUserSinrs, near_approx: bool = False):
    """Cooperation always flows from the SIC user to user 1."""
    if near_approx:
        return np.asarray(s.v21)
    return np.minimum(np.maximum(s.v11, s.w1), s.v21)


def z1_conv_noma(s: TwoUserSinrs):
    return np.minimum(s.v11, s.v21)


def scheme_z1(s: TwoUserSinrs, h1_sq, h2_sq, scheme: SchemeKind, uni_near_approx=False):
    if scheme is SchemeKind.BI_COOP_SELECTION:
        return z1_bi_selection(s, h1_sq, h2_sq)
    if scheme is SchemeKind.BI_COOP_MRC:
        return z1_bi_mrc(s, h1_sq, h2_sq)
    if scheme is SchemeKind.BI_COOP_NEAR_APPROX:
        return z1_bi_near_approx(s)
    if scheme is SchemeKind.UNI_COOP:
        return z1_uni(s, near_approx=uni_near_approx)
    if scheme is SchemeKind.CONV_NOMA:
        return z1_conv_noma(s)
    raise ValueError(f"{scheme} has no NOMA decoding SINR")


def scheme_rates(realization: FadingRealization, profile: ChannelProfile, split: PowerSplit,
                 oma: OmaSplit | None, scheme: SchemeKind, uni_near_approx: bool = False):
    """(r1, r2) in bits/s/Hz for one scheme on the given realization(s)."""
    if scheme is SchemeKind.OMA:
        if oma is None:
            raise DomainError("OMA rates need an OmaSplit")
        direct = np.asarray(realization.direct, dtype=float)
        s = profile.noise_variance
        r1 = oma_rate(direct[..., 0], oma.gamma[0], oma.alpha[0], s)
        r2 = oma_rate(direct[..., 1], oma.gamma[1], oma.alpha[1], s)
        return r1, r2
    sinrs = direct_sinrs(realization, profile, split)
    z1 = scheme_z1(sinrs, realization.direct[..., 0], realization.direct[..., 1], scheme,
                   uni_near_approx)
    return np.log2(1.0 + z1), np.log2(1.0 + sinrs.v22)
