"""K-user signal chains and the random-user annulus experiment.

Indices are 0-based: signal j is decoded by every user i >= j, with
interference from signals j+1..K-1. ``v[..., i, j]`` is the SINR of signal j
at user i and ``w[..., k, i]`` the SINR of the user-k -> user-i relay link.
With K = 2 every function reproduces the two-user ``rates`` module bit for
bit on the same draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import (ChannelProfile, FadingRealization, Geometry, SeededRng,
                      place_users_annulus, profile_from_geometry, sample_fading)
from .montecarlo import ordered_map
from .numerics import DomainError
from .rates import OmaSplit, PowerSplit, SchemeKind, oma_rate, sic_sinr

UNI_COOP_INDEX = ("receiver", "signal")


@dataclass(frozen=True, eq=False)
class MultiUserScenario:
    """Profile plus power split; ``csit="statistical"`` enforces the SIC ordering."""

    profile: ChannelProfile
    split: PowerSplit
    csit: str = "statistical"

    def __post_init__(self):
        if self.csit not in ("statistical", "none"):
            raise DomainError(f"csit must be 'statistical' or 'none', got {self.csit!r}")
        k = self.profile.user_count
        if k < 2:
            raise DomainError("need at least two users")
        if self.split.gamma.size != k:
            raise DomainError(f"split has {self.split.gamma.size} entries for {k} users")
        if self.csit == "statistical":
            if np.any(np.diff(self.profile.variances) < 0):
                raise DomainError("statistical CSIT needs variances in ascending order")
            if np.any(np.diff(self.split.gamma) >= 0):
                raise DomainError("statistical CSIT needs strictly descending gamma")

    @property
    def user_count(self) -> int:
        return self.profile.user_count


def _check(realization: FadingRealization, scenario: MultiUserScenario):
    k = scenario.user_count
    direct = np.asarray(realization.direct, dtype=float)
    coop = np.asarray(realization.coop, dtype=float)
    if direct.shape[-1] != k or coop.shape[-2:] != (k, k):
        raise DomainError(f"realization does not match a {k}-user scenario")
    return direct, coop


def sinr_matrix(realization: FadingRealization, scenario: MultiUserScenario) -> np.ndarray:
    """Lower-triangular SINR array, shape (..., K, K); entries with i < j are 0."""
    direct, _ = _check(realization, scenario)
    k = scenario.user_count
    g = scenario.split.gamma
    s = scenario.profile.noise_variance
    v = np.zeros(direct.shape + (k,))
    for j in range(k):
        tail = float(g[j + 1:].sum()) if j + 1 < k else 0.0
        v[..., j:, j] = sic_sinr(direct[..., j:], g[j], tail, s)
    return v


def coop_sinr(realization: FadingRealization, scenario: MultiUserScenario) -> np.ndarray:
    _, coop = _check(realization, scenario)
    return coop / scenario.profile.noise_variance


def _check_j(j, k):
    if not 0 <= j < k:
        raise DomainError(f"signal index must lie in [0, {k - 1}], got {j}")


def z_bi_multi(realization: FadingRealization, scenario: MultiUserScenario, j: int,
               near_approx: bool = False, combining: str = "selection",
               v: np.ndarray | None = None, w: np.ndarray | None = None):
    """Decoding SINR of signal j when the strongest decoder of j relays it.

    ``combining="mrc"`` adds the relayed SINR instead of taking the better copy.
    Ties in |h|^2 pick the lowest user index as relay.
    """
    k = scenario.user_count
    _check_j(j, k)
    if combining not in ("selection", "mrc"):
        raise DomainError(f"unknown combining {combining!r}")
    v = sinr_matrix(realization, scenario) if v is None else v
    vj = v[..., j:, j]
    if near_approx:
        return vj.max(axis=-1)
    if j == k - 1:
        return vj[..., 0]
    w = coop_sinr(realization, scenario) if w is None else w
    direct = np.asarray(realization.direct, dtype=float)
    i0 = np.argmax(direct[..., j:], axis=-1) + j
    # relayed copy from i0 to every i >= j
    relay = np.take_along_axis(w, i0[..., None, None], axis=-2)[..., 0, j:]
    z = vj + relay if combining == "mrc" else np.maximum(vj, relay)
    is_src = np.arange(j, k) == (i0[..., None])
    z = np.where(is_src, vj, z)
    return z.min(axis=-1)


def z_uni_multi(realization: FadingRealization, scenario: MultiUserScenario, j: int,
                near_approx: bool = False, coop_index: str = "receiver",
                v: np.ndarray | None = None, w: np.ndarray | None = None):
    """Decoding SINR of signal j when user K-1 always relays.

    ``coop_index="receiver"`` uses the K-1 -> i link for receiver i;
    ``"signal"`` uses the K-1 -> j link for every receiver.
    """
    k = scenario.user_count
    _check_j(j, k)
    if coop_index not in UNI_COOP_INDEX:
        raise DomainError(f"coop_index must be one of {UNI_COOP_INDEX}")
    v = sinr_matrix(realization, scenario) if v is None else v
    vj = v[..., j:, j]
    if near_approx or j == k - 1:
        return vj[..., -1]
    w = coop_sinr(realization, scenario) if w is None else w
    if coop_index == "receiver":
        relay = w[..., k - 1, j:k - 1]
    else:
        relay = np.repeat(w[..., k - 1, j:j + 1], k - 1 - j, axis=-1)
    z = np.maximum(vj[..., :-1], relay)
    return np.minimum(z.min(axis=-1), vj[..., -1])


def z_noma_multi(realization: FadingRealization, scenario: MultiUserScenario, j: int,
                 v: np.ndarray | None = None):
    k = scenario.user_count
    _check_j(j, k)
    v = sinr_matrix(realization, scenario) if v is None else v
    return v[..., j:, j].min(axis=-1)


def multiuser_rates(realization: FadingRealization, scenario: MultiUserScenario,
                    scheme: SchemeKind, oma: OmaSplit | None = None,
                    uni_near_approx: bool = False, uni_coop_index: str = "receiver"
                    ) -> np.ndarray:
    """Per-signal rates, shape (..., K), in bits/s/Hz."""
    k = scenario.user_count
    s = scenario.profile.noise_variance
    if scheme is SchemeKind.OMA:
        oma = OmaSplit.equal(k) if oma is None else oma
        if oma.alpha.size != k:
            raise DomainError(f"OMA split has {oma.alpha.size} entries for {k} users")
        direct, _ = _check(realization, scenario)
        return oma_rate(direct, oma.gamma, oma.alpha, s)
    v = sinr_matrix(realization, scenario)
    w = None if scheme is SchemeKind.CONV_NOMA else coop_sinr(realization, scenario)
    cols = []
    for j in range(k):
        if scheme is SchemeKind.BI_COOP_SELECTION:
            z = z_bi_multi(realization, scenario, j, v=v, w=w)
        elif scheme is SchemeKind.BI_COOP_MRC:
            z = z_bi_multi(realization, scenario, j, combining="mrc", v=v, w=w)
        elif scheme is SchemeKind.BI_COOP_NEAR_APPROX:
            z = z_bi_multi(realization, scenario, j, near_approx=True, v=v)
        elif scheme is SchemeKind.UNI_COOP:
            z = z_uni_multi(realization, scenario, j, uni_near_approx, uni_coop_index, v=v, w=w)
        elif scheme is SchemeKind.CONV_NOMA:
            z = z_noma_multi(realization, scenario, j, v=v)
        else:
            raise DomainError(f"unsupported scheme {scheme}")
        cols.append(np.log2(1.0 + z))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------- power search

def split_from_ratios(ratios: Sequence[float]) -> PowerSplit:
    """gamma_{k+1} = ratios[k] * gamma_k, normalized to sum 1."""
    g = np.cumprod(np.concatenate([[1.0], np.asarray(ratios, dtype=float)]))
    return PowerSplit(g / g.sum())


def geometric_split(users: int, ratio: float = 0.5) -> PowerSplit:
    return split_from_ratios([ratio] * (users - 1))


@dataclass(frozen=True)
class PowerSearchResult:
    split: PowerSplit
    value: float
    evaluations: int
    sweeps: int


def coordinate_power_search(objective: Callable[[PowerSplit], float], users: int,
                            ratio_grid: Sequence[float], start: float = 0.5,
                            max_sweeps: int = 4) -> PowerSearchResult:
    """Maximize ``objective`` over descending splits one successive ratio at a time.

    Each ratio gamma_{k+1}/gamma_k is scanned over ``ratio_grid`` (values in
    (0, 1)) with the others held fixed; sweeps repeat until no ratio moves.
    Ties keep the current value, so the search is deterministic.
    """
    grid = np.asarray(ratio_grid, dtype=float)
    if grid.size < 1 or np.any(~((grid > 0) & (grid < 1))):
        raise DomainError("ratio grid values must lie in (0, 1)")
    ratios = np.full(users - 1, float(start))
    best = objective(split_from_ratios(ratios))
    evals, sweeps = 1, 0
    for sweeps in range(1, max_sweeps + 1):
        moved = False
        for pos in range(users - 1):
            for r in grid:
                if r == ratios[pos]:
                    continue
                trial = ratios.copy()
                trial[pos] = r
                val = objective(split_from_ratios(trial))
                evals += 1
                if val > best:
                    best, ratios, moved = val, trial, True
        if not moved:
            break
    return PowerSearchResult(split_from_ratios(ratios), float(best), evals, sweeps)


# ---------------------------------------------------------------- annulus experiment

def objective_value(mean_rates: np.ndarray, objective: str) -> float:
    if objective == "fairness":
        return float(mean_rates.min())
    if objective == "sum-rate":
        return float(mean_rates.sum())
    raise DomainError(f"objective must be 'fairness' or 'sum-rate', got {objective!r}")


@dataclass(frozen=True)
class AnnulusResult:
    mean: dict
    std_error: dict
    placements: int


def _one_placement(geom: Geometry, noise_variance, schemes, fading_samples, csit, objective,
                   ratio_grid, max_sweeps, min_coop_distance, fixed_ratio, rng: SeededRng):
    placed = place_users_annulus(geom, rng.substream(0))
    profile = profile_from_geometry(placed, noise_variance, min_coop_distance)
    k = profile.user_count
    if csit == "statistical":
        profile = profile.reordered(np.argsort(profile.variances, kind="stable"))
    fading = sample_fading(profile, rng.substream(1), fading_samples)
    out = {}
    for scheme in schemes:
        def value(split, scheme=scheme):
            sc = MultiUserScenario(profile, split, csit)
            return objective_value(multiuser_rates(fading, sc, scheme).mean(axis=0), objective)
        if scheme is SchemeKind.OMA or csit == "none":
            out[scheme] = value(geometric_split(k, fixed_ratio))
        else:
            out[scheme] = coordinate_power_search(value, k, ratio_grid, 0.5, max_sweeps).value
    return out


def annulus_rates(cell_radius: float, ring_width: float, max_angle: float, users: int,
                  noise_variance: float, schemes: Sequence[SchemeKind], placements: int,
                  fading_samples: int, rng: SeededRng, csit: str = "statistical",
                  objective: str = "sum-rate", ratio_grid: Sequence[float] | None = None,
                  max_sweeps: int = 3, min_coop_distance: float = 1.0,
                  fixed_ratio: float = 0.5, threads: int | None = None) -> AnnulusResult:
    """Mean objective over random placements in the outer ring, per scheme.

    Placement p draws positions from ``rng.substream(p).substream(0)`` and
    fading from ``.substream(1)``; all schemes share those draws. With
    statistical CSIT users are ordered by path loss and the NOMA split is
    searched per placement; with no CSIT users keep their drawn order and the
    fixed split gamma_{k+1} = fixed_ratio * gamma_k is used. OMA always uses
    equal fractions 1/K.
    """
    if placements < 1 or fading_samples < 1:
        raise DomainError("placements and fading_samples must be >= 1")
    geom = Geometry(cell_radius, ring_width, max_angle, users)
    grid = np.linspace(0.1, 0.9, 9) if ratio_grid is None else ratio_grid
    schemes = list(schemes)

    def run(p):
        return _one_placement(geom, noise_variance, schemes, fading_samples, csit, objective,
                              grid, max_sweeps, min_coop_distance, fixed_ratio,
                              rng.substream(p))

    per = ordered_map(run, range(placements), threads)
    mean, se = {}, {}
    for scheme in schemes:
        vals = np.array([d[scheme] for d in per])
        mean[scheme] = float(vals.mean())
        se[scheme] = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return AnnulusResult(mean, se, placements)
