"""Power-split search for the two-user system.

``fairness_bisection`` and ``max_sum_rate_bisection`` are bracket
bisections on gamma2; the max-sum-rate loop branches on feasibility first
and then on which way the sum rate moves. ``grid_search_allocation`` is
the exhaustive baseline used for schemes without a bisection rule and for
cross-checking.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .channel import ChannelProfile, SeededRng, sample_fading
from .ergodic import closed_rates
from .numerics import DomainError
from .rates import OmaSplit, PowerSplit, SchemeKind, direct_sinrs, scheme_rates

log = logging.getLogger(__name__)


class Status(enum.Enum):
    CONVERGED = "converged"
    SYSTEM_OUTAGE = "system_outage"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class ClosedForm:
    scheme: SchemeKind = SchemeKind.BI_COOP_NEAR_APPROX


@dataclass(frozen=True)
class MonteCarlo:
    """Sample-mean evaluator on a fixed set of fading draws (common random numbers)."""

    samples: int = 100_000
    seed: int = 0
    scheme: SchemeKind = SchemeKind.BI_COOP_NEAR_APPROX
    uni_near_approx: bool = False


Evaluator = Union[ClosedForm, MonteCarlo]


@dataclass(frozen=True)
class BisectionSpec:
    tolerance: float = 1e-6
    max_iterations: int = 60
    evaluator: Evaluator = ClosedForm()

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("bisection tolerance must be > 0")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")


@dataclass
class AllocationResult:
    gamma2_star: float
    achieved_r1: float
    achieved_r2: float
    iterations: int
    status: Status
    bracket: tuple[float, float] = (0.0, 1.0)
    alpha2_star: float | None = None
    trace: list[dict] = field(default_factory=list, repr=False)

    @property
    def sum_rate(self) -> float:
        return self.achieved_r1 + self.achieved_r2

    @property
    def min_rate(self) -> float:
        return min(self.achieved_r1, self.achieved_r2)


@dataclass(frozen=True)
class Fairness:
    pass


@dataclass(frozen=True)
class SumRateWithFloor:
    rate_floor: float = 0.0


def rate_function(profile: ChannelProfile, evaluator: Evaluator,
                  oma_alpha2: float | None = None) -> Callable[[float], tuple[float, float]]:
    """gamma2 -> (E[R1], E[R2]) for the chosen evaluator."""
    if isinstance(evaluator, ClosedForm):
        def rates(g2):
            r1, r2 = closed_rates(profile, evaluator.scheme, g2, oma_alpha2)
            return float(r1), float(r2)
        return rates

    fading = sample_fading(profile, SeededRng(evaluator.seed), evaluator.samples)

    def rates(g2):
        split = PowerSplit.two_user(g2)
        a2 = g2 if oma_alpha2 is None else oma_alpha2
        oma = OmaSplit(np.array([1 - a2, a2]), split.gamma)
        r1, r2 = scheme_rates(fading, profile, split, oma, evaluator.scheme,
                              evaluator.uni_near_approx)
        return float(r1.mean()), float(r2.mean())
    return rates


def fairness_bisection(profile: ChannelProfile, spec: BisectionSpec = BisectionSpec()
                       ) -> AllocationResult:
    """Bisection on gamma2 for E[R1] = E[R2].

    E[R1] falls and E[R2] rises with gamma2, so the crossing is the max-min point.
    """
    if profile.l1 >= profile.l2:
        log.info("fairness bisection with L1 >= L2 (L1=%g, L2=%g)", profile.l1, profile.l2)
    rates = rate_function(profile, spec.evaluator)
    lo, hi = 0.0, 1.0
    g2, r1, r2 = 0.5, 0.0, 0.0
    trace: list[dict] = []
    status = Status.CONVERGED
    while hi - lo >= spec.tolerance:
        if len(trace) >= spec.max_iterations:
            status = Status.MAX_ITERATIONS
            break
        g2 = (hi + lo) / 2
        r1, r2 = rates(g2)
        if r1 < r2:
            hi = g2
            branch = "r1<r2: gamma+ <- mid"
        else:
            lo = g2
            branch = "r1>=r2: gamma- <- mid"
        trace.append(dict(iteration=len(trace) + 1, gamma_minus=lo, gamma_plus=hi,
                          gamma_mid=g2, r1=r1, r2=r2, branch=branch))
    return AllocationResult(g2, r1, r2, len(trace), status, (lo, hi), trace=trace)


def expected_regime_sinrs(profile: ChannelProfile, split: PowerSplit, samples: int,
                          rng: SeededRng):
    """Monte Carlo means (E[V11], E[V21], E[W1], E[W2]) of the raw SINRs."""
    if samples < 1:
        raise DomainError("samples must be >= 1")
    s = direct_sinrs(sample_fading(profile, rng, samples), profile, split)
    return (float(s.v11.mean()), float(s.v21.mean()), float(s.w1.mean()), float(s.w2.mean()))


def max_sum_rate_bisection(profile: ChannelProfile, rate_floor: float,
                           spec: BisectionSpec = BisectionSpec(),
                           regime_samples: int = 100_000, regime_seed: int = 0
                           ) -> AllocationResult:
    """Suboptimal bisection for max E[R1] + E[R2] s.t. min(E[R1], E[R2]) >= rate_floor.

    The fairness-point common rate R0 is computed first; if R0 <= rate_floor
    the constraint cannot be met and SYSTEM_OUTAGE is returned at the
    fairness point. Inside the loop a violated constraint is assumed to have
    exactly one rate below the floor. When the constraint holds, the branch
    depends on E[V11] < E[W1] < E[V21] (sum rate increasing in gamma2) versus
    the complementary, decreasing case. The regime means use the same fading
    draws at every iteration.
    """
    if rate_floor < 0:
        raise DomainError("rate floor must be >= 0")
    fair = fairness_bisection(profile, spec)
    r0 = fair.min_rate
    if not r0 > rate_floor:
        return AllocationResult(fair.gamma2_star, fair.achieved_r1, fair.achieved_r2,
                                fair.iterations, Status.SYSTEM_OUTAGE, fair.bracket,
                                trace=fair.trace)
    rates = rate_function(profile, spec.evaluator)
    lo, hi = 0.0, 1.0
    g2, r1, r2 = 0.5, 0.0, 0.0
    trace: list[dict] = []
    status = Status.CONVERGED
    while hi - lo >= spec.tolerance:
        if len(trace) >= spec.max_iterations:
            status = Status.MAX_ITERATIONS
            break
        g2 = (hi + lo) / 2
        r1, r2 = rates(g2)
        regime = ""
        if min(r1, r2) <= rate_floor:
            if r1 > r2:
                lo = g2
                branch = "infeasible, r1>r2: gamma- <- mid"
            else:
                hi = g2
                branch = "infeasible, r1<=r2: gamma+ <- mid"
        else:
            ev11, ev21, ew1, _ = expected_regime_sinrs(
                profile, PowerSplit.two_user(g2), regime_samples, SeededRng(regime_seed))
            if ev11 < ew1 < ev21:
                lo = g2
                regime = "increasing"
                branch = "feasible, increasing: gamma- <- mid"
            else:
                hi = g2
                regime = "decreasing"
                branch = "feasible, decreasing: gamma+ <- mid"
        trace.append(dict(iteration=len(trace) + 1, gamma_minus=lo, gamma_plus=hi,
                          gamma_mid=g2, r1=r1, r2=r2, branch=branch, regime=regime))
    return AllocationResult(g2, r1, r2, len(trace), status, (lo, hi), trace=trace)


def _objective_values(r1, r2, objective):
    r1, r2 = np.asarray(r1), np.asarray(r2)
    if isinstance(objective, Fairness):
        return np.minimum(r1, r2), np.ones(r1.shape, dtype=bool)
    if isinstance(objective, SumRateWithFloor):
        return r1 + r2, np.minimum(r1, r2) >= objective.rate_floor
    raise TypeError(f"unknown objective {objective!r}")


def grid_search_allocation(profile: ChannelProfile, oma: OmaSplit | None, scheme: SchemeKind,
                           objective, grid_points: int = 10_000,
                           evaluator: Evaluator | None = None,
                           oma_coupled: bool = True) -> AllocationResult:
    """Exhaustive scan of gamma2 over k/(grid_points+1), k = 1..grid_points.

    For OMA the resource fraction follows the power fraction by default
    (``oma_coupled``); otherwise a 2-D scan over (gamma2, alpha2) is run on the
    same grid. ``oma`` is accepted for interface symmetry and not otherwise
    used: the scan replaces its fractions. Closed forms are used whenever the
    scheme has one, unless a Monte Carlo evaluator is given.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    grid = np.arange(1, grid_points + 1) / (grid_points + 1)
    if evaluator is None:
        evaluator = (ClosedForm(scheme) if scheme in (
            SchemeKind.BI_COOP_NEAR_APPROX, SchemeKind.UNI_COOP, SchemeKind.CONV_NOMA,
            SchemeKind.OMA) else MonteCarlo(scheme=scheme))

    alphas = [None] if (scheme is not SchemeKind.OMA or oma_coupled) else list(grid)
    best = None
    for a2 in alphas:
        if isinstance(evaluator, ClosedForm):
            r1, r2 = closed_rates(profile, scheme, grid, a2)
        else:
            fn = rate_function(profile, MonteCarlo(evaluator.samples, evaluator.seed, scheme,
                                                   evaluator.uni_near_approx), a2)
            r1, r2 = map(np.array, zip(*[fn(g) for g in grid]))
        value, feasible = _objective_values(r1, r2, objective)
        if not feasible.any():
            continue
        masked = np.where(feasible, value, -np.inf)
        k = int(np.argmax(masked))
        if best is None or masked[k] > best[0]:
            best = (masked[k], grid[k], float(r1[k]), float(r2[k]), a2)
    n_eval = grid_points * len(alphas)
    if best is None:
        return AllocationResult(float("nan"), 0.0, 0.0, n_eval, Status.SYSTEM_OUTAGE)
    _, g2, r1k, r2k, a2 = best
    alpha2 = (g2 if a2 is None else a2) if scheme is SchemeKind.OMA else None
    h = 1.0 / (grid_points + 1)
    return AllocationResult(float(g2), r1k, r2k, n_eval, Status.CONVERGED,
                            (float(g2) - h, float(g2) + h), alpha2_star=alpha2)
