"""Built-in experiment recipes.

Each recipe has a scenario schema (key -> (validator, default)), a default
sample count and a runner returning a ``ResultTable``. Two-user scheme
names: ``bi`` (closed form = near-user form, Monte Carlo = selection
combining), ``uni``, ``noma``, ``oma``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..channel import ChannelProfile, SeededRng, snr_db_to_noise_variance
from ..ergodic import (closed_rates, ergodic_oma_users, monte_carlo_ergodic,
                       monte_carlo_ergodic_many)
from ..multiuser import annulus_rates
from ..outage import OUTAGE_SCHEMES, RateTargets, empirical_outage_many, outage_closed
from ..power_alloc import (BisectionSpec, Fairness, Status, SumRateWithFloor,
                           fairness_bisection, grid_search_allocation, max_sum_rate_bisection)
from ..rates import OmaSplit, PowerSplit, SchemeKind
from .config import (REQUIRED, SCHEMES_2U, ConfigError, RunConfig, choice, count, fraction,
                     grid, nonneg, positive, positive_grid, seed_value, subset)
from .output import Curve, ResultTable, build_id

MC_SCHEME = {"bi": SchemeKind.BI_COOP_SELECTION, "uni": SchemeKind.UNI_COOP,
             "noma": SchemeKind.CONV_NOMA, "oma": SchemeKind.OMA}
CLOSED_SCHEME = {"bi": SchemeKind.BI_COOP_NEAR_APPROX, "uni": SchemeKind.UNI_COOP,
                 "noma": SchemeKind.CONV_NOMA, "oma": SchemeKind.OMA}
SCHEME_NAME = {SchemeKind.BI_COOP_SELECTION: "bi", SchemeKind.UNI_COOP: "uni",
               SchemeKind.CONV_NOMA: "noma", SchemeKind.OMA: "oma"}


@dataclass(frozen=True)
class Recipe:
    name: str
    summary: str
    schema: dict
    default_samples: int
    run: Callable[[RunConfig, int | None], ResultTable]


def _two_user_profile(sc, d2, snr_db=None):
    snr = sc["snr_db"] if snr_db is None else snr_db
    return ChannelProfile.from_distances(sc["d1"], d2, snr, sc["coop_variance"])


def _oma_for(g2):
    return OmaSplit.coupled([1.0 - g2, g2])


def _optimize(profile, name, objective, sc):
    """Optimal gamma2 for one scheme: bisection for bi, closed-form grid otherwise."""
    spec = BisectionSpec(tolerance=sc["tolerance"])
    if name == "bi":
        if isinstance(objective, Fairness):
            return fairness_bisection(profile, spec)
        return max_sum_rate_bisection(profile, objective.rate_floor, spec,
                                      sc["regime_samples"], sc["regime_seed"])
    res = grid_search_allocation(profile, None, CLOSED_SCHEME[name], objective,
                                 sc["grid_points"])
    if res.status is Status.SYSTEM_OUTAGE:
        # floor unreachable: report the max-min point, flagged as outage
        fair = grid_search_allocation(profile, None, CLOSED_SCHEME[name], Fairness(),
                                      sc["grid_points"])
        fair.status = Status.SYSTEM_OUTAGE
        return fair
    return res


def _capacity_sweep(cfg: RunConfig, threads, metric: str) -> ResultTable:
    sc = cfg.scenario
    names = sc["schemes"]
    objective = Fairness() if metric == "fairness" else SumRateWithFloor(sc["rate_floor"])
    cols = ["d2"]
    for n in names:
        cols += [f"gamma2_{n}", f"{n}_closed", f"{n}_mc", f"{n}_stderr"]
        if metric == "sum-rate":
            cols.append(f"outage_{n}")
    rows = []
    for row_i, d2 in enumerate(sc["d2"]):
        profile = _two_user_profile(sc, d2)
        row = [d2]
        for s_i, n in enumerate(names):
            res = _optimize(profile, n, objective, sc)
            g2 = res.gamma2_star
            r1c, r2c = (float(v) for v in closed_rates(profile, CLOSED_SCHEME[n], g2))
            mc = monte_carlo_ergodic(profile, PowerSplit.two_user(g2), _oma_for(g2),
                                     MC_SCHEME[n], cfg.samples,
                                     SeededRng(cfg.seed, (row_i, s_i)), threads=threads)
            if metric == "fairness":
                closed = min(r1c, r2c)
                first = mc.r1_mean <= mc.r2_mean
                val = min(mc.r1_mean, mc.r2_mean)
                err = mc.r1_std_error if first else mc.r2_std_error
            else:
                closed, val, err = r1c + r2c, mc.sum_mean, mc.std_error
            row += [g2, closed, val, err]
            if metric == "sum-rate":
                row.append(int(res.status is Status.SYSTEM_OUTAGE))
        rows.append(row)
    curves = []
    for n in names:
        curves += [Curve(n, "closed", f"{n}_closed"),
                   Curve(n, "mc", f"{n}_mc", f"{n}_stderr")]
    return ResultTable(cols, rows, "d2", curves)


def run_fairness(cfg, threads):
    return _capacity_sweep(cfg, threads, "fairness")


def run_sumrate(cfg, threads):
    return _capacity_sweep(cfg, threads, "sum-rate")


def run_nocsit(cfg, threads):
    sc = cfg.scenario
    names = sc["schemes"]
    split = PowerSplit.two_user(1.0 - sc["gamma1"])
    oma = OmaSplit(np.array([sc["oma_alpha1"], 1 - sc["oma_alpha1"]]),
                   np.array([sc["oma_gamma1"], 1 - sc["oma_gamma1"]]))
    cols = ["d2"] + [f"{n}_{m}" for n in names for m in ("closed", "mc", "stderr")]
    rows = []
    for row_i, d2 in enumerate(sc["d2"]):
        profile = _two_user_profile(sc, d2)
        mc = monte_carlo_ergodic_many(profile, split, oma, [MC_SCHEME[n] for n in names],
                                      cfg.samples, SeededRng(cfg.seed, row_i), threads=threads)
        row = [d2]
        for n in names:
            if n == "oma":
                r1, r2 = _oma_closed(profile, oma)
            else:
                r1, r2 = closed_rates(profile, CLOSED_SCHEME[n], split.gamma2)
            m = mc[MC_SCHEME[n]]
            row += [float(r1 + r2), m.sum_mean, m.std_error]
        rows.append(row)
    curves = []
    for n in names:
        curves += [Curve(n, "closed", f"{n}_closed"),
                   Curve(n, "mc", f"{n}_mc", f"{n}_stderr")]
    return ResultTable(cols, rows, "d2", curves)


def _oma_closed(profile, oma):
    u = ergodic_oma_users(profile, oma)
    return u.r1, u.r2


def run_outage(cfg, threads):
    sc = cfg.scenario
    split = PowerSplit.two_user(1.0 - sc["gamma1"])
    oma = OmaSplit(np.array([sc["oma_alpha1"], 1 - sc["oma_alpha1"]]),
                   np.array([sc["oma_gamma1"], 1 - sc["oma_gamma1"]]))
    targets = RateTargets.from_rates(sc["rt1"], sc["rt2"], oma.alpha)
    keys = [(s, u) for s in OUTAGE_SCHEMES for u in (1, 2)]
    cols = ["snr_db"]
    for s, u in keys:
        p = f"{SCHEME_NAME[s]}_u{u}"
        cols += [f"{p}_closed", f"{p}_mc", f"{p}_stderr"]
    rows = []
    for row_i, snr in enumerate(sc["snr_db"]):
        profile = _two_user_profile(sc, sc["d2"], snr)
        emp = empirical_outage_many(profile, split, oma, targets, OUTAGE_SCHEMES,
                                    cfg.samples, SeededRng(cfg.seed, row_i), threads=threads)
        row = [snr]
        for s, u in keys:
            row += [outage_closed(profile, split, oma, targets, s, u).probability, *emp[(s, u)]]
        rows.append(row)
    curves = []
    for s, u in keys:
        p = f"{SCHEME_NAME[s]}_u{u}"
        curves += [Curve(p, "closed", f"{p}_closed"), Curve(p, "mc", f"{p}_mc", f"{p}_stderr")]
    return ResultTable(cols, rows, "snr_db", curves)


def _annulus(cfg, threads, objective):
    sc = cfg.scenario
    names = sc["schemes"]
    modes = sc["csit"]
    noise = snr_db_to_noise_variance(sc["snr_db"])
    ratio_grid = np.linspace(0.05, 0.95, sc["ratio_grid_points"])
    cols = ["delta"] + [f"{n}_{m}_{k}" for m in modes for n in names for k in ("mean", "stderr")]
    rows = []
    for delta in sc["delta"]:
        row = [delta]
        for m_i, mode in enumerate(modes):
            # same placement uniforms at every delta: smooth curves across the sweep
            res = annulus_rates(sc["cell_radius"], delta, sc["max_angle"], sc["users"], noise,
                                [MC_SCHEME[n] for n in names], sc["placements"], cfg.samples,
                                SeededRng(cfg.seed, m_i), mode, objective, ratio_grid,
                                sc["max_sweeps"], sc["min_coop_distance"], 0.5, threads)
            for n in names:
                row += [res.mean[MC_SCHEME[n]], res.std_error[MC_SCHEME[n]]]
        rows.append(row)
    curves = [Curve(f"{n}-{m}", objective, f"{n}_{m}_mean", f"{n}_{m}_stderr")
              for m in modes for n in names]
    return ResultTable(cols, rows, "delta", curves)


def run_annulus_fairness(cfg, threads):
    return _annulus(cfg, threads, "fairness")


def run_annulus_sumrate(cfg, threads):
    return _annulus(cfg, threads, "sum-rate")


def run_trace(cfg, threads):
    sc = cfg.scenario
    profile = _two_user_profile(sc, sc["d2"])
    spec = BisectionSpec(tolerance=sc["tolerance"])
    if sc["algorithm"] == "fairness":
        res = fairness_bisection(profile, spec)
    else:
        res = max_sum_rate_bisection(profile, sc["rate_floor"], spec, cfg.samples, cfg.seed)
    cols = ["iteration", "gamma_minus", "gamma_plus", "gamma_mid", "r1", "r2", "branch"]
    rows = [[t["iteration"], t["gamma_minus"], t["gamma_plus"], t["gamma_mid"], t["r1"],
             t["r2"], t["branch"]] for t in res.trace]
    table = ResultTable(cols, rows, "iteration",
                        [Curve("bi", m, m) for m in ("gamma_mid", "r1", "r2")])
    table.metadata["result.status"] = res.status.value
    table.metadata["result.gamma2_star"] = res.gamma2_star
    return table


def _scalar(k, v):
    return float(grid(k, [v])[0])


def _at_least_two(k, v):
    v = count(k, v)
    if v < 2:
        raise ConfigError(k, f"must be >= 2, got {v}")
    return v


_TWO_USER = {
    "d1": (positive, 40.0),
    "d2": (positive_grid, REQUIRED),
    "snr_db": (_scalar, 10.0),
    "coop_variance": (positive, 1.0),
    "schemes": (subset(SCHEMES_2U), list(SCHEMES_2U)),
}
_ALLOC = {
    "grid_points": (_at_least_two, 10_000),
    "tolerance": (positive, 1e-6),
}
_ANNULUS = {
    "cell_radius": (positive, 50.0),
    "delta": (positive_grid, REQUIRED),
    "max_angle": (positive, REQUIRED),
    "users": (_at_least_two, 4),
    "snr_db": (_scalar, 10.0),
    "placements": (count, 200),
    "ratio_grid_points": (count, 9),
    "max_sweeps": (count, 3),
    "min_coop_distance": (positive, 1.0),
    "schemes": (subset(SCHEMES_2U), list(SCHEMES_2U)),
}


RECIPES: dict[str, Recipe] = {r.name: r for r in [
    Recipe("fairness-vs-d2",
           "max-min ergodic rate vs d2, statistical CSIT (bisection for bi, grid for others)",
           {**_TWO_USER, **_ALLOC}, 1_000_000, run_fairness),
    Recipe("sumrate-vs-d2",
           "max sum rate with a per-user floor vs d2, statistical CSIT",
           {**_TWO_USER, **_ALLOC, "rate_floor": (nonneg, 0.8),
            "regime_samples": (count, 100_000), "regime_seed": (seed_value, 0)},
           1_000_000, run_sumrate),
    Recipe("nocsit-sumrate-vs-d2",
           "sum rate vs d2 with fixed power split, no CSIT",
           {**_TWO_USER, "gamma1": (fraction, 0.8), "oma_gamma1": (fraction, 0.5),
            "oma_alpha1": (fraction, 0.5)},
           1_000_000, run_nocsit),
    Recipe("outage-vs-snr",
           "per-user outage probability vs transmit SNR, closed form and event counting",
           {"d1": (positive, 40.0), "d2": (positive, REQUIRED), "rt1": (nonneg, REQUIRED),
            "rt2": (nonneg, REQUIRED), "gamma1": (fraction, 0.75),
            "snr_db": (grid, {"start": 0, "stop": 40, "step": 2}),
            "coop_variance": (positive, 1.0), "oma_gamma1": (fraction, 0.5),
            "oma_alpha1": (fraction, 0.5)},
           10_000_000, run_outage),
    Recipe("annulus-fairness-vs-delta",
           "K-user max-min rate vs ring width, random users in the cell-edge annulus",
           {**_ANNULUS, "csit": (subset(["statistical", "none"]), ["statistical"])},
           2_000, run_annulus_fairness),
    Recipe("annulus-sumrate-vs-delta",
           "K-user sum rate vs ring width, statistical and no CSIT",
           {**_ANNULUS, "csit": (subset(["statistical", "none"]), ["statistical", "none"])},
           2_000, run_annulus_sumrate),
    Recipe("allocation-trace",
           "iteration log of the fairness or max-sum-rate bisection",
           {"d1": (positive, 40.0), "d2": (positive, REQUIRED), "snr_db": (_scalar, 10.0),
            "coop_variance": (positive, 1.0), "tolerance": (positive, 1e-6),
            "algorithm": (choice(["fairness", "max-sum-rate"]), "fairness"),
            "rate_floor": (nonneg, 0.8)},
           100_000, run_trace),
]}

SCHEMAS = {k: r.schema for k, r in RECIPES.items()}
DEFAULT_SAMPLES = {k: r.default_samples for k, r in RECIPES.items()}


def run_recipe(cfg: RunConfig, threads: int | None = None) -> ResultTable:
    t0 = time.perf_counter()
    table = RECIPES[cfg.experiment].run(cfg, threads)
    extra = dict(table.metadata)
    table.metadata = {**cfg.echo(), **extra, "build_id": build_id(),
                      "wall_time_s": round(time.perf_counter() - t0, 3)}
    return table
