"""Channel statistics, Rayleigh fading draws and the random-user annulus.

Fading powers are exponential: |h_i|^2 has mean L_i and the cooperation
power |g_{k,i}|^2 from user k to user i has mean L_c[k, i]. Arrays of
realizations carry the sample axis first, so a batch of n two-user draws
has ``direct.shape == (n, 2)`` and ``coop.shape == (n, 2, 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .numerics import DomainError


class GeometryError(ValueError):
    pass


def path_loss(d):
    """Slow-fading gain 1/d^2."""
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError(f"distance must be > 0, got {d!r}")
    out = 1.0 / d**2
    return out[()] if out.ndim == 0 else out


def snr_db_to_noise_variance(snr_db: float) -> float:
    """Noise variance for unit transmit power at the given SNR in dB."""
    return 10.0 ** (-float(snr_db) / 10.0)


@dataclass(frozen=True, eq=False)
class ChannelProfile:
    """Statistical description of the link.

    ``coop_variance[k, i]`` is the mean power of the user-k -> user-i link;
    the matrix is symmetric and its diagonal is ignored.
    """

    variances: np.ndarray
    coop_variance: np.ndarray
    noise_variance: float

    def __post_init__(self):
        var = np.asarray(self.variances, dtype=float).reshape(-1)
        k = var.size
        coop = np.asarray(self.coop_variance, dtype=float)
        if coop.ndim == 0:
            coop = np.full((k, k), float(coop))
        if coop.shape != (k, k):
            raise DomainError(f"coop_variance must be {k}x{k}, got shape {coop.shape}")
        coop = coop.copy()
        np.fill_diagonal(coop, 0.0)
        off = ~np.eye(k, dtype=bool)
        if k < 1 or np.any(~(var > 0)) or not np.all(np.isfinite(var)):
            raise DomainError("channel variances must be finite and > 0")
        if np.any(~(coop[off] > 0)):
            raise DomainError("cooperation variances must be > 0")
        if not np.allclose(coop, coop.T, rtol=1e-12, atol=0.0):
            raise DomainError("cooperation variances must be symmetric")
        if not (self.noise_variance > 0 and np.isfinite(self.noise_variance)):
            raise DomainError("noise variance must be finite and > 0")
        var.setflags(write=False)
        coop.setflags(write=False)
        object.__setattr__(self, "variances", var)
        object.__setattr__(self, "coop_variance", coop)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @classmethod
    def two_user(cls, l1, l2, noise_variance, coop_variance=1.0):
        return cls(np.array([l1, l2]), np.array([[0.0, coop_variance], [coop_variance, 0.0]]),
                   noise_variance)

    @classmethod
    def from_distances(cls, d1, d2, snr_db, coop_variance=1.0):
        return cls.two_user(path_loss(d1), path_loss(d2), snr_db_to_noise_variance(snr_db),
                            coop_variance)

    @property
    def user_count(self) -> int:
        return self.variances.size

    @property
    def l1(self) -> float:
        return float(self.variances[0])

    @property
    def l2(self) -> float:
        return float(self.variances[1])

    @property
    def lc(self) -> float:
        """Cooperation variance of the (1, 2) pair."""
        return float(self.coop_variance[0, 1])

    def with_noise(self, noise_variance: float) -> "ChannelProfile":
        return replace(self, noise_variance=noise_variance)

    def reordered(self, order) -> "ChannelProfile":
        order = np.asarray(order)
        return ChannelProfile(self.variances[order], self.coop_variance[np.ix_(order, order)],
                              self.noise_variance)


class SeededRng:
    """A numpy Generator keyed by (seed, stream_id).

    Substreams are derived through ``SeedSequence`` spawn keys, so the draws of
    substream ``c`` never depend on how many other substreams exist or on the
    order in which they are consumed.
    """

    def __init__(self, seed: int, stream_id: int | tuple = 0):
        self.seed = int(seed)
        self.key = tuple(stream_id) if isinstance(stream_id, tuple) else (int(stream_id),)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    @property
    def stream_id(self):
        return self.key

    def substream(self, index: int) -> "SeededRng":
        return SeededRng(self.seed, self.key + (int(index),))

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream_id={self.key})"


@dataclass(frozen=True, eq=False)
class FadingRealization:
    """Instantaneous powers; ``coop[..., k, i]`` is |g_{k,i}|^2 (from k to i)."""

    direct: np.ndarray
    coop: np.ndarray

    @property
    def size(self) -> int:
        return self.direct.shape[0] if self.direct.ndim > 1 else 1

    def take(self, index) -> "FadingRealization":
        return FadingRealization(self.direct[index], self.coop[index])


def sample_fading(profile: ChannelProfile, rng: SeededRng, size: int = 1) -> FadingRealization:
    """Draw ``size`` independent realizations of every direct and cooperation power."""
    gen = rng.generator
    k = profile.user_count
    direct = gen.standard_exponential((size, k)) * profile.variances
    coop = gen.standard_exponential((size, k, k)) * profile.coop_variance
    return FadingRealization(direct, coop)


@dataclass(frozen=True, eq=False)
class Geometry:
    cell_radius: float
    ring_width: float
    max_angle: float
    user_count: int
    distances: Optional[np.ndarray] = None
    angles: Optional[np.ndarray] = None
    pairwise: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.user_count < 2:
            raise GeometryError("need at least two users")
        if not self.cell_radius > 0:
            raise GeometryError("cell radius must be > 0")
        if not 0 <= self.ring_width <= self.cell_radius:
            raise GeometryError(
                f"ring width {self.ring_width} must lie in [0, cell radius {self.cell_radius}]")
        if self.max_angle < 0:
            raise GeometryError("max angle must be >= 0")

    @property
    def positions(self) -> np.ndarray:
        return np.stack([self.distances * np.cos(self.angles),
                         self.distances * np.sin(self.angles)], axis=-1)


def draw_annulus(geom: Geometry, gen: np.random.Generator, size: int):
    """Vectorized draw of ``size`` placements -> (radii, angles), each (size, K).

    Radius uniform on [R - width, R]; first user at angle 0, the others
    uniform on [0, max_angle), so every pairwise separation is < max_angle.
    """
    k = geom.user_count
    r = geom.cell_radius - geom.ring_width * gen.random((size, k))
    ang = np.zeros((size, k))
    ang[:, 1:] = geom.max_angle * gen.random((size, k - 1))
    return r, ang


def _pairwise(r, ang):
    x, y = r * np.cos(ang), r * np.sin(ang)
    return np.hypot(x[..., :, None] - x[..., None, :], y[..., :, None] - y[..., None, :])


def place_users_annulus(geom: Geometry, rng: SeededRng) -> Geometry:
    r, ang = draw_annulus(geom, rng.generator, 1)
    r, ang = r[0], ang[0]
    return replace(geom, distances=r, angles=ang, pairwise=_pairwise(r, ang))


def profile_from_geometry(geom: Geometry, noise_variance: float,
                          min_coop_distance: float = 1.0) -> ChannelProfile:
    """L_i = 1/d_i^2 and L_c = 1/d_ik^2 from the planar user positions.

    Inter-user distances are floored at ``min_coop_distance`` so coincident
    users do not produce an infinite cooperation gain.
    """
    if geom.distances is None:
        raise GeometryError("geometry has no placed users")
    d = np.maximum(geom.pairwise, min_coop_distance)
    coop = 1.0 / d**2
    np.fill_diagonal(coop, 0.0)
    return ChannelProfile(path_loss(geom.distances), coop, noise_variance)
