"""Input ensembles and the four moments that fix every average fidelity.

An ensemble is reduced to ``(nz_bar, nx2_bar, ny2_bar, nz2_bar)`` measured in
its canonical frame (see :func:`qcm.bloch.canonical_frame`). Moments are
available in closed form and, independently, by deterministic quadrature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from qcm.bloch import (
    StateAngles,
    bloch_to_angles,
    canonical_frame,
    pure_density,
)

SUM_RULE_TOL = 1e-10

VARIANTS = ("fixed_theta", "equatorial", "uniform_sphere", "mirror_pc", "two_state", "discrete")


class EnsembleError(ValueError):
    """Raised for an ensemble outside its validity domain."""


@dataclass(frozen=True)
class EnsembleMoments:
    nz_bar: float
    nx2_bar: float
    ny2_bar: float
    nz2_bar: float

    def __post_init__(self):
        total = self.nx2_bar + self.ny2_bar + self.nz2_bar
        if abs(total - 1) > SUM_RULE_TOL:
            raise EnsembleError(f"second moments sum to {total}, expected 1")
        if min(self.nx2_bar, self.ny2_bar, self.nz2_bar) < -SUM_RULE_TOL:
            raise EnsembleError("negative second moment")
        if self.nz_bar**2 > self.nz2_bar + SUM_RULE_TOL:
            raise EnsembleError("nz_bar**2 exceeds nz2_bar")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.nz_bar, self.nx2_bar, self.ny2_bar, self.nz2_bar)

    @property
    def phase_symmetric(self) -> bool:
        """True when ``nx2_bar == ny2_bar`` (phase-independent optimum exists)."""
        return abs(self.nx2_bar - self.ny2_bar) <= SUM_RULE_TOL

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "EnsembleMoments":
        nz, nx2, ny2, nz2 = (float(v) for v in values)
        return cls(nz, nx2, ny2, nz2)


UNIFORM_SPHERE_MOMENTS = EnsembleMoments(0.0, 1 / 3, 1 / 3, 1 / 3)
EQUATORIAL_MOMENTS = EnsembleMoments(0.0, 0.5, 0.5, 0.0)


@dataclass(frozen=True)
class EnsembleSpec:
    """One of the supported input ensembles.

    ``theta_tilde`` is used by ``fixed_theta`` and ``mirror_pc``; ``overlap``
    and ``weight`` by ``two_state`` (weight is the probability of the first
    state); ``states`` by ``discrete``.
    """

    variant: str
    theta_tilde: float | None = None
    overlap: float | None = None
    weight: float | None = None
    states: tuple[tuple[StateAngles, float], ...] = field(default=())

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise EnsembleError(f"unknown ensemble variant {self.variant!r}")
        if self.variant in ("fixed_theta", "mirror_pc"):
            if self.theta_tilde is None or not (0 <= self.theta_tilde <= np.pi):
                raise EnsembleError(f"theta_tilde must lie in [0, pi], got {self.theta_tilde}")
        if self.variant == "two_state":
            if self.overlap is None or not (0 <= self.overlap < 1):
                raise EnsembleError(f"overlap must lie in [0, 1), got {self.overlap}")
            if not (0 <= self.k <= 1):
                raise EnsembleError(f"weight must lie in [0, 1], got {self.weight}")
        if self.variant == "discrete":
            if not self.states:
                raise EnsembleError("discrete ensemble needs at least one state")
            w = np.array([w for _, w in self.states])
            if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12 * max(1, len(w)):
                raise EnsembleError("discrete weights must be positive and sum to 1")

    @property
    def k(self) -> float:
        return 0.5 if self.weight is None else float(self.weight)

    @property
    def reflected(self) -> bool:
        """Fixed-theta ensembles below the equator are relabelled up <-> down."""
        return self.variant == "fixed_theta" and self.theta_tilde > np.pi / 2

    @property
    def effective_theta(self) -> float:
        """``theta_tilde`` folded into ``[0, pi/2]``."""
        t = float(self.theta_tilde)
        return np.pi - t if t > np.pi / 2 else t

    # -- JSON ---------------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"variant": self.variant}
        if self.theta_tilde is not None:
            d["theta_tilde"] = self.theta_tilde
        if self.overlap is not None:
            d["overlap"] = self.overlap
        if self.weight is not None:
            d["weight"] = self.weight
        if self.states:
            d["states"] = [{"theta": a.theta, "phi": a.phi, "w": w} for a, w in self.states]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EnsembleSpec":
        states = tuple(
            (StateAngles(float(s["theta"]), float(s["phi"])), float(s["w"])) for s in d.get("states", ())
        )
        return cls(
            variant=d["variant"],
            theta_tilde=d.get("theta_tilde"),
            overlap=d.get("overlap"),
            weight=d.get("weight"),
            states=states,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "EnsembleSpec":
        return cls.from_dict(json.loads(text))


def two_state_support(overlap: float) -> tuple[StateAngles, StateAngles]:
    """The states ``cos(t/2)|up> +- sin(t/2)|down>`` with ``cos t = overlap``."""
    t = float(np.arccos(overlap))
    return StateAngles(t, 0.0), StateAngles(t, np.pi)


def two_state_bloch_vectors(overlap: float, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Canonical-frame Bloch vectors of the two-state ensemble.

    The first state (probability ``k``) gets a nonnegative x component. For
    ``overlap = 1/2`` these reduce to the vectors used for unequal-weight
    two-state cloning.
    """
    st = np.sqrt(1 - overlap**2)
    n1 = np.array([st, 0.0, overlap])
    n2 = np.array([-st, 0.0, overlap])
    mean = k * n1 + (1 - k) * n2
    length = np.linalg.norm(mean)
    if length <= 1e-15:
        return n1, n2
    ez = mean / length
    ex = np.array([ez[2], 0.0, -ez[0]])
    if n1 @ ex < 0:
        ex = -ex
    return np.array([n1 @ ex, 0.0, n1 @ ez]), np.array([n2 @ ex, 0.0, n2 @ ez])


def _fixed_theta_moments(t: float) -> EnsembleMoments:
    c, s2 = np.cos(t), np.sin(t) ** 2
    return EnsembleMoments(c, s2 / 2, s2 / 2, c * c)


def moments_closed_form(spec: EnsembleSpec) -> EnsembleMoments:
    """Exact canonical-frame moments of ``spec``."""
    v = spec.variant
    if v == "fixed_theta":
        return _fixed_theta_moments(spec.effective_theta)
    if v == "equatorial":
        return EQUATORIAL_MOMENTS
    if v == "uniform_sphere":
        return UNIFORM_SPHERE_MOMENTS
    if v == "mirror_pc":
        t = spec.theta_tilde
        return EnsembleMoments(0.0, np.sin(t) ** 2 / 2, np.sin(t) ** 2 / 2, np.cos(t) ** 2)
    if v == "two_state":
        s, k = spec.overlap, spec.k
        if k == 0.5:
            return EnsembleMoments(s, 1 - s * s, 0.0, s * s)
        r1, r2 = two_state_bloch_vectors(s, k)
        w = np.array([k, 1 - k])
        r = np.vstack([r1, r2])
        return EnsembleMoments(
            float(w @ r[:, 2]), float(w @ r[:, 0] ** 2), 0.0, float(w @ r[:, 2] ** 2)
        )
    return _discrete_moments(spec.states)


def discrete_canonical_vectors(states: Sequence[tuple[StateAngles, float]]) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vectors of a finite ensemble in its canonical frame, and weights."""
    states = [(a, w) for a, w in states if w > 0]
    frame = canonical_frame(states)
    vecs = np.array([frame.bloch(pure_density(a)) for a, _ in states])
    return vecs, np.array([w for _, w in states])


def _discrete_moments(states) -> EnsembleMoments:
    vecs, w = discrete_canonical_vectors(states)
    return EnsembleMoments(
        float(w @ vecs[:, 2]),
        float(w @ vecs[:, 0] ** 2),
        float(w @ vecs[:, 1] ** 2),
        float(w @ vecs[:, 2] ** 2),
    )


def _discrete_support(spec: EnsembleSpec) -> list[tuple[StateAngles, float]]:
    if spec.variant == "discrete":
        return list(spec.states)
    a1, a2 = two_state_support(spec.overlap)
    return [(a1, spec.k), (a2, 1 - spec.k)]


def quadrature_nodes(spec: EnsembleSpec, resolution: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Canonical-frame unit vectors and weights that integrate over ``spec``.

    Continuous azimuths use the periodic trapezoid rule with ``resolution``
    points; the uniform sphere uses Gauss-Legendre in ``cos(theta)``. Finite
    ensembles return their support points exactly.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    v = spec.variant
    if v in ("two_state", "discrete"):
        support = [(a, w) for a, w in _discrete_support(spec) if w > 0]
        return discrete_canonical_vectors(support)

    phi = 2 * np.pi * np.arange(resolution) / resolution
    if v == "uniform_sphere":
        x, wx = np.polynomial.legendre.leggauss(resolution)
        thetas = np.arccos(x)
        tw = wx / 2
    elif v == "equatorial":
        thetas, tw = np.array([np.pi / 2]), np.array([1.0])
    elif v == "fixed_theta":
        thetas, tw = np.array([spec.effective_theta]), np.array([1.0])
    else:  # mirror_pc
        t = spec.theta_tilde
        thetas, tw = np.array([t, np.pi - t]), np.array([0.5, 0.5])

    tt, pp = np.meshgrid(thetas, phi, indexing="ij")
    weights = (tw[:, None] * np.full(resolution, 1 / resolution)[None, :]).ravel()
    st = np.sin(tt).ravel()
    vecs = np.column_stack([st * np.cos(pp).ravel(), st * np.sin(pp).ravel(), np.cos(tt).ravel()])
    return vecs, weights


def moments_quadrature(spec: EnsembleSpec, resolution: int = 64) -> EnsembleMoments:
    """Moments by numerical integration over :func:`quadrature_nodes`."""
    vecs, w = quadrature_nodes(spec, resolution)
    return EnsembleMoments(
        float(w @ vecs[:, 2]),
        float(w @ vecs[:, 0] ** 2),
        float(w @ vecs[:, 1] ** 2),
        float(w @ vecs[:, 2] ** 2),
    )


def sample(spec: EnsembleSpec, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` states from ``spec`` as a ``(count, 2)`` array of (theta, phi).

    Angles refer to the canonical frame and follow :func:`angles_to_bloch`.
    The generator is seeded explicitly; identical arguments give identical
    output.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    v = spec.variant
    if v in ("two_state", "discrete"):
        vecs, w = discrete_canonical_vectors(_discrete_support(spec))
        support = np.array([[bloch_to_angles(r).theta, bloch_to_angles(r).phi] for r in vecs])
        idx = rng.choice(len(w), size=count, p=w / w.sum())
        return support[idx]
    phi = rng.uniform(0.0, 2 * np.pi, size=count)
    if v == "uniform_sphere":
        theta = np.arccos(rng.uniform(-1.0, 1.0, size=count))
    elif v == "equatorial":
        theta = np.full(count, np.pi / 2)
    elif v == "fixed_theta":
        theta = np.full(count, spec.effective_theta)
    else:
        t = spec.theta_tilde
        theta = np.where(rng.random(count) < 0.5, t, np.pi - t)
    return np.column_stack([theta, phi])


def empirical_moments(angles: np.ndarray) -> EnsembleMoments:
    """Sample moments of an array of (theta, phi) rows."""
    angles = np.asarray(angles, dtype=float)
    st = np.sin(angles[:, 0])
    vecs = np.column_stack([st * np.cos(angles[:, 1]), st * np.sin(angles[:, 1]), np.cos(angles[:, 0])])
    return EnsembleMoments(
        float(vecs[:, 2].mean()),
        float((vecs[:, 0] ** 2).mean()),
        float((vecs[:, 1] ** 2).mean()),
        float((vecs[:, 2] ** 2).mean()),
    )
