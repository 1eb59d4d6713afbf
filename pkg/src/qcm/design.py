"""Optimal cloning machines: closed-form settings per ensemble and a numerical search.

Every ``design_*`` function returns a :class:`DesignResult` whose angles are
expressed in the ensemble's canonical frame. ``optimize_numeric`` maximises
the same objective over the full angle box and is used to cross-check the
closed forms.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize

from qcm import channels
from qcm.channels import AffineMap, KrausSet, affine_closed_form
from qcm.cloner import ParamSet
from qcm.ensembles import (
    EnsembleMoments,
    EnsembleSpec,
    moments_closed_form,
    two_state_bloch_vectors,
)
from qcm.fidelity import objective, objective_value, stationarity_residual

log = logging.getLogger(__name__)

PI = math.pi
DEFAULT_SEED = 0x5EED_C10E
MOMENT_TOL = 1e-10
AGREEMENT_TOL = 1e-8

CHANNEL_IDS = ("AD", "GAD", "Depolarizing", "SymmetricPauli", "DAD", "Generic")


class DesignDomainError(ValueError):
    """A design was requested outside the domain where its closed form holds."""


@dataclass(frozen=True)
class DesignResult:
    case: str
    p: float
    weight: float
    omega: ParamSet
    map_a: AffineMap
    map_b: AffineMap
    f_a: float
    f_b: float
    objective: float
    residual: float
    channel_id: str
    moments: EnsembleMoments
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    def kraus(self, copy: str) -> KrausSet | None:
        """Kraus set of the named channel family realising the copy map, if any."""
        w = self.omega
        k = 0 if copy == "A" else 1
        if self.channel_id == "AD":
            return channels.kraus_ad((w.gamma_tilde, PI - w.gamma_tilde)[k])
        if self.channel_id == "GAD":
            return channels.kraus_gad(w.alpha, (w.gamma, PI - w.gamma)[k])
        if self.channel_id == "Depolarizing":
            return channels.kraus_depolarizing((self.map_a, self.map_b)[k].eta_x)
        if self.channel_id == "SymmetricPauli":
            return channels.kraus_sp(w.alpha)
        if self.channel_id == "DAD":
            return channels.kraus_dad(w.beta)
        return None


def _check_p(p: float) -> float:
    if not 0 <= p <= 1:
        raise DesignDomainError(f"p must lie in [0, 1], got {p}")
    return float(p)


def _result(case, p, omega, m, channel_id, weight=None, **diagnostics) -> DesignResult:
    weight = p if weight is None else weight
    rep = objective(weight, omega, m)
    return DesignResult(
        case=case,
        p=p,
        weight=weight,
        omega=omega,
        map_a=affine_closed_form(omega, "A"),
        map_b=affine_closed_form(omega, "B"),
        f_a=rep.f_a,
        f_b=rep.f_b,
        objective=rep.objective,
        residual=stationarity_residual(weight, omega, m),
        channel_id=channel_id,
        moments=m,
        diagnostics=diagnostics,
    )


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10, grid: int = 401) -> float:
    """Maximiser of ``f`` on ``[lo, hi]``: coarse grid scan, then golden-section refinement."""
    xs = np.linspace(lo, hi, grid)
    i = int(np.argmax([f(x) for x in xs]))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    best = 0.5 * (a + b)
    # the scan may have landed on an endpoint maximum
    return max((best, xs[0], xs[-1]), key=f)


# -- non-centred phase-independent ------------------------------------------


def fixed_theta_omega(gamma_tilde: float) -> ParamSet:
    return ParamSet(0.0, PI, 0.0, 0.0, gamma_tilde, gamma_tilde)


def design_fixed_theta(theta_tilde: float, p: float = 0.5) -> DesignResult:
    """States with a known polar angle ``theta_tilde`` in ``[0, pi/2]``.

    Copy A sees amplitude damping with angle ``gamma_tilde``, copy B with
    ``pi - gamma_tilde``; ``gamma_tilde`` is chosen by a 1-D search of the
    weighted objective.
    """
    p = _check_p(p)
    if not 0 <= theta_tilde <= PI / 2:
        raise DesignDomainError(f"theta_tilde must lie in [0, pi/2], got {theta_tilde}; reflect first")
    m = moments_closed_form(EnsembleSpec("fixed_theta", theta_tilde=theta_tilde))
    if p == 0.5:
        gt = PI / 2
    else:
        gt = golden_section_max(lambda g: objective_value(fixed_theta_omega(g).as_array(), p, m), 0.0, PI)
    return _result("fixed-theta", p, fixed_theta_omega(gt), m, "AD", theta_tilde=theta_tilde)


def fixed_theta_symmetric_fidelity(theta_tilde: float) -> float:
    c = math.cos(theta_tilde)
    return 0.5 * (1 + (math.sqrt(2) / 2) * math.sin(theta_tilde) ** 2 + 0.5 * (c * c + abs(c)))


def phase_covariant_gamma(p: float) -> float:
    """Angle with ``cos(g/2) = p / sqrt(p^2 + (1-p)^2)``."""
    return 2 * math.atan2(1 - p, p)


def design_phase_covariant(p: float = 0.5, alpha: float = PI / 2) -> DesignResult:
    """Equatorial states. ``alpha`` only moves the centre of the copy maps."""
    p = _check_p(p)
    g = phase_covariant_gamma(p)
    omega = ParamSet(alpha, PI - alpha, 0.0, 0.0, g, g)
    m = moments_closed_form(EnsembleSpec("equatorial"))
    return _result("phase-covariant", p, omega, m, "GAD")


def phase_covariant_fidelities(p: float) -> tuple[float, float]:
    n = math.hypot(p, 1 - p)
    return 0.5 * (1 + p / n), 0.5 * (1 + (1 - p) / n)


# -- centred phase-independent ----------------------------------------------


def universal_angles(p: float) -> tuple[float, float]:
    """``(alpha, gamma)`` of the optimal asymmetric universal cloner."""
    d = 1 - p + p * p
    alpha = 2 * math.acos(min(1.0, 1 / math.sqrt(2 * d)))
    return alpha, phase_covariant_gamma(p)


def universal_weight(p: float) -> float:
    """Objective weight at which the universal cloner with frontier parameter ``p`` is optimal.

    The frontier ``eta_A = p/D``, ``eta_B = (1-p)/D`` (``D = 1 - p + p^2``)
    has tangent slope ``p(2-p) / (1-p^2)``, so the weighted objective is
    maximised there for ``w = p(2-p) / (1 + 2p - 2p^2)``. ``w == p`` only at
    ``p`` in ``{0, 1/2, 1}``.
    """
    return p * (2 - p) / (1 + 2 * p - 2 * p * p)


def design_universal(p: float = 0.5) -> DesignResult:
    """Asymmetric universal cloner on the optimal frontier, labelled by ``p``.

    Fidelities are ``(1 + p/D)/2`` and ``(1 + (1-p)/D)/2``. The result's
    ``weight`` is :func:`universal_weight`, the mixture the machine maximises.
    """
    p = _check_p(p)
    alpha, gamma = universal_angles(p)
    omega = ParamSet(alpha, alpha, 0.0, 0.0, gamma, gamma)
    m = moments_closed_form(EnsembleSpec("uniform_sphere"))
    return _result("universal", p, omega, m, "Depolarizing", weight=universal_weight(p))


def universal_fidelities(p: float) -> tuple[float, float]:
    d = 1 - p + p * p
    return 0.5 * (1 + p / d), 0.5 * (1 + (1 - p) / d)


def centered_symmetric_alpha(nz2: float) -> float:
    return math.atan2(math.sqrt(2) * (1 - nz2), nz2)


def centered_symmetric_fidelity(nz2: float) -> float:
    return 0.5 + 0.25 * (nz2 + math.sqrt(nz2 * nz2 + 2 * (1 - nz2) ** 2))


def design_centered_symmetric(moments: EnsembleMoments, case: str = "centered-symmetric") -> DesignResult:
    """Symmetric cloner for ``nx2_bar == ny2_bar`` and ``nz_bar == 0``."""
    if not moments.phase_symmetric or abs(moments.nz_bar) > MOMENT_TOL:
        raise DesignDomainError("centred symmetric design needs nx2_bar == ny2_bar and nz_bar == 0")
    alpha = centered_symmetric_alpha(moments.nz2_bar)
    omega = ParamSet(alpha, alpha, 0.0, 0.0, PI / 2, PI / 2)
    return _result(case, 0.5, omega, moments, "SymmetricPauli")


def design_mirror_pc(theta_tilde: float) -> DesignResult:
    """Polar angle ``theta_tilde`` or ``pi - theta_tilde`` with equal probability."""
    if not 0 <= theta_tilde <= PI:
        raise DesignDomainError(f"theta_tilde must lie in [0, pi], got {theta_tilde}")
    m = moments_closed_form(EnsembleSpec("mirror_pc", theta_tilde=theta_tilde))
    res = design_centered_symmetric(m, case="mirror-pc")
    res.diagnostics["theta_tilde"] = theta_tilde
    return res


def mirror_pc_fidelity(theta_tilde: float) -> float:
    c2 = math.cos(theta_tilde) ** 2
    s2 = math.sin(theta_tilde) ** 2
    return 0.5 + 0.25 * (c2 + math.sqrt(c2 * c2 + 2 * s2 * s2))


# -- symmetric phase-dependent ----------------------------------------------


def phase_dependent_x(moments: EnsembleMoments) -> float:
    """``sin(pi/4 - beta/2)`` of the symmetric phase-dependent optimum.

    Uses the rationalised root ``2w / (a + sqrt(a^2 + 8 w^2))`` with
    ``a = nx2_bar`` and ``w = nz2_bar + nz_bar``, which stays finite as
    ``w -> 0``.
    """
    a = moments.nx2_bar
    w = moments.nz2_bar + moments.nz_bar
    den = a + math.sqrt(a * a + 8 * w * w)
    if den <= 0:
        raise DesignDomainError("phase-dependent closed form is singular for these moments")
    return 2 * w / den


def two_state_omega(x: float) -> ParamSet:
    beta = PI / 2 - 2 * math.asin(x)
    return ParamSet(0.0, PI, beta, 0.0, PI / 2, PI / 2)


def phase_dependent_fidelity(x: float, r_x2: float, r_z2: float, r_z: float) -> float:
    """Single-state (or averaged, with moments) fidelity of the deformed-damping cloner."""
    return 0.5 * (1 + math.sqrt(1 - x * x) * (r_x2 + x * (r_z2 + r_z)))


def design_phase_dependent(moments: EnsembleMoments, case: str = "phase-dependent") -> DesignResult:
    """Symmetric cloner for ``ny2_bar == 0``; falls back to the optimiser if singular."""
    if abs(moments.ny2_bar) > MOMENT_TOL:
        raise DesignDomainError("phase-dependent design needs ny2_bar == 0")
    try:
        x = phase_dependent_x(moments)
    except DesignDomainError:
        log.warning("closed form singular for %s; using numerical optimiser", moments)
        res = optimize_numeric(moments, 0.5)
        return dataclasses.replace(res, case=case)
    return _result(case, 0.5, two_state_omega(x), moments, "DAD", sin_quarter=x)


def design_two_state(s: float) -> DesignResult:
    """Two equiprobable pure states with overlap ``s`` in ``[0, 1)``."""
    if not 0 <= s < 1:
        raise DesignDomainError(f"overlap must lie in [0, 1), got {s}")
    m = moments_closed_form(EnsembleSpec("two_state", overlap=s))
    res = design_phase_dependent(m, case="two-state")
    res.diagnostics["overlap"] = s
    return res


def two_state_fidelity(s: float) -> float:
    """Closed-form optimal symmetric fidelity for two equiprobable states, ``s > 0``."""
    root = math.sqrt(1 - 2 * s + 9 * s * s)
    return 0.5 + (math.sqrt(2) / (32 * s)) * (1 + s) * (3 - 3 * s + root) * math.sqrt(
        -1 + 2 * s + 3 * s * s + (1 - s) * root
    )


def two_state_weighted_moments(k: float) -> tuple[EnsembleMoments, np.ndarray, np.ndarray]:
    r1, r2 = two_state_bloch_vectors(0.5, k)
    m = EnsembleMoments(
        k * r1[2] + (1 - k) * r2[2],
        k * r1[0] ** 2 + (1 - k) * r2[0] ** 2,
        0.0,
        k * r1[2] ** 2 + (1 - k) * r2[2] ** 2,
    )
    return m, r1, r2


def design_two_state_weighted(k: float) -> DesignResult:
    """Two states with overlap 1/2 and probabilities ``k`` and ``1 - k``, ``k <= 1/2``."""
    if not 0 <= k <= 0.5:
        raise DesignDomainError(f"weight k must lie in [0, 1/2], got {k}")
    m, r1, r2 = two_state_weighted_moments(k)
    x = phase_dependent_x(m)
    f1 = phase_dependent_fidelity(x, r1[0] ** 2, r1[2] ** 2, r1[2])
    f2 = phase_dependent_fidelity(x, r2[0] ** 2, r2[2] ** 2, r2[2])
    return _result(
        "two-state-weighted",
        0.5,
        two_state_omega(x),
        m,
        "DAD",
        sin_quarter=x,
        k=k,
        f_psi1=f1,
        f_psi2=f2,
        f_average=k * f1 + (1 - k) * f2,
    )


# -- numerical search -------------------------------------------------------


def _ascend(m, p, free, base, x0):
    def negf(z):
        x = base.copy()
        x[free] = z
        return -objective_value(x, p, m)

    def negjac(z, h=1e-7):
        g = np.empty(len(z))
        for i in range(len(z)):
            hi, lo = z.copy(), z.copy()
            hi[i] += h
            lo[i] -= h
            g[i] = (negf(hi) - negf(lo)) / (2 * h)
        return g

    res = minimize(
        negf,
        x0,
        jac=negjac,
        method="L-BFGS-B",
        bounds=[(0.0, PI)] * len(free),
        options={"ftol": 1e-16, "gtol": 1e-11, "maxiter": 1000},
    )
    x = base.copy()
    x[free] = np.clip(res.x, 0.0, PI)
    return objective_value(x, p, m), x


def _multistart(m, p, free, base, starts, seed):
    rng = np.random.default_rng(seed)
    x0s = rng.uniform(0.0, PI, size=(starts, len(free)))
    runs = [_ascend(m, p, free, base, x0) for x0 in x0s]
    runs.sort(key=lambda r: -r[0])
    best = runs[0][0]
    ties = [r for r in runs if best - r[0] <= 1e-12]
    winner = min(ties, key=lambda r: tuple(r[1]))
    second = runs[1][0] if len(runs) > 1 else best
    return winner, best - second


def optimize_numeric(
    moments: EnsembleMoments, p: float = 0.5, budget: int = 32, seed: int = DEFAULT_SEED
) -> DesignResult:
    """Maximise ``p F_A + (1-p) F_B`` over ``[0, pi]^6`` by seeded multi-start L-BFGS-B.

    When ``p == 1/2`` the gammas are pinned at ``pi/2`` and when
    ``nx2_bar == ny2_bar`` the betas at 0; a full six-angle search with the
    same budget is always run as well and the better of the two is returned.
    ``diagnostics['converged']`` is False when the two best starts of the
    winning search disagree by more than ``1e-8``.
    """
    p = _check_p(p)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    base = np.zeros(6)
    fixed = []
    if p == 0.5:
        base[4] = base[5] = PI / 2
        fixed += [4, 5]
    if moments.phase_symmetric:
        fixed += [2, 3]
    reduced_free = [i for i in range(6) if i not in fixed]

    full, full_gap = _multistart(moments, p, list(range(6)), np.zeros(6), budget, seed)
    if fixed:
        reduced, reduced_gap = _multistart(moments, p, reduced_free, base, budget, seed)
    else:
        reduced, reduced_gap = full, full_gap

    if reduced[0] >= full[0] - 1e-12:
        (best_val, best_x), gap = reduced, reduced_gap
    else:
        (best_val, best_x), gap = full, full_gap
    converged = gap <= AGREEMENT_TOL
    if not converged:
        log.warning("multi-start did not agree: best two starts differ by %.3e", gap)
    return _result(
        "numeric",
        p,
        ParamSet.from_array(best_x),
        moments,
        "Generic",
        converged=converged,
        start_gap=gap,
        reduced_objective=reduced[0],
        full_objective=full[0],
        reduction_consistent=abs(full[0] - reduced[0]) <= AGREEMENT_TOL,
        fixed_indices=fixed,
        budget=budget,
        seed=seed,
    )


# -- classification ---------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    phase_independent: bool
    centered: bool

    @property
    def label(self) -> str:
        a = "phase-independent" if self.phase_independent else "phase-dependent"
        b = "centered" if self.centered else "non-centered"
        return f"{a}, {b}"


def classify(map_a: AffineMap, map_b: AffineMap, tol: float = 1e-10) -> Classification:
    maps = (map_a, map_b)
    return Classification(
        phase_independent=all(abs(m.eta_x - m.eta_y) <= tol for m in maps),
        centered=all(abs(m.delta_z) <= tol for m in maps),
    )


# -- dispatch ---------------------------------------------------------------

CASES = (
    "fixed-theta",
    "phase-covariant",
    "universal",
    "centered-symmetric",
    "mirror-pc",
    "two-state",
    "two-state-weighted",
    "numeric",
)


@dataclass(frozen=True)
class DesignCase:
    """A design request. Unused fields are ignored by the selected case."""

    kind: str
    p: float = 0.5
    theta_tilde: float | None = None
    moments: EnsembleMoments | None = None
    overlap: float | None = None
    weight: float | None = None
    budget: int = 32
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.kind not in CASES:
            raise DesignDomainError(f"unknown case {self.kind!r}")

    def _need(self, name):
        v = getattr(self, name)
        if v is None:
            raise DesignDomainError(f"case {self.kind!r} requires {name}")
        return v

    def run(self) -> DesignResult:
        k = self.kind
        if k == "fixed-theta":
            return design_fixed_theta(self._need("theta_tilde"), self.p)
        if k == "phase-covariant":
            return design_phase_covariant(self.p)
        if k == "universal":
            return design_universal(self.p)
        if k == "centered-symmetric":
            return design_centered_symmetric(self._need("moments"))
        if k == "mirror-pc":
            return design_mirror_pc(self._need("theta_tilde"))
        if k == "two-state":
            return design_two_state(self._need("overlap"))
        if k == "two-state-weighted":
            return design_two_state_weighted(self._need("weight"))
        return optimize_numeric(self._need("moments"), self.p, self.budget, self.seed)
