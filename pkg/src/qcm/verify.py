"""Self-check suites run by ``qcm verify``.

Each check returns a :class:`CheckResult`; a suite passes when all of its
checks do. The ``quick`` suite skips the numerical optimiser and uses fewer
random machines.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from qcm import channels, design
from qcm.channels import affine_closed_form, affine_extract
from qcm.cloner import ParamSet
from qcm.ensembles import (
    EQUATORIAL_MOMENTS,
    UNIFORM_SPHERE_MOMENTS,
    EnsembleSpec,
    moments_closed_form,
)
from qcm.fidelity import average_fidelity, average_fidelity_oracle, no_cloning_residual, stationarity_residual

SUITES = ("quick", "full")
P_GRID = tuple(i / 10 for i in range(11))
THETA_GRID = tuple(i * math.pi / 8 for i in range(5))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    seconds: float


def _check(name, tol, fn) -> CheckResult:
    t0 = time.perf_counter()
    worst = float(fn())
    return CheckResult(name, bool(worst <= tol), worst, tol, time.perf_counter() - t0)


def _random_omegas(n, seed):
    rng = np.random.default_rng(seed)
    return [ParamSet.from_array(x) for x in rng.uniform(0, math.pi, size=(n, 6))]


def universal_symmetric():
    want = 5 / 6
    a = design.design_universal(0.5)
    b = design.design_centered_symmetric(UNIFORM_SPHERE_MOMENTS)
    return max(abs(a.f_a - want), abs(a.f_b - want), abs(b.f_a - want), abs(b.f_b - want))


def universal_frontier():
    worst = 0.0
    for p in P_GRID:
        r = design.design_universal(p)
        fa, fb = design.universal_fidelities(p)
        worst = max(worst, abs(r.f_a - fa), abs(r.f_b - fb), no_cloning_residual(r.f_a, r.f_b))
    return worst


def phase_covariant():
    worst = 0.0
    for p in P_GRID:
        r = design.design_phase_covariant(p)
        fa, fb = design.phase_covariant_fidelities(p)
        worst = max(worst, abs(r.f_a - fa), abs(r.f_b - fb))
    return worst


def fixed_theta():
    worst = 0.0
    for t in THETA_GRID:
        r = design.design_fixed_theta(t, 0.5)
        f = design.fixed_theta_symmetric_fidelity(t)
        worst = max(worst, abs(r.f_a - f), abs(r.f_b - f))
    return worst


def two_state():
    r = design.design_two_state(0.5)
    want_map = channels.AffineMap(math.sqrt(3) / 2, 0.5, math.sqrt(3) / 4, math.sqrt(3) / 4)
    f = 0.5 * (1 + 9 * math.sqrt(3) / 16)
    return max(abs(r.f_a - f), abs(r.f_b - f), r.map_a.max_abs_diff(want_map), r.map_b.max_abs_diff(want_map))


def mirror_pc():
    t0 = math.acos(1 / math.sqrt(3))
    r = design.design_mirror_pc(t0)
    third = channels.AffineMap(2 / 3, 2 / 3, 2 / 3, 0.0)
    worst = max(r.map_a.max_abs_diff(third), abs(r.f_a - 5 / 6))
    for t in THETA_GRID:
        worst = max(worst, abs(design.design_mirror_pc(t).f_a - design.mirror_pc_fidelity(t)))
    return worst


def affine_agreement(n):
    worst = 0.0
    for w in _random_omegas(n, 1):
        for copy in "AB":
            amap, off = affine_extract(w, copy, return_offdiag=True)
            worst = max(worst, amap.max_abs_diff(affine_closed_form(w, copy)), off)
    return worst


def kraus_families():
    worst = 0.0
    for x in np.linspace(0, math.pi, 9):
        pairs = [
            (channels.kraus_ad(x), channels.ad_map(x)),
            (channels.kraus_gad(x / 2, x), channels.gad_map(x / 2, x)),
            (channels.kraus_sp(x), channels.sp_map(x)),
            (channels.kraus_dad(x), channels.dad_map(x)),
        ]
        for k, amap in pairs:
            m, shift = channels.affine_from_kraus(k)
            want_m, want_shift = amap.matrix()
            worst = max(worst, np.max(np.abs(m - want_m)), np.max(np.abs(shift - want_shift)), k.completeness_error())
    return worst


CANONICAL_SPECS = (
    EnsembleSpec("fixed_theta", theta_tilde=math.pi / 3),
    EnsembleSpec("equatorial"),
    EnsembleSpec("uniform_sphere"),
    EnsembleSpec("mirror_pc", theta_tilde=math.pi / 5),
    EnsembleSpec("two_state", overlap=0.5),
    EnsembleSpec("two_state", overlap=0.5, weight=0.2),
)


def quadrature_oracle(n):
    worst = 0.0
    for spec in CANONICAL_SPECS:
        m = moments_closed_form(spec)
        for w in _random_omegas(n, 2):
            for copy in "AB":
                direct = average_fidelity(affine_closed_form(w, copy), m)
                worst = max(worst, abs(direct - average_fidelity_oracle(w, spec, copy)))
    return worst


def symmetric_reductions(n):
    rng = np.random.default_rng(3)
    worst = 0.0
    moments = (UNIFORM_SPHERE_MOMENTS, EQUATORIAL_MOMENTS, moments_closed_form(EnsembleSpec("two_state", overlap=0.3)))
    for _ in range(n):
        x = rng.uniform(0, math.pi, 6)
        m = moments[rng.integers(len(moments))]
        w = ParamSet.from_array(x).replace(gamma=math.pi / 2, gamma_tilde=math.pi / 2)
        worst = max(worst, stationarity_residual(0.5, w, m, components=(4, 5)))
        w = ParamSet.from_array(x).replace(beta=0.0, beta_tilde=0.0)
        worst = max(worst, stationarity_residual(rng.uniform(), w, UNIFORM_SPHERE_MOMENTS, components=(2, 3)))
    return worst


def closed_form_cases():
    """Every closed-form design on the standard grids, with its objective weight."""
    out = []
    for p in P_GRID:
        out.append(design.design_universal(p))
        out.append(design.design_phase_covariant(p))
        for t in THETA_GRID:
            out.append(design.design_fixed_theta(t, p))
    out.append(design.design_centered_symmetric(UNIFORM_SPHERE_MOMENTS))
    out.append(design.design_mirror_pc(math.acos(1 / math.sqrt(3))))
    out.extend(design.design_mirror_pc(t) for t in THETA_GRID)
    out.append(design.design_two_state(0.5))
    out.append(design.design_two_state_weighted(1e-6))
    return out


def optimizer_rediscovery():
    worst = 0.0
    for r in closed_form_cases():
        num = design.optimize_numeric(r.moments, r.weight)
        worst = max(worst, abs(num.objective - r.objective))
    return worst


def run_suite(suite: str = "quick") -> list[CheckResult]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    full = suite == "full"
    checks = [
        ("universal symmetric 5/6", 1e-9, universal_symmetric),
        ("universal frontier + no-cloning", 1e-9, universal_frontier),
        ("phase-covariant fidelities", 1e-9, phase_covariant),
        ("fixed-theta fidelities", 1e-9, fixed_theta),
        ("two-state s=1/2", 1e-9, two_state),
        ("mirror phase-covariant", 1e-9, mirror_pc),
        ("probe extraction vs closed form", 1e-12, lambda: affine_agreement(1000 if full else 100)),
        ("Kraus families", 1e-12, kraus_families),
        ("quadrature vs moments", 1e-9, lambda: quadrature_oracle(100 if full else 10)),
        ("symmetric reductions", 1e-8, lambda: symmetric_reductions(100 if full else 20)),
    ]
    if full:
        checks.append(("optimizer rediscovery", 1e-6, optimizer_rediscovery))
    return [_check(name, tol, fn) for name, tol, fn in checks]
