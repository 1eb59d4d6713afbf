"""Fidelity functionals for the two copies and their weighted trade-off."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qcm.bloch import StateAngles
from qcm.channels import AffineMap, affine_extract, copy_map_coefficients
from qcm.cloner import ParamSet
from qcm.ensembles import EnsembleMoments, EnsembleSpec, quadrature_nodes

FD_STEP = 1e-6
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class FidelityReport:
    f_a: float
    f_b: float
    objective: float
    p: float


def single_copy_fidelity(amap: AffineMap, angles: StateAngles) -> float:
    st2 = math.sin(angles.theta) ** 2
    ct = math.cos(angles.theta)
    return 0.5 * (
        1
        + amap.eta_x * st2 * math.cos(angles.phi) ** 2
        + amap.eta_y * st2 * math.sin(angles.phi) ** 2
        + amap.eta_z * ct * ct
        + amap.delta_z * ct
    )


def average_fidelity(amap: AffineMap, m: EnsembleMoments) -> float:
    """Ensemble-averaged fidelity from the four moments."""
    return 0.5 * (
        1 + amap.eta_x * m.nx2_bar + amap.eta_y * m.ny2_bar + amap.eta_z * m.nz2_bar + amap.delta_z * m.nz_bar
    )


def _avg(coeffs, m: EnsembleMoments) -> float:
    ex, ey, ez, dz = coeffs
    return 0.5 * (1 + ex * m.nx2_bar + ey * m.ny2_bar + ez * m.nz2_bar + dz * m.nz_bar)


def objective_value(x, p: float, m: EnsembleMoments) -> float:
    """``p F_A + (1 - p) F_B`` for raw angles ``x``; cheap enough for optimisers."""
    return p * _avg(copy_map_coefficients(x, "A"), m) + (1 - p) * _avg(copy_map_coefficients(x, "B"), m)


def objective(p: float, omega: ParamSet, m: EnsembleMoments) -> FidelityReport:
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    x = omega.as_array()
    f_a = _avg(copy_map_coefficients(x, "A"), m)
    f_b = _avg(copy_map_coefficients(x, "B"), m)
    return FidelityReport(f_a, f_b, p * f_a + (1 - p) * f_b, p)


def gradient(p: float, omega: ParamSet, m: EnsembleMoments, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of the objective in all six angles."""
    x = omega.as_array()
    g = np.empty(6)
    for i in range(6):
        hi, lo = x.copy(), x.copy()
        hi[i] += step
        lo[i] -= step
        g[i] = (objective_value(hi, p, m) - objective_value(lo, p, m)) / (2 * step)
    return g


def project_gradient(g: np.ndarray, x: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
    """Zero the components that would leave ``[0, pi]`` when ascending."""
    g = g.copy()
    at_lo = (x <= tol) & (g < 0)
    at_hi = (x >= math.pi - tol) & (g > 0)
    g[at_lo | at_hi] = 0.0
    return g


def stationarity_residual(
    p: float, omega: ParamSet, m: EnsembleMoments, components=None, step: float = FD_STEP
) -> float:
    """Norm of the box-projected objective gradient.

    ``components`` restricts the norm to a subset of angle indices (e.g.
    ``(4, 5)`` for the two gamma angles).
    """
    g = project_gradient(gradient(p, omega, m, step), omega.as_array())
    if components is not None:
        g = g[list(components)]
    return float(np.linalg.norm(g))


def average_fidelity_oracle(omega: ParamSet, spec: EnsembleSpec, copy: str, resolution: int = 64) -> float:
    """Average fidelity by integrating the measured copy map over the ensemble."""
    amap = affine_extract(omega, copy)
    vecs, w = quadrature_nodes(spec, resolution)
    # single-copy fidelity at each node, written on the unit vector
    vals = 0.5 * (
        1
        + amap.eta_x * vecs[:, 0] ** 2
        + amap.eta_y * vecs[:, 1] ** 2
        + amap.eta_z * vecs[:, 2] ** 2
        + amap.delta_z * vecs[:, 2]
    )
    return math.fsum(w * vals)


def no_cloning_gap(f_a: float, f_b: float) -> float:
    """``sqrt((1-F_A)(1-F_B)) - [1/2 - (1-F_A) - (1-F_B)]``; nonnegative, zero when saturated."""
    ea, eb = 1 - f_a, 1 - f_b
    return math.sqrt(max(ea * eb, 0.0)) - (0.5 - ea - eb)


def no_cloning_residual(f_a: float, f_b: float) -> float:
    """Absolute residual of the no-cloning equality in squared form.

    Equivalent to :func:`no_cloning_gap` being zero (given ``1/2 - e_A - e_B
    >= 0``), but well conditioned when one infidelity vanishes: there the
    square root turns a one-ulp error in ``F`` into ~1e-8.
    """
    ea, eb = 1 - f_a, 1 - f_b
    rhs = 0.5 - ea - eb
    if rhs < -1e-12:
        return float("inf")
    return abs(ea * eb - rhs * rhs)
