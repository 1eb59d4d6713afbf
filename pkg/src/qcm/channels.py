"""Copy reduction, affine Bloch maps and the Kraus families that realise them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qcm.bloch import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, bloch_from_density, check_density, density_from_bloch
from qcm.cloner import ParamSet, evolve

COPIES = ("A", "B")
OFFDIAG_TOL = 1e-10
OFFDIAG_FAIL = 1e-8

# probe Bloch vectors: +z, -z, +x, +y, plus the centre as a redundancy check
PROBES = np.array([[0, 0, 1], [0, 0, -1], [1, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=float)


class NonDiagonalMapError(RuntimeError):
    """The extracted copy map has off-diagonal terms or a transverse shift."""


@dataclass(frozen=True)
class AffineMap:
    """``r -> (eta_x r_x, eta_y r_y, eta_z r_z + delta_z)``."""

    eta_x: float
    eta_y: float
    eta_z: float
    delta_z: float

    def apply(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.array([self.eta_x, self.eta_y, self.eta_z]) * r + np.array([0, 0, self.delta_z])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.eta_x, self.eta_y, self.eta_z, self.delta_z)

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        return np.diag([self.eta_x, self.eta_y, self.eta_z]), np.array([0.0, 0.0, self.delta_z])

    def max_abs_diff(self, other: "AffineMap") -> float:
        return float(np.max(np.abs(np.subtract(self.as_tuple(), other.as_tuple()))))


def _check_copy(copy: str) -> str:
    if copy not in COPIES:
        raise ValueError(f"copy must be 'A' or 'B', got {copy!r}")
    return copy


def reduce(state: np.ndarray, copy: str) -> np.ndarray:
    """Partial trace of the ABC state onto copy A (trace BC) or copy B (trace AC)."""
    t = np.asarray(state, dtype=complex).reshape(2, 2, 2, 2, 2, 2)
    if _check_copy(copy) == "A":
        return np.einsum("ijkljk->il", t)
    return np.einsum("ijkilk->jl", t)


def copy_map_coefficients(x: Sequence[float], copy: str) -> tuple[float, float, float, float]:
    """Closed-form ``(eta_x, eta_y, eta_z, delta_z)`` for angles ``x`` (any reals)."""
    a, at, b, bt, g, gt = x
    if copy == "B":
        g, gt = math.pi - g, math.pi - gt
    ca, sa = math.cos(a / 2), math.sin(a / 2)
    cat, sat = math.cos(at / 2), math.sin(at / 2)
    cb, sb = math.cos(b / 2), math.sin(b / 2)
    cbt, sbt = math.cos(bt / 2), math.sin(bt / 2)
    cg, sg = math.cos(g / 2), math.sin(g / 2)
    cgt, sgt = math.cos(gt / 2), math.sin(gt / 2)
    p = ca * sat
    q = sa * cat
    eta_x = p * (cb * cgt + sb * sgt) + q * (cbt * cg + sbt * sg)
    eta_y = p * (cb * cgt - sb * sgt) + q * (cbt * cg - sbt * sg)
    up = ca * ca * math.cos(b) + sa * sa * math.cos(g)
    down = cat * cat * math.cos(bt) + sat * sat * math.cos(gt)
    return eta_x, eta_y, 0.5 * (up + down), 0.5 * (up - down)


def affine_closed_form(omega: ParamSet, copy: str) -> AffineMap:
    """Copy map of the isometry, read off the analytic expressions."""
    return AffineMap(*copy_map_coefficients(omega.as_array(), _check_copy(copy)))


def affine_from_probes(channel) -> tuple[np.ndarray, np.ndarray]:
    """General affine map ``r -> M r + d`` of a single-qubit channel.

    ``channel`` maps a 2x2 density matrix to a 2x2 density matrix. Nothing
    about the structure of ``M`` is assumed.
    """
    out = np.array([bloch_from_density(channel(density_from_bloch(p))) for p in PROBES])
    shift = 0.5 * (out[0] + out[1])
    m = np.column_stack([out[2] - shift, out[3] - shift, 0.5 * (out[0] - out[1])])
    if np.max(np.abs(out[4] - shift)) > OFFDIAG_FAIL:
        raise NonDiagonalMapError("channel response is not affine")
    return m, shift


def offdiagonal_response(m: np.ndarray, shift: np.ndarray) -> float:
    """Largest off-diagonal matrix element or transverse shift."""
    off = m - np.diag(np.diag(m))
    return float(max(np.max(np.abs(off)), abs(shift[0]), abs(shift[1])))


def affine_extract(omega: ParamSet, copy: str, return_offdiag: bool = False):
    """Copy map measured by evolving probe states through the isometry.

    Raises:
        NonDiagonalMapError: if any off-diagonal response exceeds ``1e-8``.
    """
    _check_copy(copy)
    m, shift = affine_from_probes(lambda rho: reduce(evolve(omega, rho), copy))
    off = offdiagonal_response(m, shift)
    if off > OFFDIAG_FAIL:
        raise NonDiagonalMapError(f"off-diagonal response {off:.3e} for {omega}")
    amap = AffineMap(float(m[0, 0]), float(m[1, 1]), float(m[2, 2]), float(shift[2]))
    return (amap, off) if return_offdiag else amap


# -- Kraus channels ---------------------------------------------------------


@dataclass(frozen=True)
class KrausSet:
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        total = sum(e.conj().T @ e for e in self.elements)
        if np.max(np.abs(total - I2)) > 1e-12:
            raise ValueError("Kraus operators are not complete (sum E^dag E != I)")

    def completeness_error(self) -> float:
        total = sum(e.conj().T @ e for e in self.elements)
        return float(np.max(np.abs(total - I2)))

    def __len__(self):
        return len(self.elements)


def _kraus(*elements) -> KrausSet:
    return KrausSet(tuple(np.asarray(e, dtype=complex) for e in elements))


def kraus_apply(k: KrausSet, rho) -> np.ndarray:
    rho = check_density(rho)
    return sum(e @ rho @ e.conj().T for e in k.elements)


def affine_from_kraus(k: KrausSet) -> tuple[np.ndarray, np.ndarray]:
    return affine_from_probes(lambda rho: kraus_apply(k, rho))


def kraus_ad(gamma_k: float) -> KrausSet:
    """Amplitude damping toward ``|up>`` with damping angle ``gamma_k``."""
    c, s = math.cos(gamma_k / 2), math.sin(gamma_k / 2)
    return _kraus([[1, 0], [0, c]], [[0, s], [0, 0]])


def kraus_gad(alpha: float, gamma_k: float) -> KrausSet:
    """Generalised amplitude damping; ``alpha`` splits damping between the poles."""
    c, s = math.cos(gamma_k / 2), math.sin(gamma_k / 2)
    ca, sa = math.cos(alpha / 2), math.sin(alpha / 2)
    return _kraus(
        ca * np.array([[1, 0], [0, c]]),
        ca * np.array([[0, s], [0, 0]]),
        sa * np.array([[c, 0], [0, 1]]),
        sa * np.array([[0, 0], [s, 0]]),
    )


def sp_coefficients(alpha: float) -> tuple[float, float, float]:
    """Weights ``(a, b, radicand)`` of the symmetric Pauli channel.

    The radicand ``1 - 2a^2 - b^2`` equals ``3/8 + cos(alpha)/8 +
    sin(alpha)/(2 sqrt 2)``, whose minimum over all real ``alpha`` is exactly
    zero, so the channel is defined for every angle; only rounding can push
    it below zero.
    """
    a = 0.5 * math.sin(alpha / 2)
    b = (math.sqrt(2) / 2) * (math.cos(alpha / 2) - (math.sqrt(2) / 2) * math.sin(alpha / 2))
    return a, b, 1 - 2 * a * a - b * b


def kraus_sp(alpha: float) -> KrausSet:
    """Symmetric Pauli channel ``{sqrt(1-2a^2-b^2) I, a X, a Y, b Z}``."""
    a, b, rad = sp_coefficients(alpha)
    if rad < -1e-12:
        raise ValueError(f"identity weight 1-2a^2-b^2 = {rad} is negative")
    return _kraus(math.sqrt(max(rad, 0.0)) * I2, a * SIGMA_X, a * SIGMA_Y, b * SIGMA_Z)


def kraus_depolarizing(eta: float) -> KrausSet:
    """Depolarizing channel ``r -> eta r`` for ``-1/3 <= eta <= 1``."""
    q = (1 - eta) / 4
    if q < -1e-15 or 1 - 3 * q < -1e-15:
        raise ValueError(f"eta={eta} is not a depolarizing shrink factor")
    q = min(max(q, 0.0), 1 / 3)
    return _kraus(math.sqrt(1 - 3 * q) * I2, math.sqrt(q) * SIGMA_X, math.sqrt(q) * SIGMA_Y, math.sqrt(q) * SIGMA_Z)


def kraus_dad(beta: float) -> KrausSet:
    """Deformed amplitude damping; at ``beta = 0`` it is amplitude damping at ``pi/2``."""
    h = math.sqrt(2) / 2
    return _kraus([[0, h], [math.sin(beta / 2), 0]], [[math.cos(beta / 2), 0], [0, h]])


# -- documented maps of each family -----------------------------------------


def ad_map(gamma_k: float) -> AffineMap:
    c = math.cos(gamma_k / 2)
    return AffineMap(c, c, c * c, math.sin(gamma_k / 2) ** 2)


def gad_map(alpha: float, gamma_k: float) -> AffineMap:
    c = math.cos(gamma_k / 2)
    return AffineMap(c, c, c * c, math.cos(alpha) * math.sin(gamma_k / 2) ** 2)


def sp_map(alpha: float) -> AffineMap:
    e = (math.sqrt(2) / 2) * math.sin(alpha)
    return AffineMap(e, e, 0.5 * (1 + math.cos(alpha)), 0.0)


def dad_map(beta: float) -> AffineMap:
    return AffineMap(
        math.cos(math.pi / 4 - beta / 2),
        math.cos(math.pi / 4 + beta / 2),
        0.5 * math.cos(beta),
        0.5 * math.cos(beta),
    )
