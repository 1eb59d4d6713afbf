"""The six-angle cloning isometry and three-qubit evolution.

The output space is ordered as (A, B, C) = (copy A, copy B, ancilla) with
``up = 0``, ``down = 1`` and basis index ``4*a + 2*b + c``.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from qcm.bloch import check_density

NAMES = ("alpha", "alpha_tilde", "beta", "beta_tilde", "gamma", "gamma_tilde")


def ket(a: int, b: int, c: int) -> np.ndarray:
    v = np.zeros(8, dtype=complex)
    v[4 * a + 2 * b + c] = 1.0
    return v


@dataclass(frozen=True, order=True)
class ParamSet:
    """Machine angles (radians). The optimiser searches the box ``[0, pi]^6``."""

    alpha: float
    alpha_tilde: float
    beta: float
    beta_tilde: float
    gamma: float
    gamma_tilde: float

    def __post_init__(self):
        for name in NAMES:
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, x) -> "ParamSet":
        return cls(*(float(v) for v in x))

    def in_box(self, tol: float = 1e-12) -> bool:
        x = self.as_array()
        return bool(np.all(x >= -tol) and np.all(x <= np.pi + tol))

    def replace(self, **kw) -> "ParamSet":
        d = dict(zip(NAMES, astuple(self)))
        d.update(kw)
        return ParamSet(**d)


@dataclass(frozen=True)
class Isometry:
    """Images of ``|up>`` and ``|down>`` in the eight-dimensional ABC space."""

    col_up: np.ndarray
    col_down: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """The 8x2 matrix ``[col_up, col_down]``."""
        return np.column_stack([self.col_up, self.col_down])


def build_isometry(omega: ParamSet) -> Isometry:
    h = omega.as_array() / 2
    ca, cat, cb, cbt, cg, cgt = np.cos(h)
    sa, sat, sb, sbt, sg, sgt = np.sin(h)

    u_plus = cb * ket(0, 0, 0) + sb * ket(1, 1, 0)  # |u+>_AB |up>_C
    v_plus = cg * ket(0, 1, 1) + sg * ket(1, 0, 1)  # |v+>_AB |down>_C
    u_minus = sbt * ket(0, 0, 1) + cbt * ket(1, 1, 1)  # |u->_AB |down>_C
    v_minus = sgt * ket(0, 1, 0) + cgt * ket(1, 0, 0)  # |v->_AB |up>_C

    return Isometry(ca * u_plus + sa * v_plus, cat * u_minus + sat * v_minus)


def evolve(omega: ParamSet, rho) -> np.ndarray:
    """Three-qubit output ``V rho V^dagger`` for a single-qubit input.

    The input is split into its eigen-mixture ``(1+r)/2 |psi><psi| +
    (1-r)/2 |psi_perp><psi_perp|`` and each pure branch is pushed through the
    isometry.
    """
    rho = check_density(rho)
    iso = build_isometry(omega).matrix
    evals, evecs = np.linalg.eigh(rho)
    out = np.zeros((8, 8), dtype=complex)
    for lam, vec in zip(evals, evecs.T):
        big = iso @ vec
        out += lam * np.outer(big, big.conj())
    return out
