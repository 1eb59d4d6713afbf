"""Single-qubit state algebra in the Bloch-sphere picture.

Density matrices are plain ``(2, 2)`` complex numpy arrays; they are checked
on entry with :func:`check_density` rather than wrapped in a class.

Phase convention: a pure state with polar angle ``theta`` and azimuth ``phi``
is ``cos(theta/2)|up> + sin(theta/2) exp(-i phi)|down>``. With the standard
Pauli matrices its Bloch vector is ``(sin t cos p, -sin t sin p, cos t)``,
i.e. the mirror image in ``y`` of :func:`angles_to_bloch`. Every fidelity in
this package depends on ``n_y`` only through ``n_y**2`` or through ensemble
averages that vanish, so the two readings give identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

ALG_TOL = 1e-12
VALIDATION_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class UnphysicalStateError(ValueError):
    """Raised when a vector or matrix does not describe a qubit state."""


@dataclass(frozen=True)
class StateAngles:
    """Polar and azimuthal angle of a pure state (radians)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (-VALIDATION_TOL <= self.theta <= np.pi + VALIDATION_TOL):
            raise UnphysicalStateError(f"theta={self.theta} outside [0, pi]")


def check_density(rho, tol: float = VALIDATION_TOL) -> np.ndarray:
    """Validate a 2x2 density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise UnphysicalStateError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise UnphysicalStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise UnphysicalStateError(f"trace is {np.trace(rho).real}, expected 1")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise UnphysicalStateError("density matrix has a negative eigenvalue")
    return rho


def density_from_bloch(r) -> np.ndarray:
    """Return ``(I + r . sigma) / 2``.

    Raises:
        UnphysicalStateError: if ``|r| > 1`` beyond the validation tolerance.
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise UnphysicalStateError(f"Bloch vector must have 3 components, got {r.shape}")
    if np.linalg.norm(r) > 1 + VALIDATION_TOL:
        raise UnphysicalStateError(f"|r| = {np.linalg.norm(r)} exceeds 1")
    return 0.5 * (I2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def bloch_from_density(rho) -> np.ndarray:
    """Return the Bloch vector ``r_i = Tr(sigma_i rho)``."""
    rho = check_density(rho)
    return np.array([np.trace(s @ rho).real for s in PAULIS])


def angles_to_bloch(angles: StateAngles) -> np.ndarray:
    """Unit vector ``(sin t cos p, sin t sin p, cos t)``."""
    st = np.sin(angles.theta)
    return np.array([st * np.cos(angles.phi), st * np.sin(angles.phi), np.cos(angles.theta)])


def bloch_to_angles(r) -> StateAngles:
    """Inverse of :func:`angles_to_bloch` for a nonzero vector (length ignored)."""
    r = np.asarray(r, dtype=float)
    n = np.linalg.norm(r)
    if n == 0:
        raise UnphysicalStateError("zero vector has no direction")
    theta = float(np.arccos(np.clip(r[2] / n, -1.0, 1.0)))
    phi = float(np.arctan2(r[1], r[0]) % (2 * np.pi))
    return StateAngles(theta, phi)


def state_vector(angles: StateAngles) -> np.ndarray:
    """Amplitudes ``(cos(theta/2), sin(theta/2) exp(-i phi))``."""
    return np.array(
        [np.cos(angles.theta / 2), np.sin(angles.theta / 2) * np.exp(-1j * angles.phi)],
        dtype=complex,
    )


def pure_density(angles: StateAngles) -> np.ndarray:
    psi = state_vector(angles)
    return np.outer(psi, psi.conj())


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest-magnitude component made real positive
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


@dataclass(frozen=True)
class PauliFrame:
    """Orthonormal qubit basis in which an ensemble's average state is diagonal.

    ``basis_up``/``basis_down`` are expressed in computational coordinates.
    ``lam`` is the Bloch length of the ensemble average, so that in this frame
    ``rho_S = (I + lam sigma_z) / 2``.
    """

    basis_up: np.ndarray
    basis_down: np.ndarray
    lam: float
    degenerate: bool = False
    reflected: bool = field(default=False, compare=False)

    @property
    def unitary(self) -> np.ndarray:
        """Columns are the frame vectors."""
        return np.column_stack([self.basis_up, self.basis_down])

    def paulis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Frame Pauli operators in computational coordinates."""
        up, dn = self.basis_up, self.basis_down
        ud = np.outer(up, dn.conj())
        du = ud.conj().T
        sx = ud + du
        sy = -1j * ud + 1j * du
        sz = np.outer(up, up.conj()) - np.outer(dn, dn.conj())
        return sx, sy, sz

    def to_frame(self, rho) -> np.ndarray:
        """Matrix elements of ``rho`` in this frame."""
        v = self.unitary
        return v.conj().T @ np.asarray(rho, dtype=complex) @ v

    def bloch(self, rho) -> np.ndarray:
        """Bloch vector of ``rho`` relative to this frame."""
        return np.array([np.trace(s @ rho).real for s in self.paulis()])


COMPUTATIONAL_FRAME = PauliFrame(np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex), 0.0)

StateLike = Union[StateAngles, np.ndarray]


def _as_density(state: StateLike) -> np.ndarray:
    if isinstance(state, StateAngles):
        return pure_density(state)
    return check_density(state)


def canonical_frame(states: Sequence[tuple[StateLike, float]]) -> PauliFrame:
    """Frame that diagonalises the ensemble average ``rho_S``.

    The up vector is the eigenvector with the larger eigenvalue, so
    ``lam >= 0``. The remaining freedom (a phase on the down vector, i.e. a
    rotation about z) is fixed by aligning x and y with the principal axes of
    the ensemble's transverse second moments, larger one along x. When
    ``rho_S`` is maximally mixed the computational frame is returned with
    ``degenerate=True``.
    """
    weights = np.array([w for _, w in states], dtype=float)
    if np.any(weights <= 0):
        raise ValueError("ensemble weights must be positive")
    if abs(weights.sum() - 1) > ALG_TOL * max(1, len(weights)):
        raise ValueError(f"ensemble weights sum to {weights.sum()}, expected 1")
    rhos = [_as_density(s) for s, _ in states]
    rho_s = sum(w * r for w, r in zip(weights, rhos))
    evals, evecs = np.linalg.eigh(rho_s)
    lam = float(evals[1] - evals[0])
    if lam <= ALG_TOL:
        return PauliFrame(COMPUTATIONAL_FRAME.basis_up, COMPUTATIONAL_FRAME.basis_down, 0.0, degenerate=True)
    up = _fix_phase(evecs[:, 1])
    down = _fix_phase(evecs[:, 0])
    frame = PauliFrame(up, down, lam)

    vecs = np.array([frame.bloch(r) for r in rhos])
    sxx = np.sum(weights * vecs[:, 0] ** 2)
    syy = np.sum(weights * vecs[:, 1] ** 2)
    sxy = np.sum(weights * vecs[:, 0] * vecs[:, 1])
    if abs(sxy) > ALG_TOL or syy > sxx + ALG_TOL:
        # multiplying the down vector by exp(i chi) rotates (r_x, r_y) by -chi
        chi = 0.5 * np.arctan2(2 * sxy, sxx - syy)
        frame = PauliFrame(up, down * np.exp(1j * chi), lam)
    return frame
