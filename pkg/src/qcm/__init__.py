"""Optimal 1 -> 2 qubit cloning machines designed on the Bloch sphere."""

from qcm.bloch import StateAngles, density_from_bloch, bloch_from_density
from qcm.channels import AffineMap, affine_closed_form, affine_extract
from qcm.cloner import ParamSet, build_isometry, evolve
from qcm.design import DesignCase, DesignResult, classify, optimize_numeric
from qcm.ensembles import EnsembleMoments, EnsembleSpec, moments_closed_form, moments_quadrature
from qcm.fidelity import average_fidelity, objective

__all__ = [
    "AffineMap",
    "DesignCase",
    "DesignResult",
    "EnsembleMoments",
    "EnsembleSpec",
    "ParamSet",
    "StateAngles",
    "affine_closed_form",
    "affine_extract",
    "average_fidelity",
    "bloch_from_density",
    "build_isometry",
    "classify",
    "density_from_bloch",
    "evolve",
    "moments_closed_form",
    "moments_quadrature",
    "objective",
    "optimize_numeric",
]

__version__ = "0.1.0"
