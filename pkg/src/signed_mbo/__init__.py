"""Signed-graph clustering with Ginzburg-Landau threshold dynamics (MBO)."""

from .errors import SignedMboError
from .generators import BaParams, GroundTruth, SsbmParams, ground_truth, signed_ba, ssbm
from .graph import (
    DegreeMatrices,
    LaplacianKind,
    LaplacianOperator,
    SignedGraph,
    build_laplacian,
    decompose,
    degrees,
    quadratic_form,
    signed_gl_energy,
)
from .mbo import Composition, ConstraintSet, MboParams, MboResult, StepForm, run_mbo
from .metrics import ari, bnc_objective, kmeans_pp
from .spectral import SpectralBasis, bottom_nonzero_eigenvector, smallest_eigenpairs

__all__ = [
    "BaParams",
    "Composition",
    "ConstraintSet",
    "DegreeMatrices",
    "GroundTruth",
    "LaplacianKind",
    "LaplacianOperator",
    "MboParams",
    "MboResult",
    "SignedGraph",
    "SignedMboError",
    "SpectralBasis",
    "SsbmParams",
    "StepForm",
    "ari",
    "bnc_objective",
    "bottom_nonzero_eigenvector",
    "build_laplacian",
    "decompose",
    "degrees",
    "ground_truth",
    "kmeans_pp",
    "quadratic_form",
    "run_mbo",
    "signed_ba",
    "signed_gl_energy",
    "smallest_eigenpairs",
    "ssbm",
]
