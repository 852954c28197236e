"""Orlicz-norm subspace embeddings, regression and entrywise-lp low-rank approximation."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .lowrank import (LowRankFactors, entrywise_lp, lp_lowrank, lp_lowrank_best,
                      pca_baseline, rank_constrained_ls)
from .matrix import MatrixHandle
from .orlicz import (OrliczFunction, make_orlicz, orlicz_norm, orlicz_norm_and_gradient,
                     orlicz_norm_gradient, verify_property_P)
from .randgen import (SeedSpec, sample_gaussian, sample_generalized_exponential,
                      sample_p_stable)
from .regression import (CombinedTerm, NumericalFailure, RegressionOutput, combined_regress,
                         l1_regress, lasso, least_squares, orlicz_regress)
from .sketch import ComposedSketch, apply_sketch, build_l2_to_l1, build_orlicz_sketch
