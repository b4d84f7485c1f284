"""Discrete fractional Sobolev seminorms and clustering certificates on cubes."""

from .clustering import (
    ClusterCertificate,
    ClusterQuery,
    PartitionReport,
    check_hypothesis_a,
    check_hypothesis_b,
    classify_partition,
    cluster_search,
    eta_lower_bound,
    k_star,
    superlevel_measure,
)
from .embedding import EmbeddingConstant, embedding_constant
from .errors import AlignmentError, ClusterCertError, ResolutionError, SearchInfeasibleError
from .functions import FunctionSpec, default_corpus, sample
from .geometry import Cube, GridFunction, GridSpec, cell_center, restrict, subcube
from .reductions import ReductionInput, corollary_pipeline, reduce_to_fractional, verify_scaling
from .seminorms import (
    FractionalParams,
    bv_seminorm,
    gagliardo,
    gagliardo_naive,
    gagliardo_subcube_batch,
    grad_lp,
)

__version__ = "0.1.0"
