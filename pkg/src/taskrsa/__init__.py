"""Representation similarity analysis for relating task-specific models.

Typical use::

    from taskrsa import compute_rdm, similarity_matrix, cluster, cut

    rdms = [compute_rdm(fm) for fm in feature_matrices]
    sim = similarity_matrix(rdms)
    groups = cut(cluster(sim), k=3)
"""

from .clustering import Dendrogram, Linkage, Merge, cluster, cut
from .core import RDM, FeatureMatrix, Ranking, SimilarityMatrix, TaskMatrix
from .errors import RSAError
from .rdm import DegeneratePolicy, compute_rdm, lower_triangle
from .selection import (
    AffinityTable,
    Orientation,
    rank_by_similarity,
    rank_from_matrix,
    ranking_correlation,
    stability_report,
    topk_agreement,
)
from .similarity import matrix_correlation, rdm_similarity, similarity_matrix
from .stats import pearson, rank_average_ties, spearman
from .synthetic import Group, SyntheticSpec, generate

__version__ = "0.1.0"
