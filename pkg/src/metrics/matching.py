"""
Cross-session subject matching (connectome fingerprinting).

Each subject of session B is matched to the subject of session A whose
matrix, used as a Wishart scale, gives B's matrix the highest density on a
node subset.
"""

import logging
from typing import Sequence, Tuple

import numpy as np

from src.model.errors import DimensionMismatchError
from src.model.types import Dataset
from src.stats.wishart_math import wishart_similarity

logger = logging.getLogger(__name__)


def similarity_matrix(A: Dataset, B: Dataset, node_subset: Sequence[int], T: float) -> np.ndarray:
    """(n_B, n_A) table of log W(B_b | T, A_a) restricted to node_subset."""
    idx = np.asarray(list(node_subset), dtype=int)
    if idx.size == 0:
        raise DimensionMismatchError("node subset is empty")
    if A.p != B.p:
        raise DimensionMismatchError(f"sessions have p={A.p} and p={B.p}")
    if np.any((idx < 0) | (idx >= A.p)):
        raise DimensionMismatchError(f"node subset out of range for p={A.p}")
    sub_a = A.matrices[:, idx][:, :, idx]
    sub_b = B.matrices[:, idx][:, :, idx]
    return np.array([[wishart_similarity(mb, ma, T) for ma in sub_a] for mb in sub_b])


def match_subjects(A: Dataset, B: Dataset, node_subset: Sequence[int],
                   T: float) -> Tuple[float, np.ndarray]:
    """
    Match every subject of B against the subjects of A.

    Returns the fraction of B subjects whose best match in A has the same
    subject id, and the index into A of each prediction. Ties go to the
    smallest index.
    """
    if set(A.subject_ids) != set(B.subject_ids):
        raise DimensionMismatchError("sessions do not contain the same subject ids")
    scores = similarity_matrix(A, B, node_subset, T)
    predicted = np.argmax(scores, axis=1)
    ties = np.sum(scores == scores.max(axis=1, keepdims=True), axis=1) > 1
    for b in np.flatnonzero(ties):
        logger.warning("subject '%s' has tied best matches; taking the first", B.subject_ids[b])
    hits = [A.subject_ids[a] == B.subject_ids[b] for b, a in enumerate(predicted)]
    return float(np.mean(hits)), predicted
