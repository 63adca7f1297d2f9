"""SVD-based null spaces and rank certificates with a mandatory gap check."""

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedGap

DEFAULT_SV_TOL = 1e-10
MIN_GAP = 10.0


@dataclass(frozen=True)
class RankCertificate:
    singular_values: np.ndarray
    rank: int
    cutoff: float
    gap: float  # smallest retained / largest discarded; inf when nothing is discarded

    def to_json(self):
        return {
            "singular_values": [float(s) for s in self.singular_values],
            "rank": self.rank,
            "cutoff": self.cutoff,
            "gap": self.gap,
        }


def _certify(s, sv_tol):
    smax = float(s[0]) if s.size else 0.0
    cutoff = sv_tol * smax
    if smax == 0.0:
        return 0, cutoff, np.inf
    rank = int(np.count_nonzero(s > cutoff))
    if rank == s.size:
        return rank, cutoff, np.inf
    largest_discarded = float(s[rank])
    gap = np.inf if largest_discarded == 0.0 else float(s[rank - 1]) / largest_discarded
    return rank, cutoff, gap


def certified_rank(mat, sv_tol=DEFAULT_SV_TOL, min_gap=MIN_GAP, check=True):
    """Numerical rank of ``mat`` with singular values ``<= sv_tol * s_max`` treated as zero.

    Raises :class:`IllConditionedGap` if ``check`` and the ratio between the
    smallest retained and the largest discarded singular value is below
    ``min_gap``.
    """
    mat = np.asarray(mat)
    s = np.linalg.svd(mat, compute_uv=False) if mat.size else np.zeros(0)
    rank, cutoff, gap = _certify(s, sv_tol)
    cert = RankCertificate(s, rank, cutoff, gap)
    if check and gap < min_gap:
        raise IllConditionedGap(
            f"singular-value gap {gap:.3g} < {min_gap} at cutoff {cutoff:.3g}",
            singular_values=s, rank=rank, gap=gap,
        )
    return cert


def null_space(mat, sv_tol=DEFAULT_SV_TOL, min_gap=MIN_GAP):
    """Orthonormal null-space basis (as rows) and the rank certificate of ``mat``."""
    mat = np.asarray(mat)
    ncols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(ncols, dtype=complex), RankCertificate(np.zeros(0), 0, 0.0, np.inf)
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    rank, cutoff, gap = _certify(s, sv_tol)
    if gap < min_gap:
        raise IllConditionedGap(
            f"singular-value gap {gap:.3g} < {min_gap} at cutoff {cutoff:.3g}",
            singular_values=s, rank=rank, gap=gap,
        )
    return vh[rank:].conj(), RankCertificate(s, rank, cutoff, gap)
