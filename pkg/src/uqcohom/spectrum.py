"""The positive diagonal matrix Q and its eigenvalue-block structure.

Indices are 0-based throughout: coordinates ``0..d-1`` and blocks
``0..n-1``, with blocks ordered by decreasing eigenvalue.  Dense complex
matrices are plain :class:`numpy.ndarray` objects.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousGrouping,
    BlockOutOfRange,
    DegenerateTriple,
    DimensionMismatch,
    NonPositiveEntry,
)

DEFAULT_GROUPING_TOL = 1e-12
DEFAULT_GP_TOL = 1e-9


@dataclass(frozen=True)
class BlockSpectrum:
    """Distinct eigenvalues of Q (largest normalized to 1) and their blocks.

    ``values[i]`` is the eigenvalue of block ``i``; ``index_block[j]`` is the
    block of coordinate ``j``.
    """

    values: tuple
    mults: tuple
    index_block: tuple
    grouping_tol: float = DEFAULT_GROUPING_TOL

    @property
    def d(self):
        return len(self.index_block)

    @property
    def n(self):
        return len(self.values)

    @property
    def diag(self):
        """The diagonal entries Q_j as a float array."""
        return np.array([self.values[b] for b in self.index_block], dtype=float)

    def block_indices(self, k):
        if not 0 <= k < self.n:
            raise BlockOutOfRange(f"block {k} not in 0..{self.n - 1}")
        return [j for j, b in enumerate(self.index_block) if b == k]

    def block_mask(self):
        """Boolean d×d mask of the entries with Q_j == Q_k."""
        ib = np.asarray(self.index_block)
        return ib[:, None] == ib[None, :]

    def to_json(self):
        return {
            "values": list(self.values),
            "mults": list(self.mults),
            "index_block": list(self.index_block),
            "grouping_tol": self.grouping_tol,
        }


def _rel_close(x, y, tol):
    return abs(x - y) <= tol * max(abs(x), abs(y))


def build_spectrum(diag, grouping_tol=DEFAULT_GROUPING_TOL):
    """Group the diagonal of Q into eigenvalue blocks and normalize to max 1."""
    diag = [float(x) for x in diag]
    if not diag:
        raise DimensionMismatch("Q must have at least one diagonal entry")
    for x in diag:
        if not np.isfinite(x) or x <= 0:
            raise NonPositiveEntry(f"diagonal entry {x!r} is not strictly positive")
    order = sorted(range(len(diag)), key=lambda j: -diag[j])
    clusters = [[order[0]]]
    for j in order[1:]:
        if _rel_close(diag[clusters[-1][-1]], diag[j], grouping_tol):
            clusters[-1].append(j)
        else:
            clusters.append([j])
    for c in clusters:
        hi, lo = diag[c[0]], diag[c[-1]]
        if not _rel_close(hi, lo, grouping_tol):
            raise AmbiguousGrouping(
                f"entries {hi!r} .. {lo!r} chain within tolerance {grouping_tol} "
                "but their extremes do not"
            )
    means = [sum(diag[j] for j in c) / len(c) for c in clusters]
    top = means[0]
    values = tuple(m / top for m in means)
    index_block = [0] * len(diag)
    for b, c in enumerate(clusters):
        for j in c:
            index_block[j] = b
    return BlockSpectrum(
        values=values,
        mults=tuple(len(c) for c in clusters),
        index_block=tuple(index_block),
        grouping_tol=grouping_tol,
    )


def _check_square(A, S):
    A = np.asarray(A)
    if A.shape != (S.d, S.d):
        raise DimensionMismatch(f"expected a {S.d}x{S.d} matrix, got shape {A.shape}")
    return A


def block_project(A, S):
    """Zero every entry of A outside the diagonal blocks of Q."""
    A = _check_square(A, S)
    return np.where(S.block_mask(), A, 0)


def partial_trace(A, S, k):
    """Sum of the diagonal entries of A whose index lies in block k."""
    A = _check_square(A, S)
    return complex(sum(A[j, j] for j in S.block_indices(k)))


def partial_traces(A, S):
    return np.array([partial_trace(A, S, k) for k in range(S.n)])


def slq_residuals(A, S):
    """Return ``(offblock_norm, Tr(AQ), Tr(AQ^-1))``."""
    A = _check_square(A, S)
    q = S.diag
    off = float(np.linalg.norm(A - block_project(A, S)))
    diag = np.diagonal(A)
    return off, complex(np.sum(diag * q)), complex(np.sum(diag / q))


def in_slq(A, S, tol=1e-9):
    off, tq, tqi = slq_residuals(A, S)
    scale = tol * (1.0 + float(np.linalg.norm(A)))
    return off <= scale and abs(tq) <= scale and abs(tqi) <= scale


def slq_dimension(S):
    total = sum(m * m for m in S.mults)
    return total - 1 if S.n == 1 else total - 2


def is_geometric_triple(x, y, z, rel_tol=DEFAULT_GP_TOL):
    """True iff the three distinct positives form a geometric progression in some order."""
    lo, mid, hi = sorted(float(v) for v in (x, y, z))
    if lo <= 0:
        raise NonPositiveEntry("geometric-progression test needs positive values")
    if _rel_close(lo, mid, rel_tol) or _rel_close(mid, hi, rel_tol):
        raise DegenerateTriple(f"values {x!r}, {y!r}, {z!r} are not pairwise distinct")
    return abs(mid * mid - lo * hi) <= rel_tol * lo * hi
