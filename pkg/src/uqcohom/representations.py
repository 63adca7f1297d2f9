"""Representations of A_u(Q) as d×d matrices of m×m operators.

An :class:`OperatorMatrix` stores ``blocks`` with shape ``(d, d, m, m)``;
``blocks[j, k]`` is the image of the generator u_jk.  Infinite-dimensional
representations are cut to an N×N corner and flagged as truncated; their
relations are only certified on the leading ``buffer`` coordinates.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .errors import CompressionTooLarge, ParameterOrderViolation, QOutOfRange
from .spectrum import BlockSpectrum, build_spectrum

EXACT = "exact"
TRUNCATED = "truncated"


@dataclass(frozen=True)
class OperatorMatrix:
    blocks: np.ndarray
    spectrum: BlockSpectrum
    kind: str = EXACT
    buffer: int | None = None

    def __post_init__(self):
        if self.buffer is None:
            object.__setattr__(self, "buffer", self.m)

    @property
    def d(self):
        return self.blocks.shape[0]

    @property
    def m(self):
        return self.blocks.shape[2]

    @property
    def is_exact(self):
        return self.kind == EXACT

    def adjoint_entries(self):
        """Entrywise adjoint: element (j, k) is R_jk^*."""
        return np.conj(np.swapaxes(self.blocks, 2, 3))

    def to_json(self):
        b = self.blocks
        return {
            "d": self.d,
            "m": self.m,
            "kind": self.kind,
            "buffer": self.buffer,
            "spectrum": self.spectrum.to_json(),
            "blocks": np.stack([b.real, b.imag], axis=-1).tolist(),
        }


@dataclass(frozen=True)
class Suq2Generators:
    q: float
    N: int
    alpha: np.ndarray
    gamma: np.ndarray


def suq2_generators(q, N):
    """Corner of the SU_q(2) generators on l²(N_0): alpha lowers, gamma is diagonal."""
    if not 0 < q < 1:
        raise QOutOfRange(f"q = {q!r} is not in (0, 1)")
    if N < 2:
        raise ValueError("truncation dimension N must be at least 2")
    k = np.arange(1, N)
    alpha = np.zeros((N, N), dtype=complex)
    alpha[k - 1, k] = np.sqrt(1.0 - q ** (2 * k))
    gamma = np.diag(q ** np.arange(N)).astype(complex)
    return Suq2Generators(q=float(q), N=N, alpha=alpha, gamma=gamma)


def suq2_relation_residuals(g, M=None):
    """Operator-norm residuals of the defining SU_q(2) relations.

    All relations are measured on the full corner except ``alpha alpha* +
    q² gamma* gamma = 1``, which is compressed to the first ``M`` coordinates
    (default ``N - 1``).
    """
    M = g.N - 1 if M is None else M
    a, c, q = g.alpha, g.gamma, g.q
    ah, ch = a.conj().T, c.conj().T
    eye = np.eye(g.N)

    def nrm(x):
        return float(np.linalg.norm(x, 2))

    return {
        "alpha_gamma": nrm(a @ c - q * c @ a),
        "alpha_gammastar": nrm(a @ ch - q * ch @ a),
        "gamma_normal": nrm(c @ ch - ch @ c),
        "alphastar_alpha": nrm(ah @ a + ch @ c - eye),
        "alpha_alphastar": nrm((a @ ah + q * q * ch @ c - eye)[:M, :M]),
    }


def epsilon_rep(S):
    return trivial_rep(S, 1)


def trivial_rep(S, r):
    """The counit with multiplicity r: u_jk -> delta_jk I_r."""
    blocks = np.einsum("jk,ab->jkab", np.eye(S.d), np.eye(r)).astype(complex)
    return OperatorMatrix(blocks=blocks, spectrum=S)


def direct_sum(*reps):
    """Block-diagonal sum of exact representations over the same spectrum."""
    S = reps[0].spectrum
    d = reps[0].d
    m = sum(R.m for R in reps)
    blocks = np.zeros((d, d, m, m), dtype=complex)
    off = 0
    for R in reps:
        if not R.is_exact:
            raise ValueError("direct sums are formed from exact representations only")
        blocks[:, :, off:off + R.m, off:off + R.m] = R.blocks
        off += R.m
    return OperatorMatrix(blocks=blocks, spectrum=S)


def _haar(n, rng):
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def _scalar_block_unitary(S, rng):
    u = np.zeros((S.d, S.d), dtype=complex)
    for k in range(S.n):
        idx = S.block_indices(k)
        u[np.ix_(idx, idx)] = _haar(len(idx), rng)
    return u


def random_block_unitary_rep(S, m, seed):
    """Seeded finite-dimensional representation with Q-block generator matrix.

    Built as a product of three representations: two scalar Q-block unitaries
    u, u' and the diagonal representation u_jk -> delta_jk g_j with Haar
    g_j in U(m).  The resulting entries ``sum_p u_jp u'_pk g_p`` do not
    commute for m > 1.
    """
    if m < 1:
        raise ValueError("carrier dimension m must be >= 1")
    rng = np.random.default_rng(seed)
    u = _scalar_block_unitary(S, rng)
    u2 = _scalar_block_unitary(S, rng)
    g = np.array([_haar(m, rng) for _ in range(S.d)])
    blocks = np.einsum("jp,pk,pab->jkab", u, u2, g)
    return OperatorMatrix(blocks=blocks, spectrum=S)


def _suq2_rep(p, q, N, place):
    if not 0 < q < p < 1:
        raise ParameterOrderViolation(f"need 0 < q < p < 1, got p={p!r}, q={q!r}")
    g = suq2_generators(q, N)
    a, c = g.alpha, g.gamma
    eye, zero = np.eye(N, dtype=complex), np.zeros((N, N), dtype=complex)
    blocks = np.empty((3, 3, N, N), dtype=complex)
    blocks[:] = zero
    i0, i1, free = place
    blocks[free, free] = eye
    blocks[i0, i0] = a
    blocks[i0, i1] = -q * c.conj().T
    blocks[i1, i0] = c
    blocks[i1, i1] = a.conj().T
    return blocks


def keyrep(p, q, N):
    """The 3×3 representation with the SU_q(2) unitary in the corners, Q = diag(1, p², q²)."""
    blocks = _suq2_rep(p, q, N, (0, 2, 1))
    S = build_spectrum([1.0, p * p, q * q])
    return OperatorMatrix(blocks=blocks, spectrum=S, kind=TRUNCATED, buffer=N - 1)


def infdim_rep(p, q, N):
    """Identity in position (0, 0), SU_q(2) unitary in the lower corner, Q = diag(p², 1, q²)."""
    blocks = _suq2_rep(p, q, N, (1, 2, 0))
    S = build_spectrum([p * p, 1.0, q * q])
    return OperatorMatrix(blocks=blocks, spectrum=S, kind=TRUNCATED, buffer=N - 1)


def relation_residuals(R, M=None):
    """Per-family maximum operator norm of the relation defects on the leading M×M corner.

    Families: ``uu*`` (sum_p R_jp R_kp^*), ``u*u`` (sum_p R_pj^* R_pk), and the
    two twisted sums ``twisted_left`` (sum_p Q_p/Q_k R_pj R_pk^*) and
    ``twisted_right`` (sum_p Q_j/Q_p R_jp^* R_kp).
    """
    M = R.buffer if M is None else M
    if M > R.m:
        raise CompressionTooLarge(f"compression {M} exceeds carrier dimension {R.m}")
    B = R.blocks
    Bh = R.adjoint_entries()
    q = R.spectrum.diag
    d = R.d
    target = np.einsum("jk,ab->jkab", np.eye(d), np.eye(R.m))
    fams = {
        "uu*": np.einsum("jpab,kpbc->jkac", B, Bh),
        "u*u": np.einsum("pjab,pkbc->jkac", Bh, B),
        "twisted_left": np.einsum("p,k,pjab,pkbc->jkac", q, 1 / q, B, Bh),
        "twisted_right": np.einsum("j,p,jpab,kpbc->jkac", q, 1 / q, Bh, B),
    }
    out = {}
    for name, val in fams.items():
        diff = (val - target)[:, :, :M, :M]
        out[name] = max(float(np.linalg.norm(diff[j, k], 2)) for j in range(d) for k in range(d))
    return out


def max_residual(report):
    return max(report.values())
