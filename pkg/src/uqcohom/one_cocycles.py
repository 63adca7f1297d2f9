"""1-cocycles into the (pi, epsilon)-bimodule.

A cocycle is fixed by its values on generators: ``V[j, k] = eta(u_jk)`` and
``W[j, k] = eta(u_jk^*)``, both arrays of shape ``(d, d, m)``.  The solver
vectorizes V row-major over (j, k) and then over the carrier coordinate:
flat index ``(j*d + k)*m + a``.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import DEFAULT_SV_TOL, null_space
from .errors import CrossCheckFailed, DimensionMismatch
from .representations import OperatorMatrix, epsilon_rep


@dataclass(frozen=True)
class OneCocycle:
    rep: OperatorMatrix
    V: np.ndarray
    W: np.ndarray

    def scaled(self, z):
        return OneCocycle(self.rep, z * self.V, z * self.W)

    def __add__(self, other):
        return OneCocycle(self.rep, self.V + other.V, self.W + other.W)


def cocycle_constraint_operator(R, M=None):
    """Matrix of V -> (R^*V)^t - conj(R) Q^-1 V^t Q on the flattened V.

    Entry (j, k) of the image is
    ``sum_p R_pk^* V_pj - sum_s (Q_k/Q_s) R_js^* V_ks``.  Output rows are
    restricted to carrier coordinates ``< M`` (default: the representation's
    buffer); columns always cover all m coordinates.
    """
    M = R.buffer if M is None else M
    d, m = R.d, R.m
    Rh = R.adjoint_entries()[:, :, :M, :]
    q = R.spectrum.diag
    out = np.zeros((d, d, M, d, d, m), dtype=complex)
    for j in range(d):
        for k in range(d):
            for p in range(d):
                out[j, k, :, p, j, :] += Rh[p, k]
            for s in range(d):
                out[j, k, :, k, s, :] -= (q[k] / q[s]) * Rh[j, s]
    return out.reshape(d * d * M, d * d * m)


def derive_w(V, R):
    """W_jk = -sum_s R_js^* (Q_k/Q_s) V_ks."""
    V = np.asarray(V)
    if V.shape != (R.d, R.d, R.m):
        raise DimensionMismatch(f"V has shape {V.shape}, expected {(R.d, R.d, R.m)}")
    q = R.spectrum.diag
    return -np.einsum("jsab,k,s,ksb->jka", R.adjoint_entries(), q, 1 / q, V)


def make_cocycle(V, R):
    return OneCocycle(R, np.asarray(V, dtype=complex), derive_w(V, R))


def cocycle_null_space(R, sv_tol=DEFAULT_SV_TOL):
    """Orthonormal basis of solutions, shape ``(dim, d, d, m)``, plus the rank certificate."""
    basis, cert = null_space(cocycle_constraint_operator(R), sv_tol=sv_tol)
    return basis.reshape(-1, R.d, R.d, R.m), cert


def solve_cocycle_space(R, sv_tol=DEFAULT_SV_TOL):
    basis, _ = cocycle_null_space(R, sv_tol)
    return [make_cocycle(V, R) for V in basis]


def verify_one_cocycle(c, M=None):
    """Max entry norms of the four defining identities, compressed to M coordinates.

    ``rw``: sum_p R_jp W_kp + V_jk; ``rstar_v``: sum_p R_pj^* V_pk + W_kj;
    ``v_transpose``: V_kj + sum_p R_pj Q_p W_pk / Q_k;
    ``w_definition``: W - derive_w(V).

    The first and third identities are consequences of the solved constraint
    and apply R one more time, so on a truncated representation they lose one
    more coordinate; the default M is ``buffer - 1`` there and m otherwise.
    """
    R = c.rep
    if M is None:
        M = R.m if R.is_exact else R.buffer - 1
    B, Bh, q = R.blocks, R.adjoint_entries(), R.spectrum.diag
    V, W = c.V, c.W
    res = {
        "rw": np.einsum("jpab,kpb->jka", B, W) + V,
        "rstar_v": np.einsum("pjab,pkb->kja", Bh, V) + W,
        "v_transpose": np.swapaxes(V, 0, 1) + np.einsum("pjab,p,k,pkb->jka", B, q, 1 / q, W),
        "w_definition": W - derive_w(V, R),
    }
    return {k: float(np.linalg.norm(v[:, :, :M], axis=-1).max()) for k, v in res.items()}


def offblock_norm(V, S):
    """Largest norm of a vector entry V_jk with j, k in different blocks."""
    mask = ~S.block_mask()
    if not mask.any():
        return 0.0
    return float(np.linalg.norm(np.asarray(V)[mask], axis=-1).max())


def h1_dimension(S, sv_tol=DEFAULT_SV_TOL):
    """Sum of squared multiplicities, cross-checked against the counit null space."""
    expected = sum(m * m for m in S.mults)
    basis, _ = cocycle_null_space(epsilon_rep(S), sv_tol)
    if basis.shape[0] != expected:
        raise CrossCheckFailed(
            f"counit null space has dimension {basis.shape[0]}, formula gives {expected}"
        )
    return expected
