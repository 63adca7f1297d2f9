"""Normalized 2-cocycles stored by their values on pairs of generators.

A :class:`TwoCocycleTable` holds four tensors of shape ``(d, d, d, d)``:
``uu[j,k,r,l] = c(u_jk ⊗ u_rl)``, ``us = c(u_jk ⊗ u*_rl)``,
``su = c(u*_jk ⊗ u_rl)`` and ``ss = c(u*_jk ⊗ u*_rl)``.  Inner products are
conjugate-linear in the first slot.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    IndexNotInBlock,
    NotACoboundary,
    NotExactRepresentation,
    NotNormalized,
    RepresentationMismatch,
    SpectrumMismatch,
)
from .spectrum import block_project, partial_traces, slq_residuals

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class TwoCocycleTable:
    spectrum: object
    uu: np.ndarray
    us: np.ndarray
    su: np.ndarray
    ss: np.ndarray
    normalized: bool = True

    def tensors(self):
        return {"uu": self.uu, "us": self.us, "su": self.su, "ss": self.ss}

    def __add__(self, other):
        return TwoCocycleTable(
            self.spectrum, self.uu + other.uu, self.us + other.us,
            self.su + other.su, self.ss + other.ss, self.normalized and other.normalized,
        )

    def scaled(self, z):
        return TwoCocycleTable(self.spectrum, z * self.uu, z * self.us, z * self.su,
                               z * self.ss, self.normalized)

    def to_json(self):
        return {
            "spectrum": self.spectrum.to_json(),
            "normalized": self.normalized,
            **{k: np.stack([v.real, v.imag], axis=-1).tolist() for k, v in self.tensors().items()},
        }


def zero_table(S):
    z = np.zeros((S.d,) * 4, dtype=complex)
    return TwoCocycleTable(S, z, z.copy(), z.copy(), z.copy())


def cup_product(eta1, eta2):
    if eta1.rep is not eta2.rep and not (
        eta1.rep.blocks.shape == eta2.rep.blocks.shape
        and np.array_equal(eta1.rep.blocks, eta2.rep.blocks)
    ):
        raise RepresentationMismatch("cup product needs cocycles over the same representation")

    def ip(x, y):
        return np.einsum("jka,rla->jkrl", x.conj(), y)

    return TwoCocycleTable(
        eta1.rep.spectrum,
        uu=ip(eta1.W, eta2.V),
        us=ip(eta1.W, eta2.W),
        su=ip(eta1.V, eta2.V),
        ss=ip(eta1.V, eta2.W),
    )


@dataclass(frozen=True)
class ABMatrices:
    A: np.ndarray
    B: np.ndarray
    discrepancy: float


def _require_normalized(t):
    if not t.normalized:
        raise NotNormalized("operation needs a normalized cocycle table")


def compute_AB(t):
    """A and B from the starred-first sums, checked against the unstarred-first ones."""
    _require_normalized(t)
    q = t.spectrum.diag
    A = np.einsum("pjpk->jk", t.su)
    A_alt = np.einsum("jpkp->jk", t.us)
    B = np.einsum("j,p,jpkp->jk", q, 1 / q, t.su)
    B_alt = np.einsum("p,k,pjpk->jk", q, 1 / q, t.us)
    disc = max(float(np.abs(A - A_alt).max()), float(np.abs(B - B_alt).max()))
    return ABMatrices(A=A, B=B, discrepancy=disc)


@dataclass(frozen=True)
class DefectReport:
    D: np.ndarray
    Delta: np.ndarray
    partial_traces: np.ndarray
    offblock: float
    trQ: complex
    trQinv: complex
    slq_ok: bool

    def to_json(self):
        def cm(x):
            return np.stack([np.real(x), np.imag(x)], axis=-1).tolist()

        return {
            "D": cm(self.D),
            "Delta": cm(self.Delta),
            "partial_traces": cm(self.partial_traces),
            "offblock": self.offblock,
            "trQ": cm(self.trQ),
            "trQinv": cm(self.trQinv),
            "slq_ok": self.slq_ok,
        }


def defect_from_AB(ab, S, tol=DEFAULT_TOL):
    D = ab.A - ab.B.T
    Delta = block_project(D, S)
    off, tq, tqi = slq_residuals(Delta, S)
    scale = tol * (1.0 + float(np.linalg.norm(Delta)))
    return DefectReport(
        D=D,
        Delta=Delta,
        partial_traces=partial_traces(Delta, S),
        offblock=off,
        trQ=tq,
        trQinv=tqi,
        slq_ok=bool(abs(tq) <= scale and abs(tqi) <= scale),
    )


def defect(t, tol=DEFAULT_TOL):
    """D = A - B^t, its block-diagonal part, and the sl_Q membership residuals."""
    return defect_from_AB(compute_AB(t), t.spectrum, tol)


@dataclass(frozen=True)
class CoboundaryVerdict:
    is_coboundary: bool
    witness: tuple
    witness_value: float
    threshold: float

    def __bool__(self):
        return self.is_coboundary


def is_coboundary(t, tol=DEFAULT_TOL):
    """Whether A_jk = B_kj on every pair with Q_j = Q_k; the worst pair is the witness."""
    ab = compute_AB(t)
    gap = np.abs(ab.A - ab.B.T) * t.spectrum.block_mask()
    j, k = np.unravel_index(int(np.argmax(gap)), gap.shape)
    thr = tol * (1.0 + float(np.linalg.norm(ab.A)) + float(np.linalg.norm(ab.B)))
    worst = float(gap[j, k])
    return CoboundaryVerdict(worst <= thr, (int(j), int(k)), worst, thr)


@dataclass(frozen=True)
class PsiFunctional:
    """Values of the functional on generators: lam[j,k] = psi(u_jk), mu[j,k] = psi(u*_jk)."""

    lam: np.ndarray
    mu: np.ndarray


def construct_psi(t, tol=DEFAULT_TOL):
    verdict = is_coboundary(t, tol)
    if not verdict:
        raise NotACoboundary(
            f"A - B^t is {verdict.witness_value:.3g} at block entry {verdict.witness}"
        )
    ab = compute_AB(t)
    A, B = ab.A, ab.B
    q = t.spectrum.diag
    same = t.spectrum.block_mask()
    d = len(q)
    lam = np.zeros((d, d), dtype=complex)
    mu = np.zeros((d, d), dtype=complex)
    for j in range(d):
        for k in range(d):
            if same[j, k]:
                lam[j, k] = -A[j, k] / 2
                mu[k, j] = -A[j, k] / 2
            else:
                r = q[k] / q[j]
                lam[j, k] = -(B[k, j] - r * A[j, k]) / (1 - r)
                mu[k, j] = (B[k, j] - A[j, k]) / (1 - r)
    return PsiFunctional(lam=lam, mu=mu)


def psi_relation_residuals(t, psi):
    """Max moduli of A_jk + lam_jk + mu_kj and B_kj + lam_jk + (Q_k/Q_j) mu_kj."""
    ab = compute_AB(t)
    q = t.spectrum.diag
    ratio = q[None, :] / q[:, None]
    first = ab.A + psi.lam + psi.mu.T
    second = ab.B.T + psi.lam + ratio * psi.mu.T
    return float(np.abs(first).max()), float(np.abs(second).max())


def coboundary_from_rep(pi, phi):
    """Generator-pair table of the coboundary of psi = phi∘pi - phi(1) eps.

    ``phi`` is an m×m coefficient matrix, phi(X) = sum_ab phi_ab X_ab.  The
    value on a ⊗ b reduces to phi((pi(a) - eps(a)) (pi(b) - eps(b))).
    """
    if not pi.is_exact:
        raise NotExactRepresentation("coboundaries need an exact (untruncated) representation")
    phi = np.asarray(phi, dtype=complex)
    d, m = pi.d, pi.m
    shift = np.einsum("jk,ab->jkab", np.eye(d), np.eye(m))
    X = pi.blocks - shift
    Y = pi.adjoint_entries() - shift

    def ev(a, b):
        return np.einsum("ba,jkac,rlcb->jkrl", phi.T, a, b)

    return TwoCocycleTable(pi.spectrum, uu=ev(X, X), us=ev(X, Y), su=ev(Y, X), ss=ev(Y, Y))


def _check_embedding(small, target, reps, rel_tol):
    reps = [int(r) for r in reps]
    if len(reps) != small.d:
        raise IndexNotInBlock(f"need {small.d} representative indices, got {len(reps)}")
    if len(set(reps)) != len(reps):
        raise IndexNotInBlock(f"representative indices {reps} are not distinct")
    for r in reps:
        if not 0 <= r < target.d:
            raise IndexNotInBlock(f"index {r} is outside 0..{target.d - 1}")
    sd, td = small.diag, target.diag
    scale = td[reps[0]] / sd[0]
    for i, r in enumerate(reps):
        want = scale * sd[i]
        if not any(abs(v - want) <= rel_tol * want for v in target.values):
            raise SpectrumMismatch(f"value {sd[i]!r} (scaled {want!r}) is not an eigenvalue of the target")
        if abs(td[r] - want) > rel_tol * want:
            raise IndexNotInBlock(
                f"index {r} has eigenvalue {td[r]!r}, expected {want!r} for small coordinate {i}"
            )
    return reps


def embed_table(t, target, reps, rel_tol=1e-9):
    """Pull a table back along the quotient sending u_{reps[i] reps[j]} to u_ij.

    Every other generator goes to a scalar, where a normalized cocycle vanishes.
    """
    reps = _check_embedding(t.spectrum, target, reps, rel_tol)
    ix = np.ix_(reps, reps, reps, reps)
    out = {}
    for name, val in t.tensors().items():
        big = np.zeros((target.d,) * 4, dtype=complex)
        big[ix] = val
        out[name] = big
    return TwoCocycleTable(target, normalized=t.normalized, **out)


def embed_matrix(A, target, reps):
    big = np.zeros((target.d, target.d), dtype=complex)
    big[np.ix_(reps, reps)] = A
    return big
