"""The q-deformed three-term recurrence and the explicit l² cocycles built from it.

The recurrence is

    b_0 = 1,  b_1 = kappa c_1,  b_{k+1} = kappa c_{k+1} b_k - mu (c_{k+1}/c_k) b_{k-1}

with kappa = a + b, mu = a b and c_k = (1 - q^{2k})^{-1/2}.  Sequences are
accumulated in ``np.longdouble``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import DEFAULT_SV_TOL, null_space
from .errors import (
    CaseMismatch,
    NoConvergenceWithinBudget,
    ParameterOrderViolation,
    QOutOfRange,
    RecurrenceOverflow,
    TruncationCapExceeded,
)
from .one_cocycles import cocycle_constraint_operator, make_cocycle
from .representations import keyrep

LD = np.longdouble
DEFAULT_TAIL_TOL = 1e-10
DEFAULT_TRUNCATION_CAP = 400
DEFAULT_CASE_TOL = 1e-8


@dataclass(frozen=True)
class RecurrenceParams:
    q: float
    a: float
    b: float

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise QOutOfRange(f"q = {self.q!r} is not in (0, 1)")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("recurrence parameters a, b must be positive")

    @property
    def kappa(self):
        return self.a + self.b

    @property
    def mu(self):
        return self.a * self.b

    @property
    def dominant(self):
        return max(self.a, self.b)

    def c(self, k):
        """c_k for an integer array k >= 1, in extended precision."""
        k = np.asarray(k)
        return 1 / np.sqrt(1 - LD(self.q) ** (2 * k))


@dataclass(frozen=True)
class RecurrenceRun:
    params: RecurrenceParams
    K: int
    b_seq: np.ndarray
    g_seq: np.ndarray

    @property
    def ratios(self):
        """b_k / b_{k-1} for k = 1..K."""
        return self.b_seq[1:] / self.b_seq[:-1]

    def product_identity_residual(self):
        """Max relative deviation of g_k (1 - g_{k-1}) from mu / (kappa c_k)^2."""
        P = self.params
        k = np.arange(1, self.K + 1)
        c = P.c(k)
        rhs = LD(P.mu) / (LD(P.kappa) ** 2 * c * c)
        lhs = self.g_seq[1:] * (1 - self.g_seq[:-1])
        return float(np.max(np.abs(lhs - rhs) / rhs))


def run_recurrence(params, K):
    if K < 2:
        raise ValueError("recurrence length K must be at least 2")
    kappa, mu = LD(params.a) + LD(params.b), LD(params.a) * LD(params.b)
    c = np.empty(K + 1, dtype=LD)
    c[0] = np.inf
    c[1:] = params.c(np.arange(1, K + 1))
    b = np.empty(K + 1, dtype=LD)
    b[0] = 1
    b[1] = kappa * c[1]
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        for k in range(1, K):
            b[k + 1] = kappa * c[k + 1] * b[k] - mu * (c[k + 1] / c[k]) * b[k - 1]
            if not np.isfinite(b[k + 1]) or b[k + 1] == 0:
                raise RecurrenceOverflow(
                    f"b_{k + 1} left the extended-precision range (a={params.a}, b={params.b})"
                )
    g = np.zeros(K + 1, dtype=LD)
    g[1:] = mu / (kappa * c[1:]) * (b[:-1] / b[1:])
    return RecurrenceRun(params=params, K=K, b_seq=b, g_seq=g)


def g_limit(params):
    disc = max(0.0, 1 - 4 * params.mu / params.kappa**2)
    return 0.5 * (1 - math.sqrt(disc))


def ratio_limit(params, tol=1e-6, K_max=5000):
    """First k with |b_k/b_{k-1} - max(a, b)| <= tol, and the ratio there.

    Runs the ratio form r_{k+1} = kappa c_{k+1} - mu (c_{k+1}/c_k) / r_k,
    which cannot overflow.
    """
    kappa, mu = LD(params.a) + LD(params.b), LD(params.a) * LD(params.b)
    target = LD(params.dominant)
    c_prev = params.c(1)
    r = kappa * c_prev
    for k in range(1, K_max + 1):
        if abs(r - target) <= tol:
            return float(r), k
        c_next = params.c(k + 1)
        r = kappa * c_next - mu * (c_next / c_prev) / r
        c_prev = c_next
    raise NoConvergenceWithinBudget(
        f"ratio still {float(r)!r} after {K_max} steps (target {params.dominant!r})",
        estimate=float(r), k_reached=K_max,
    )


def is_square_summable(params):
    """Whether q^{-k} b_k is square summable, i.e. max(a, b) < q."""
    return params.dominant < params.q


def _check_pq(p, q):
    if not 0 < q < p < 1:
        raise ParameterOrderViolation(f"need 0 < q < p < 1, got p={p!r}, q={q!r}")


def case_of(p, q, case_tol=DEFAULT_CASE_TOL):
    """1 if p² < q, 2 if p² > q; CaseMismatch when p² is within case_tol of q."""
    _check_pq(p, q)
    if abs(p * p - q) <= case_tol * q:
        raise CaseMismatch(f"p² = {p * p!r} is at the boundary q = {q!r}")
    return 1 if p * p < q else 2


def case1_params(p, q, case_tol=DEFAULT_CASE_TOL):
    if case_of(p, q, case_tol) != 1:
        raise CaseMismatch(f"p = {p!r} is above sqrt(q) for q = {q!r}")
    return RecurrenceParams(q=q, a=p * p, b=q**3 / (p * p))


def case2_params(p, q, case_tol=DEFAULT_CASE_TOL):
    if case_of(p, q, case_tol) != 2:
        raise CaseMismatch(f"p = {p!r} is below sqrt(q) for q = {q!r}")
    return RecurrenceParams(q=q, a=q * p * p, b=q * q / (p * p))


def truncation_length(params, tail_tol, cap=DEFAULT_TRUNCATION_CAP):
    """Smallest N with r^N / (1 - r) < tail_tol, where r = max(a, b)/q."""
    r = params.dominant / params.q
    if r >= 1:
        raise TruncationCapExceeded(f"decay ratio {r!r} >= 1: series is not square summable")
    N = max(2, math.floor(math.log(tail_tol * (1 - r)) / math.log(r)) + 1)
    while r**N / (1 - r) >= tail_tol:
        N += 1
    if N > cap:
        raise TruncationCapExceeded(f"tail rule needs N = {N} > cap {cap} (decay ratio {r:.6g})")
    return N


def build_case1_vectors(p, q, tail_tol=DEFAULT_TAIL_TOL, cap=DEFAULT_TRUNCATION_CAP,
                        N=None, case_tol=DEFAULT_CASE_TOL):
    """Coefficients of (v12, v32) for p² < q, and the truncation length used."""
    P = case1_params(p, q, case_tol)
    N = truncation_length(P, tail_tol, cap) if N is None else N
    b = run_recurrence(P, max(N, 2)).b_seq[:N]
    k = np.arange(1, N)
    qinv = LD(q) ** (-np.arange(N))
    p2 = LD(p) ** 2
    v12 = b
    v32 = np.empty(N, dtype=LD)
    v32[0] = 1 / p2
    v32[1:] = qinv[1:] * (b[1:] / p2 - b[:-1] / P.c(k))
    return v12.astype(float), v32.astype(float), N


def build_case2_vectors(p, q, tail_tol=DEFAULT_TAIL_TOL, cap=DEFAULT_TRUNCATION_CAP,
                        N=None, case_tol=DEFAULT_CASE_TOL):
    """Coefficients of (v21, v23) for p² > q, and the truncation length used."""
    P = case2_params(p, q, case_tol)
    N = truncation_length(P, tail_tol, cap) if N is None else N
    b = run_recurrence(P, N).b_seq
    qinv = LD(q) ** (-np.arange(N + 1))
    p2 = LD(p) ** 2
    k1 = np.arange(1, N + 1)
    v23 = b[:N]
    v21 = qinv[:N] * b[:N] / p2 - qinv[1:] * b[1:] / (P.c(k1) * LD(q))
    return v21.astype(float), v23.astype(float), N


def case_cocycle(p, q, tail_tol=DEFAULT_TAIL_TOL, cap=DEFAULT_TRUNCATION_CAP,
                 case_tol=DEFAULT_CASE_TOL):
    """The explicit 1-cocycle over ``keyrep(p, q, N)`` for whichever case applies.

    Returns ``(cocycle, case, N)``.  Case 1 fills entries (0, 1), (2, 1);
    case 2 fills entries (1, 0), (1, 2).
    """
    case = case_of(p, q, case_tol)
    V = None
    if case == 1:
        v12, v32, N = build_case1_vectors(p, q, tail_tol, cap, case_tol=case_tol)
        V = np.zeros((3, 3, N), dtype=complex)
        V[0, 1], V[2, 1] = v12, v32
    else:
        v21, v23, N = build_case2_vectors(p, q, tail_tol, cap, case_tol=case_tol)
        V = np.zeros((3, 3, N), dtype=complex)
        V[1, 0], V[1, 2] = v21, v23
    return make_cocycle(V, keyrep(p, q, N)), case, N


def _keyrep_parts(R):
    alpha = R.blocks[0, 0]
    gamma = R.blocks[2, 0]
    Qd = R.spectrum.diag
    return alpha, gamma, math.sqrt(Qd[1]), math.sqrt(Qd[2])


def verify_entry_systems(c, M=None):
    """Residual norms of the three entrywise systems a cocycle over keyrep must satisfy.

    Keys ``v12_second_order``, ``v12_link``, ``v23_second_order``,
    ``v23_link`` and ``corner_1`` .. ``corner_4``.  Vectors are compressed to
    the first M coordinates (default ``buffer - 1``).
    """
    R = c.rep
    M = R.buffer - 1 if M is None else M
    al, ga, p, q = _keyrep_parts(R)
    ah, gh = al.conj().T, ga.conj().T
    V = c.V
    v11, v12, v13 = V[0, 0], V[0, 1], V[0, 2]
    v21, v23 = V[1, 0], V[1, 2]
    v31, v32, v33 = V[2, 0], V[2, 1], V[2, 2]
    p2 = p * p
    res = {
        "v12_second_order": (1 + q**3 / p2**2) * v12 - al @ v12 / p2 - (q**3 / p2) * (ah @ v12),
        "v12_link": gh @ v32 - (v12 / p2 - ah @ v12),
        "v23_second_order": (1 + p2**2 / q) * v23 - (p2 / q**2) * (al @ v23) - q * p2 * (ah @ v23),
        "v23_link": gh @ v21 - (v23 - (p2 / q**2) * (al @ v23)) / p2,
        "corner_1": ah @ v11 - ga @ v13 / q - (ah @ v11 + gh @ v31),
        "corner_2": q * q * (ah @ v31) - q * (ga @ v33) - (-q * (ga @ v11) + al @ v31),
        "corner_3": gh @ v11 + al @ v13 / q**2 - (ah @ v13 + gh @ v33),
        "corner_4": q * q * (gh @ v31) + al @ v33 - (-q * (ga @ v13) + al @ v33),
    }
    return {k: float(np.linalg.norm(v[:M])) for k, v in res.items()}


CORNER_ENTRIES = ((0, 0), (0, 2), (2, 0), (2, 2))


@dataclass(frozen=True)
class CornerReport:
    N: int
    dimension: int
    coefficient_deviation: float
    norm_deviation: float
    defect_gram: float
    defect_sample: float
    singular_values: np.ndarray = field(repr=False)

    @property
    def ok(self):
        return self.dimension == 0 or max(
            self.coefficient_deviation, self.norm_deviation, self.defect_gram, self.defect_sample
        ) <= 1e-8


def corner_pattern_check(p, q, N, sv_tol=DEFAULT_SV_TOL, seed=0):
    """Solve the corner system (entries 00, 02, 20, 22 over keyrep) and test its solutions.

    Deviations are relative to the solution norm: (i) ``v31 + v13/q``
    coefficientwise, (ii) ``|v13|² - q²|v31|²``, (iii) the diagonal defect of
    all pairwise cup products as a Gram form, and the full defect of one
    seeded random combination cupped with itself.
    """
    from .two_cocycles import cup_product, defect

    _check_pq(p, q)
    R = keyrep(p, q, N)
    d, M = 3, R.buffer
    L = cocycle_constraint_operator(R).reshape(d, d, M, d, d, N)
    sub = np.array([[L[j, k, :, r, l, :] for (r, l) in CORNER_ENTRIES] for (j, k) in CORNER_ENTRIES])
    sub = sub.transpose(0, 2, 1, 3).reshape(4 * M, 4 * N)
    basis, cert = null_space(sub, sv_tol=sv_tol)
    sols = basis.reshape(-1, 4, N)
    dim = sols.shape[0]
    if dim == 0:
        return CornerReport(N, 0, 0.0, 0.0, 0.0, 0.0, cert.singular_values)
    v13, v31 = sols[:, 1], sols[:, 2]
    coeff = float(np.abs(v31 + v13 / q).max())
    nrm = float(np.abs(np.sum(np.abs(v13) ** 2, 1) - q * q * np.sum(np.abs(v31) ** 2, 1)).max())
    Vs = np.zeros((dim, d, d, N), dtype=complex)
    for i, (j, k) in enumerate(CORNER_ENTRIES):
        Vs[:, j, k] = sols[:, i]
    Qd = R.spectrum.diag
    gram = 0.0
    for k in range(d):
        G = np.einsum("ipa,jpa->ij", Vs[:, :, k].conj(), Vs[:, :, k])
        G -= np.einsum("p,ipa,jpa->ij", Qd[k] / Qd, Vs[:, k].conj(), Vs[:, k])
        gram = max(gram, float(np.abs(G).max()))
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    coef /= np.linalg.norm(coef)
    eta = make_cocycle(np.tensordot(coef, Vs, axes=1), R)
    sample = float(np.abs(defect(cup_product(eta, eta)).Delta).max())
    return CornerReport(N, dim, coeff, nrm, gram, sample, cert.singular_values)


def gp_probe(q, sizes):
    """Norms of the formal solution at the boundary p² = q for growing truncations.

    Both cases reduce there to (a, b) = (q, q²), whose dominant root equals
    q, so the scaled coefficients q^{-k} b_k sit exactly on the summability
    boundary.  The probe reports numbers and draws no verdict.
    """
    P = RecurrenceParams(q=q, a=q, b=q * q)
    rows = []
    for N in sizes:
        b = run_recurrence(P, max(N, 2)).b_seq[:N]
        scaled = b * LD(q) ** (-np.arange(N))
        rows.append({
            "N": int(N),
            "norm_b": float(np.sqrt(np.sum(b * b))),
            "norm_scaled": float(np.sqrt(np.sum(scaled * scaled))),
            "last_scaled": float(scaled[-1]),
        })
    return rows
