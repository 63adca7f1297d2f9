"""End-to-end computation of H¹ and H² of U_Q^+.

H² is assembled from two families of defect matrices.  The block part comes
from cup products over random finite-dimensional Q-block representations
and spans sl(d_1) ⊕ … ⊕ sl(d_n).  Each selected triple of eigenvalue blocks
contributes one defect built from the explicit infinite-dimensional
cocycles over the SU_q(2) representation, pulled back to Q.  Rank is
certified by SVD with a mandatory gap.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import DEFAULT_SV_TOL, MIN_GAP, RankCertificate, certified_rank
from .errors import (
    CrossCheckFailed,
    EliminationFailed,
    NoValidSelection,
    SpanShortfall,
    UnsupportedGPCase,
)
from .one_cocycles import solve_cocycle_space
from .q_recurrence import DEFAULT_TAIL_TOL, DEFAULT_TRUNCATION_CAP, case_cocycle
from .representations import direct_sum, epsilon_rep, random_block_unitary_rep, trivial_rep
from .spectrum import DEFAULT_GP_TOL, is_geometric_triple, slq_dimension, slq_residuals
from .two_cocycles import cup_product, defect, embed_table

COMPUTED = "Computed"
UNSUPPORTED = "UnsupportedGPCase"


# ---------------------------------------------------------------- triples

@dataclass(frozen=True)
class TripleSelection:
    """Triples of block indices and the order in which elimination discards them.

    ``elimination_order`` lists ``(triple_position, private_block)`` pairs.
    """

    triples: tuple
    elimination_order: tuple

    def to_json(self):
        return {
            "triples": [list(t) for t in self.triples],
            "elimination_order": [list(e) for e in self.elimination_order],
        }


def greedy_elimination(triples):
    """Repeatedly drop a triple owning a block index no other remaining triple has.

    Returns the ``(position, private_block)`` order, or None if it gets stuck.
    """
    remaining = list(range(len(triples)))
    order = []
    while remaining:
        for pos in remaining:
            others = set().union(*(triples[o] for o in remaining if o != pos))
            private = sorted(set(triples[pos]) - others)
            if private:
                order.append((pos, private[0]))
                remaining.remove(pos)
                break
        else:
            return None
    return order


def decay_ratio(values):
    """Tail decay ratio of the case cocycle for three block values (any order)."""
    hi, mid, lo = sorted(values, reverse=True)
    p2, q2 = mid / hi, lo / hi
    q = math.sqrt(q2)
    if p2 < q:
        return max(p2 / q, q2 / p2)
    return max(p2, q / p2)


def _gp(vals, idx, tol):
    return is_geometric_triple(*(vals[i] for i in idx), rel_tol=tol)


def _score(values):
    # rounded so that ties between collections do not hinge on last-bit noise
    return round(decay_ratio(values), 9)


def _worst_decay(vals, triples):
    return max(_score([vals[i] for i in t]) for t in triples)


def _constructive(vals, tol, base=(0, 1, 2, 3), tune=True):
    """Triples over positions of ``vals`` (sorted increasingly), or None.

    Follows the induction: two triples inside a 4-element base, then each
    further position joined to a non-geometric pair from the base.  With
    ``tune`` the base pair and every adjoined pair are the ones with the
    fastest-decaying case cocycle.
    """
    w, x, y, z = base
    if _gp(vals, (w, x, y), tol):
        second = next((t for t in ((w, y, z), (x, y, z)) if not _gp(vals, t, tol)), None)
        if second is None:
            return None
        triples = [(w, x, z), second]
    elif _gp(vals, (x, y, z), tol):
        triples = [(w, y, z), (w, x, y)]
    else:
        triples = [(w, x, y), (x, y, z)]
    if tune:
        good = [t for t in itertools.combinations(base, 3) if not _gp(vals, t, tol)]
        pairs = sorted(itertools.combinations(good, 2), key=lambda pr: _worst_decay(vals, pr))
        if pairs and _worst_decay(vals, pairs[0]) < _worst_decay(vals, triples):
            triples = list(pairs[0])
    for i in (j for j in range(len(vals)) if j not in base):
        pairs = [pr for pr in itertools.combinations(base, 2) if not _gp(vals, pr + (i,), tol)]
        if not pairs:
            return None
        pick = min(pairs, key=lambda pr: _score([vals[pr[0]], vals[pr[1]], vals[i]])) \
            if tune else pairs[0]
        triples.append(pick + (i,))
    return triples


def _tuned(vals, tol):
    best, score = None, math.inf
    for base in itertools.combinations(range(len(vals)), 4):
        cand = _constructive(vals, tol, base)
        if cand is not None and greedy_elimination(cand) is not None:
            sc = _worst_decay(vals, cand)
            if sc < score:
                best, score = cand, sc
    return best


def _search(vals, tol):
    n = len(vals)
    for start in itertools.combinations(range(n), 4):
        pair_pool = [t for t in itertools.combinations(start, 3) if not _gp(vals, t, tol)]
        for base in itertools.combinations(pair_pool, 2):
            triples = list(base)
            introduced = list(start)
            ok = True
            for i in (j for j in range(n) if j not in start):
                pairs = [pr for pr in itertools.combinations(introduced, 2)
                         if not _gp(vals, pr + (i,), tol)]
                if not pairs:
                    ok = False
                    break
                triples.append(tuple(sorted(pairs[0] + (i,))))
                introduced.append(i)
            if ok and greedy_elimination(triples) is not None:
                return triples
    return None


def select_triples(S, gp_tol=DEFAULT_GP_TOL, tune=True):
    """n - 2 non-geometric triples of blocks admitting full greedy elimination (n >= 4).

    With ``tune`` every 4-element base is tried and the collection whose
    worst case cocycle decays fastest wins; otherwise the base is the four
    smallest values.  A direct search is the fallback either way.
    """
    n = S.n
    if n < 4:
        raise ValueError("triple selection needs at least four eigenvalue blocks")
    # positions sorted by increasing value are the blocks in reverse order
    vals = list(reversed(S.values))
    to_block = [n - 1 - i for i in range(n)]
    chosen = _tuned(vals, gp_tol) if tune else _constructive(vals, gp_tol, tune=False)
    if chosen is None or greedy_elimination(chosen) is None:
        chosen = _search(vals, gp_tol)
    if chosen is None:
        raise NoValidSelection(f"no admissible triples for values {S.values}")
    triples = tuple(tuple(sorted(to_block[i] for i in t)) for t in chosen)
    if any(is_geometric_triple(*(S.values[b] for b in t), rel_tol=gp_tol) for t in triples):
        raise NoValidSelection("selected triple is geometric")
    order = greedy_elimination(triples)
    if order is None:
        raise NoValidSelection("selection fails greedy elimination")
    return TripleSelection(triples=triples, elimination_order=tuple(order))


# ---------------------------------------------------------------- results

@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    max_samples: int = 12
    extra_samples: int = 1
    sv_tol: float = DEFAULT_SV_TOL
    tail_tol: float = DEFAULT_TAIL_TOL
    truncation_cap: int = DEFAULT_TRUNCATION_CAP
    gp_tol: float = DEFAULT_GP_TOL
    slq_tol: float = 1e-6


@dataclass
class H2Result:
    status: str
    dimension: int | None
    spectrum: object
    basis_defects: list = field(default_factory=list)
    provenance: list = field(default_factory=list)
    rank_certificate: RankCertificate | None = None
    residuals: list = field(default_factory=list)
    triples: TripleSelection | None = None
    bounds: tuple | None = None
    message: str = ""

    @property
    def block_count(self):
        return sum(1 for p in self.provenance if p["source"] == "cup_product")

    def to_json(self):
        out = {
            "status": self.status,
            "dimension": self.dimension,
            "slq_dimension": slq_dimension(self.spectrum),
            "spectrum": self.spectrum.to_json(),
            "message": self.message,
        }
        if self.bounds is not None:
            out["bounds"] = list(self.bounds)
        if self.triples is not None:
            out["triples"] = self.triples.to_json()
        if self.rank_certificate is not None:
            out["rank_certificate"] = self.rank_certificate.to_json()
        out["basis"] = [np.stack([B.real, B.imag], axis=-1).tolist() for B in self.basis_defects]
        out["provenance"] = list(self.provenance)
        out["residuals"] = list(self.residuals)
        return out


def _unsupported(S):
    total = sum(m * m for m in S.mults)
    return H2Result(
        status=UNSUPPORTED, dimension=None, spectrum=S, bounds=(total - 3, total - 2),
        message="three eigenvalues in geometric progression: only bounds are known",
    )


def is_gp_excluded(S, gp_tol=DEFAULT_GP_TOL):
    return S.n == 3 and is_geometric_triple(*S.values, rel_tol=gp_tol)


def h2_dimension(S, gp_tol=DEFAULT_GP_TOL):
    """Dimension of H² from the block structure alone."""
    if is_gp_excluded(S, gp_tol):
        return _unsupported(S)
    return H2Result(status=COMPUTED, dimension=slq_dimension(S), spectrum=S)


# ---------------------------------------------------------------- sampling

def _random_combo(cocycles, rng):
    coef = rng.standard_normal(len(cocycles)) + 1j * rng.standard_normal(len(cocycles))
    coef /= np.linalg.norm(coef)
    eta = cocycles[0].scaled(coef[0])
    for z, c in zip(coef[1:], cocycles[1:]):
        eta = eta + c.scaled(z)
    return eta


def mixed_rep(S, trivial, m, rep_seed):
    """Counit with multiplicity ``trivial`` plus a random Q-block representation of size m.

    Random Q-block representations alone only produce coboundaries under the
    cup product, so the trivial summand is what carries the defect.
    """
    return direct_sum(trivial_rep(S, trivial), random_block_unitary_rep(S, m, rep_seed))


def sample_rep(S, seed, i):
    """Sample i of the block-part stream: the counit first, then mixed representations."""
    if i == 0:
        return epsilon_rep(S), {"rep": "epsilon", "m": 1}
    rep_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
    trivial, m = 1 + i % 2, 1 + (i // 2) % 2
    info = {"rep": "trivial+random", "trivial": trivial, "m": m, "rep_seed": rep_seed}
    return mixed_rep(S, trivial, m, rep_seed), info


def _cocycle_norm(eta):
    return float(np.sqrt(np.linalg.norm(eta.V) ** 2 + np.linalg.norm(eta.W) ** 2))


def random_cup_defects(R, count, rng, sv_tol=DEFAULT_SV_TOL, floor=1e-10):
    """Defects of ``count`` cup products of random cocycle combinations.

    Defects below ``floor`` times the product of the cocycle norms are
    round-off and are dropped.
    """
    cocycles = solve_cocycle_space(R, sv_tol)
    if not cocycles:
        return []
    out = []
    for _ in range(count):
        e1, e2 = _random_combo(cocycles, rng), _random_combo(cocycles, rng)
        Delta = defect(cup_product(e1, e2)).Delta
        if np.linalg.norm(Delta) > floor * _cocycle_norm(e1) * _cocycle_norm(e2):
            out.append(Delta)
    return out


def _unit(A):
    nrm = np.linalg.norm(A)
    return A / nrm if nrm > 0 else A


def _stack(mats):
    return np.array([_unit(A).ravel() for A in mats])


def block_part(S, cfg):
    """Defects of random finite-dimensional cup products until they span ⊕ sl(d_i)."""
    target = sum(m * m for m in S.mults) - S.n
    if target == 0:
        return [], []
    mats, prov = [], []
    rank, surplus = 0, None
    for i in range(cfg.max_samples):
        R, info = sample_rep(S, cfg.seed, i)
        rng = np.random.default_rng([cfg.seed, i, 1])
        for j, Delta in enumerate(random_cup_defects(R, target, rng, cfg.sv_tol)):
            mats.append(Delta)
            prov.append({"source": "cup_product", "sample": i, "draw": j, **info})
        rank = certified_rank(_stack(mats), cfg.sv_tol, check=False).rank if mats else 0
        if rank >= target:
            surplus = cfg.extra_samples if surplus is None else surplus - 1
            if surplus <= 0:
                break
    if rank < target:
        raise SpanShortfall(
            f"block part reached rank {rank} of {target} after {cfg.max_samples} samples",
            achieved_rank=rank, target_rank=target,
        )
    return mats, prov


def triple_defect(S, triple, cfg, reps=None):
    """Embedded defect of the case cocycle for one triple of blocks (any order)."""
    blocks = sorted(triple, key=lambda b: -S.values[b])
    hi, mid, lo = (S.values[b] for b in blocks)
    p, q = math.sqrt(mid / hi), math.sqrt(lo / hi)
    eta, case, N = case_cocycle(p, q, cfg.tail_tol, cfg.truncation_cap, case_tol=0.5 * cfg.gp_tol)
    small = cup_product(eta, eta)
    if reps is None:
        reps = [S.block_indices(b)[0] for b in blocks]
    big = embed_table(small, S, reps)
    info = {
        "source": f"case{case}",
        "triple": [int(b) for b in blocks],
        "indices": [int(r) for r in reps],
        "p": p,
        "q": q,
        "N": int(N),
    }
    return defect(big).Delta, info


def _pick_basis(mats, tol=1e-6):
    """Indices of a greedily chosen linearly independent subset of ``mats``."""
    basis, chosen = [], []
    for i, A in enumerate(mats):
        v = _unit(A).ravel()
        for b in basis:
            v = v - np.vdot(b, v) * b
        nrm = np.linalg.norm(v)
        if nrm > tol:
            basis.append(v / nrm)
            chosen.append(i)
    return chosen


def assemble_basis(S, cfg=None):
    """Certified basis of defect matrices spanning the image of the defect map."""
    cfg = cfg or PipelineConfig()
    if is_gp_excluded(S, cfg.gp_tol):
        raise UnsupportedGPCase(f"eigenvalues {S.values} form a geometric progression")
    block_mats, block_prov = block_part(S, cfg)
    selection = None
    if S.n == 3:
        selection = TripleSelection(triples=((0, 1, 2),), elimination_order=((0, 0),))
    elif S.n >= 4:
        selection = select_triples(S, cfg.gp_tol)
    triple_mats, triple_prov = [], []
    for t in selection.triples if selection else ():
        Delta, info = triple_defect(S, t, cfg)
        triple_mats.append(Delta)
        triple_prov.append(info)

    all_mats = block_mats + triple_mats
    target = slq_dimension(S)
    if not all_mats:
        cert = RankCertificate(np.zeros(0), 0, 0.0, math.inf)
    else:
        cert = certified_rank(_stack(all_mats), cfg.sv_tol, MIN_GAP)
    if cert.rank < target:
        raise SpanShortfall(
            f"defects span rank {cert.rank}, expected {target}",
            achieved_rank=cert.rank, target_rank=target,
        )
    if cert.rank > target:
        raise CrossCheckFailed(f"defects span rank {cert.rank} > sl_Q dimension {target}")

    chosen = _pick_basis(block_mats)
    basis = [block_mats[i] for i in chosen] + triple_mats
    prov = [block_prov[i] for i in chosen] + triple_prov
    if len(basis) != target:
        raise SpanShortfall(
            f"greedy basis has {len(basis)} elements, expected {target}",
            achieved_rank=len(basis), target_rank=target,
        )
    residuals = []
    for B in basis:
        off, tq, tqi = slq_residuals(B, S)
        scale = 1.0 + float(np.linalg.norm(B))
        residuals.append({
            "offblock": off,
            "trQ": abs(tq),
            "trQinv": abs(tqi),
            "in_slq": bool(max(off, abs(tq), abs(tqi)) <= cfg.slq_tol * scale),
        })
    return H2Result(
        status=COMPUTED, dimension=cert.rank, spectrum=S, basis_defects=basis,
        provenance=prov, rank_certificate=cert, residuals=residuals, triples=selection,
    )


def compute_h2(S, cfg=None):
    """h2_dimension for the excluded case, assemble_basis otherwise."""
    cfg = cfg or PipelineConfig()
    if is_gp_excluded(S, cfg.gp_tol):
        return _unsupported(S)
    return assemble_basis(S, cfg)


# ---------------------------------------------------------------- checks

@dataclass(frozen=True)
class IndependenceReport:
    trace_table: np.ndarray
    elimination_order: tuple
    block_rank: int
    block_target: int

    def to_json(self):
        return {
            "trace_table": np.abs(self.trace_table).tolist(),
            "elimination_order": [list(e) for e in self.elimination_order],
            "block_rank": self.block_rank,
            "block_target": self.block_target,
        }


def verify_independence(result, S, zero_tol=1e-8, nonzero_tol=1e-6, sv_tol=DEFAULT_SV_TOL):
    """Re-derive linear independence from partial traces and greedy elimination.

    Block-part elements must have all partial traces zero; a triple element
    must have nonzero partial trace exactly on its own blocks.  Elimination
    then removes triples via private blocks, and the rest is certified by rank.
    """
    traces = np.array([[sum(B[j, j] for j in S.block_indices(k)) for k in range(S.n)]
                       for B in result.basis_defects]) if result.basis_defects else np.zeros((0, S.n))
    scales = np.array([np.linalg.norm(B) for B in result.basis_defects])
    triples = []
    for row, (prov, tr, sc) in enumerate(zip(result.provenance, traces, scales)):
        if prov["source"] == "cup_product":
            if np.any(np.abs(tr) > zero_tol * (1 + sc)):
                raise EliminationFailed(f"block-part element {row} has a nonzero partial trace",
                                        trace_table=traces)
            continue
        own = set(prov["triple"])
        for k in range(S.n):
            nz = abs(tr[k]) >= nonzero_tol * sc and sc > 0
            zero = abs(tr[k]) <= zero_tol * (1 + sc)
            if (k in own and not nz) or (k not in own and not zero):
                raise EliminationFailed(
                    f"triple element {row} has partial trace {abs(tr[k]):.3g} on block {k}",
                    trace_table=traces,
                )
        triples.append(tuple(sorted(own)))
    order = greedy_elimination(triples)
    if order is None:
        raise EliminationFailed("greedy elimination got stuck", trace_table=traces)
    block_rows = [B for B, p in zip(result.basis_defects, result.provenance)
                  if p["source"] == "cup_product"]
    target = sum(m * m for m in S.mults) - S.n
    rank = certified_rank(_stack(block_rows), sv_tol).rank if block_rows else 0
    if rank != target or len(block_rows) != target:
        raise EliminationFailed(
            f"block part has rank {rank} with {len(block_rows)} elements, expected {target}",
            trace_table=traces,
        )
    return IndependenceReport(traces, tuple(order), rank, target)


@dataclass(frozen=True)
class NogoReport:
    samples: int
    max_violation: float
    tol: float
    max_defect_norm: float

    @property
    def passed(self):
        return self.max_violation <= self.tol

    def to_json(self):
        return {"samples": self.samples, "max_violation": self.max_violation, "tol": self.tol,
                "max_defect_norm": self.max_defect_norm, "passed": self.passed}


def nogo_experiment(S, samples=50, seed=0, tol=1e-8, sv_tol=DEFAULT_SV_TOL):
    """Largest scaled partial trace of defects of random finite-dimensional cup products."""
    worst = biggest = 0.0
    for i in range(samples):
        rep_seed = int(np.random.SeedSequence([seed, i, 7]).generate_state(1)[0])
        R = mixed_rep(S, 1 + i % 2, 1 + i % 3, rep_seed)
        rng = np.random.default_rng([seed, i, 8])
        for Delta in random_cup_defects(R, 1, rng, sv_tol, floor=0.0):
            tr = np.array([sum(Delta[j, j] for j in S.block_indices(k)) for k in range(S.n)])
            nrm = float(np.linalg.norm(Delta))
            worst = max(worst, float(np.abs(tr).max()) / (1 + nrm))
            biggest = max(biggest, nrm)
    return NogoReport(samples=samples, max_violation=worst, tol=tol, max_defect_norm=biggest)
