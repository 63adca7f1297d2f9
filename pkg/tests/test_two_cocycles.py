import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqcohom.errors import (
    IndexNotInBlock,
    NotACoboundary,
    NotExactRepresentation,
    NotNormalized,
    RepresentationMismatch,
    SpectrumMismatch,
)
from uqcohom.one_cocycles import cocycle_null_space, make_cocycle, solve_cocycle_space
from uqcohom.q_recurrence import case_cocycle
from uqcohom.representations import direct_sum, keyrep, random_block_unitary_rep, trivial_rep
from uqcohom.spectrum import build_spectrum, partial_traces
from uqcohom.two_cocycles import (
    TwoCocycleTable,
    coboundary_from_rep,
    compute_AB,
    construct_psi,
    cup_product,
    defect,
    embed_matrix,
    embed_table,
    is_coboundary,
    psi_relation_residuals,
    zero_table,
)

S5 = build_spectrum([1.0, 1.0, 0.64, 0.25, 0.25])


def mixed(S, seed, m=2):
    return direct_sum(trivial_rep(S, 1), random_block_unitary_rep(S, m, seed))


def random_cocycle(R, rng):
    basis, _ = cocycle_null_space(R)
    coef = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return make_cocycle(np.tensordot(coef, basis, axes=1), R)


def test_zero_table():
    t = zero_table(S5)
    ab = compute_AB(t)
    assert np.abs(ab.A).max() == 0 and np.abs(ab.B).max() == 0
    rep = defect(t)
    assert np.abs(rep.Delta).max() == 0 and rep.slq_ok
    assert is_coboundary(t)
    psi = construct_psi(t)
    assert np.abs(psi.lam).max() == 0 and np.abs(psi.mu).max() == 0


def test_cup_with_zero_is_zero():
    R = mixed(S5, 0)
    eta = solve_cocycle_space(R)[0]
    t = cup_product(eta.scaled(0), eta)
    for val in t.tensors().values():
        assert np.abs(val).max() == 0


def test_cup_needs_same_rep():
    a = solve_cocycle_space(mixed(S5, 0))[0]
    b = solve_cocycle_space(mixed(S5, 1))[0]
    with pytest.raises(RepresentationMismatch):
        cup_product(a, b)


def test_cup_conjugate_linear_in_first_slot():
    R = mixed(S5, 3)
    rng = np.random.default_rng(0)
    a, b = random_cocycle(R, rng), random_cocycle(R, rng)
    z = 0.3 - 1.7j
    lhs = cup_product(a.scaled(z), b).su
    np.testing.assert_allclose(lhs, np.conj(z) * cup_product(a, b).su, atol=1e-12)
    rhs = cup_product(a, b.scaled(z)).su
    np.testing.assert_allclose(rhs, z * cup_product(a, b).su, atol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_finite_dim_cup_products(seed):
    R = mixed(S5, seed)
    rng = np.random.default_rng(seed)
    t = cup_product(random_cocycle(R, rng), random_cocycle(R, rng))
    assert compute_AB(t).discrepancy < 1e-10
    rep = defect(t)
    assert rep.slq_ok
    assert np.abs(rep.partial_traces).max() < 1e-10


def test_non_cocycle_table_reports_discrepancy():
    rng = np.random.default_rng(1)
    shape = (3,) * 4
    arrs = [rng.standard_normal(shape) for _ in range(4)]
    t = TwoCocycleTable(build_spectrum([1.0, 0.5, 0.2]), *arrs)
    assert compute_AB(t).discrepancy > 1e-3


def test_not_normalized():
    S = build_spectrum([1.0, 0.5])
    z = np.zeros((2,) * 4)
    t = TwoCocycleTable(S, z, z, z, z, normalized=False)
    for fn in (compute_AB, defect, is_coboundary):
        with pytest.raises(NotNormalized):
            fn(t)


def test_case1_defect_signs():
    c, case, N = case_cocycle(0.6, 0.5)
    assert case == 1
    Delta = defect(cup_product(c, c)).Delta
    s = np.linalg.norm(c.V[0, 1]) ** 2
    t = np.linalg.norm(c.V[2, 1]) ** 2
    np.testing.assert_allclose(np.diag(Delta).real, [-s / 0.36, s + t, -0.25 * t / 0.36], rtol=1e-9)
    assert np.abs(Delta - np.diag(np.diag(Delta))).max() < 1e-12
    verdict = is_coboundary(cup_product(c, c))
    assert not verdict and verdict.witness[0] == verdict.witness[1]


def test_case2_defect_signs():
    c, case, N = case_cocycle(0.8, 0.5)
    assert case == 2
    diag = np.diag(defect(cup_product(c, c)).Delta).real
    u, w = np.linalg.norm(c.V[1, 0]) ** 2, np.linalg.norm(c.V[1, 2]) ** 2
    np.testing.assert_allclose(diag, [u, -0.64 * u - 0.64 / 0.25 * w, w], rtol=1e-9)
    assert np.sign(diag).tolist() == [1, -1, 1]


def test_case_defect_in_slq():
    for p, q in ((0.6, 0.5), (0.8, 0.5)):
        c, _, _ = case_cocycle(p, q)
        rep = defect(cup_product(c, c))
        Q = c.rep.spectrum.diag
        scale = np.abs(rep.Delta).max()
        assert abs(rep.trQinv) < 1e-12 * scale
        assert abs(rep.trQ) < 1e-8 * scale
        assert np.sum(np.diag(rep.Delta) * Q) == pytest.approx(rep.trQ, abs=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_coboundary_roundtrip(seed):
    R = mixed(S5, seed)
    rng = np.random.default_rng(seed + 10)
    phi = rng.standard_normal((R.m, R.m)) + 1j * rng.standard_normal((R.m, R.m))
    t = coboundary_from_rep(R, phi)
    assert compute_AB(t).discrepancy < 1e-10
    assert is_coboundary(t)
    assert np.abs(defect(t).Delta).max() < 1e-10
    psi = construct_psi(t)
    assert max(psi_relation_residuals(t, psi)) < 1e-9


def test_coboundary_phi_zero():
    t = coboundary_from_rep(mixed(S5, 0), np.zeros((3, 3)))
    assert all(np.abs(v).max() == 0 for v in t.tensors().values())


def test_coboundary_needs_exact_rep():
    with pytest.raises(NotExactRepresentation):
        coboundary_from_rep(keyrep(0.8, 0.5, 5), np.eye(5))


def test_construct_psi_rejects_cocycle():
    c, _, _ = case_cocycle(0.6, 0.5)
    with pytest.raises(NotACoboundary):
        construct_psi(cup_product(c, c))


def test_identity_embedding():
    c, _, _ = case_cocycle(0.8, 0.5)
    t = cup_product(c, c)
    e = embed_table(t, t.spectrum, [0, 1, 2])
    for name, val in t.tensors().items():
        np.testing.assert_array_equal(e.tensors()[name], val)


def test_embed_case2_into_five():
    c, _, _ = case_cocycle(0.8, 0.5)
    t = cup_product(c, c)
    e = embed_table(t, S5, [0, 2, 3])
    Delta = defect(e).Delta
    nz = np.flatnonzero(np.abs(np.diag(Delta)) > 1e-12)
    assert nz.tolist() == [0, 2, 3]
    tr = partial_traces(Delta, S5)
    assert np.all(np.abs(tr) > 1e-6)
    np.testing.assert_allclose(Delta, embed_matrix(defect(t).Delta, S5, [0, 2, 3]), atol=1e-14)


def test_embed_skipping_a_block():
    c, _, _ = case_cocycle(0.8, 0.5)
    target = build_spectrum([2.0, 1.5, 1.28, 0.5])
    Delta = defect(embed_table(cup_product(c, c), target, [0, 2, 3])).Delta
    tr = partial_traces(Delta, target)
    assert abs(tr[1]) == 0 and np.all(np.abs(tr[[0, 2, 3]]) > 1e-6)


def test_embed_errors():
    c, _, _ = case_cocycle(0.8, 0.5)
    t = cup_product(c, c)
    with pytest.raises(SpectrumMismatch):
        embed_table(t, build_spectrum([1.0, 0.6, 0.25]), [0, 1, 2])
    with pytest.raises(IndexNotInBlock):
        embed_table(t, S5, [0, 3, 2])
    with pytest.raises(IndexNotInBlock):
        embed_table(t, S5, [0, 2])
    with pytest.raises(IndexNotInBlock):
        embed_table(t, S5, [0, 2, 9])


def test_table_arithmetic_and_json():
    c, _, _ = case_cocycle(0.8, 0.5)
    t = cup_product(c, c)
    np.testing.assert_allclose(defect(t + t.scaled(2)).Delta, 3 * defect(t).Delta)
    data = zero_table(build_spectrum([1.0, 0.5])).to_json()
    assert "uu" in data and data["normalized"] is True


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_defect_commutes_with_embedding(seed):
    R = mixed(build_spectrum([1.0, 1.0, 0.4]), seed, m=1)
    rng = np.random.default_rng(seed)
    t = cup_product(random_cocycle(R, rng), random_cocycle(R, rng))
    target = build_spectrum([1.0, 1.0, 1.0, 0.7, 0.4])
    reps = [0, 2, 4]
    lhs = defect(embed_table(t, target, reps)).Delta
    rhs = embed_matrix(defect(t).Delta, target, reps)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
