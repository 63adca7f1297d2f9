import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqcohom.errors import CompressionTooLarge, ParameterOrderViolation, QOutOfRange
from uqcohom.representations import (
    OperatorMatrix,
    direct_sum,
    epsilon_rep,
    infdim_rep,
    keyrep,
    max_residual,
    random_block_unitary_rep,
    relation_residuals,
    suq2_generators,
    suq2_relation_residuals,
    trivial_rep,
)
from uqcohom.spectrum import build_spectrum

S = build_spectrum([1.0, 1.0, 0.64, 0.25])


def test_generators_shape_and_entries():
    g = suq2_generators(0.5, 4)
    assert g.alpha.shape == (4, 4)
    assert g.alpha[0, 1] == pytest.approx(np.sqrt(1 - 0.25))
    np.testing.assert_allclose(np.diag(g.gamma), [1, 0.5, 0.25, 0.125])


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5])
def test_generators_reject_q(q):
    with pytest.raises(QOutOfRange):
        suq2_generators(q, 5)


@pytest.mark.parametrize("q", [0.1, 0.5, 0.9])
def test_generator_relations(q):
    res = suq2_relation_residuals(suq2_generators(q, 30))
    assert max(res.values()) < 1e-12


def test_alpha_alphastar_fails_without_compression():
    g = suq2_generators(0.5, 10)
    assert suq2_relation_residuals(g, M=10)["alpha_alphastar"] > 0.5


def test_epsilon_and_trivial():
    eps = epsilon_rep(S)
    assert eps.m == 1 and eps.is_exact
    assert max_residual(relation_residuals(eps)) == 0
    t = trivial_rep(S, 3)
    assert t.blocks.shape == (4, 4, 3, 3)
    assert max_residual(relation_residuals(t)) == 0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_random_rep_relations(m):
    R = random_block_unitary_rep(S, m, seed=11)
    assert R.blocks.shape == (4, 4, m, m)
    assert max_residual(relation_residuals(R)) < 1e-12


def test_random_rep_is_seeded():
    a = random_block_unitary_rep(S, 2, seed=5).blocks
    b = random_block_unitary_rep(S, 2, seed=5).blocks
    c = random_block_unitary_rep(S, 2, seed=6).blocks
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_random_rep_mixes_within_blocks_only():
    R = random_block_unitary_rep(S, 2, seed=1)
    mask = S.block_mask()
    assert np.abs(R.blocks[~mask]).max() == 0
    assert np.abs(R.blocks[0, 1]).max() > 1e-3


def test_random_rep_noncommutative():
    R = random_block_unitary_rep(S, 2, seed=2)
    x, y = R.blocks[0, 0], R.blocks[0, 1]
    assert np.linalg.norm(x @ y - y @ x) > 1e-6


def test_direct_sum():
    R = direct_sum(trivial_rep(S, 1), random_block_unitary_rep(S, 2, seed=0))
    assert R.m == 3
    assert max_residual(relation_residuals(R)) < 1e-12
    with pytest.raises(ValueError):
        direct_sum(trivial_rep(S, 1), keyrep(0.7, 0.4, 5))


@pytest.mark.parametrize("p,q", [(0.8, 0.5), (0.6, 0.3)])
def test_keyrep_relations(p, q):
    R = keyrep(p, q, 25)
    assert R.kind == "truncated" and R.buffer == 24
    np.testing.assert_allclose(R.spectrum.diag, [1, p * p, q * q])
    assert max_residual(relation_residuals(R)) < 1e-12
    assert max_residual(relation_residuals(R, M=25)) > 0.1


def test_keyrep_structure():
    R = keyrep(0.8, 0.5, 6)
    np.testing.assert_array_equal(R.blocks[1, 1], np.eye(6))
    assert np.abs(R.blocks[0, 1]).max() == 0


def test_infdim_rep_relations():
    R = infdim_rep(0.8, 0.5, 20)
    np.testing.assert_allclose(R.spectrum.diag, [0.64, 1, 0.25])
    assert max_residual(relation_residuals(R)) < 1e-12


@pytest.mark.parametrize("p,q", [(0.5, 0.8), (0.5, 0.5), (1.0, 0.5), (0.5, 0.0)])
def test_parameter_order(p, q):
    with pytest.raises(ParameterOrderViolation):
        keyrep(p, q, 5)
    with pytest.raises(ParameterOrderViolation):
        infdim_rep(p, q, 5)


def test_compression_too_large():
    with pytest.raises(CompressionTooLarge):
        relation_residuals(keyrep(0.8, 0.5, 5), M=6)


def test_operator_matrix_json():
    data = epsilon_rep(build_spectrum([1.0, 0.5])).to_json()
    assert data["kind"] == "exact"


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 3))
def test_random_rep_unitary_for_any_seed(seed, m):
    assert max_residual(relation_residuals(random_block_unitary_rep(S, m, seed))) < 1e-11


@settings(max_examples=25, deadline=None)
@given(q=st.floats(0.05, 0.9), gap=st.floats(0.02, 0.5), N=st.integers(3, 30))
def test_keyrep_relations_any_params(q, gap, N):
    p = min(q + gap, 0.99)
    if p <= q:
        return
    assert max_residual(relation_residuals(keyrep(p, q, N))) < 1e-11
