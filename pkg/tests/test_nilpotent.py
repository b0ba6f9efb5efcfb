"""Local system data: exactness of the finite exponentials and tensor helpers."""

import numpy as np
import pytest

from mirror_torus.nilpotent import (
    LocalSystemData,
    NotNilpotent,
    adjoint_on_dual,
    intertwiners,
    nilpotent_exp,
    partial_trace_middle,
    tensor_sum,
)


def test_construction():
    t = LocalSystemData.trivial(1)
    assert t.dim == 1 and t.nil_index == 1
    j3 = LocalSystemData.jordan(3)
    assert j3.dim == 3 and j3.nil_index == 3
    assert np.all(j3.matrix == np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]]))


def test_non_nilpotent_rejected():
    with pytest.raises(NotNilpotent):
        LocalSystemData(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(NotNilpotent):
        LocalSystemData(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_matrix_read_only():
    j2 = LocalSystemData.jordan(2)
    with pytest.raises(ValueError):
        j2.matrix[0, 1] = 5.0


def test_exp_closed_forms():
    j2 = LocalSystemData.jordan(2)
    e = nilpotent_exp(j2, 0.7)
    assert np.allclose(e, [[1.0, 0.7], [0.0, 1.0]])
    j3 = LocalSystemData.jordan(3)
    e = nilpotent_exp(j3, 2.0)
    assert np.allclose(e, [[1, 2, 2], [0, 1, 2], [0, 0, 1]])
    # group law and inverse
    a, b = 0.31, -1.7
    assert np.allclose(nilpotent_exp(j3, a) @ nilpotent_exp(j3, b), nilpotent_exp(j3, a + b))
    assert np.allclose(nilpotent_exp(j3, a) @ nilpotent_exp(j3, -a), np.eye(3))


def test_scaled():
    j2 = LocalSystemData.jordan(2)
    s = j2.scaled(3)
    assert np.allclose(s.matrix, 3 * j2.matrix)
    assert s.nil_index == 2


def test_tensor_sum_exponentiates():
    j2 = LocalSystemData.jordan(2)
    j3 = LocalSystemData.jordan(3)
    ts = tensor_sum(j2.matrix, j3.matrix)
    combined = LocalSystemData(ts)
    lhs = nilpotent_exp(combined, 0.4)
    rhs = np.kron(nilpotent_exp(j2, 0.4), nilpotent_exp(j3, 0.4))
    assert np.allclose(lhs, rhs)


def test_adjoint_on_dual():
    j3 = LocalSystemData.jordan(3)
    assert np.allclose(adjoint_on_dual(j3.matrix), j3.matrix.T)


def test_partial_trace_middle_pure_tensor():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 2))  # A: V1 -> V2
    b = rng.normal(size=(2, 3))  # B: V2 -> V3
    tensor = np.einsum("ai,bc->aibc", a, b)
    out = partial_trace_middle(tensor)
    assert np.allclose(out, b @ a)


def test_intertwiner_counts():
    t = LocalSystemData.trivial(1)
    j2 = LocalSystemData.jordan(2)
    j3 = LocalSystemData.jordan(3)
    # commutant of a single Jordan block has its dimension
    assert len(intertwiners(j2.matrix, j2.matrix)) == 2
    assert len(intertwiners(j3.matrix, j3.matrix)) == 3
    # hom between blocks of sizes p <= q has dimension min(p, q)
    assert len(intertwiners(j2.matrix, j3.matrix)) == 2
    assert len(intertwiners(j3.matrix, j2.matrix)) == 2
    assert len(intertwiners(t.matrix, j3.matrix)) == 1
    assert len(intertwiners(t.matrix, t.matrix)) == 1


def test_intertwiners_intertwine():
    j2 = LocalSystemData.jordan(2)
    j3 = LocalSystemData.jordan(3)
    for t in intertwiners(j2.matrix, j3.matrix):
        assert np.abs(j3.matrix @ t - t @ j2.matrix).max() < 1e-10
        assert t.shape == (3, 2)
