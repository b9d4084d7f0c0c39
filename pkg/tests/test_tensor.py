import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lookahead_dialogue import tensor as T


def test_matmul_identity():
    a = T.tensor(np.eye(2))
    b = T.tensor([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(T.matmul(a, b).data, b.data)


def test_matmul_single_entry():
    a = T.tensor([[1.0, 0.0]])
    b = T.tensor([[0.0], [5.0]])
    np.testing.assert_array_equal(T.matmul(a, b).data, [[0.0]])


def test_matmul_matches_triple_loop():
    rng = np.random.default_rng(7)
    a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
    ref = np.zeros((3, 2))
    for i in range(3):
        for j in range(2):
            for k in range(4):
                ref[i, j] += a[i, k] * b[k, j]
    out = T.matmul(T.tensor(a), T.tensor(b)).data
    np.testing.assert_allclose(out, ref, rtol=0, atol=1e-12)


def test_matmul_shape_mismatch():
    with pytest.raises(ValueError):
        T.matmul(T.tensor(np.ones((2, 3))), T.tensor(np.ones((2, 3))))


def test_pointwise_values():
    assert T.pointwise("sigmoid", T.tensor([0.0])).data[0] == 0.5
    assert T.pointwise("tanh", T.tensor([0.0])).data[0] == 0.0
    got = T.sigmoid(T.tensor([2.0])).data[0]
    assert got == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), abs=1e-12)


def test_pointwise_shape_mismatch():
    with pytest.raises(ValueError):
        T.add(T.tensor([1.0, 2.0]), T.tensor([1.0]))


def test_pointwise_concat_dispatch():
    out = T.pointwise("concat", T.tensor([1.0]), T.tensor([2.0, 3.0]))
    np.testing.assert_array_equal(out.data, [1.0, 2.0, 3.0])


def test_softmax_uniform_and_singleton():
    np.testing.assert_allclose(T.softmax(T.tensor([0.0, 0.0, 0.0])).data, np.ones(3) / 3)
    for x in (-30.0, 0.0, 42.0):
        np.testing.assert_array_equal(T.softmax(T.tensor([x])).data, [1.0])


def test_softmax_matches_direct_formula():
    v = np.array([1.0, 2.0, 3.0])
    ref = np.exp(v) / np.exp(v).sum()
    np.testing.assert_allclose(T.softmax(T.tensor(v)).data, ref, atol=1e-15)


def test_softmax_empty_errors():
    with pytest.raises(ValueError):
        T.softmax(T.tensor(np.zeros(0)))


@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=8))
def test_softmax_properties(vals):
    out = T.softmax(T.tensor(vals)).data
    assert abs(out.sum() - 1.0) <= 1e-9
    assert (out > 0).all()
    perm = np.random.default_rng(0).permutation(len(vals))
    permuted = T.softmax(T.tensor(np.asarray(vals)[perm])).data
    np.testing.assert_allclose(permuted, out[perm], atol=1e-12)


def test_cross_entropy_uniform():
    loss = T.cross_entropy(T.tensor(np.zeros(4)), 2)
    assert loss.item() == pytest.approx(math.log(4), abs=1e-12)


def test_cross_entropy_saturated():
    logits = np.zeros(5)
    logits[3] = 1e6
    assert T.cross_entropy(T.tensor(logits), 3).item() == pytest.approx(0.0, abs=1e-9)


def test_cross_entropy_matches_log_softmax():
    rng = np.random.default_rng(3)
    logits = rng.normal(size=9)
    ref = -math.log(np.exp(logits)[4] / np.exp(logits).sum())
    assert T.cross_entropy(T.tensor(logits), 4).item() == pytest.approx(ref, abs=1e-12)


def test_cross_entropy_bad_target():
    with pytest.raises(IndexError):
        T.cross_entropy(T.tensor(np.zeros(3)), 3)


def test_backward_sum_gives_ones():
    p = T.parameter(np.random.default_rng(0).normal(size=(3, 2)))
    T.backward(T.tsum(p))
    np.testing.assert_array_equal(p.grad, np.ones((3, 2)))


def test_backward_sigmoid_dot():
    # d/dw sigmoid(w.x) at w=0 is 0.25*x
    x = T.tensor([1.0, -2.0, 3.0])
    w = T.parameter(np.zeros(3))
    T.backward(T.sigmoid(T.dot(w, x)))
    np.testing.assert_allclose(w.grad, 0.25 * x.data, atol=1e-12)


def test_backward_requires_scalar():
    p = T.parameter(np.ones(3))
    with pytest.raises(ValueError):
        T.backward(T.mul(p, p))


def test_backward_visits_shared_nodes_once():
    # y = (p*p) + (p*p) reuses the same intermediate; grad must be 4p
    p = T.parameter(np.array([3.0]))
    sq = T.mul(p, p)
    T.backward(T.tsum(T.add(sq, sq)))
    np.testing.assert_allclose(p.grad, [12.0])


def test_no_nan_inf_within_plusminus_50():
    v = T.tensor([-50.0, -1.0, 0.0, 1.0, 50.0])
    for op in (T.sigmoid, T.tanh, T.softmax):
        assert np.isfinite(op(v).data).all()
    assert np.isfinite(T.cross_entropy(v, 0).data).all()


def test_nonfinite_input_rejected():
    with pytest.raises(FloatingPointError):
        T.tensor([np.inf, 1.0])


def test_logistic_loss_matches_formula():
    for x, z in [(0.7, 1.0), (-2.2, 0.0), (8.0, 0.0)]:
        p = 1.0 / (1.0 + math.exp(-x))
        ref = -(z * math.log(p) + (1 - z) * math.log(1 - p))
        assert T.logistic_loss(T.tensor(x), z).item() == pytest.approx(ref, abs=1e-9)


def test_scale_pick_stack_grads():
    v = T.parameter(np.array([1.0, 2.0, 3.0]))
    s = T.parameter(np.array(2.0))
    out = T.tsum(T.scale(v, s))
    T.backward(out)
    np.testing.assert_allclose(v.grad, [2.0, 2.0, 2.0])
    assert s.grad == pytest.approx(6.0)

    w = T.parameter(np.array([5.0, 7.0]))
    T.zero_grads([w])
    T.backward(T.pick(w, 1))
    np.testing.assert_array_equal(w.grad, [0.0, 1.0])


def test_row_and_mean_rows_accumulate_sparse():
    e = T.parameter(np.arange(12.0).reshape(4, 3))
    out = T.add(T.row(e, 1), T.mean_rows(e, [0, 2]))
    T.backward(T.tsum(out))
    expect = np.zeros((4, 3))
    expect[1] += 1.0
    expect[0] += 0.5
    expect[2] += 0.5
    np.testing.assert_allclose(e.grad, expect)


def test_no_grad_blocks_recording():
    p = T.parameter(np.ones(2))
    with T.no_grad():
        out = T.mul(p, p)
    assert out._backward is None and not out.requires_grad


def _random_params(rng, *shapes):
    return [T.parameter(rng.normal(size=s) * 0.5) for s in shapes]


def test_gradient_check_composite():
    rng = np.random.default_rng(11)
    w, b, u = _random_params(rng, (4, 3), (4,), (4,))
    x = T.tensor(rng.normal(size=3))

    def loss():
        h = T.tanh(T.add(T.matvec(w, x), b))
        return T.logistic_loss(T.dot(u, T.sigmoid(h)), 1.0)

    worst = T.gradient_check(loss, [w, b, u], coords_per_param=10)
    assert worst < 1e-4


def test_gradient_check_softmax_ce_path():
    rng = np.random.default_rng(5)
    (m,) = _random_params(rng, (5, 4))
    x = T.tensor(rng.normal(size=4))

    def loss():
        return T.cross_entropy(T.matvec(m, x), 2)

    assert T.gradient_check(loss, [m]) < 1e-4
