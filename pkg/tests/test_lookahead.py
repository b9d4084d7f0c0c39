import numpy as np
import pytest

from lookahead_dialogue import tensor as T
from lookahead_dialogue import encoders as E
from lookahead_dialogue import lookahead as L


def _toy(rng, d_g=2, d_h=3, scale=0.5):
    la = L.LookaheadParams(
        gru=E.make_gru(rng, d_h, d_h, scale),
        project=T.parameter(rng.uniform(-scale, scale, size=(d_h, 2 * d_h))),
        input_adapter=T.parameter(rng.uniform(-scale, scale, size=(d_h, d_g + 2 * d_h))),
    )
    encoded = T.tensor(rng.normal(size=d_g + 2 * d_h))
    return la, encoded


def test_forward_sweep_k1_is_adapted_input():
    rng = np.random.default_rng(0)
    la, encoded = _toy(rng)
    states = L.forward_sweep(la, encoded, 1)
    assert len(states) == 1
    np.testing.assert_array_equal(states[0].data, la.input_adapter.data @ encoded.data)


def test_forward_sweep_zero_params_zero_states():
    d_h, d_g = 3, 2
    z = lambda *s: T.parameter(np.zeros(s))
    la = L.LookaheadParams(
        gru=E.GruParams(z(d_h, 2 * d_h), z(d_h), z(d_h, 2 * d_h), z(d_h), z(d_h, 2 * d_h), z(d_h)),
        project=z(d_h, 2 * d_h),
        input_adapter=z(d_h, d_g + 2 * d_h),
    )
    states = L.forward_sweep(la, T.tensor(np.ones(d_g + 2 * d_h)), 3)
    for s in states:
        np.testing.assert_array_equal(s.data, np.zeros(d_h))


def test_forward_sweep_matches_unrolled_oracle():
    rng = np.random.default_rng(5)
    la, encoded = _toy(rng)
    states = L.forward_sweep(la, encoded, 3)
    h = la.input_adapter.data @ encoded.data
    ref = [h]
    for _ in range(2):
        inp = la.project.data @ np.concatenate([ref[-1], np.zeros(3)])
        h = E.gru_step(la.gru, T.tensor(ref[-1]), T.tensor(inp)).data
        ref.append(h)
    for got, want in zip(states, ref):
        np.testing.assert_allclose(got.data, want, atol=1e-12)


def test_backward_sweep_k1_identical_object():
    rng = np.random.default_rng(1)
    la, encoded = _toy(rng)
    fwd = L.forward_sweep(la, encoded, 1)
    bwd = L.backward_sweep(la, fwd)
    assert bwd[0] is fwd[0]


def test_backward_sweep_matches_reverse_oracle():
    rng = np.random.default_rng(7)
    la, encoded = _toy(rng)
    fwd = L.forward_sweep(la, encoded, 3)
    bwd = L.backward_sweep(la, fwd)
    ref = [None, None, fwd[2].data]
    for i in (1, 0):
        inp = la.project.data @ np.concatenate([fwd[i + 1].data, ref[i + 1]])
        ref[i] = E.gru_step(la.gru, T.tensor(ref[i + 1]), T.tensor(inp)).data
    for got, want in zip(bwd, ref):
        np.testing.assert_allclose(got.data, want, atol=1e-12)


def test_combine_layout_and_mismatch():
    rng = np.random.default_rng(2)
    la, encoded = _toy(rng)
    fwd = L.forward_sweep(la, encoded, 2)
    bwd = L.backward_sweep(la, fwd)
    states = L.combine(fwd, bwd)
    for f, b, s in zip(fwd, bwd, states):
        np.testing.assert_array_equal(s.data[:3], f.data)
        np.testing.assert_array_equal(s.data[3:], b.data)
    with pytest.raises(ValueError):
        L.combine(fwd, bwd[:1])


def test_k1_combined_state_duplicates_forward():
    rng = np.random.default_rng(3)
    la, encoded = _toy(rng)
    states, projected = L.lookahead_states(la, encoded, 1)
    assert len(states) == len(projected) == 1
    np.testing.assert_array_equal(states[0].data[:3], states[0].data[3:])


def test_parameter_sharing_between_sweeps():
    # nudging the single shared GRU changes backward-sweep states too
    rng = np.random.default_rng(11)
    la, encoded = _toy(rng)
    before = [s.data.copy() for s in L.backward_sweep(la, L.forward_sweep(la, encoded, 3))]
    la.gru.wh.data += 0.05
    after = [s.data.copy() for s in L.backward_sweep(la, L.forward_sweep(la, encoded, 3))]
    assert any(not np.allclose(b, a) for b, a in zip(before[:-1], after[:-1]))


def test_gradient_flows_through_projection():
    rng = np.random.default_rng(13)
    la, _ = _toy(rng)
    encoded = T.parameter(rng.normal(size=2 + 2 * 3))

    def loss():
        states, projected = L.lookahead_states(la, encoded, 3)
        total = T.tsum(projected[0])
        for p in projected[1:]:
            total = T.add(total, T.tsum(p))
        return total

    worst = T.gradient_check(loss, [la.project, la.input_adapter, encoded] + la.gru.tensors())
    assert worst < 1e-4


def test_horizon_must_be_positive():
    rng = np.random.default_rng(0)
    la, encoded = _toy(rng)
    with pytest.raises(ValueError):
        L.forward_sweep(la, encoded, 0)
