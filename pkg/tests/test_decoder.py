import numpy as np
import pytest

from lookahead_dialogue import tensor as T
from lookahead_dialogue import decoder as DE
from lookahead_dialogue.corpus import BOS_ID, EOS_ID, GoalVector
from lookahead_dialogue.encoders import gru_step
from lookahead_dialogue.model import ModelConfig, init_params, sample_context, baseline_context


def _toy(seed=0, vocab=5, d_e=3, d_g=2, d_h=4, k=3):
    cfg = ModelConfig(vocab_size=vocab, goal_dim=2, d_embed=d_e, d_goal=d_g, d_hidden=d_h, lookahead_k=k)
    return cfg, init_params(cfg, seed=seed)


def test_attention_k1_passthrough():
    cfg, params = _toy(k=1)
    ctx = sample_context(params, cfg, GoalVector((1, 0)), [], (1, 2))
    np.testing.assert_array_equal(ctx["v"].data, [1.0])
    np.testing.assert_array_equal(ctx["r"].data, ctx["states"][0].data)


def test_attention_uniform_on_identical_states():
    cfg, params = _toy()
    s = T.tensor(np.random.default_rng(0).normal(size=8))
    p = T.tensor(np.random.default_rng(1).normal(size=4))
    v, r = DE.attention(params.dec, [p, p, p], [s, s, s])
    np.testing.assert_allclose(v.data, np.ones(3) / 3, atol=1e-12)
    np.testing.assert_allclose(r.data, s.data, atol=1e-12)


def test_attention_matches_direct_formula():
    cfg, params = _toy(seed=3)
    rng = np.random.default_rng(4)
    projected = [T.tensor(rng.normal(size=4)) for _ in range(3)]
    states = [T.tensor(rng.normal(size=8)) for _ in range(3)]
    v, r = DE.attention(params.dec, projected, states)
    scores = np.array([params.dec.attn_v.data @ np.tanh(p.data) for p in projected])
    ref_v = np.exp(scores - scores.max())
    ref_v /= ref_v.sum()
    ref_r = sum(ref_v[i] * states[i].data for i in range(3))
    np.testing.assert_allclose(v.data, ref_v, atol=1e-12)
    np.testing.assert_allclose(r.data, ref_r, atol=1e-12)


def test_attention_weights_sum_to_one_and_r_in_hull():
    cfg, params = _toy(seed=9)
    rng = np.random.default_rng(5)
    projected = [T.tensor(rng.normal(size=4)) for _ in range(4)]
    states = [T.tensor(rng.normal(size=8)) for _ in range(4)]
    v, r = DE.attention(params.dec, projected, states)
    assert abs(v.data.sum() - 1.0) < 1e-9
    lo = np.min([s.data for s in states], axis=0)
    hi = np.max([s.data for s in states], axis=0)
    assert (r.data >= lo - 1e-12).all() and (r.data <= hi + 1e-12).all()


def test_attention_empty_errors():
    cfg, params = _toy()
    with pytest.raises(ValueError):
        DE.attention(params.dec, [], [])


def test_decode_stops_at_forced_eos():
    cfg, params = _toy()
    # hand-set params so the EOS logit dominates from the first step:
    # zero GRU weights with positive candidate bias keep the hidden positive,
    # the adapter sums it into embedding coordinate 0, and only the EOS row
    # of the embedding reads that coordinate.
    for t in params.enc.curr_gru.tensors():
        t.data[:] = 0.0
    params.enc.curr_gru.bh.data[:] = 2.0
    params.dec.out_adapter.data[:] = 0.0
    params.dec.out_adapter.data[0, :] = 1.0
    params.enc.embedding.data[:] = 0.0
    params.enc.embedding.data[EOS_ID, 0] = 1.0
    out = DE.decode_greedy(params.enc, params.dec, T.tensor(np.ones(4)), max_len=7)
    assert out == [EOS_ID]


def test_decode_deterministic():
    cfg, params = _toy(seed=7)
    ctx = T.tensor(np.random.default_rng(2).normal(size=4))
    a = DE.decode_greedy(params.enc, params.dec, ctx, max_len=10)
    b = DE.decode_greedy(params.enc, params.dec, ctx, max_len=10)
    assert a == b
    assert len(a) <= 10


def test_decode_matches_hand_unrolled_greedy():
    cfg, params = _toy(seed=11)
    ctx_vec = np.random.default_rng(3).normal(size=4)
    got = DE.decode_greedy(params.enc, params.dec, T.tensor(ctx_vec), max_len=6)
    # hand unroll
    h = ctx_vec
    prev = BOS_ID
    want = []
    for _ in range(6):
        h = gru_step(params.enc.curr_gru, T.tensor(h), T.tensor(params.enc.embedding.data[prev])).data
        logits = params.enc.embedding.data @ (params.dec.out_adapter.data @ h)
        tok = int(np.argmax(logits))
        want.append(tok)
        if tok == EOS_ID:
            break
        prev = tok
    assert got == want


def test_sequence_nll_nonnegative_and_grad():
    cfg, params = _toy(seed=13)
    ctx = T.parameter(np.random.default_rng(8).normal(size=4))

    def loss():
        return DE.sequence_nll(params.enc, params.dec, ctx, (1, 4, EOS_ID))

    val = loss()
    assert float(val.data) > 0
    worst = T.gradient_check(loss, [ctx, params.dec.out_adapter, params.enc.embedding], coords_per_param=8)
    assert worst < 1e-4


def test_completion_probability_limits():
    cfg, params = _toy()
    params.dec.cls_w.data[:] = 0.0
    params.dec.cls_b.data = np.float64(0.0)
    assert DE.completion_probability(params.enc, params.dec, (1, EOS_ID), (2, EOS_ID)) == 0.5
    params.dec.cls_b.data = np.float64(1e3)
    assert DE.completion_probability(params.enc, params.dec, (1, EOS_ID), (2, EOS_ID)) == pytest.approx(1.0)


def test_completion_matches_scalar_logistic():
    cfg, params = _toy(seed=21)
    c, u = (1, 3, EOS_ID), (2, EOS_ID)
    from lookahead_dialogue.encoders import encode_current

    with T.no_grad():
        feats = np.concatenate(
            [encode_current(params.enc, c).data, encode_current(params.enc, u).data]
        )
    ref = 1.0 / (1.0 + np.exp(-(params.dec.cls_w.data @ feats + float(params.dec.cls_b.data))))
    assert DE.completion_probability(params.enc, params.dec, c, u) == pytest.approx(ref, abs=1e-12)


def test_weight_tying_embedding_row_affects_encoder_and_logits():
    cfg, params = _toy(seed=17)
    ctx = T.tensor(np.zeros(4))
    from lookahead_dialogue.encoders import encode_current

    with T.no_grad():
        enc_before = encode_current(params.enc, (1, EOS_ID)).data.copy()
        h = gru_step(params.enc.curr_gru, ctx, T.row(params.enc.embedding, BOS_ID))
        logits_before = DE.step_logits(params.enc, params.dec, h).data.copy()
    params.enc.embedding.data[1] += 0.25
    with T.no_grad():
        enc_after = encode_current(params.enc, (1, EOS_ID)).data
        h = gru_step(params.enc.curr_gru, ctx, T.row(params.enc.embedding, BOS_ID))
        logits_after = DE.step_logits(params.enc, params.dec, h).data
    assert not np.allclose(enc_before, enc_after)
    assert not np.allclose(logits_before[1], logits_after[1])


def test_k1_full_path_equals_baseline_bitwise():
    cfg, params = _toy(seed=23, k=1)
    goals = GoalVector((1, 0))
    hist = [(1, 2, EOS_ID)]
    cur = (3, EOS_ID)
    with T.no_grad():
        full = sample_context(params, cfg, goals, hist, cur)
        base = baseline_context(params, cfg, goals, hist, cur)
    assert full["v"].data[0] == 1.0
    assert (full["context"].data == base.data).all()
    with T.no_grad():
        a = DE.decode_greedy(params.enc, params.dec, full["context"], 8)
        b = DE.decode_greedy(params.enc, params.dec, base, 8)
    assert a == b
