"""Attention over the predicted future states, greedy utterance generation
through the tied language model, and the dialogue-completion classifier.

The decoder GRU is the current-utterance encoder GRU and the output
projection is the embedding matrix applied transposed (weight tying); only
the attention vector, the small adapters and the classifier weights are new
parameters here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .corpus import BOS_ID, EOS_ID
from .encoders import EncoderParams, encode_current, gru_cell_raw, gru_step

__all__ = [
    "DecoderParams",
    "attention",
    "decode_greedy",
    "sequence_nll",
    "step_logits",
    "completion_logit",
    "completion_probability",
]


@dataclass
class DecoderParams:
    attn_v: T.Tensor      # scores the projected look-ahead states
    r_adapter: T.Tensor   # d_h x 2*d_h, maps the attention mix to a decode context
    out_adapter: T.Tensor  # d_embed x d_h, maps hidden state into embedding space
    cls_w: T.Tensor       # 2*d_h, over [enc(current); enc(next)]
    cls_b: T.Tensor       # scalar

    def tensors(self) -> list:
        return [self.attn_v, self.r_adapter, self.out_adapter, self.cls_w, self.cls_b]


def attention(dec: DecoderParams, projected: list, states: list) -> tuple:
    """Softmax weights over the projected states; mixes the raw states.

    Scores are taken on the projected (input-space) states while the returned
    mix ``r`` is over the full combined states.
    """
    if not projected or len(projected) != len(states):
        raise ValueError("attention needs matching nonempty state lists")
    scores = [T.dot(dec.attn_v, T.tanh(p)) for p in projected]
    v = T.softmax(T.stack_scalars(scores))
    r = T.scale(states[0], T.pick(v, 0))
    for i in range(1, len(states)):
        r = T.add(r, T.scale(states[i], T.pick(v, i)))
    return v, r


def step_logits(enc: EncoderParams, dec: DecoderParams, hidden: T.Tensor) -> T.Tensor:
    """Vocabulary logits from a decoder hidden state through the tied embedding."""
    return T.matvec(enc.embedding, T.matvec(dec.out_adapter, hidden))


def decode_greedy(enc: EncoderParams, dec: DecoderParams, context: T.Tensor, max_len: int = 30) -> list:
    """Greedy left-to-right generation from a decode context.

    The decoder GRU starts at ``context``, consumes BOS, then each previously
    emitted token; stops at EOS or ``max_len`` tokens.  Greedy choices carry
    no gradient, so outside a recording graph this runs on raw arrays.
    """
    if T.grad_enabled() and context.requires_grad:
        h = context
        prev = BOS_ID
        out = []
        for _ in range(max_len):
            h = gru_step(enc.curr_gru, h, T.row(enc.embedding, prev))
            logits = step_logits(enc, dec, h)
            tok = int(np.argmax(logits.data))
            out.append(tok)
            if tok == EOS_ID:
                break
            prev = tok
        return out

    head = enc.embedding.data @ dec.out_adapter.data  # vocab x d_hidden
    h = context.data
    prev = BOS_ID
    out = []
    for _ in range(max_len):
        h, _ = gru_cell_raw(enc.curr_gru, h, enc.embedding.data[prev])
        tok = int(np.argmax(head @ h))
        out.append(tok)
        if tok == EOS_ID:
            break
        prev = tok
    return out


def sequence_nll(enc: EncoderParams, dec: DecoderParams, context: T.Tensor, tokens) -> T.Tensor:
    """Teacher-forced negative log-likelihood of a token sequence (with EOS).

    The recurrent states are stepped token by token; the logit projection and
    the token losses are batched across the whole sequence.
    """
    ids = list(tokens)
    if not ids:
        raise ValueError("cannot score an empty sequence")
    h = context
    hidden = []
    for prev in [BOS_ID] + ids[:-1]:
        h = gru_step(enc.curr_gru, h, T.row(enc.embedding, prev))
        hidden.append(h)
    states = T.stack_rows(hidden)
    projected = T.matmul(states, T.transpose(dec.out_adapter))
    logits = T.matmul(projected, T.transpose(enc.embedding))
    return T.sequence_cross_entropy(logits, ids)


def completion_logit(enc: EncoderParams, dec: DecoderParams, current_tokens, next_tokens) -> T.Tensor:
    feats = T.concat([encode_current(enc, current_tokens), encode_current(enc, next_tokens)])
    return T.add(T.dot(dec.cls_w, feats), dec.cls_b)


def completion_probability(enc: EncoderParams, dec: DecoderParams, current_tokens, next_tokens) -> float:
    """P(dialogue ends with goals achieved | current, candidate next utterance)."""
    with T.no_grad():
        p = T.sigmoid(completion_logit(enc, dec, current_tokens, next_tokens))
    return float(p.data)
