"""Embedding table and the three recurrent encoders for goals, history and
the current utterance.

The GRU cell is a single fused graph op with a hand-derived backward; the
gradient-check tests pin it against central finite differences and a scalar
reference implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .corpus import GoalVector

__all__ = [
    "GruParams",
    "EncoderParams",
    "make_gru",
    "gru_step",
    "encode_goals",
    "encode_history",
    "encode_current",
    "encode_sample",
]


@dataclass
class GruParams:
    """Update/reset/candidate weights over the concatenated [input; hidden]."""

    wz: T.Tensor
    bz: T.Tensor
    wr: T.Tensor
    br: T.Tensor
    wh: T.Tensor
    bh: T.Tensor

    @property
    def hidden_dim(self) -> int:
        return self.wz.data.shape[0]

    @property
    def input_dim(self) -> int:
        return self.wz.data.shape[1] - self.wz.data.shape[0]

    def tensors(self) -> list:
        return [self.wz, self.bz, self.wr, self.br, self.wh, self.bh]


def make_gru(rng, d_in: int, d_h: int, init_scale: float | None = None) -> GruParams:
    """Fan-scaled uniform weights (explicit ``init_scale`` overrides), zero biases."""
    scale = np.sqrt(6.0 / (d_in + 2 * d_h)) if init_scale is None else init_scale

    def w():
        return T.parameter(rng.uniform(-scale, scale, size=(d_h, d_in + d_h)))

    def b():
        return T.parameter(np.zeros(d_h))

    return GruParams(wz=w(), bz=b(), wr=w(), br=b(), wh=w(), bh=b())


def gru_cell_raw(p: GruParams, hd: np.ndarray, xd: np.ndarray):
    """Forward GRU math on raw arrays; returns the new state plus the saved
    activations the backward needs.  Shared by the recorded op and the
    no-gradient fast paths."""
    cat = np.concatenate([xd, hd])
    z = _sigm(p.wz.data @ cat + p.bz.data)
    r = _sigm(p.wr.data @ cat + p.br.data)
    cat2 = np.concatenate([xd, r * hd])
    hc = np.tanh(p.wh.data @ cat2 + p.bh.data)
    out = (1.0 - z) * hd + z * hc
    return out, (cat, z, r, cat2, hc)


def gru_step(p: GruParams, h_prev: T.Tensor, x: T.Tensor) -> T.Tensor:
    """One GRU update: z, r gates, candidate, then (1-z)*h + z*candidate."""
    d_h, d_in = p.hidden_dim, p.input_dim
    if h_prev.data.shape != (d_h,) or x.data.shape != (d_in,):
        raise ValueError(
            f"gru_step shapes: h{h_prev.data.shape} x{x.data.shape} vs (d_h={d_h}, d_in={d_in})"
        )
    xd, hd = x.data, h_prev.data
    out, (cat, z, r, cat2, hc) = gru_cell_raw(p, hd, xd)

    def back(g):
        dz = g * (hc - hd)
        dhc = g * z
        dh = g * (1.0 - z)
        dhp = dhc * (1.0 - hc * hc)
        dwh = dhp[:, None] * cat2[None, :]
        dcat2 = p.wh.data.T @ dhp
        dx = dcat2[:d_in].copy()
        drh = dcat2[d_in:]
        dr = drh * hd
        dh = dh + drh * r
        dzp = dz * z * (1.0 - z)
        drp = dr * r * (1.0 - r)
        dwz = dzp[:, None] * cat[None, :]
        dwr = drp[:, None] * cat[None, :]
        dcat = p.wz.data.T @ dzp + p.wr.data.T @ drp
        dx += dcat[:d_in]
        dh = dh + dcat[d_in:]
        return dwz, dzp, dwr, drp, dwh, dhp, dh, dx

    parents = (p.wz, p.bz, p.wr, p.br, p.wh, p.bh, h_prev, x)
    return T.record(out, parents, back, "gru_step")


from scipy.special import expit as _sigm  # stable sign-branching sigmoid in C


@dataclass
class EncoderParams:
    """Embedding matrix plus the goal/history/current GRUs.

    The embedding and the current-utterance GRU double as the decoder's
    parameters (weight tying); they are shared references, never copies.
    """

    embedding: T.Tensor  # vocab x d_embed
    goal_gru: GruParams  # input dim 1
    hist_gru: GruParams  # input dim d_embed
    curr_gru: GruParams  # input dim d_embed

    @property
    def hidden_dim(self) -> int:
        return self.curr_gru.hidden_dim

    @property
    def goal_dim(self) -> int:
        return self.goal_gru.hidden_dim


def _two_direction_mean(run, items, dim: int) -> T.Tensor:
    """Second pass over the reversed sequence with the same parameters,
    averaged with the forward pass; dims and parameter count unchanged."""
    fwd = run(items)
    bwd = run(list(reversed(items)))
    return T.scale(T.add(fwd, bwd), T.tensor(0.5))


def encode_goals(enc: EncoderParams, goals: GoalVector, bidirectional: bool = False) -> T.Tensor:
    """Run the goal GRU over the bits, one bit per step; final hidden state."""

    def run(bits):
        h = T.zeros(enc.goal_dim)
        for bit in bits:
            h = gru_step(enc.goal_gru, h, T.tensor([float(bit)]))
        return h

    if bidirectional:
        return _two_direction_mean(run, list(goals.bits), enc.goal_dim)
    return run(goals.bits)


def encode_history(enc: EncoderParams, history, bidirectional: bool = False) -> T.Tensor:
    """History GRU over per-utterance mean token embeddings; empty -> zeros."""

    def run(utterances):
        h = T.zeros(enc.hidden_dim)
        for tokens in utterances:
            ids = list(tokens)
            if not ids:
                raise ValueError("history utterance with no tokens")
            h = gru_step(enc.hist_gru, h, T.mean_rows(enc.embedding, ids))
        return h

    items = list(history)
    if bidirectional and items:
        return _two_direction_mean(run, items, enc.hidden_dim)
    return run(items)


def encode_current(enc: EncoderParams, tokens, bidirectional: bool = False) -> T.Tensor:
    """Current-utterance GRU over the token embeddings, one token per step."""
    ids = list(tokens)
    if not ids:
        raise ValueError("cannot encode an empty utterance")

    def run(seq):
        h = T.zeros(enc.hidden_dim)
        for i in seq:
            h = gru_step(enc.curr_gru, h, T.row(enc.embedding, i))
        return h

    if bidirectional:
        return _two_direction_mean(run, ids, enc.hidden_dim)
    return run(ids)


def encode_sample(enc: EncoderParams, goals: GoalVector, history, current, bidirectional: bool = False) -> T.Tensor:
    """[goal encoding; history encoding; current encoding] concatenation."""
    return T.concat(
        [
            encode_goals(enc, goals, bidirectional),
            encode_history(enc, history, bidirectional),
            encode_current(enc, current, bidirectional),
        ]
    )
