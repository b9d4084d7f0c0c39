"""Full model assembly: configuration, parameter container, initialization,
and the one inference path shared by training, evaluation, the service and
the terminal chat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .corpus import GoalVector
from .decoder import DecoderParams, attention, completion_probability, decode_greedy
from .encoders import EncoderParams, encode_sample, make_gru
from .lookahead import LookaheadParams, lookahead_states

__all__ = ["ModelConfig", "ModelParams", "init_params", "sample_context", "respond", "baseline_context"]


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    goal_dim: int = 6
    d_embed: int = 64
    d_goal: int = 64
    d_hidden: int = 256
    lookahead_k: int = 3
    max_decode_len: int = 30
    # two shared-parameter encoder passes averaged; the recurrences above are
    # one-directional by default
    bidirectional_encoders: bool = False

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "goal_dim": self.goal_dim,
            "d_embed": self.d_embed,
            "d_goal": self.d_goal,
            "d_hidden": self.d_hidden,
            "lookahead_k": self.lookahead_k,
            "max_decode_len": self.max_decode_len,
            "bidirectional_encoders": int(self.bidirectional_encoders),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["bidirectional_encoders"] = bool(int(d.get("bidirectional_encoders", 0)))
        return cls(**{k: (int(v) if k != "bidirectional_encoders" else v) for k, v in d.items()})


@dataclass
class ModelParams:
    enc: EncoderParams
    la: LookaheadParams
    dec: DecoderParams

    def named(self) -> dict:
        """Stable name -> tensor mapping (checkpointing, optimization)."""
        out = {"embedding": self.enc.embedding}
        for prefix, gru in (
            ("goal_gru", self.enc.goal_gru),
            ("hist_gru", self.enc.hist_gru),
            ("curr_gru", self.enc.curr_gru),
            ("la_gru", self.la.gru),
        ):
            for part, t in zip(("wz", "bz", "wr", "br", "wh", "bh"), gru.tensors()):
                out[f"{prefix}.{part}"] = t
        out["la_project"] = self.la.project
        out["la_input_adapter"] = self.la.input_adapter
        out["attn_v"] = self.dec.attn_v
        out["r_adapter"] = self.dec.r_adapter
        out["out_adapter"] = self.dec.out_adapter
        out["cls_w"] = self.dec.cls_w
        out["cls_b"] = self.dec.cls_b
        return out

    # parameter groups for the alternating optimization schedule
    def lm_names(self) -> list:
        """The language model: tied embedding, decoder GRU, output adapter."""
        return ["embedding", "out_adapter"] + [f"curr_gru.{p}" for p in ("wz", "bz", "wr", "br", "wh", "bh")]

    def state_names(self) -> list:
        """Everything that produces the look-ahead hidden states."""
        names = [f"{g}.{p}" for g in ("goal_gru", "hist_gru", "la_gru") for p in ("wz", "bz", "wr", "br", "wh", "bh")]
        return names + ["la_project", "la_input_adapter"]

    def classifier_names(self) -> list:
        return ["cls_w", "cls_b"]


def init_params(config: ModelConfig, seed: int, init_scale: float | None = None) -> ModelParams:
    """Seeded random parameters; fan-scaled uniform unless ``init_scale`` pins
    one bound for everything (the gradient tests do)."""
    rng = np.random.default_rng(seed)
    d_e, d_g, d_h = config.d_embed, config.d_goal, config.d_hidden

    def mat(rows, cols):
        scale = np.sqrt(6.0 / (rows + cols)) if init_scale is None else init_scale
        return T.parameter(rng.uniform(-scale, scale, size=(rows, cols)))

    def vec(n, scale=0.1):
        return T.parameter(rng.uniform(-scale, scale, size=n))

    enc = EncoderParams(
        embedding=mat(config.vocab_size, d_e),
        goal_gru=make_gru(rng, 1, d_g, init_scale),
        hist_gru=make_gru(rng, d_e, d_h, init_scale),
        curr_gru=make_gru(rng, d_e, d_h, init_scale),
    )
    la = LookaheadParams(
        gru=make_gru(rng, d_h, d_h, init_scale),
        project=mat(d_h, 2 * d_h),
        input_adapter=mat(d_h, d_g + 2 * d_h),
    )
    dec = DecoderParams(
        attn_v=vec(d_h, init_scale or 0.1),
        r_adapter=mat(d_h, 2 * d_h),
        out_adapter=mat(d_e, d_h),
        cls_w=vec(2 * d_h, init_scale or 0.1),
        cls_b=T.parameter(np.float64(0.0)),
    )
    return ModelParams(enc=enc, la=la, dec=dec)


def sample_context(params: ModelParams, config: ModelConfig, goals: GoalVector, history, current, k: int | None = None) -> dict:
    """Encoder + look-ahead + attention forward pass for one dialogue state.

    ``history`` is a sequence of token-id sequences, ``current`` one token-id
    sequence.  Returns the combined and projected states, attention weights
    ``v``, mixed state ``r`` and the decode context.
    """
    k = config.lookahead_k if k is None else k
    encoded = encode_sample(params.enc, goals, history, current, config.bidirectional_encoders)
    states, projected = lookahead_states(params.la, encoded, k)
    v, r = attention(params.dec, projected, states)
    context = T.matvec(params.dec.r_adapter, r)
    return {
        "encoded": encoded,
        "states": states,
        "projected": projected,
        "v": v,
        "r": r,
        "context": context,
    }


def baseline_context(params: ModelParams, config: ModelConfig, goals: GoalVector, history, current) -> T.Tensor:
    """The plain goal-conditioned seq2seq decode context (no look-ahead).

    Written out explicitly: encoder output, adapted, duplicated in place of
    the two sweep directions, then the attention-mix adapter.  The full model
    at horizon 1 must match this bit for bit.
    """
    encoded = encode_sample(params.enc, goals, history, current, config.bidirectional_encoders)
    h1 = T.matvec(params.la.input_adapter, encoded)
    state = T.concat([h1, h1])
    return T.matvec(params.dec.r_adapter, state)


def respond(params: ModelParams, config: ModelConfig, goals: GoalVector, history, current) -> tuple:
    """Greedy reply tokens plus the completion probability for the exchange."""
    with T.no_grad():
        ctx = sample_context(params, config, goals, history, current)
        reply = decode_greedy(params.enc, params.dec, ctx["context"], config.max_decode_len)
    done = completion_probability(params.enc, params.dec, current, reply)
    return reply, done
