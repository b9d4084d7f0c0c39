"""Walk through the look-ahead machinery on one dialogue state: the three
encoders, the two direction-sharing sweeps, and the attention mix over the
predicted future states.
"""

import numpy as np

from lookahead_dialogue import tensor as T
from lookahead_dialogue.corpus import build_vocabulary, encode_session
from lookahead_dialogue.datagen import generate_corpus
from lookahead_dialogue.decoder import decode_greedy
from lookahead_dialogue.model import init_params, sample_context
from lookahead_dialogue.training import TrainConfig

config = TrainConfig(d_embed=16, d_goal=16, d_hidden=24, lookahead_k=3, min_count=1)
sessions, _ = generate_corpus(10, seed=2)
vocab = build_vocabulary(sessions, 1)
model_config = config.model_config(len(vocab), 6)
params = init_params(model_config, seed=4)

session = encode_session(sessions[0], vocab)
history = [u.tokens for u in session.turns[:2]]
current = session.turns[2].tokens

with T.no_grad():
    ctx = sample_context(params, model_config, session.goals_b, history, current)

print("encoder output length:", ctx["encoded"].data.shape[0],
      f"(= {model_config.d_goal} goal + 2x{model_config.d_hidden} utterance)")
print("look-ahead steps:", len(ctx["states"]),
      "combined state length:", ctx["states"][0].data.shape[0])
print("attention weights over predicted future turns:",
      np.round(ctx["v"].data, 4))
print("mixed state feeds a", ctx["context"].data.shape[0], "dim decode context")

with T.no_grad():
    reply = decode_greedy(params.enc, params.dec, ctx["context"], model_config.max_decode_len)
print("untrained greedy reply:", repr(vocab.decode(reply)))
print("(train it first if you want sense rather than noise)")
