"""Prediction of K future-turn latent states via two direction-sharing
recurrent sweeps over a single shared GRU.

The forward sweep starts from the (adapted) encoder output with zeroed
backward halves, the backward sweep is seeded with the last forward state,
and one recombination concatenates the two directions per step.  The shared
projection maps a combined state back into the GRU input space; those
projected states are cached because the decoder scores and conditions on
them.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import tensor as T
from .encoders import GruParams, gru_step

__all__ = ["LookaheadParams", "forward_sweep", "backward_sweep", "combine", "lookahead_states"]


@dataclass
class LookaheadParams:
    """One GRU serves both sweep directions (shared parameters)."""

    gru: GruParams          # d_in == d_h == hidden size
    project: T.Tensor       # d_h x 2*d_h, maps a combined state to GRU input
    input_adapter: T.Tensor  # d_h x (goal_dim + 2*d_h), maps encoder output in

    @property
    def hidden_dim(self) -> int:
        return self.gru.hidden_dim

    def tensors(self) -> list:
        return self.gru.tensors() + [self.project, self.input_adapter]


def forward_sweep(la: LookaheadParams, encoded: T.Tensor, k: int) -> list:
    """States for steps 1..k moving toward the future.

    Step 1 is the adapted encoder output itself; later steps advance the GRU
    with the projected previous combined state, whose backward half is still
    zero on this first pass.
    """
    if k < 1:
        raise ValueError("look-ahead horizon must be >= 1")
    d = la.hidden_dim
    states = [T.matvec(la.input_adapter, encoded)]
    zero_half = T.zeros(d)
    for _ in range(1, k):
        prev_combined = T.concat([states[-1], zero_half])
        inp = T.matvec(la.project, prev_combined)
        states.append(gru_step(la.gru, states[-1], inp))
    return states


def backward_sweep(la: LookaheadParams, forward_states: list) -> list:
    """States swept from the future back to the present, sharing the GRU.

    The last backward state is the last forward state itself; earlier steps
    consume the projected combined state of the step after them.
    """
    k = len(forward_states)
    back = [None] * k
    back[k - 1] = forward_states[k - 1]
    for i in range(k - 2, -1, -1):
        combined_next = T.concat([forward_states[i + 1], back[i + 1]])
        inp = T.matvec(la.project, combined_next)
        back[i] = gru_step(la.gru, back[i + 1], inp)
    return back


def combine(forward_states: list, backward_states: list) -> list:
    """Per-step concatenation, forward half first."""
    if len(forward_states) != len(backward_states):
        raise ValueError("sweep lengths differ")
    return [T.concat([f, b]) for f, b in zip(forward_states, backward_states)]


def lookahead_states(la: LookaheadParams, encoded: T.Tensor, k: int) -> tuple:
    """One full pass: sweeps, recombination, and the cached projections.

    Returns (combined, projected); ``projected[i]`` is the shared projection
    of ``combined[i]`` and is what the decoder attends over and conditions on.
    """
    fwd = forward_sweep(la, encoded, k)
    bwd = backward_sweep(la, fwd)
    states = combine(fwd, bwd)
    projected = [T.matvec(la.project, s) for s in states]
    return states, projected
