"""Self-play evaluation: a trained agent (customer side) negotiates against a
goal-conditioned seq2seq simulator (server side); goal-achievement is judged
by the data generator's agreement oracle, never by the agent's own classifier.

A session opens with the customer's templated request (models are trained as
responders), then both models alternate greedy replies.  A turn containing
the farewell token is candidate-final: the session ends on two consecutive
farewells, or on a farewell the agent itself closes with while its completion
classifier is confident, or at the turn cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import DialogueSession, GoalVector, Utterance, Vocabulary, tokenize
from .datagen import FAREWELL_TOKEN, sample_goals, scripted_opener, transcript_outcome
from .model import ModelConfig, ModelParams, respond

__all__ = ["AgentBundle", "EvalReport", "self_play", "evaluate", "sweep"]


@dataclass
class AgentBundle:
    """A loaded checkpoint: parameters, model config and vocabulary."""

    params: ModelParams
    config: ModelConfig
    vocab: Vocabulary

    @classmethod
    def from_train_result(cls, result) -> "AgentBundle":
        return cls(params=result.params, config=result.model_config, vocab=result.vocab)

    def reply(self, goals: GoalVector, texts) -> tuple:
        """Greedy reply text plus completion probability, given the dialogue
        so far (the last entry is the utterance being answered).  This is the
        one inference path: self-play, the service and the terminal chat all
        route through it."""
        history = [self.vocab.encode(t) for t in texts[:-1]]
        current = self.vocab.encode(texts[-1])
        ids, done = respond(self.params, self.config, goals, history, current)
        return self.vocab.decode(ids), done


@dataclass
class EvalReport:
    n_sessions: int
    achieved_ratio: float
    avg_turns: float
    transcripts: list
    seed: int

    def to_dict(self) -> dict:
        return {
            "n_sessions": self.n_sessions,
            "achieved_ratio": self.achieved_ratio,
            "avg_turns": self.avg_turns,
            "seed": self.seed,
            "transcripts": self.transcripts,
        }


def _is_farewell(text: str) -> bool:
    return FAREWELL_TOKEN in tokenize(text)


def self_play(
    agent: AgentBundle,
    simulator: AgentBundle,
    goals_a: GoalVector,
    goals_b: GoalVector,
    rng,
    max_turns: int = 20,
) -> tuple:
    """One session; returns (DialogueSession, achieved flag)."""
    texts = [scripted_opener(goals_a, rng)]
    speakers = ["A"]
    done_prob = 0.0
    while len(texts) < max_turns:
        side = "B" if speakers[-1] == "A" else "A"
        if side == "A":
            text, done_prob = agent.reply(goals_a, texts)
        else:
            text, _ = simulator.reply(goals_b, texts)
        texts.append(text)
        speakers.append(side)
        if _is_farewell(text):
            if len(texts) >= 2 and _is_farewell(texts[-2]):
                break  # mutual close
            if side == "A" and done_prob > 0.5:
                break  # the agent closes, confident the goals are settled
    achieved = transcript_outcome(goals_a, goals_b, texts)
    turns = tuple(Utterance(s, t) for s, t in zip(speakers, texts))
    session = DialogueSession(goals_a, goals_b, turns, achieved)
    return session, achieved


def evaluate(agent: AgentBundle, simulator: AgentBundle, n: int = 1000, seed: int = 0, max_turns: int = 20) -> EvalReport:
    """n seeded self-play sessions with goals sampled from the generator pool."""
    if n < 1:
        raise ValueError("need at least one session")
    master = np.random.default_rng(seed)
    achieved_count = 0
    total_turns = 0
    transcripts = []
    for _ in range(n):
        goals_a, goals_b = sample_goals(master)
        session_rng = np.random.default_rng(int(master.integers(2**63 - 1)))
        session, achieved = self_play(agent, simulator, goals_a, goals_b, session_rng, max_turns)
        achieved_count += achieved
        total_turns += len(session.turns)
        transcripts.append(
            {
                "goals_a": list(goals_a.bits),
                "goals_b": list(goals_b.bits),
                "turns": [{"speaker": u.speaker, "text": u.text} for u in session.turns],
                "achieved": achieved,
            }
        )
    return EvalReport(
        n_sessions=n,
        achieved_ratio=achieved_count / n,
        avg_turns=total_turns / n,
        transcripts=transcripts,
        seed=seed,
    )


def sweep(param: str, values, base_config, sessions, simulator: AgentBundle, n_eval: int = 200, eval_seed: int = 0, progress=None) -> list:
    """Train the full model per parameter value and evaluate each against a
    fixed simulator; returns one row per value for tabulation."""
    from dataclasses import replace

    from .training import train

    if param not in ("lookahead_k", "d_hidden"):
        raise ValueError("sweep parameter must be 'lookahead_k' or 'd_hidden'")
    if not values:
        raise ValueError("sweep needs at least one value")
    rows = []
    for value in values:
        cfg = replace(base_config, **{param: int(value)})
        result = train(sessions, cfg)
        report = evaluate(AgentBundle.from_train_result(result), simulator, n=n_eval, seed=eval_seed)
        row = {
            "param": param,
            "value": int(value),
            "achieved_ratio": report.achieved_ratio,
            "avg_turns": report.avg_turns,
        }
        rows.append(row)
        if progress is not None:
            progress(row)
    return rows
