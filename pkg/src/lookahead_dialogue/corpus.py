"""Dialogue data model, vocabulary, tokenization and corpus file I/O.

The corpus file is UTF-8 JSON lines; each record is one dialogue session:

    {"goals_a": [..bits..], "goals_b": [..bits..],
     "turns": [{"speaker": "A"|"B", "text": "..."}], "outcome": 0|1}
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace

__all__ = [
    "UNK_ID",
    "BOS_ID",
    "EOS_ID",
    "PAD_ID",
    "CorpusFormatError",
    "GoalVector",
    "Utterance",
    "DialogueSession",
    "TrainingSample",
    "Vocabulary",
    "tokenize",
    "build_vocabulary",
    "encode_session",
    "prepare_samples",
    "load_corpus",
    "save_corpus",
    "corpus_stats",
]

UNK_ID, BOS_ID, EOS_ID, PAD_ID = 0, 1, 2, 3
_RESERVED = ("<unk>", "<bos>", "<eos>", "<pad>")

_TOKEN_RE = re.compile(r"[a-z0-9']+|[^\sa-z0-9']")


class CorpusFormatError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens with punctuation detached."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class GoalVector:
    """Binary yes/no goal conditions for one side of the dialogue."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("goal bits must be 0 or 1")

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True)
class Utterance:
    """One turn: a speaker plus its surface text; token ids once encoded."""

    speaker: str
    text: str
    tokens: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.speaker not in ("A", "B"):
            raise ValueError(f"speaker must be A or B, got {self.speaker!r}")
        if self.tokens is not None:
            if not self.tokens or self.tokens[-1] != EOS_ID:
                raise ValueError("encoded utterances must end in EOS")
            if PAD_ID in self.tokens[:-1]:
                raise ValueError("PAD inside an utterance")


@dataclass(frozen=True)
class DialogueSession:
    goals_a: GoalVector
    goals_b: GoalVector
    turns: tuple[Utterance, ...]
    outcome: int

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError("outcome must be 0 or 1")
        for prev, cur in zip(self.turns, self.turns[1:]):
            if prev.speaker == cur.speaker:
                raise ValueError("speakers must strictly alternate")


@dataclass(frozen=True)
class TrainingSample:
    """One turn t of a session, reorganized for training.

    ``future`` always holds exactly K utterances; ``future_mask[k]`` is False
    for padded slots past the session end (EOS-only fillers).
    """

    goals: GoalVector
    history: tuple[Utterance, ...]
    current: Utterance
    future: tuple[Utterance, ...]
    future_mask: tuple[bool, ...]
    label: int


class Vocabulary:
    """Token/id bijection with fixed reserved ids 0..3 (UNK, BOS, EOS, PAD)."""

    def __init__(self, tokens: list[str], min_count: int = 5):
        self.min_count = min_count
        self._id_to_token = list(_RESERVED) + list(tokens)
        self._token_to_id = {t: i for i, t in enumerate(self._id_to_token)}
        if len(self._token_to_id) != len(self._id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self._id_to_token)

    def token_id(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        return self._id_to_token[idx]

    def encode(self, text: str) -> tuple[int, ...]:
        """Token ids of ``text`` with a terminating EOS."""
        return tuple(self.token_id(t) for t in tokenize(text)) + (EOS_ID,)

    def decode(self, ids) -> str:
        words = [self.token(i) for i in ids if i not in (BOS_ID, EOS_ID, PAD_ID)]
        return " ".join(words)

    def to_dict(self) -> dict:
        return {"tokens": self._id_to_token[len(_RESERVED):], "min_count": self.min_count}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(list(d["tokens"]), int(d["min_count"]))


def build_vocabulary(sessions, min_count: int = 5) -> Vocabulary:
    """Deterministic vocabulary: frequency-descending then lexicographic.

    Tokens seen fewer than ``min_count`` times are left out and encode to UNK.
    """
    counts = Counter()
    for s in sessions:
        for u in s.turns:
            counts.update(tokenize(u.text))
    if not counts:
        raise ValueError("empty corpus")
    kept = [t for t, c in counts.items() if c >= min_count]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(kept, min_count)


def encode_session(session: DialogueSession, vocab: Vocabulary) -> DialogueSession:
    turns = tuple(replace(u, tokens=vocab.encode(u.text)) for u in session.turns)
    return replace(session, turns=turns)


def _pad_utterance(speaker: str) -> Utterance:
    return Utterance(speaker, "", tokens=(EOS_ID,))


def prepare_samples(session: DialogueSession, k: int) -> list[TrainingSample]:
    """Reorganize a T-turn session into exactly T samples.

    Sample t carries history u_1..u_{t-1}, current u_t, the next ``k`` turns
    with a validity mask, and the goals of the side that speaks turn t+1.
    """
    if k < 1:
        raise ValueError("look-ahead horizon must be >= 1")
    turns = session.turns
    if not turns:
        raise ValueError("session has no turns")
    if any(u.tokens is None for u in turns):
        raise ValueError("session must be encoded before sample preparation")
    out = []
    n = len(turns)
    for t in range(1, n + 1):
        if t < n:
            responder = turns[t].speaker
        else:
            responder = "B" if turns[n - 1].speaker == "A" else "A"
        goals = session.goals_a if responder == "A" else session.goals_b
        future, mask = [], []
        speaker = turns[t - 1].speaker
        for j in range(t, t + k):
            speaker = "B" if speaker == "A" else "A"
            if j < n:
                future.append(turns[j])
                mask.append(True)
            else:
                future.append(_pad_utterance(speaker))
                mask.append(False)
        out.append(
            TrainingSample(
                goals=goals,
                history=turns[: t - 1],
                current=turns[t - 1],
                future=tuple(future),
                future_mask=tuple(mask),
                label=session.outcome,
            )
        )
    return out


# ---------------------------------------------------------------------------
# corpus files


def _session_to_record(s: DialogueSession) -> dict:
    return {
        "goals_a": list(s.goals_a.bits),
        "goals_b": list(s.goals_b.bits),
        "turns": [{"speaker": u.speaker, "text": u.text} for u in s.turns],
        "outcome": s.outcome,
    }


def _record_to_session(rec: dict, lineno: int) -> DialogueSession:
    try:
        turns = tuple(Utterance(t["speaker"], t["text"]) for t in rec["turns"])
        return DialogueSession(
            goals_a=GoalVector(tuple(int(b) for b in rec["goals_a"])),
            goals_b=GoalVector(tuple(int(b) for b in rec["goals_b"])),
            turns=turns,
            outcome=int(rec["outcome"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(f"line {lineno}: {exc}") from exc


def save_corpus(sessions, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sessions:
            fh.write(json.dumps(_session_to_record(s), ensure_ascii=False) + "\n")


def load_corpus(path) -> list[DialogueSession]:
    sessions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid record ({exc})") from exc
            sessions.append(_record_to_session(rec, lineno))
    return sessions


def corpus_stats(sessions) -> dict:
    """Summary statistics of a corpus (dialogues, turns, words, achievement)."""
    n = len(sessions)
    turns = sum(len(s.turns) for s in sessions)
    words = sum(len(tokenize(u.text)) for s in sessions for u in s.turns)
    achieved = sum(s.outcome for s in sessions)
    return {
        "number_of_dialogues": n,
        "average_turns_per_dialogue": turns / n if n else 0.0,
        "average_words_per_turn": words / turns if turns else 0.0,
        "number_of_words": words,
        "percent_goal_achieved": 100.0 * achieved / n if n else 0.0,
    }
