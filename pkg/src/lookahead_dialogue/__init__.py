"""Goal-oriented dialogue engine with a look-ahead dialogue manager.

The library spans the full pipeline: a small autodiff tensor core, GRU
encoders, a K-turn look-ahead module with attention decoding, an alternating
optimization trainer, a planner-driven synthetic corpus generator, self-play
evaluation, checkpointing, and an HTTP chat service.
"""

__version__ = "0.1.0"

from .corpus import DialogueSession, GoalVector, TrainingSample, Utterance, Vocabulary
from .model import ModelConfig, ModelParams, init_params
from .training import TrainConfig, train
from .evaluation import AgentBundle, EvalReport, evaluate, self_play, sweep
from .checkpoint import load_checkpoint, save_checkpoint
from .datagen import generate_corpus, generate_dialogue, transcript_outcome

__all__ = [
    "__version__",
    "DialogueSession",
    "GoalVector",
    "TrainingSample",
    "Utterance",
    "Vocabulary",
    "ModelConfig",
    "ModelParams",
    "init_params",
    "TrainConfig",
    "train",
    "AgentBundle",
    "EvalReport",
    "evaluate",
    "self_play",
    "sweep",
    "load_checkpoint",
    "save_checkpoint",
    "generate_corpus",
    "generate_dialogue",
    "transcript_outcome",
]
