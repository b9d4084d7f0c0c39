"""Joint loss, the alternating optimization schedule, and SGD with momentum
and global-norm gradient clipping.

The loss has three weighted terms: the generation term (token NLL of the
true next turn under the attention-mixed decode context), the look-ahead
term (token NLL of the K future turns, each conditioned on its projected
predicted state), and the completion term (binary cross-entropy of the
classifier on the greedy-decoded next utterance against the session label).

Per batch the schedule runs four phases: a generation step over all
reachable parameters, a recomputation pass that freezes the look-ahead
hidden states (no parameter update), a language-model step against those
frozen states, and a classifier step.  The greedy next utterance is held
fixed inside a step because argmax carries no gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .corpus import (
    TrainingSample,
    Vocabulary,
    build_vocabulary,
    encode_session,
    prepare_samples,
)
from .decoder import completion_logit, decode_greedy, sequence_nll
from .model import ModelConfig, ModelParams, init_params, sample_context

__all__ = ["TrainConfig", "TrainResult", "Sgd", "compute_loss", "em_epoch", "train"]


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.05
    beta: float = 1.0
    lr: float = 1.0
    momentum: float = 0.1
    clip_norm: float = 0.5
    batch_size: int = 32
    epochs: int = 20
    lookahead_k: int = 3
    seed: int = 0
    use_lookahead: bool = True
    use_state_loss: bool = True
    d_embed: int = 64
    d_goal: int = 64
    d_hidden: int = 256
    max_decode_len: int = 30
    min_count: int = 5
    val_fraction: float = 0.1
    lr_decay: str = "after_best"  # or "after_budget": no decay inside the budget
    bidirectional_encoders: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.lr_decay not in ("after_best", "after_budget"):
            raise ValueError("lr_decay must be 'after_best' or 'after_budget'")

    # removing the look-ahead module means horizon 1 and no look-ahead loss
    @property
    def effective_k(self) -> int:
        return self.lookahead_k if self.use_lookahead else 1

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.use_lookahead else 0.0

    @property
    def effective_beta(self) -> float:
        return self.beta if self.use_state_loss else 0.0

    def model_config(self, vocab_size: int, goal_dim: int) -> ModelConfig:
        return ModelConfig(
            vocab_size=vocab_size,
            goal_dim=goal_dim,
            d_embed=self.d_embed,
            d_goal=self.d_goal,
            d_hidden=self.d_hidden,
            lookahead_k=self.effective_k,
            max_decode_len=self.max_decode_len,
            bidirectional_encoders=self.bidirectional_encoders,
        )

    @classmethod
    def baseline(cls, name: str, **overrides) -> "TrainConfig":
        """The four ablation configurations."""
        flags = {
            "goal": dict(use_lookahead=False, use_state_loss=False),
            "goal+state": dict(use_lookahead=False, use_state_loss=True),
            "goal+look": dict(use_lookahead=True, use_state_loss=False),
            "goal+look+state": dict(use_lookahead=True, use_state_loss=True),
        }
        if name not in flags:
            raise ValueError(f"unknown baseline {name!r}")
        return cls(**{**flags[name], **overrides})


class Sgd:
    """SGD with momentum and global-norm clipping over named parameters."""

    def __init__(self, named, lr: float, momentum: float, clip_norm: float):
        self.params = dict(named)
        self.lr = lr
        self.momentum = momentum
        self.clip_norm = clip_norm
        self.velocity = {n: np.zeros_like(p.data) for n, p in self.params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self, names=None, grad_scale: float = 1.0) -> None:
        """Clip the grouped gradients in global norm, then apply them with
        momentum.  ``grad_scale`` weights this step's (clipped) gradient
        contribution; the loss-term weights enter here so that clipping a
        saturated gradient cannot erase them."""
        names = list(self.params) if names is None else list(names)
        sq = 0.0
        for n in names:
            g = self.params[n].grad
            if g is None:
                continue
            if not np.isfinite(g).all():
                raise FloatingPointError(f"non-finite gradient for {n}")
            sq += float((g * g).sum())
        norm = np.sqrt(sq)
        scale = self.clip_norm / norm if norm > self.clip_norm else 1.0
        scale *= grad_scale
        for n in names:
            p = self.params[n]
            g = p.grad
            v = self.velocity[n]
            v *= self.momentum
            if g is not None:
                v += g * scale
            p.data -= self.lr * v


def _zero_scalar() -> T.Tensor:
    return T.tensor(0.0)


def compute_loss(
    params: ModelParams,
    config: TrainConfig,
    sample: TrainingSample,
    model_config: ModelConfig,
    u_next=None,
) -> tuple:
    """Full joint loss for one sample plus a per-term breakdown.

    ``u_next`` fixes the greedy next utterance for the completion term; when
    None it is decoded here (without recording).  The generated tokens are
    constants either way: argmax has no gradient.
    """
    k = config.effective_k
    alpha = config.effective_alpha
    beta = config.effective_beta
    ctx = sample_context(params, model_config, sample.goals, [u.tokens for u in sample.history], sample.current.tokens, k=k)

    if sample.future_mask[0]:
        term1 = sequence_nll(params.enc, params.dec, ctx["context"], sample.future[0].tokens)
    else:
        term1 = _zero_scalar()

    if alpha > 0:
        term2 = None
        for i in range(k):
            if not sample.future_mask[i]:
                continue
            nll = sequence_nll(params.enc, params.dec, ctx["projected"][i], sample.future[i].tokens)
            term2 = nll if term2 is None else T.add(term2, nll)
        term2 = term2 if term2 is not None else _zero_scalar()
    else:
        term2 = _zero_scalar()

    if beta > 0:
        if u_next is None:
            with T.no_grad():
                u_next = decode_greedy(params.enc, params.dec, ctx["context"], model_config.max_decode_len)
        term3 = T.logistic_loss(
            completion_logit(params.enc, params.dec, sample.current.tokens, u_next),
            float(sample.label),
        )
    else:
        term3 = _zero_scalar()

    loss = term1
    if alpha > 0:
        loss = T.add(loss, T.scale(term2, T.tensor(alpha)))
    if beta > 0:
        loss = T.add(loss, T.scale(term3, T.tensor(beta)))
    breakdown = {
        "generation": float(term1.data),
        "lookahead": float(term2.data),
        "completion": float(term3.data),
        "total": float(loss.data),
    }
    return loss, breakdown


def em_epoch(samples, params: ModelParams, opt: Sgd, config: TrainConfig, model_config: ModelConfig, rng, phase_hook=None):
    """One pass over the samples with the four-phase per-batch schedule.

    Returns the epoch mean of the joint loss and its term means.  ``phase_hook``
    (if given) is called with the phase name after each phase of each batch.
    """
    k = config.effective_k
    alpha = config.effective_alpha
    beta = config.effective_beta
    named = params.named()
    all_but_classifier = [n for n in named if n not in params.classifier_names()]
    lm_names = params.lm_names()
    cls_names = params.classifier_names() + ["embedding"] + [
        f"curr_gru.{p}" for p in ("wz", "bz", "wr", "br", "wh", "bh")
    ]

    order = list(range(len(samples)))
    rng.shuffle(order)
    sums = {"generation": 0.0, "lookahead": 0.0, "completion": 0.0}

    def hook(name):
        if phase_hook is not None:
            phase_hook(name)

    for start in range(0, len(order), config.batch_size):
        batch = [samples[i] for i in order[start : start + config.batch_size]]

        # phase 1: generation step over every parameter the term reaches
        opt.zero_grad()
        touched = False
        for s in batch:
            if not s.future_mask[0]:
                continue
            ctx = sample_context(params, model_config, s.goals, [u.tokens for u in s.history], s.current.tokens, k=k)
            nll = sequence_nll(params.enc, params.dec, ctx["context"], s.future[0].tokens)
            T.backward(nll)
            sums["generation"] += float(nll.data)
            touched = True
        if touched:
            opt.step(all_but_classifier)
        hook("generation")

        # phase 2 (E): recompute the look-ahead states under frozen
        # parameters and cache what the enabled later phases condition on
        caches = []
        if alpha > 0 or beta > 0:
            with T.no_grad():
                for s in batch:
                    ctx = sample_context(params, model_config, s.goals, [u.tokens for u in s.history], s.current.tokens, k=k)
                    cache = {}
                    if alpha > 0:
                        cache["projected"] = [p.data.copy() for p in ctx["projected"]]
                    if beta > 0:
                        cache["u_next"] = decode_greedy(params.enc, params.dec, ctx["context"], model_config.max_decode_len)
                    caches.append(cache)
        hook("estep")

        # phase 3 (M): language model against the frozen states; the term
        # weight scales the applied step, not the clipped gradient
        if alpha > 0:
            opt.zero_grad()
            touched = False
            for s, cache in zip(batch, caches):
                for i in range(k):
                    if not s.future_mask[i]:
                        continue
                    frozen = T.tensor(cache["projected"][i])
                    nll = sequence_nll(params.enc, params.dec, frozen, s.future[i].tokens)
                    T.backward(nll)
                    sums["lookahead"] += float(nll.data)
                    touched = True
            if touched:
                opt.step(lm_names, grad_scale=alpha)
        hook("mstep")

        # phase 4: completion classifier on the generated next utterance
        if beta > 0:
            opt.zero_grad()
            for s, cache in zip(batch, caches):
                logit = completion_logit(params.enc, params.dec, s.current.tokens, cache["u_next"])
                bce = T.logistic_loss(logit, float(s.label))
                T.backward(bce)
                sums["completion"] += float(bce.data)
            opt.step(cls_names, grad_scale=beta)
        hook("classifier")

    n = max(1, len(samples))
    means = {key: val / n for key, val in sums.items()}
    means["total"] = means["generation"] + alpha * means["lookahead"] + beta * means["completion"]
    return means


@dataclass
class TrainResult:
    params: ModelParams
    vocab: Vocabulary
    model_config: ModelConfig
    metrics: list
    best_epoch: int


def _split_sessions(sessions, val_fraction: float, rng):
    order = list(range(len(sessions)))
    rng.shuffle(order)
    n_val = max(1, int(round(len(sessions) * val_fraction))) if len(sessions) > 1 else 0
    val_idx = set(order[:n_val])
    train = [sessions[i] for i in order if i not in val_idx]
    val = [sessions[i] for i in sorted(val_idx)]
    return train, val


def _clone_params(params: ModelParams, model_config: ModelConfig) -> ModelParams:
    fresh = init_params(model_config, seed=0)
    src, dst = params.named(), fresh.named()
    for n in src:
        dst[n].data = src[n].data.copy()
        dst[n].grad = None
    return fresh


def train(sessions, config: TrainConfig, progress=None) -> TrainResult:
    """Train on a corpus of sessions; returns the best-validation checkpoint.

    The corpus is split 90/10 by session with the run seed; the learning rate
    halves each epoch after the best-so-far validation epoch (configurable to
    stay flat through the budget instead).
    """
    if not sessions:
        raise ValueError("empty corpus")
    rng = np.random.default_rng(config.seed)
    train_sessions, val_sessions = _split_sessions(sessions, config.val_fraction, rng)
    vocab = build_vocabulary(train_sessions, config.min_count)
    goal_dim = len(sessions[0].goals_a)
    model_config = config.model_config(len(vocab), goal_dim)
    k = config.effective_k

    train_samples = [
        s for sess in train_sessions for s in prepare_samples(encode_session(sess, vocab), k)
    ]
    val_samples = [
        s for sess in val_sessions for s in prepare_samples(encode_session(sess, vocab), k)
    ]

    params = init_params(model_config, config.seed)
    opt = Sgd(params.named(), config.lr, config.momentum, config.clip_norm)

    best = None
    best_epoch = 0
    metrics = []
    for epoch in range(1, config.epochs + 1):
        train_means = em_epoch(train_samples, params, opt, config, model_config, rng)
        val_loss = _mean_loss(val_samples, params, config, model_config)
        score = val_loss if val_samples else train_means["total"]
        if best is None or score < best:
            best = score
            best_epoch = epoch
            best_params = _clone_params(params, model_config)
        elif config.lr_decay == "after_best":
            # every epoch past the best-so-far runs at half the previous rate
            opt.lr /= 2.0
        row = {
            "epoch": epoch,
            "train_loss": train_means["total"],
            "val_loss": val_loss,
            "lr": opt.lr,
        }
        metrics.append(row)
        if progress is not None:
            progress(row)
    return TrainResult(
        params=best_params,
        vocab=vocab,
        model_config=model_config,
        metrics=metrics,
        best_epoch=best_epoch,
    )


def _mean_loss(samples, params, config, model_config) -> float:
    if not samples:
        return float("nan")
    total = 0.0
    with T.no_grad():
        for s in samples:
            _, breakdown = compute_loss(params, config, s, model_config)
            total += breakdown["total"]
    return total / len(samples)
