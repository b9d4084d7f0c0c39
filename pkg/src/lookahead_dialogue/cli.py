"""Command-line entry points: generate-data, train, evaluate, sweep, serve, chat."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace

from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import load_corpus, save_corpus
from .datagen import generate_corpus
from .evaluation import AgentBundle, evaluate, sweep
from .training import TrainConfig, train

__all__ = ["main"]


def _load_train_config(path, seed=None) -> TrainConfig:
    cfg = TrainConfig()
    if path:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(TrainConfig)}
        unknown = set(raw) - known
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        cfg = TrainConfig(**raw)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _load_bundle(path) -> AgentBundle:
    params, config, vocab = load_checkpoint(path)
    return AgentBundle(params=params, config=config, vocab=vocab)


def _cmd_generate_data(args) -> int:
    sessions, stats = generate_corpus(args.n, args.seed)
    save_corpus(sessions, args.out)
    stats_path = args.out + ".stats.json"
    with open(stats_path, "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.n} dialogues to {args.out}")
    print(f"stats: {json.dumps(stats)}")
    return 0


def _cmd_train(args) -> int:
    sessions = load_corpus(args.corpus)
    cfg = _load_train_config(args.config, args.seed)
    log_path = args.out + ".metrics.jsonl"
    log = open(log_path, "w", encoding="utf-8")

    def progress(row):
        log.write(json.dumps(row) + "\n")
        log.flush()
        print(
            f"epoch {row['epoch']:3d}  train {row['train_loss']:.4f}"
            f"  val {row['val_loss']:.4f}  lr {row['lr']:.4g}"
        )

    try:
        result = train(sessions, cfg, progress=progress)
    finally:
        log.close()
    save_checkpoint(result.params, result.model_config, result.vocab, args.out)
    print(f"best epoch {result.best_epoch}; checkpoint saved to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    agent = _load_bundle(args.agent)
    simulator = _load_bundle(args.simulator)
    report = evaluate(agent, simulator, n=args.n, seed=args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    print(
        f"sessions {report.n_sessions}  achieved {100 * report.achieved_ratio:.2f}%"
        f"  avg turns {report.avg_turns:.2f}"
    )
    return 0


def _cmd_sweep(args) -> int:
    sessions = load_corpus(args.corpus)
    cfg = _load_train_config(args.config, args.seed)
    simulator = _load_bundle(args.simulator)
    values = [int(v) for v in args.values.split(",") if v]
    param = {"K": "lookahead_k", "hidden_dim": "d_hidden"}.get(args.param, args.param)
    rows = sweep(param, values, cfg, sessions, simulator, n_eval=args.n_eval, eval_seed=args.seed,
                 progress=lambda row: print(json.dumps(row)))
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(_load_bundle(args.ckpt), host=args.host, port=args.port, seed=args.seed)
    return 0


def _cmd_chat(args) -> int:
    from .service import DialogueService

    service = DialogueService(_load_bundle(args.ckpt), seed=args.seed)
    goals = None if args.goals is None else [int(b) for b in args.goals.split(",")]
    session = service.create_session(goals)
    print("agent ready; /quit ends the chat")
    print(f"your goal checklist: {list(session.human_goals.bits)}")
    while True:
        try:
            line = input("you> ").strip()
        except EOFError:
            break
        if line == "/quit":
            break
        if not line:
            continue
        reply = service.post_message(session.id, line)
        print(f"agent> {reply['reply']}   (done_prob {reply['done_prob']:.2f})")
        if reply["status"] == "ended":
            print("session ended")
            break
    if args.save:
        outcome = 0
        answer = input("goals achieved? [y/N] ").strip().lower() if session.turns else "n"
        if answer.startswith("y"):
            outcome = 1
        record = service.session_record(session, outcome)
        save_corpus([record], args.save)
        print(f"transcript saved to {args.save}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lookahead-dialogue",
        description="Goal-oriented dialogue engine that plans its replies by "
        "looking ahead several turns",
    )
    parser.add_argument("--seed", type=int, default=0, help="global random seed")
    parser.add_argument("--config", default=None, help="training config JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, fn):
        # the global flags are accepted after the subcommand as well
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--config", default=argparse.SUPPRESS)
        p.set_defaults(fn=fn)
        return p

    p = add("generate-data", "synthesize a reservation corpus", _cmd_generate_data)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("train", "train a model on a corpus", _cmd_train)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = add("evaluate", "self-play evaluation agent vs simulator", _cmd_evaluate)
    p.add_argument("--agent", required=True)
    p.add_argument("--simulator", required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--out", required=True)

    p = add("sweep", "train + evaluate across a parameter range", _cmd_sweep)
    p.add_argument("--param", required=True, help="K or hidden_dim")
    p.add_argument("--values", required=True, help="comma-separated integers")
    p.add_argument("--corpus", required=True)
    p.add_argument("--simulator", required=True)
    p.add_argument("--n-eval", type=int, default=200)
    p.add_argument("--out", required=True)

    p = add("serve", "run the HTTP chat service", _cmd_serve)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = add("chat", "interactive terminal chat", _cmd_chat)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--goals", default=None, help="agent goal bits, comma-separated")
    p.add_argument("--save", default=None, help="save the transcript here on exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
