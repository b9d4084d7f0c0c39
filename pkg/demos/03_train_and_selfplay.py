"""Train a small look-ahead model plus a plain seq2seq baseline, then watch
them negotiate against the baseline simulator in self-play.

With the default settings this takes a few minutes on a laptop CPU.
"""

from lookahead_dialogue import generate_corpus
from lookahead_dialogue.evaluation import AgentBundle, evaluate
from lookahead_dialogue.training import TrainConfig, train

sessions, stats = generate_corpus(n_dialogues=300, seed=11)
print(f"corpus: {stats['percent_goal_achieved']:.1f}% achieved, "
      f"{stats['average_turns_per_dialogue']:.1f} turns on average")

small = dict(d_embed=32, d_goal=32, d_hidden=48, epochs=15, max_decode_len=16, seed=5)

print("training the full look-ahead model ...")
full = train(sessions, TrainConfig(**small), progress=lambda r: print(
    f"  epoch {r['epoch']:2d}  train {r['train_loss']:.3f}  val {r['val_loss']:.3f}"))

print("training the goal-conditioned seq2seq baseline (the simulator) ...")
baseline = train(sessions, TrainConfig.baseline("goal", **small))

agent = AgentBundle.from_train_result(full)
simulator = AgentBundle.from_train_result(baseline)

report = evaluate(agent, simulator, n=100, seed=1)
print(f"\nfull model vs simulator: {100 * report.achieved_ratio:.1f}% achieved, "
      f"{report.avg_turns:.2f} turns/dialogue")

for transcript in report.transcripts[:2]:
    print("\n", "achieved" if transcript["achieved"] else "failed")
    for turn in transcript["turns"]:
        who = "agent " if turn["speaker"] == "A" else "simulator"
        print(f"  {who}: {turn['text']}")
