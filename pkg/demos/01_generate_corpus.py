"""Generate a synthetic restaurant-reservation corpus and inspect it.

Two rule-based agents with private goal vectors negotiate via shortest-path
planning; the script prints a few transcripts and the corpus statistics.
"""

from lookahead_dialogue import generate_corpus
from lookahead_dialogue.datagen import CUSTOMER_BITS, SERVER_BITS

sessions, stats = generate_corpus(n_dialogues=200, seed=7)

print("customer goal bits:", CUSTOMER_BITS)
print("server goal bits:  ", SERVER_BITS)
print()

for session in sessions[:3]:
    print(f"customer {session.goals_a.bits}  server {session.goals_b.bits}")
    for turn in session.turns:
        who = "customer" if turn.speaker == "A" else "server  "
        print(f"  {who}: {turn.text}")
    print("  outcome:", "agreement" if session.outcome else "no agreement")
    print()

print("corpus statistics")
for key, value in stats.items():
    print(f"  {key}: {value:.2f}" if isinstance(value, float) else f"  {key}: {value}")
