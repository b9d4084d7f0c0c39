"""Synthetic restaurant-reservation dialogues from two rule-based planners.

Two agents with mutually invisible goal vectors negotiate a booking.  Each
turn the acting agent searches a shortest action path to an agreement over a
ground STRIPS-style domain and speaks the first action of that plan, realized
through a small pool of utterance templates.  When no path exists the agent
falls back to a designated disagree/end action; once an agreement is in the
facts it closes the dialogue.

Planning is optimistic about the other side: preconditions over the other
agent's private goal bits are dropped from its actions, so unrevealed options
look open until a refusal closes them.  ``pending_*`` propositions mark an
unanswered question, and every server action answers exactly one of them, so
on either side's turn the shortest plan always opens with that side's action.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass

import numpy as np

from .corpus import DialogueSession, GoalVector, Utterance, corpus_stats

__all__ = [
    "CUSTOMER_BITS",
    "SERVER_BITS",
    "CUSTOMER_POOL",
    "SERVER_POOL",
    "PlannerAction",
    "domain_actions",
    "planning_actions",
    "initial_state",
    "goal_props",
    "apply_action",
    "plan",
    "next_action",
    "generate_dialogue",
    "generate_corpus",
    "sample_goals",
    "parse_utterance",
    "transcript_outcome",
    "scripted_opener",
    "FAREWELL_TOKEN",
    "goal_labels",
]

# Customer goal bits (side A) and server goal bits (side B).
CUSTOMER_BITS = (
    "wants_evening",   # asks for an evening table (else noon)
    "flexible_time",   # would accept the other time slot
    "party_small",     # small party, bar seating feasible
    "accepts_bar",     # would sit at the bar
    "accepts_bigger",  # would take a bigger table
    "accepts_price",   # would pay more for the bigger table
)
SERVER_BITS = (
    "evening_available",
    "noon_available",
    "has_bar",
    "bar_free",
    "has_bigger",
    "bigger_pricier",
)

FAREWELL_TOKEN = "bye"

_EVENING_TIMES = ("6pm", "7pm")
_NOON_TIMES = ("12pm", "1pm")
_SMALL_PARTIES = ("2", "1")
_LARGE_PARTIES = ("6", "5")

# a customer may not open a new topic while its last question is unanswered
_NO_PENDING = (
    "!pending_request",
    "!pending_alt",
    "!pending_bar",
    "!pending_bigger",
    "!pending_price",
)


@dataclass(frozen=True)
class PlannerAction:
    """Ground action: preconditions are literals, '!' negates a proposition."""

    name: str
    side: str  # "A" customer, "B" server
    preconditions: frozenset
    add: frozenset
    delete: frozenset
    templates: tuple

    def __post_init__(self):
        if self.add & self.delete:
            raise ValueError(f"{self.name}: add and delete sets overlap")
        if not self.templates:
            raise ValueError(f"{self.name}: needs at least one template")

    def applicable(self, state: frozenset) -> bool:
        for lit in self.preconditions:
            if lit.startswith("!"):
                if lit[1:] in state:
                    return False
            elif lit not in state:
                return False
        return True


def apply_action(action: PlannerAction, state: frozenset) -> frozenset:
    if not action.applicable(state):
        raise ValueError(f"action {action.name} not applicable")
    return (state - action.delete) | action.add


def _act(name, side, pre, add, templates, delete=()):
    pre = list(pre)
    if not name.startswith("close_"):
        # a declared disagreement ends the negotiation for both sides
        pre.append("!disagreement")
    return PlannerAction(
        name=name,
        side=side,
        preconditions=frozenset(pre),
        add=frozenset(add),
        delete=frozenset(delete),
        templates=tuple(templates),
    )


_REQUEST_TEMPLATES = (
    "can you help me book a table for {party} people at {time}",
    "may i reserve a table for {party} people at {time}",
    "hello i need a table for {party} at {time}",
)
_CONFIRM_REQ_TEMPLATES = (
    "sure i have written down your reservation for {party} at {time}",
    "no problem your table for {party} at {time} is booked",
)
_REFUSE_REQ_TEMPLATES = (
    "sorry we dont have a table at this point",
    "my apologies all tables at {time} are reserved",
)
_CONFIRM_ALT_TEMPLATES = (
    "yes {alt_time} works i noted your reservation",
    "sure we can seat you at {alt_time}",
)
_REFUSE_ALT_TEMPLATES = (
    "sorry {alt_time} is also fully booked",
    "im afraid there is nothing free at {alt_time} either",
)


def domain_actions() -> tuple:
    """All ground actions of the reservation domain (planning + designated)."""
    acts = [
        # -- customer
        _act(
            "request_table_evening",
            "A",
            ["c_wants_evening", "!req_made", *_NO_PENDING],
            ["req_made", "req_evening", "pending_request"],
            _REQUEST_TEMPLATES,
        ),
        _act(
            "request_table_noon",
            "A",
            ["!c_wants_evening", "!req_made", *_NO_PENDING],
            ["req_made", "req_noon", "pending_request"],
            _REQUEST_TEMPLATES,
        ),
        _act(
            "ask_other_time",
            "A",
            ["c_flexible_time", "slot_unavailable", "!alt_asked", *_NO_PENDING],
            ["alt_asked", "pending_alt"],
            (
                "is {alt_time} available instead",
                "could we come at {alt_time} instead",
                "what about {alt_time} then",
            ),
        ),
        _act(
            "ask_bar",
            "A",
            ["c_party_small", "c_accepts_bar", "slot_unavailable", "!bar_asked", *_NO_PENDING],
            ["bar_asked", "pending_bar"],
            (
                "can we sit at the bar then",
                "could we take seats at the bar instead",
            ),
        ),
        _act(
            "ask_bigger",
            "A",
            ["c_accepts_bigger", "slot_unavailable", "!bigger_asked", *_NO_PENDING],
            ["bigger_asked", "pending_bigger"],
            (
                "in this case can i reserve a bigger table",
                "could we take a bigger table instead",
            ),
        ),
        _act(
            "accept_price",
            "A",
            ["c_accepts_price", "price_warned", "!price_accepted", *_NO_PENDING],
            ["price_accepted", "pending_price"],
            (
                "i want that",
                "that is fine i will pay more",
            ),
        ),
        # -- server (each action answers exactly one pending question)
        _act(
            "confirm_requested_evening",
            "B",
            ["pending_request", "req_evening", "s_evening_available"],
            ["booked_requested", "agreement"],
            _CONFIRM_REQ_TEMPLATES,
            delete=["pending_request"],
        ),
        _act(
            "confirm_requested_noon",
            "B",
            ["pending_request", "req_noon", "s_noon_available"],
            ["booked_requested", "agreement"],
            _CONFIRM_REQ_TEMPLATES,
            delete=["pending_request"],
        ),
        _act(
            "refuse_requested_evening",
            "B",
            ["pending_request", "req_evening", "!s_evening_available"],
            ["slot_unavailable"],
            _REFUSE_REQ_TEMPLATES,
            delete=["pending_request"],
        ),
        _act(
            "refuse_requested_noon",
            "B",
            ["pending_request", "req_noon", "!s_noon_available"],
            ["slot_unavailable"],
            _REFUSE_REQ_TEMPLATES,
            delete=["pending_request"],
        ),
        _act(
            "confirm_other_time_noon",
            "B",
            ["pending_alt", "req_evening", "s_noon_available"],
            ["booked_other_time", "agreement"],
            _CONFIRM_ALT_TEMPLATES,
            delete=["pending_alt"],
        ),
        _act(
            "confirm_other_time_evening",
            "B",
            ["pending_alt", "req_noon", "s_evening_available"],
            ["booked_other_time", "agreement"],
            _CONFIRM_ALT_TEMPLATES,
            delete=["pending_alt"],
        ),
        _act(
            "refuse_other_time_noon",
            "B",
            ["pending_alt", "req_evening", "!s_noon_available"],
            ["alt_unavailable"],
            _REFUSE_ALT_TEMPLATES,
            delete=["pending_alt"],
        ),
        _act(
            "refuse_other_time_evening",
            "B",
            ["pending_alt", "req_noon", "!s_evening_available"],
            ["alt_unavailable"],
            _REFUSE_ALT_TEMPLATES,
            delete=["pending_alt"],
        ),
        _act(
            "confirm_bar",
            "B",
            ["pending_bar", "s_has_bar", "s_bar_free"],
            ["booked_bar", "agreement"],
            (
                "sure the bar seats are yours",
                "yes you can sit at the bar i noted it down",
            ),
            delete=["pending_bar"],
        ),
        _act(
            "refuse_bar_none",
            "B",
            ["pending_bar", "!s_has_bar"],
            ["bar_unavailable"],
            (
                "we dont have a bar in the restaurant",
                "sorry there is no bar here",
            ),
            delete=["pending_bar"],
        ),
        _act(
            "refuse_bar_full",
            "B",
            ["pending_bar", "s_has_bar", "!s_bar_free"],
            ["bar_unavailable"],
            (
                "sorry the bar is completely full tonight",
                "the bar seats are all taken im afraid",
            ),
            delete=["pending_bar"],
        ),
        _act(
            "offer_bigger_price",
            "B",
            ["pending_bigger", "s_has_bigger", "s_bigger_pricier"],
            ["price_warned"],
            (
                "yes we have vip rooms but more expensive",
                "we do have bigger tables though they cost more",
            ),
            delete=["pending_bigger"],
        ),
        _act(
            "confirm_bigger_free",
            "B",
            ["pending_bigger", "s_has_bigger", "!s_bigger_pricier"],
            ["booked_bigger", "agreement"],
            (
                "of course i booked the bigger table for you",
                "yes a bigger table is free i wrote it down",
            ),
            delete=["pending_bigger"],
        ),
        _act(
            "confirm_bigger_paid",
            "B",
            ["pending_price", "price_accepted"],
            ["booked_bigger", "agreement"],
            (
                "deal the bigger table is booked for you",
                "ok the vip table is yours",
            ),
            delete=["pending_price"],
        ),
        _act(
            "refuse_bigger",
            "B",
            ["pending_bigger", "!s_has_bigger"],
            ["bigger_unavailable"],
            (
                "sorry we dont offer bigger tables",
                "im afraid no bigger tables exist here",
            ),
            delete=["pending_bigger"],
        ),
        # -- designated closers (never searched by the planner); ending the
        # conversation clears any question still on the table
        _act(
            "close_agree_customer",
            "A",
            [],
            ["farewell_a"],
            (
                "great thank you bye",
                "perfect thanks a lot bye",
            ),
            delete=[p.lstrip("!") for p in _NO_PENDING],
        ),
        _act(
            "close_agree_server",
            "B",
            [],
            ["farewell_b"],
            (
                "bye",
                "goodbye have a nice day",
            ),
            delete=[p.lstrip("!") for p in _NO_PENDING],
        ),
        _act(
            "close_disagree_customer",
            "A",
            [],
            ["disagreement", "farewell_a"],
            (
                "i see nothing works for us then bye",
                "too bad nothing fits thanks anyway bye",
            ),
            delete=[p.lstrip("!") for p in _NO_PENDING],
        ),
        _act(
            "close_disagree_server",
            "B",
            [],
            ["disagreement", "farewell_b"],
            (
                "sorry we could not help you this time bye",
                "my apologies we cannot seat you then bye",
            ),
            delete=[p.lstrip("!") for p in _NO_PENDING],
        ),
    ]
    return tuple(acts)


_DOMAIN = domain_actions()
_BY_NAME = {a.name: a for a in _DOMAIN}
_CLOSERS = {n for n in _BY_NAME if n.startswith("close_")}

# agreement acts (surface names) and the booking option they establish
_BOOKING_ACTS = {
    "confirm_requested": "requested",
    "confirm_other_time": "other_time",
    "confirm_bar": "bar",
    "confirm_bigger_free": "bigger",
    "confirm_bigger_paid": "bigger",
}


def _strip_private(action: PlannerAction, hidden_prefix: str) -> PlannerAction:
    """Drop preconditions over the other side's private bits (optimism)."""
    kept = frozenset(
        lit for lit in action.preconditions if not lit.lstrip("!").startswith(hidden_prefix)
    )
    return PlannerAction(action.name, action.side, kept, action.add, action.delete, action.templates)


def planning_actions(side: str) -> tuple:
    """Ground actions ``side`` searches over: its own with full preconditions,
    the other side's with private-bit preconditions dropped."""
    hidden = "s_" if side == "A" else "c_"
    out = [
        a if a.side == side else _strip_private(a, hidden)
        for a in _DOMAIN
        if a.name not in _CLOSERS
    ]
    return tuple(sorted(out, key=lambda a: a.name))


def initial_state(goals_c: GoalVector, goals_s: GoalVector, side: str) -> frozenset:
    """Private planning state for ``side``; shared dialogue facts start empty."""
    if side == "A":
        return frozenset(f"c_{n}" for n, b in zip(CUSTOMER_BITS, goals_c.bits) if b)
    return frozenset(f"s_{n}" for n, b in zip(SERVER_BITS, goals_s.bits) if b)


def goal_props() -> frozenset:
    return frozenset({"agreement"})


def plan(state: frozenset, goal: frozenset, actions) -> list | None:
    """Minimum-length action sequence from ``state`` to ``goal``, or None.

    Breadth-first over the ground state graph; actions are expanded in name
    order so ties resolve to the lexicographically smallest plan.
    """
    if goal <= state:
        return []
    frontier = deque([(state, [])])
    seen = {state}
    while frontier:
        cur, path = frontier.popleft()
        for a in actions:  # already name-sorted
            if not a.applicable(cur):
                continue
            nxt = (cur - a.delete) | a.add
            if nxt in seen:
                continue
            new_path = path + [a]
            if goal <= nxt:
                return new_path
            seen.add(nxt)
            frontier.append((nxt, new_path))
    return None


def next_action(state: frozenset, side: str, goal: frozenset | None = None) -> PlannerAction:
    """Head of the shortest plan, or the designated agree/disagree closer."""
    goal = goal_props() if goal is None else goal
    if goal <= state:
        return _BY_NAME["close_agree_customer" if side == "A" else "close_agree_server"]
    found = plan(state, goal, planning_actions(side))
    if found is None:
        return _BY_NAME["close_disagree_customer" if side == "A" else "close_disagree_server"]
    head = found[0]
    if head.side != side:  # cannot happen with the pending_* obligations
        raise RuntimeError(f"plan for side {side} opens with {head.name}")
    return _BY_NAME[head.name]


# ---------------------------------------------------------------------------
# surface realization and parsing


def _slot_values(goals_c: GoalVector, rng) -> dict:
    bits = dict(zip(CUSTOMER_BITS, goals_c.bits))
    times = _EVENING_TIMES if bits["wants_evening"] else _NOON_TIMES
    alts = _NOON_TIMES if bits["wants_evening"] else _EVENING_TIMES
    parties = _SMALL_PARTIES if bits["party_small"] else _LARGE_PARTIES
    return {
        "time": times[int(rng.integers(len(times)))],
        "alt_time": alts[int(rng.integers(len(alts)))],
        "party": parties[int(rng.integers(len(parties)))],
    }


def realize(action: PlannerAction, slots: dict, rng) -> str:
    tpl = action.templates[int(rng.integers(len(action.templates)))]
    return tpl.format(**slots)


def _template_regex(tpl: str):
    pattern = re.escape(tpl)
    for name in ("party", "time", "alt_time"):
        pattern = pattern.replace(re.escape("{%s}" % name), r"(?P<%s>\S+)" % name)
    return re.compile("^" + pattern + "$")


def _surface_name(name: str) -> str:
    """Ground evening/noon variants share templates; parsing recovers the act
    only up to that grounding."""
    for base in ("request_table", "confirm_requested", "refuse_requested",
                 "confirm_other_time", "refuse_other_time"):
        if name.startswith(base):
            return base
    return name


_PARSE_TABLE = []
_seen_patterns = set()
for _a in _DOMAIN:
    for _t in _a.templates:
        if _t not in _seen_patterns:
            _seen_patterns.add(_t)
            _PARSE_TABLE.append((_surface_name(_a.name), _template_regex(_t)))


def parse_utterance(text: str):
    """Map a surface utterance back to (surface act name, slot dict), or None."""
    stripped = " ".join(text.strip().lower().split())
    for name, rx in _PARSE_TABLE:
        m = rx.match(stripped)
        if m:
            return name, m.groupdict()
    return None


# ---------------------------------------------------------------------------
# dialogue generation


def generate_dialogue(
    goals_a: GoalVector,
    goals_b: GoalVector,
    rng_seed: int,
    max_turns: int = 20,
) -> DialogueSession:
    """One negotiation between the rule-based customer (A) and server (B)."""
    rng = np.random.default_rng(rng_seed)
    slots = _slot_values(goals_a, rng)
    facts = frozenset()
    own = {
        "A": initial_state(goals_a, goals_b, "A"),
        "B": initial_state(goals_a, goals_b, "B"),
    }
    turns = []
    side = "A"
    while len(turns) < max_turns:
        act = next_action(facts | own[side], side)
        turns.append(Utterance(side, realize(act, slots, rng)))
        facts = (facts - act.delete) | act.add
        if "farewell_a" in facts and "farewell_b" in facts:
            break
        side = "B" if side == "A" else "A"
    outcome = transcript_outcome(goals_a, goals_b, [u.text for u in turns])
    return DialogueSession(goals_a, goals_b, tuple(turns), outcome)


def transcript_outcome(goals_c: GoalVector, goals_s: GoalVector, texts) -> int:
    """Agreement oracle: 1 iff the transcript contains a machine-readable
    booking confirmation whose option satisfies both goal vectors."""
    c = dict(zip(CUSTOMER_BITS, goals_c.bits))
    s = dict(zip(SERVER_BITS, goals_s.bits))
    booking = None
    price_warned = False
    for text in texts:
        parsed = parse_utterance(text)
        if parsed is None:
            continue
        name, _ = parsed
        if name == "offer_bigger_price":
            price_warned = True
        if name in _BOOKING_ACTS and booking is None:
            booking = _BOOKING_ACTS[name]
    if booking is None:
        return 0
    req_evening = bool(c["wants_evening"])
    if booking == "requested":
        ok_c = True
        ok_s = bool(s["evening_available"] if req_evening else s["noon_available"])
    elif booking == "other_time":
        ok_c = bool(c["flexible_time"])
        ok_s = bool(s["noon_available"] if req_evening else s["evening_available"])
    elif booking == "bar":
        ok_c = bool(c["party_small"] and c["accepts_bar"])
        ok_s = bool(s["has_bar"] and s["bar_free"])
    else:  # bigger
        ok_c = bool(c["accepts_bigger"]) and (not s["bigger_pricier"] or bool(c["accepts_price"]))
        ok_s = bool(s["has_bigger"])
        if price_warned and not c["accepts_price"]:
            ok_c = False
    return int(ok_c and ok_s)


def scripted_opener(goals_c: GoalVector, rng) -> str:
    """The customer's templated opening request (used to seed self-play)."""
    slots = _slot_values(goals_c, rng)
    name = "request_table_evening" if goals_c.bits[0] else "request_table_noon"
    return realize(_BY_NAME[name], slots, rng)


# ---------------------------------------------------------------------------
# goal pools and corpus generation

CUSTOMER_POOL = tuple(
    GoalVector(bits)
    for bits in [
        (1, 1, 1, 1, 1, 1),
        (1, 0, 1, 1, 0, 0),
        (1, 0, 0, 0, 1, 1),
        (1, 0, 1, 0, 1, 0),
        (1, 1, 0, 0, 0, 0),
        (1, 0, 0, 0, 0, 0),
        (0, 1, 1, 1, 0, 0),
        (0, 0, 1, 1, 1, 1),
        (0, 0, 0, 0, 0, 0),
        (1, 0, 1, 1, 1, 0),
        (0, 1, 0, 0, 1, 1),
        (1, 1, 1, 0, 1, 1),
    ]
)

SERVER_POOL = tuple(
    GoalVector(bits)
    for bits in [
        (1, 1, 1, 1, 1, 0),
        (0, 1, 1, 1, 1, 1),
        (0, 0, 1, 1, 0, 0),
        (0, 0, 0, 0, 1, 1),
        (0, 1, 0, 0, 0, 0),
        (1, 0, 0, 0, 0, 0),
        (0, 0, 0, 0, 0, 0),
        (0, 1, 1, 0, 1, 0),
        (1, 1, 0, 0, 1, 1),
        (0, 0, 1, 1, 1, 1),
    ]
)


def goal_labels() -> dict:
    """Human-readable labels for each goal bit, per side."""
    return {"customer": list(CUSTOMER_BITS), "server": list(SERVER_BITS)}


def sample_goals(rng) -> tuple:
    gc = CUSTOMER_POOL[int(rng.integers(len(CUSTOMER_POOL)))]
    gs = SERVER_POOL[int(rng.integers(len(SERVER_POOL)))]
    return gc, gs


def generate_corpus(n_dialogues: int, seed: int) -> tuple:
    """Generate ``n_dialogues`` sessions plus a statistics report."""
    if n_dialogues < 1:
        raise ValueError("need at least one dialogue")
    master = np.random.default_rng(seed)
    sessions = []
    for _ in range(n_dialogues):
        gc, gs = sample_goals(master)
        dialogue_seed = int(master.integers(2**63 - 1))
        sessions.append(generate_dialogue(gc, gs, dialogue_seed))
    return sessions, corpus_stats(sessions)
