import numpy as np
import networkx as nx
import pytest

from lookahead_dialogue import datagen as D
from lookahead_dialogue.corpus import GoalVector


def _bfs_oracle_length(state, goal, actions):
    """Independent shortest-path length via an explicit networkx state graph."""
    g = nx.DiGraph()
    g.add_node(state)
    frontier = [state]
    seen = {state}
    while frontier:
        nxt_frontier = []
        for cur in frontier:
            for a in actions:
                if not a.applicable(cur):
                    continue
                succ = (cur - a.delete) | a.add
                g.add_edge(cur, succ)
                if succ not in seen:
                    seen.add(succ)
                    nxt_frontier.append(succ)
        frontier = nxt_frontier
    goal_states = [s for s in seen if goal <= s]
    if not goal_states:
        return None
    return min(nx.shortest_path_length(g, state, t) for t in goal_states if nx.has_path(g, state, t))


def test_plan_empty_when_satisfied():
    actions = D.planning_actions("A")
    state = frozenset({"agreement", "c_wants_evening"})
    assert D.plan(state, D.goal_props(), actions) == []


def test_plan_single_step():
    # server one confirmation away from agreement
    actions = D.planning_actions("B")
    state = frozenset({"pending_request", "req_made", "req_evening", "s_evening_available"})
    found = D.plan(state, D.goal_props(), actions)
    assert [a.name for a in found] == ["confirm_requested_evening"]


def test_next_action_satisfied_and_unreachable():
    agreed = frozenset({"agreement"})
    assert D.next_action(agreed, "A").name == "close_agree_customer"
    assert D.next_action(agreed, "B").name == "close_agree_server"
    dead = frozenset({"req_made", "req_evening", "slot_unavailable", "disagreement"})
    assert D.next_action(dead, "A").name == "close_disagree_customer"
    assert D.next_action(dead, "B").name == "close_disagree_server"


def test_next_action_is_plan_head_mid_negotiation():
    state = frozenset(
        {"c_wants_evening", "c_party_small", "c_accepts_bar", "req_made", "req_evening", "slot_unavailable"}
    )
    found = D.plan(state, D.goal_props(), D.planning_actions("A"))
    assert D.next_action(state, "A").name == found[0].name == "ask_bar"


def _trajectory_states(gc, gs, seed):
    """(state, side) pairs actually visited while generating one dialogue."""
    rng = np.random.default_rng(seed)
    facts = frozenset()
    own = {"A": D.initial_state(gc, gs, "A"), "B": D.initial_state(gc, gs, "B")}
    side = "A"
    out = []
    for _ in range(20):
        state = facts | own[side]
        out.append((state, side))
        act = D.next_action(state, side)
        facts = (facts - act.delete) | act.add
        if "farewell_a" in facts and "farewell_b" in facts:
            break
        side = "B" if side == "A" else "A"
    return out


def test_plan_length_matches_bfs_oracle_spot():
    goal = D.goal_props()
    pairs = [(gc, gs) for gc in D.CUSTOMER_POOL[:4] for gs in D.SERVER_POOL[:4]]
    checked = 0
    for gc, gs in pairs:
        for state, side in _trajectory_states(gc, gs, 13):
            actions = D.planning_actions(side)
            found = D.plan(state, goal, actions)
            oracle = _bfs_oracle_length(state, goal, actions)
            if found is None:
                assert oracle is None
            else:
                assert oracle == len(found)
            checked += 1
    assert checked > 30


def test_generate_compatible_goals_short_success():
    sess = D.generate_dialogue(GoalVector((1, 0, 0, 0, 0, 0)), GoalVector((1, 1, 1, 1, 1, 0)), 5)
    assert sess.outcome == 1
    assert len(sess.turns) == 4


def test_generate_incompatible_goals_failure():
    sess = D.generate_dialogue(GoalVector((1, 0, 0, 0, 0, 0)), GoalVector((0, 0, 0, 0, 0, 0)), 5)
    assert sess.outcome == 0
    assert all("bye" in u.text for u in sess.turns[1:])


def test_generate_negotiation_walks_fallback_chain():
    # no slot, no bar, upgrade offered at a price, customer accepts
    sess = D.generate_dialogue(GoalVector((1, 0, 1, 1, 1, 1)), GoalVector((0, 0, 0, 0, 1, 1)), 11)
    acts = [D.parse_utterance(u.text)[0] for u in sess.turns]
    assert acts[0] == "request_table"
    assert acts[1] == "refuse_requested"
    assert "ask_bar" in acts and "refuse_bar_none" in acts
    assert "offer_bigger_price" in acts and "confirm_bigger_paid" in acts
    assert sess.outcome == 1


def test_turns_alternate_and_terminate():
    sessions, _ = D.generate_corpus(60, seed=3)
    for s in sessions:
        assert len(s.turns) <= 20
        for prev, cur in zip(s.turns, s.turns[1:]):
            assert prev.speaker != cur.speaker


def test_outcome_matches_oracle_everywhere():
    sessions, _ = D.generate_corpus(200, seed=17)
    for s in sessions:
        assert s.outcome == D.transcript_outcome(s.goals_a, s.goals_b, [u.text for u in s.turns])


def test_corpus_stats_schema_and_single():
    sessions, stats = D.generate_corpus(1, seed=0)
    assert stats["number_of_dialogues"] == 1
    assert stats["average_turns_per_dialogue"] == len(sessions[0].turns)
    assert set(stats) == {
        "number_of_dialogues",
        "average_turns_per_dialogue",
        "average_words_per_turn",
        "number_of_words",
        "percent_goal_achieved",
    }


def test_corpus_deterministic_given_seed():
    a, stats_a = D.generate_corpus(40, seed=9)
    b, stats_b = D.generate_corpus(40, seed=9)
    assert a == b and stats_a == stats_b


def test_every_template_realization_parses_back():
    rng = np.random.default_rng(0)
    slot_sets = [
        {"party": "2", "time": "6pm", "alt_time": "12pm"},
        {"party": "6", "time": "1pm", "alt_time": "7pm"},
    ]
    for act in D.domain_actions():
        assert 2 <= len(act.templates) <= 4
        for slots in slot_sets:
            for _ in range(len(act.templates)):
                text = D.realize(act, slots, rng)
                parsed = D.parse_utterance(text)
                assert parsed is not None and act.name.startswith(parsed[0]), text


def test_parse_rejects_free_text():
    assert D.parse_utterance("how about we just chat instead") is None


def test_add_delete_disjoint():
    for act in D.domain_actions():
        assert not (act.add & act.delete)


def test_scripted_opener_is_a_request():
    rng = np.random.default_rng(4)
    text = D.scripted_opener(GoalVector((1, 0, 1, 1, 0, 0)), rng)
    name, slots = D.parse_utterance(text)
    assert name == "request_table"
    assert slots["time"] in ("6pm", "7pm")
