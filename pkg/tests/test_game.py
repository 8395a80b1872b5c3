import copy
import json
import random

import pytest

from gradedmodal import (
    FragmentBound,
    ResourceLimitError,
    Signature,
    SignatureError,
    bounded_equivalence,
    distinguishing_formula,
    in_fragment,
    satisfies,
    solve_game,
    verify_strategy,
)
from gradedmodal.game import DUPLICATOR, SPOILER

from helpers import fan, random_pair


def test_fan_game_fixtures():
    assert solve_game(fan(2), fan(3), 3, 1).winner == SPOILER
    assert solve_game(fan(2), fan(3), 2, 1).winner == DUPLICATOR


def test_atomically_distinct_lost_at_round_zero():
    import gradedmodal as gm

    sig = Signature((), ("p",))
    a = gm.PointedStructure(gm.KripkeStructure(sig, 1, {}, {"p": {0}}), 0)
    b = gm.PointedStructure(gm.KripkeStructure(sig, 1, {}, {"p": set()}), 0)
    for rounds in (0, 1, 2):
        result = solve_game(a, b, 2, rounds)
        assert result.winner == SPOILER
        assert verify_strategy(result, a, b)


def test_signature_mismatch():
    with pytest.raises(SignatureError):
        solve_game(fan(1), fan(1, Signature(("b",), ())), 1, 1)


def test_budget_guard_is_not_a_verdict():
    with pytest.raises(ResourceLimitError):
        solve_game(fan(4), fan(4), 3, 2, max_steps=3)


def test_all_solved_games_verify():
    rng = random.Random(107)
    for _ in range(60):
        a, b = random_pair(rng)
        cap, rounds = rng.randint(0, 2), rng.randint(0, 2)
        result = solve_game(a, b, cap, rounds)
        assert result.winner in (DUPLICATOR, SPOILER)
        assert verify_strategy(result, a, b)


def test_corrupted_duplicator_strategy_rejected():
    from gradedmodal.game import DuplicatorMove, GameResult

    result = solve_game(fan(2), fan(2), 2, 2)
    assert result.winner == DUPLICATOR
    assert verify_strategy(result, fan(2), fan(2))
    strategy = copy.deepcopy(dict(result.strategy))
    # corrupt one response: swap a matched reply for a wrong world
    corrupted = False
    for pos, moves in strategy.items():
        for move, answer in list(moves.items()):
            if answer.response:
                bad = dict(answer.matches)
                pick = next(iter(bad))
                bad[pick] = max(move.chosen) + 99
                moves[move] = DuplicatorMove(answer.response, bad)
                corrupted = True
                break
        if corrupted:
            break
    assert corrupted
    mutant = GameResult(result.winner, result.cap, result.rounds, result.start, strategy)
    assert not verify_strategy(mutant, fan(2), fan(2))


def test_corrupted_spoiler_strategy_rejected():
    from gradedmodal.game import GameResult, SpoilerPlay

    from helpers import chain

    # chain(1) vs chain(2): the spoiler needs two rounds, and the duplicator
    # has a legal response in the first, so stored picks are consulted
    a, b = chain(1), chain(2)
    result = solve_game(a, b, 1, 2)
    assert result.winner == SPOILER
    assert verify_strategy(result, a, b)
    strategy = copy.deepcopy(dict(result.strategy))
    key = (0, 0, 2)
    play = strategy[key]
    assert play.picks, "the duplicator has responses here"
    bad_picks = {resp: -1 for resp in play.picks}  # pick outside every response
    strategy[key] = SpoilerPlay(play.move, bad_picks)
    mutant = GameResult(result.winner, result.cap, result.rounds, result.start, strategy)
    assert not verify_strategy(mutant, a, b)
    # removing the entry entirely must also reject
    del strategy[key]
    mutant = GameResult(result.winner, result.cap, result.rounds, result.start, strategy)
    assert not verify_strategy(mutant, a, b)


def test_monotonicity_of_spoiler_wins():
    rng = random.Random(109)
    for _ in range(40):
        a, b = random_pair(rng)
        for cap in range(2):
            for rounds in range(2):
                if solve_game(a, b, cap, rounds).winner == SPOILER:
                    assert solve_game(a, b, cap + 1, rounds).winner == SPOILER
                    assert solve_game(a, b, cap, rounds + 1).winner == SPOILER


def test_oracle_agreement_with_refinement():
    rng = random.Random(113)
    for _ in range(80):
        a, b = random_pair(rng)
        for cap in range(3):
            for rounds in range(3):
                game = solve_game(a, b, cap, rounds)
                assert (game.winner == DUPLICATOR) == bool(
                    bounded_equivalence(a, b, cap, rounds)
                )


def test_class_pruning_agrees_with_raw():
    rng = random.Random(127)
    for _ in range(40):
        a, b = random_pair(rng)
        cap, rounds = rng.randint(0, 3), rng.randint(0, 2)
        raw = solve_game(a, b, cap, rounds)
        pruned = solve_game(a, b, cap, rounds, use_class_pruning=True)
        assert raw.winner == pruned.winner


def test_spoiler_win_yields_separating_formula():
    rng = random.Random(131)
    found = 0
    while found < 25:
        a, b = random_pair(rng)
        cap, rounds = rng.randint(1, 2), rng.randint(1, 2)
        if solve_game(a, b, cap, rounds).winner != SPOILER:
            continue
        separator = distinguishing_formula(a, b, cap, rounds)
        assert separator is not None
        assert in_fragment(separator, FragmentBound(cap, rounds))
        assert satisfies(a, separator)
        assert not satisfies(b, separator)
        found += 1


def test_result_serializes():
    result = solve_game(fan(2), fan(3), 3, 1)
    payload = result.to_json_dict()
    text = json.dumps(payload, sort_keys=True)
    assert payload["winner"] == SPOILER
    assert "positions" in payload and text

    dup = solve_game(fan(2), fan(2), 2, 1)
    payload = dup.to_json_dict()
    json.dumps(payload)
    assert payload["winner"] == DUPLICATOR
