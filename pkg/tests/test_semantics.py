import random

import pytest

from gradedmodal import (
    Diamond,
    KripkeStructure,
    PointedStructure,
    Prop,
    SignatureError,
    Top,
    bounded_equivalence,
    extension,
    parse_formula,
    satisfies,
)

from helpers import SIG_AP, fan, loop1, random_formula, random_signature, random_structure


def test_extension_fan_fixtures():
    m = fan(3).structure
    assert extension(m, Diamond("a", 3, Top())) == frozenset({0})
    assert extension(m, Diamond("a", 4, Top())) == frozenset()

    withp = KripkeStructure(
        SIG_AP, 3, {"a": {(0, 1), (0, 2)}}, {"p": {1}}
    )
    assert extension(withp, Diamond("a", 2, Prop("p"))) == frozenset()
    assert extension(withp, Diamond("a", 1, Prop("p"))) == frozenset({0})


def test_satisfies_fixtures():
    assert satisfies(loop1(), parse_formula("<a:1> true"))
    assert not satisfies(loop1(), parse_formula("<a:2> true"))
    assert satisfies(fan(2), Top())


def test_unknown_symbols_rejected():
    with pytest.raises(SignatureError):
        extension(fan(1).structure, Prop("p"))
    with pytest.raises(SignatureError):
        satisfies(fan(1), Diamond("b", 1, Top()))


def test_satisfies_matches_extension():
    rng = random.Random(41)
    for _ in range(150):
        sig = random_signature(rng)
        m = random_structure(rng, sig)
        f = random_formula(rng, sig, depth=3, max_grade=3)
        ext = extension(m.structure, f)
        for w in m.structure.worlds():
            assert (w in ext) == satisfies(PointedStructure(m.structure, w), f)


def test_grade_one_is_plain_diamond():
    rng = random.Random(43)
    for _ in range(100):
        sig = random_signature(rng)
        m = random_structure(rng, sig).structure
        body = random_formula(rng, sig, depth=2, max_grade=2)
        agent = sig.agents[0]
        child = extension(m, body)
        direct = frozenset(
            u for u in m.worlds() if set(m.successors(agent, u)) & child
        )
        assert extension(m, Diamond(agent, 1, body)) == direct


def test_grade_monotonicity():
    rng = random.Random(47)
    for _ in range(100):
        sig = random_signature(rng)
        m = random_structure(rng, sig).structure
        body = random_formula(rng, sig, depth=2, max_grade=2)
        agent = sig.agents[0]
        for grade in (1, 2, 3):
            bigger = extension(m, Diamond(agent, grade + 1, body))
            smaller = extension(m, Diamond(agent, grade, body))
            assert bigger <= smaller


def test_bounded_invariance_on_random_formulas():
    # one direction of the rank/depth agreement; the full version is an
    # acceptance criterion
    from gradedmodal import counting_rank, nesting_depth

    rng = random.Random(53)
    checked = 0
    while checked < 60:
        sig = random_signature(rng)
        a = random_structure(rng, sig)
        b = random_structure(rng, sig)
        f = random_formula(rng, sig, depth=2, max_grade=2)
        cap, depth = counting_rank(f), nesting_depth(f)
        if not bounded_equivalence(a, b, cap, depth):
            continue
        assert satisfies(a, f) == satisfies(b, f)
        checked += 1
