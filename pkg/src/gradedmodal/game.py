"""The cost-bounded, round-bounded back-and-forth game, solved exhaustively.

Positions pair a world of the left structure with one of the right.  In a
round the spoiler proposes, for some agent, a nonempty set of successors of
either world with at most ``cap`` members; the duplicator answers with an
equally sized successor set on the opposite side; the spoiler then picks a
world inside the duplicator's set and the duplicator must reply with a
matching world inside the spoiler's set.  The picked pair is the next
position.  A player who cannot move loses, and the duplicator also loses at
any position whose two worlds differ atomically.

This module is the independent oracle for the refinement-based equivalences:
it never consults a ColorHistory unless class pruning is explicitly
requested.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from types import MappingProxyType
from typing import Mapping, Optional

from .equivalence import atomic_history, refine
from .errors import ResourceLimitError, SignatureError
from .kripke import KripkeStructure, PointedStructure, disjoint_union

DUPLICATOR = "duplicator"
SPOILER = "spoiler"


@dataclass(frozen=True)
class GamePosition:
    left: int
    right: int
    rounds_left: int


@dataclass(frozen=True, order=True)
class SpoilerMove:
    """First-stage challenge: a nonempty successor set on one side."""

    side: str  # "left" | "right"
    agent: str
    chosen: tuple[int, ...]


@dataclass(frozen=True)
class DuplicatorMove:
    """Equally sized answer set, with a reply for every pick inside it.

    ``matches`` sends each spoiler pick inside ``response`` to the
    duplicator's reply inside the challenged set.
    """

    response: tuple[int, ...]
    matches: Mapping[int, int]


@dataclass(frozen=True)
class SpoilerPlay:
    """A winning challenge plus the pick for every legal duplicator answer."""

    move: SpoilerMove
    picks: Mapping[tuple[int, ...], int]


@dataclass(frozen=True)
class GameResult:
    """Winner of a solved game plus a replayable strategy certificate.

    For a duplicator win, ``strategy[(u, v, m)]`` maps every legal
    ``SpoilerMove`` at that position to the ``DuplicatorMove`` answering it.
    For a spoiler win, the entry is ``None`` when the position already
    violates atom equivalence, and otherwise a ``SpoilerPlay``.
    """

    winner: str
    cap: int
    rounds: int
    start: GamePosition
    strategy: Mapping[tuple[int, int, int], object]

    def to_json_dict(self) -> dict:
        entries = []
        for (u, v, m) in sorted(self.strategy):
            value = self.strategy[(u, v, m)]
            record: dict = {"left": u, "right": v, "rounds_left": m}
            if self.winner == DUPLICATOR:
                moves = []
                for move, answer in sorted(value.items()):
                    moves.append(
                        {
                            "side": move.side,
                            "agent": move.agent,
                            "chosen": list(move.chosen),
                            "response": list(answer.response),
                            "matches": {
                                str(k): w for k, w in sorted(answer.matches.items())
                            },
                        }
                    )
                record["responses"] = moves
            else:
                if value is None:
                    record["move"] = None
                else:
                    record["move"] = {
                        "side": value.move.side,
                        "agent": value.move.agent,
                        "chosen": list(value.move.chosen),
                        "picks": {
                            ",".join(map(str, resp)): pick
                            for resp, pick in sorted(value.picks.items())
                        },
                    }
            entries.append(record)
        return {
            "winner": self.winner,
            "cap": self.cap,
            "rounds": self.rounds,
            "start": {
                "left": self.start.left,
                "right": self.start.right,
                "rounds_left": self.start.rounds_left,
            },
            "positions": entries,
        }


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: int):
        self.left = limit

    def spend(self, amount: int = 1):
        self.left -= amount
        if self.left < 0:
            raise ResourceLimitError("game solving exceeded its step budget")


def _atom_masks(a: KripkeStructure, b: KripkeStructure) -> list[int]:
    props = a.signature.props
    b_types = [
        tuple(w in b.valuation[p] for p in props) for w in b.worlds()
    ]
    masks = []
    for u in a.worlds():
        t = tuple(u in a.valuation[p] for p in props)
        mask = 0
        for w, bt in enumerate(b_types):
            if bt == t:
                mask |= 1 << w
        masks.append(mask)
    return masks


def _spoiler_sets(successors: tuple[int, ...], cap: int, groups=None):
    """All spoiler choices over the given successors, sizes 1..cap.

    With ``groups`` (a class id per world), enumeration is collapsed to one
    representative set per class-count multiset: picking different members
    of one refinement class is interchangeable for both players.
    """
    if groups is None:
        for size in range(1, min(cap, len(successors)) + 1):
            yield from combinations(successors, size)
        return
    by_class: dict[int, list[int]] = {}
    for v in successors:
        by_class.setdefault(groups[v], []).append(v)
    classes = [sorted(members) for _, members in sorted(by_class.items())]

    # Enumerate count vectors over classes; sets come out sorted per class.
    def vectors(idx: int, budget: int, acc: tuple[int, ...]):
        if idx == len(classes):
            if acc:
                yield acc
            return
        members = classes[idx]
        for take in range(0, min(budget, len(members)) + 1):
            yield from vectors(idx + 1, budget - take, acc + tuple(members[:take]))

    yield from vectors(0, cap, ())


def solve_game(
    a: PointedStructure,
    b: PointedStructure,
    cap: int,
    rounds: int,
    *,
    use_class_pruning: bool = False,
    max_steps: int = 5_000_000,
) -> GameResult:
    """Exact value of the bounded game, with a strategy for the winner.

    The duplicator survives a spoiler set ``s`` iff enough opposite-side
    successors are covered: a legal response of size ``|s|`` exists exactly
    when at least ``|s|`` opposite successors each continue into a
    duplicator-won position against some member of ``s`` (any such set is a
    valid response, since only covered worlds enter it).
    """
    if a.signature != b.signature:
        raise SignatureError("the two structures carry different signatures")
    if cap < 0 or rounds < 0:
        raise ValueError("cap and rounds must be nonnegative")
    ka, kb = a.structure, b.structure
    na, nb = ka.world_count, kb.world_count
    agents = ka.signature.agents
    budget = _Budget(max_steps)

    groups_a = groups_b = None
    if use_class_pruning and rounds > 0:
        arena = disjoint_union([ka, kb])
        history = atomic_history(arena, cap, (0, na))
        for _ in range(max(rounds - 1, 0)):
            history = refine(history)
        final = history.levels[-1]
        groups_a = list(final[:na])
        groups_b = list(final[na:])

    atom = _atom_masks(ka, kb)
    succ_b_mask = {
        agent: [
            sum(1 << v for v in kb.successors(agent, w)) for w in range(nb)
        ]
        for agent in agents
    }
    succ_a_mask = {
        agent: [
            sum(1 << v for v in ka.successors(agent, w)) for w in range(na)
        ]
        for agent in agents
    }

    # win[u] = bitmask of right worlds v such that the duplicator wins (u, v)
    # with the current number of rounds left; winT is its transpose.
    win = list(atom)
    levels = [win]
    for _ in range(rounds):
        winT = [0] * nb
        for u in range(na):
            row = win[u]
            while row:
                low = row & -row
                winT[low.bit_length() - 1] |= 1 << u
                row ^= low
        new = []
        for u in range(na):
            mask = 0
            candidates = atom[u]
            while candidates:
                low = candidates & -candidates
                v = low.bit_length() - 1
                candidates ^= low
                if _duplicator_survives(
                    ka, kb, u, v, cap, agents, win, winT,
                    succ_a_mask, succ_b_mask, groups_a, groups_b, budget,
                ):
                    mask |= low
            new.append(mask)
        win = new
        levels.append(win)

    dup_wins = bool(levels[rounds][a.point] >> b.point & 1)
    winner = DUPLICATOR if dup_wins else SPOILER
    start = GamePosition(a.point, b.point, rounds)
    if dup_wins:
        strategy = _extract_duplicator(
            ka, kb, a.point, b.point, cap, rounds, agents, levels, budget
        )
    else:
        strategy = _extract_spoiler(
            ka, kb, a.point, b.point, cap, rounds, agents, levels, budget
        )
    return GameResult(winner, cap, rounds, start, MappingProxyType(strategy))


def _duplicator_survives(
    ka, kb, u, v, cap, agents, win, winT,
    succ_a_mask, succ_b_mask, groups_a, groups_b, budget,
) -> bool:
    for agent in agents:
        sa = ka.successors(agent, u)
        sb = kb.successors(agent, v)
        sb_mask = succ_b_mask[agent][v]
        for chosen in _spoiler_sets(sa, cap, groups_a):
            budget.spend()
            cover = 0
            for x in chosen:
                cover |= win[x]
            cover &= sb_mask
            if cover.bit_count() < len(chosen):
                return False
        sa_mask = succ_a_mask[agent][u]
        for chosen in _spoiler_sets(sb, cap, groups_b):
            budget.spend()
            cover = 0
            for y in chosen:
                cover |= winT[y]
            cover &= sa_mask
            if cover.bit_count() < len(chosen):
                return False
    return True


def _extract_duplicator(ka, kb, u0, v0, cap, rounds, agents, levels, budget):
    strategy: dict = {}

    def dup_wins(u, v, m) -> bool:
        return bool(levels[m][u] >> v & 1)

    def visit(u, v, m):
        if (u, v, m) in strategy or m == 0:
            if m == 0:
                strategy.setdefault((u, v, 0), {})
            return
        moves: dict = {}
        for agent in agents:
            sa = ka.successors(agent, u)
            sb = kb.successors(agent, v)
            for chosen in _spoiler_sets(sa, cap):
                budget.spend()
                covered = [y for y in sb if any(dup_wins(x, y, m - 1) for x in chosen)]
                response = tuple(covered[: len(chosen)])
                matches = {
                    y: next(x for x in chosen if dup_wins(x, y, m - 1))
                    for y in response
                }
                moves[SpoilerMove("left", agent, chosen)] = DuplicatorMove(response, matches)
            for chosen in _spoiler_sets(sb, cap):
                budget.spend()
                covered = [x for x in sa if any(dup_wins(x, y, m - 1) for y in chosen)]
                response = tuple(covered[: len(chosen)])
                matches = {
                    x: next(y for y in chosen if dup_wins(x, y, m - 1))
                    for x in response
                }
                moves[SpoilerMove("right", agent, chosen)] = DuplicatorMove(response, matches)
        strategy[(u, v, m)] = moves
        for move, answer in moves.items():
            for pick, reply in answer.matches.items():
                if move.side == "left":
                    visit(reply, pick, m - 1)
                else:
                    visit(pick, reply, m - 1)

    visit(u0, v0, rounds)
    return strategy


def _extract_spoiler(ka, kb, u0, v0, cap, rounds, agents, levels, budget):
    strategy: dict = {}

    def dup_wins(u, v, m) -> bool:
        return bool(levels[m][u] >> v & 1)

    def find_move(u, v, m):
        for agent in agents:
            sa = ka.successors(agent, u)
            sb = kb.successors(agent, v)
            for chosen in _spoiler_sets(sa, cap):
                budget.spend()
                covered = {y for y in sb if any(dup_wins(x, y, m - 1) for x in chosen)}
                if len(covered) < len(chosen):
                    return "left", agent, chosen, covered
            for chosen in _spoiler_sets(sb, cap):
                budget.spend()
                covered = {x for x in sa if any(dup_wins(x, y, m - 1) for y in chosen)}
                if len(covered) < len(chosen):
                    return "right", agent, chosen, covered
        raise AssertionError("spoiler-won position without a winning move")

    def visit(u, v, m):
        if (u, v, m) in strategy:
            return
        atom_equal = all(
            (u in ka.valuation[p]) == (v in kb.valuation[p])
            for p in ka.signature.props
        )
        if not atom_equal:
            strategy[(u, v, m)] = None
            return
        side, agent, chosen, covered = find_move(u, v, m)
        opposite = kb.successors(agent, v) if side == "left" else ka.successors(agent, u)
        picks: dict = {}
        for response in combinations(opposite, len(chosen)):
            budget.spend()
            pick = next(p for p in response if p not in covered)
            picks[response] = pick
            for reply in chosen:
                if side == "left":
                    visit(reply, pick, m - 1)
                else:
                    visit(pick, reply, m - 1)
        strategy[(u, v, m)] = SpoilerPlay(SpoilerMove(side, agent, chosen), picks)

    visit(u0, v0, rounds)
    return strategy


def verify_strategy(
    result: GameResult,
    a: PointedStructure,
    b: PointedStructure,
    cap: Optional[int] = None,
    rounds: Optional[int] = None,
) -> bool:
    """Replay every opposing move against the certificate.

    Returns True iff the claimed winner never loses under the stored
    strategy; a strategy that is not total on a reached position is
    rejected.
    """
    cap = result.cap if cap is None else cap
    rounds = result.rounds if rounds is None else rounds
    ka, kb = a.structure, b.structure
    agents = ka.signature.agents

    def atom_equal(u, v):
        return all(
            (u in ka.valuation[p]) == (v in kb.valuation[p])
            for p in ka.signature.props
        )

    memo: dict[tuple[int, int, int], bool] = {}

    def check_duplicator(u, v, m) -> bool:
        key = (u, v, m)
        if key in memo:
            return memo[key]
        memo[key] = True  # positions do not recur within one branch
        if not atom_equal(u, v):
            memo[key] = False
            return False
        if m == 0:
            return True
        moves = result.strategy.get(key)
        if moves is None:
            memo[key] = False
            return False
        for agent in agents:
            for side, mine, theirs in (
                ("left", ka.successors(agent, u), kb.successors(agent, v)),
                ("right", kb.successors(agent, v), ka.successors(agent, u)),
            ):
                for chosen in _spoiler_sets(mine, cap):
                    answer = moves.get(SpoilerMove(side, agent, chosen))
                    if answer is None:
                        memo[key] = False
                        return False
                    response = answer.response
                    if len(response) != len(chosen) or len(set(response)) != len(response):
                        memo[key] = False
                        return False
                    if any(p not in theirs for p in response):
                        memo[key] = False
                        return False
                    for pick in response:
                        reply = answer.matches.get(pick)
                        if reply is None or reply not in chosen:
                            memo[key] = False
                            return False
                        nxt = (reply, pick) if side == "left" else (pick, reply)
                        if not check_duplicator(nxt[0], nxt[1], m - 1):
                            memo[key] = False
                            return False
        return True

    def check_spoiler(u, v, m) -> bool:
        key = (u, v, m)
        if key in memo:
            return memo[key]
        memo[key] = True
        if not atom_equal(u, v):
            return True
        if m == 0:
            memo[key] = False
            return False
        entry = result.strategy.get(key, "missing")
        if not isinstance(entry, SpoilerPlay):
            memo[key] = False
            return False
        side, agent, chosen = entry.move.side, entry.move.agent, entry.move.chosen
        picks = entry.picks
        mine = ka.successors(agent, u) if side == "left" else kb.successors(agent, v)
        theirs = kb.successors(agent, v) if side == "left" else ka.successors(agent, u)
        if not (1 <= len(chosen) <= cap) or any(x not in mine for x in chosen):
            memo[key] = False
            return False
        legal_responses = list(combinations(theirs, len(chosen)))
        if not legal_responses:
            return True  # duplicator is stuck
        for response in legal_responses:
            pick = picks.get(response)
            if pick is None or pick not in response:
                memo[key] = False
                return False
            for reply in chosen:
                nxt = (reply, pick) if side == "left" else (pick, reply)
                if not check_spoiler(nxt[0], nxt[1], m - 1):
                    memo[key] = False
                    return False
        return True

    if result.winner == DUPLICATOR:
        return check_duplicator(a.point, b.point, rounds)
    return check_spoiler(a.point, b.point, rounds)
