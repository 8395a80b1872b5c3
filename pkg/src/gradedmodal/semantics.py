"""Model checking graded modal logic over finite Kripke structures."""

from __future__ import annotations

from .errors import SignatureError
from .kripke import KripkeStructure, PointedStructure
from .syntax import And, Bot, Diamond, Formula, Not, Or, Prop, Top


def _check_symbols(m: KripkeStructure, formula: Formula):
    if isinstance(formula, Prop):
        if formula.name not in m.signature.props:
            raise SignatureError(f"unknown proposition {formula.name!r}")
    elif isinstance(formula, Not):
        _check_symbols(m, formula.child)
    elif isinstance(formula, (And, Or)):
        _check_symbols(m, formula.left)
        _check_symbols(m, formula.right)
    elif isinstance(formula, Diamond):
        if formula.agent not in m.signature.agents:
            raise SignatureError(f"unknown agent {formula.agent!r}")
        _check_symbols(m, formula.child)


def extension(m: KripkeStructure, formula: Formula) -> frozenset[int]:
    """The set of worlds satisfying the formula, computed bottom-up.

    One extension is memoized per distinct subformula, so shared subterms
    (common in generated characteristic formulas) are evaluated once.
    """
    _check_symbols(m, formula)
    memo: dict[int, frozenset[int]] = {}
    universe = frozenset(m.worlds())

    def ext(f: Formula) -> frozenset[int]:
        key = id(f)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if isinstance(f, Top):
            result = universe
        elif isinstance(f, Bot):
            result = frozenset()
        elif isinstance(f, Prop):
            result = m.valuation[f.name]
        elif isinstance(f, Not):
            result = universe - ext(f.child)
        elif isinstance(f, And):
            result = ext(f.left) & ext(f.right)
        elif isinstance(f, Or):
            result = ext(f.left) | ext(f.right)
        elif isinstance(f, Diamond):
            child = ext(f.child)
            result = frozenset(
                u for u in m.worlds()
                if _count_in(m.successors(f.agent, u), child) >= f.grade
            )
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[key] = result
        return result

    return ext(formula)


def _count_in(successors: tuple[int, ...], target: frozenset[int]) -> int:
    return sum(1 for v in successors if v in target)


def satisfies(pointed: PointedStructure, formula: Formula) -> bool:
    """Truth at the distinguished world.

    Evaluates point-locally with early exits, which is much faster than
    ``extension`` on wide disjunctions such as normal forms.
    """
    m = pointed.structure
    _check_symbols(m, formula)
    memo: dict[tuple[int, int], bool] = {}

    def sat(world: int, f: Formula) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Prop):
            return world in m.valuation[f.name]
        key = (world, id(f))
        cached = memo.get(key)
        if cached is not None:
            return cached
        if isinstance(f, Not):
            result = not sat(world, f.child)
        elif isinstance(f, And):
            result = sat(world, f.left) and sat(world, f.right)
        elif isinstance(f, Or):
            result = sat(world, f.left) or sat(world, f.right)
        elif isinstance(f, Diamond):
            hits = 0
            result = False
            for v in m.successors(f.agent, world):
                if sat(v, f.child):
                    hits += 1
                    if hits >= f.grade:
                        result = True
                        break
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[key] = result
        return result

    return sat(pointed.point, formula)
