"""First-order bridge: FO syntax and evaluation over the modal signature,
the standard translation, bounded back-and-forth equivalence, locality
checks, the padding construction, and the locality/upgrading pipeline.

FO concrete syntax (printable and re-parsable)::

    fo ::= "E" VAR fo | "A" VAR fo                 -- exists / forall
         | "!" fo
         | "(" fo "&" fo ")" | "(" fo "|" fo ")"
         | "(" fo ")"
         | VAR "=" VAR
         | IDENT "(" VAR ")"                       -- proposition atom
         | "E"AGENT "(" VAR "," VAR ")"            -- edge atom, e.g. Ea(x,y1)

Evaluation is naive recursion with environment passing; all uses are guarded
to desk scale.
"""

from __future__ import annotations

import itertools
import random as _random_module
import re
from dataclasses import dataclass
from typing import Mapping, Optional

from .equivalence import bounded_equivalence, full_graded_bisimilarity, type_descriptor
from .errors import (
    EvaluationError,
    ParseError,
    ResourceLimitError,
    SignatureError,
)
from .kripke import (
    KripkeStructure,
    PointedStructure,
    Signature,
    disjoint_union,
    copies,
    dump_structure,
    is_rooted_treelike,
    neighborhood,
    restrict,
    unravel,
)
from .syntax import (
    And,
    Bot,
    Diamond,
    Formula,
    Not,
    Or,
    Prop,
    Top,
    format_formula,
)


class FOFormula:
    """Base class for first-order formulas over the modal signature."""

    __slots__ = ()


@dataclass(frozen=True)
class PropAtom(FOFormula):
    prop: str
    var: str


@dataclass(frozen=True)
class EdgeAtom(FOFormula):
    agent: str
    src: str
    dst: str


@dataclass(frozen=True)
class Eq(FOFormula):
    left: str
    right: str


@dataclass(frozen=True)
class FONot(FOFormula):
    child: FOFormula


@dataclass(frozen=True)
class FOAnd(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class FOOr(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True)
class Exists(FOFormula):
    var: str
    child: FOFormula


@dataclass(frozen=True)
class Forall(FOFormula):
    var: str
    child: FOFormula


def fo_and_all(parts: list[FOFormula]) -> FOFormula:
    if not parts:
        raise ValueError("empty conjunction")
    acc = parts[0]
    for p in parts[1:]:
        acc = FOAnd(acc, p)
    return acc


def free_vars(formula: FOFormula) -> frozenset[str]:
    if isinstance(formula, PropAtom):
        return frozenset((formula.var,))
    if isinstance(formula, EdgeAtom):
        return frozenset((formula.src, formula.dst))
    if isinstance(formula, Eq):
        return frozenset((formula.left, formula.right))
    if isinstance(formula, FONot):
        return free_vars(formula.child)
    if isinstance(formula, (FOAnd, FOOr)):
        return free_vars(formula.left) | free_vars(formula.right)
    if isinstance(formula, (Exists, Forall)):
        return free_vars(formula.child) - {formula.var}
    raise TypeError(f"not an FO formula: {formula!r}")


def quantifier_rank(formula: FOFormula) -> int:
    if isinstance(formula, (PropAtom, EdgeAtom, Eq)):
        return 0
    if isinstance(formula, FONot):
        return quantifier_rank(formula.child)
    if isinstance(formula, (FOAnd, FOOr)):
        return max(quantifier_rank(formula.left), quantifier_rank(formula.right))
    if isinstance(formula, (Exists, Forall)):
        return quantifier_rank(formula.child) + 1
    raise TypeError(f"not an FO formula: {formula!r}")


def standard_translation(formula: Formula, var: str = "x") -> FOFormula:
    """Embed a modal formula into FO at the given free variable.

    A grade-k modality becomes k nested existentials asserting pairwise
    distinctness, the k edges, and the translated body at each new
    variable; fresh variables are y1, y2, ... in evaluation order.
    """
    counter = itertools.count(1)

    def st(f: Formula, x: str) -> FOFormula:
        if isinstance(f, Top):
            return Eq(x, x)
        if isinstance(f, Bot):
            return FONot(Eq(x, x))
        if isinstance(f, Prop):
            return PropAtom(f.name, x)
        if isinstance(f, Not):
            return FONot(st(f.child, x))
        if isinstance(f, And):
            return FOAnd(st(f.left, x), st(f.right, x))
        if isinstance(f, Or):
            return FOOr(st(f.left, x), st(f.right, x))
        if isinstance(f, Diamond):
            ys = [f"y{next(counter)}" for _ in range(f.grade)]
            parts: list[FOFormula] = []
            for i in range(len(ys)):
                for j in range(i + 1, len(ys)):
                    parts.append(FONot(Eq(ys[i], ys[j])))
            parts.extend(EdgeAtom(f.agent, x, y) for y in ys)
            parts.extend(st(f.child, y) for y in ys)
            body = fo_and_all(parts)
            for y in reversed(ys):
                body = Exists(y, body)
            return body
        raise TypeError(f"not a formula: {f!r}")

    return st(formula, var)


def fo_eval(m: KripkeStructure, assignment: Mapping[str, int], formula: FOFormula) -> bool:
    """Tarskian evaluation; quantifiers range over all worlds."""
    env = dict(assignment)
    for var, world in env.items():
        if not 0 <= world < m.world_count:
            raise EvaluationError(f"assignment {var}={world} out of range")

    def lookup(var: str) -> int:
        try:
            return env[var]
        except KeyError:
            raise EvaluationError(f"unassigned free variable {var!r}") from None

    def ev(f: FOFormula) -> bool:
        if isinstance(f, PropAtom):
            if f.prop not in m.signature.props:
                raise SignatureError(f"unknown proposition {f.prop!r}")
            return lookup(f.var) in m.valuation[f.prop]
        if isinstance(f, EdgeAtom):
            if f.agent not in m.signature.agents:
                raise SignatureError(f"unknown agent {f.agent!r}")
            return (lookup(f.src), lookup(f.dst)) in m.edges[f.agent]
        if isinstance(f, Eq):
            return lookup(f.left) == lookup(f.right)
        if isinstance(f, FONot):
            return not ev(f.child)
        if isinstance(f, FOAnd):
            return ev(f.left) and ev(f.right)
        if isinstance(f, FOOr):
            return ev(f.left) or ev(f.right)
        if isinstance(f, (Exists, Forall)):
            had = f.var in env
            old = env.get(f.var)
            hit = False
            want = isinstance(f, Exists)
            for w in m.worlds():
                env[f.var] = w
                if ev(f.child) == want:
                    hit = True
                    break
            if had:
                env[f.var] = old
            else:
                env.pop(f.var, None)
            return hit if want else not hit
        raise TypeError(f"not an FO formula: {f!r}")

    return ev(formula)


def fo_q_equivalent(
    a: PointedStructure,
    b: PointedStructure,
    q: int,
    *,
    max_states: int = 2_000_000,
) -> bool:
    """Round-bounded back-and-forth equivalence of the two pointed structures.

    Positions extend the initial one-pebble tuples; the base case compares
    the full atomic diagram of the assigned tuples (propositions, edge atoms
    in both directions including self-loops, and equalities).  Exponential in
    q, hence guarded.
    """
    if a.signature != b.signature:
        raise SignatureError("the two structures carry different signatures")
    if q < 0:
        raise ValueError("q must be nonnegative")
    ka, kb = a.structure, b.structure
    budget = [max_states]
    memo: dict = {}

    def partial_isomorphism(av: tuple[int, ...], bv: tuple[int, ...]) -> bool:
        n = len(av)
        for i in range(n):
            for p in ka.signature.props:
                if (av[i] in ka.valuation[p]) != (bv[i] in kb.valuation[p]):
                    return False
            for j in range(n):
                if (av[i] == av[j]) != (bv[i] == bv[j]):
                    return False
                for agent in ka.signature.agents:
                    if ((av[i], av[j]) in ka.edges[agent]) != (
                        (bv[i], bv[j]) in kb.edges[agent]
                    ):
                        return False
        return True

    def play(av: tuple[int, ...], bv: tuple[int, ...], rounds: int) -> bool:
        key = (av, bv, rounds)
        cached = memo.get(key)
        if cached is not None:
            return cached
        budget[0] -= 1
        if budget[0] < 0:
            raise ResourceLimitError("back-and-forth search exceeded its budget")
        if not partial_isomorphism(av, bv):
            memo[key] = False
            return False
        if rounds == 0:
            memo[key] = True
            return True
        result = all(
            any(play(av + (wa,), bv + (wb,), rounds - 1) for wb in kb.worlds())
            for wa in ka.worlds()
        ) and all(
            any(play(av + (wa,), bv + (wb,), rounds - 1) for wa in ka.worlds())
            for wb in kb.worlds()
        )
        memo[key] = result
        return result

    return play((a.point,), (b.point,), q)


def is_l_local(formula: FOFormula, target: PointedStructure, radius: int) -> bool:
    """Instance-level locality: truth is unchanged by restriction to the
    radius-neighbourhood of the point.  Not a decision procedure for
    locality of the formula itself.

    The formula is evaluated with its one free variable at the point;
    sentences are accepted and simply evaluated on both structures.
    """
    fv = sorted(free_vars(formula))
    if len(fv) > 1:
        raise EvaluationError(
            f"locality check needs at most one free variable, got {fv}"
        )
    m = target.structure
    assignment = {fv[0]: target.point} if fv else {}
    full = fo_eval(m, assignment, formula)
    sub = restrict(m, neighborhood(m, target.point, radius), point=target.point)
    assert isinstance(sub, PointedStructure)
    local_assignment = {fv[0]: sub.point} if fv else {}
    local = fo_eval(sub.structure, local_assignment, formula)
    return full == local


def locality_padding(
    target: PointedStructure, radius: int, q: int
) -> tuple[PointedStructure, PointedStructure]:
    """The padded pair: q spare copies of the structure and of its local part
    around both a full middle and a localized middle, pointed in the middle.

    With q = 0 this degenerates to the structure itself and its restriction.
    """
    if radius < 0 or q < 0:
        raise ValueError("radius and q must be nonnegative")
    m, w = target.structure, target.point
    local = restrict(m, neighborhood(m, w, radius), point=w)
    assert isinstance(local, PointedStructure)
    spare_full = copies(m, q)
    spare_local = copies(local.structure, q)
    padded_full = disjoint_union([spare_full, m, spare_local], point_from=(1, w))
    padded_local = disjoint_union(
        [spare_full, local.structure, spare_local], point_from=(1, local.point)
    )
    assert isinstance(padded_full, PointedStructure)
    assert isinstance(padded_local, PointedStructure)
    return padded_full, padded_local


# ---------------------------------------------------------------------------
# Upgrading pipeline.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepReport:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""


@dataclass(frozen=True)
class UpgradeReport:
    """Step-by-step record of the locality/unravelling agreement chain."""

    modal_formula: Formula
    fo_formula: FOFormula
    quantifier_rank: int
    radius: int
    cap: int
    cap_source: str
    fo_check_radius: int
    steps: tuple[StepReport, ...]
    notes: tuple[str, ...]

    @property
    def holds(self) -> bool:
        return all(step.status != "fail" for step in self.steps)

    def to_json_dict(self) -> dict:
        return {
            "formula": format_formula(self.modal_formula),
            "fo_formula": format_fo_formula(self.fo_formula),
            "quantifier_rank": self.quantifier_rank,
            "radius": self.radius,
            "cap": self.cap,
            "cap_source": self.cap_source,
            "fo_check_radius": self.fo_check_radius,
            "holds": self.holds,
            "steps": [
                {"name": s.name, "status": s.status, "detail": s.detail}
                for s in self.steps
            ],
            "notes": list(self.notes),
        }

    def render_text(self) -> str:
        lines = [
            f"formula: {format_formula(self.modal_formula)}",
            f"quantifier rank: {self.quantifier_rank}   radius: {self.radius}   "
            f"cap: {self.cap} ({self.cap_source})",
        ]
        for step in self.steps:
            suffix = f"  [{step.detail}]" if step.detail else ""
            lines.append(f"  {step.status.upper():7s} {step.name}{suffix}")
        lines.extend(f"note: {n}" for n in self.notes)
        lines.append(f"overall: {'PASS' if self.holds else 'FAIL'}")
        return "\n".join(lines)


def _unravel_size(pointed: PointedStructure, depth: int) -> int:
    m = pointed.structure
    weights = {pointed.point: 1}
    total = 0
    for _ in range(depth):
        total += sum(weights.values())
        nxt: dict[int, int] = {}
        for u, n in weights.items():
            for agent in m.signature.agents:
                for v in m.successors(agent, u):
                    nxt[v] = nxt.get(v, 0) + n
        weights = nxt
    return total + m.world_count


def upgrade_pipeline(
    modal_formula: Formula,
    a: PointedStructure,
    b: PointedStructure,
    *,
    cap: Optional[int] = None,
    radius_override: Optional[int] = None,
    fo_check_radius: int = 1,
    cap_search_size_bound: int = 6,
    max_worlds: int = 20_000,
    max_states: int = 2_000_000,
) -> UpgradeReport:
    """Check every instance-checkable step of the agreement chain.

    Translates the modal formula, derives the locality radius from its
    quantifier rank (2^q - 1, overridable), unravels both inputs one level
    beyond the radius, and reports: invariance of the translated formula
    under unravelling, full bisimilarity of the unravellings with their
    originals, rooted-tree-likeness and instance locality of the
    unravellings, and, when the inputs are equivalent at (cap, radius),
    agreement of the restricted tree parts and of the end-to-end truth
    values.  The bounded back-and-forth check between restrictions runs at
    ``fo_check_radius`` as a cost guard, which the report documents.
    """
    if a.signature != b.signature:
        raise SignatureError("the two structures carry different signatures")
    fo = standard_translation(modal_formula)
    q = quantifier_rank(fo)
    radius = (2 ** q - 1) if radius_override is None else radius_override
    notes = [f"locality radius = 2^{q} - 1 = {2 ** q - 1}"]
    if radius_override is not None:
        notes.append(f"radius overridden to {radius}")

    if cap is None:
        search_radius = min(radius, fo_check_radius)
        search = find_cap(q, search_radius, a.signature, cap_search_size_bound)
        cap = search.cap
        cap_source = (
            f"searched at q={q}, radius={search_radius}, "
            f"size bound {cap_search_size_bound}"
        )
        if search_radius != radius:
            notes.append(
                f"cap search radius capped to {search_radius} as a cost guard"
            )
    else:
        cap_source = "supplied"

    depth = radius + 1
    for side, name in ((a, "left"), (b, "right")):
        size = _unravel_size(side, depth)
        if size > max_worlds:
            raise ResourceLimitError(
                f"unravelling the {name} input to depth {depth} needs {size} worlds"
            )
    a_star = unravel(a, depth)
    b_star = unravel(b, depth)

    steps: list[StepReport] = []

    def record(name: str, ok: bool, detail: str = ""):
        steps.append(StepReport(name, "pass" if ok else "fail", detail))

    var = sorted(free_vars(fo))[0]
    vals = {}
    for label, pointed in (
        ("left", a), ("right", b), ("left*", a_star), ("right*", b_star),
    ):
        vals[label] = fo_eval(pointed.structure, {var: pointed.point}, fo)

    record(
        "unravelling is fully bisimilar (left)",
        bool(full_graded_bisimilarity(a, a_star)),
    )
    record(
        "unravelling is fully bisimilar (right)",
        bool(full_graded_bisimilarity(b, b_star)),
    )
    record(
        "translated formula invariant under unravelling (left)",
        vals["left"] == vals["left*"],
        f"{vals['left']} vs {vals['left*']}",
    )
    record(
        "translated formula invariant under unravelling (right)",
        vals["right"] == vals["right*"],
        f"{vals['right']} vs {vals['right*']}",
    )
    record(
        "unravelling rooted-tree-like (left)",
        bool(is_rooted_treelike(a_star.structure, a_star.point, radius)),
    )
    record(
        "unravelling rooted-tree-like (right)",
        bool(is_rooted_treelike(b_star.structure, b_star.point, radius)),
    )
    record(
        "translated formula local on unravelling (left)",
        is_l_local(fo, a_star, radius),
    )
    record(
        "translated formula local on unravelling (right)",
        is_l_local(fo, b_star, radius),
    )

    equivalent = bool(bounded_equivalence(a, b, cap, radius))
    steps.append(
        StepReport(
            f"inputs equivalent at cap {cap}, depth {radius}",
            "pass" if equivalent else "skipped",
            "" if equivalent else "hypothesis not established; remaining steps vacuous",
        )
    )

    def restricted(pointed: PointedStructure, r: int) -> PointedStructure:
        sub = restrict(
            pointed.structure,
            neighborhood(pointed.structure, pointed.point, r),
            point=pointed.point,
        )
        assert isinstance(sub, PointedStructure)
        return sub

    if equivalent:
        a_res = restricted(a_star, radius)
        b_res = restricted(b_star, radius)
        va = fo_eval(a_res.structure, {var: a_res.point}, fo)
        vb = fo_eval(b_res.structure, {var: b_res.point}, fo)
        record(
            "restricted tree parts agree on the translated formula",
            va == vb,
            f"{va} vs {vb}",
        )
        try:
            fo_eq = fo_q_equivalent(
                restricted(a_star, fo_check_radius),
                restricted(b_star, fo_check_radius),
                q,
                max_states=max_states,
            )
            record(
                f"restrictions to radius {fo_check_radius} agree up to "
                f"quantifier rank {q}",
                fo_eq,
            )
        except ResourceLimitError:
            steps.append(
                StepReport(
                    f"restrictions to radius {fo_check_radius} agree up to "
                    f"quantifier rank {q}",
                    "skipped",
                    "back-and-forth budget exceeded",
                )
            )
        record(
            "end-to-end truth values agree",
            vals["left"] == vals["right"],
            f"{vals['left']} vs {vals['right']}",
        )
    else:
        steps.append(StepReport("restricted tree parts agree on the translated formula", "skipped"))
        steps.append(StepReport("end-to-end truth values agree", "skipped"))
    notes.append(
        f"bounded back-and-forth between restrictions checked at radius "
        f"{fo_check_radius} (cost guard)"
    )

    return UpgradeReport(
        modal_formula,
        fo,
        q,
        radius,
        cap,
        cap_source,
        fo_check_radius,
        tuple(steps),
        tuple(notes),
    )


# ---------------------------------------------------------------------------
# Empirical cap search over rooted trees.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapCounterexample:
    cap: int
    left: PointedStructure
    right: PointedStructure


@dataclass(frozen=True)
class CapSearchResult:
    """Least cap with no counterexample in the examined sample.

    Evidence is sample-relative: the counterexample log per smaller cap
    shows why each was rejected, and the log at the returned cap is empty.
    """

    cap: int
    quantifier_rank: int
    radius: int
    size_bound: int
    structures_examined: int
    exhaustive: bool
    counterexamples: tuple[CapCounterexample, ...]

    def to_json_dict(self) -> dict:
        return {
            "cap": self.cap,
            "quantifier_rank": self.quantifier_rank,
            "radius": self.radius,
            "size_bound": self.size_bound,
            "structures_examined": self.structures_examined,
            "exhaustive": self.exhaustive,
            "counterexamples": [
                {
                    "cap": c.cap,
                    "left": dump_structure(c.left, name="left"),
                    "right": dump_structure(c.right, name="right"),
                }
                for c in self.counterexamples
            ],
        }


def _tree_terms(sig: Signature, depth: int, size_bound: int, budget: int):
    """Canonical rooted-tree terms: (atoms, sorted tuple of (agent, term))."""
    atom_options = sorted(
        itertools.product((False, True), repeat=len(sig.props))
    )

    terms_by_depth: list[list] = []
    sizes: dict = {}

    def term_size(term) -> int:
        return sizes[term]

    for d in range(depth + 1):
        options = []
        if d > 0:
            options = [
                (ai, t)
                for ai in range(len(sig.agents))
                for t in terms_by_depth[d - 1]
            ]
            options.sort(key=lambda o: (o[0], sizes[o[1]], o[1]))
        level = []

        def child_seqs(budget_nodes: int, start: int):
            yield ()
            for i in range(start, len(options)):
                child = options[i]
                s = sizes[child[1]]
                if s <= budget_nodes:
                    for rest in child_seqs(budget_nodes - s, i):
                        yield (child,) + rest

        for atoms in atom_options:
            for children in child_seqs(size_bound - 1, 0):
                term = (atoms, children)
                total = 1 + sum(sizes[t] for _, t in children)
                if term not in sizes:
                    sizes[term] = total
                level.append(term)
        # terms of depth < d re-appear (empty extensions); dedupe
        seen = set()
        unique = []
        for term in level:
            if term not in seen:
                seen.add(term)
                unique.append(term)
        terms_by_depth.append(unique)

    final = sorted(terms_by_depth[depth], key=lambda t: (sizes[t], t))
    exhausted = True
    if len(final) > budget:
        final = final[:budget]
        exhausted = False
    return final, sizes, exhausted


def _random_tree_term(rng, sig: Signature, depth: int, size_bound: int):
    """One random canonical tree term within the depth and node bounds."""
    atom_options = sorted(itertools.product((False, True), repeat=len(sig.props)))
    budget = [rng.randint(1, size_bound)]

    def grow(level: int):
        budget[0] -= 1
        atoms = rng.choice(atom_options)
        children = []
        if level > 0:
            while budget[0] > 0 and rng.random() < 0.6:
                children.append((rng.randrange(len(sig.agents)), grow(level - 1)))
        return (atoms, tuple(sorted(children)))

    return grow(depth)


def _materialize_term(sig: Signature, term) -> PointedStructure:
    edges: dict[str, set] = {a: set() for a in sig.agents}
    valuation: dict[str, set] = {p: set() for p in sig.props}
    counter = [0]

    def build(node) -> int:
        atoms, children = node
        me = counter[0]
        counter[0] += 1
        for prop, holds in zip(sig.props, atoms):
            if holds:
                valuation[prop].add(me)
        for agent_idx, child in children:
            child_id = build(child)
            edges[sig.agents[agent_idx]].add((me, child_id))
        return me

    build(term)
    return PointedStructure(
        KripkeStructure(sig, counter[0], edges, valuation), 0
    )


def find_cap(
    q: int,
    radius: int,
    sig: Signature,
    size_bound: int,
    *,
    enumeration_budget: int = 5000,
    sample_count: int = 200,
    seed: int = 0,
    max_states: int = 2_000_000,
) -> CapSearchResult:
    """Least cap making bounded equivalence refine rank-q FO equivalence on
    the examined rooted trees of depth <= radius within the size bound.

    Trees are enumerated canonically; past the enumeration budget the
    smallest structures are kept and ``sample_count`` seeded random trees
    are mixed in, and the result is flagged non-exhaustive.  This is
    empirical evidence over the sample only, never a proof: it reports the
    least cap consistent with the examined structures.
    """
    if q < 0 or radius < 0 or size_bound < 1:
        raise ValueError("q, radius must be nonnegative and size_bound positive")
    terms, _sizes, exhausted = _tree_terms(sig, radius, size_bound, enumeration_budget)
    if not exhausted and sample_count > 0:
        rng = _random_module.Random(seed)
        extra = {_random_tree_term(rng, sig, radius, size_bound) for _ in range(sample_count)}
        known = set(terms)
        terms = terms + sorted(extra - known)
    structures = [_materialize_term(sig, t) for t in terms]

    # FO classes do not depend on the cap: classify once, by representatives.
    fo_class = [0] * len(structures)
    reps: list[int] = []
    for idx, s in enumerate(structures):
        for cls, r in enumerate(reps):
            if fo_q_equivalent(s, structures[r], q, max_states=max_states):
                fo_class[idx] = cls
                break
        else:
            fo_class[idx] = len(reps)
            reps.append(idx)

    log: list[CapCounterexample] = []
    for cap in range(0, size_bound + 1):
        groups: dict = {}
        for idx, s in enumerate(structures):
            d = type_descriptor(s.structure, s.point, cap, radius)
            groups.setdefault(d, []).append(idx)
        failures = []
        for members in groups.values():
            classes_seen: dict[int, int] = {}
            for idx in members:
                classes_seen.setdefault(fo_class[idx], idx)
            if len(classes_seen) > 1:
                picked = sorted(classes_seen.values())[:2]
                failures.append((picked[0], picked[1]))
        if not failures:
            return CapSearchResult(
                cap,
                q,
                radius,
                size_bound,
                len(structures),
                exhausted,
                tuple(log),
            )
        for i, j in failures:
            log.append(CapCounterexample(cap, structures[i], structures[j]))
    raise AssertionError(
        "no cap within the size bound separated the sample; unreachable for trees"
    )


# ---------------------------------------------------------------------------
# FO concrete syntax.
# ---------------------------------------------------------------------------


def format_fo_formula(formula: FOFormula) -> str:
    if isinstance(formula, PropAtom):
        return f"{formula.prop}({formula.var})"
    if isinstance(formula, EdgeAtom):
        return f"E{formula.agent}({formula.src},{formula.dst})"
    if isinstance(formula, Eq):
        return f"{formula.left} = {formula.right}"
    if isinstance(formula, FONot):
        return "!" + format_fo_formula(formula.child)
    if isinstance(formula, FOAnd):
        return f"({format_fo_formula(formula.left)} & {format_fo_formula(formula.right)})"
    if isinstance(formula, FOOr):
        return f"({format_fo_formula(formula.left)} | {format_fo_formula(formula.right)})"
    if isinstance(formula, Exists):
        return f"E {formula.var} {format_fo_formula(formula.child)}"
    if isinstance(formula, Forall):
        return f"A {formula.var} {format_fo_formula(formula.child)}"
    raise TypeError(f"not an FO formula: {formula!r}")


_FO_TOKEN = re.compile(r"\s*(?:([A-Za-z][A-Za-z0-9_]*)|([()&|!,=]))")


class _FOParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            match = _FO_TOKEN.match(text, pos)
            if match is None:
                rest = text[pos:].lstrip()
                if not rest:
                    break
                raise ParseError(f"unexpected character {rest[0]!r}", column=pos + 1)
            if match.group(1):
                self.tokens.append(("ident", match.group(1), match.start(1)))
            else:
                self.tokens.append(("punct", match.group(2), match.start(2)))
            pos = match.end()
        self.pos = 0

    def error(self, message: str):
        column = (
            self.tokens[self.pos][2] + 1
            if self.pos < len(self.tokens)
            else len(self.text) + 1
        )
        raise ParseError(message, column=column)

    def peek(self, offset: int = 0):
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, value: str):
        tok = self.take()
        if tok[1] != value:
            self.error(f"expected {value!r}, got {tok[1]!r}")

    def formula(self) -> FOFormula:
        tok = self.take()
        kind, value, _ = tok
        if kind == "punct" and value == "!":
            return FONot(self.formula())
        if kind == "punct" and value == "(":
            left = self.formula()
            op = self.take()
            if op[1] == ")":
                return left
            if op[1] not in "&|":
                self.error(f"expected '&', '|' or ')', got {op[1]!r}")
            right = self.formula()
            self.expect(")")
            return FOAnd(left, right) if op[1] == "&" else FOOr(left, right)
        if kind == "ident":
            nxt = self.peek()
            if value in ("E", "A") and nxt is not None and nxt[0] == "ident":
                var = self.take()[1]
                return (Exists if value == "E" else Forall)(var, self.formula())
            if nxt is not None and nxt[1] == "(":
                self.take()
                first = self.take()
                if first[0] != "ident":
                    self.error("expected a variable")
                after = self.take()
                if after[1] == ")":
                    return PropAtom(value, first[1])
                if after[1] == ",":
                    second = self.take()
                    if second[0] != "ident":
                        self.error("expected a variable")
                    self.expect(")")
                    if not value.startswith("E") or len(value) < 2:
                        self.error(f"edge atoms look like E<agent>(u,v), got {value!r}")
                    return EdgeAtom(value[1:], first[1], second[1])
                self.error(f"expected ',' or ')', got {after[1]!r}")
            if nxt is not None and nxt[1] == "=":
                self.take()
                other = self.take()
                if other[0] != "ident":
                    self.error("expected a variable after '='")
                return Eq(value, other[1])
            self.error(f"unexpected name {value!r}")
        self.pos -= 1
        self.error(f"unexpected token {value!r}")
        raise AssertionError  # unreachable


def parse_fo_formula(text: str) -> FOFormula:
    parser = _FOParser(text)
    result = parser.formula()
    if parser.peek() is not None:
        parser.error("trailing input after formula")
    return result
