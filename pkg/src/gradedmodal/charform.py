"""Characteristic formulas, type catalogs, normal forms, separators.

The characteristic formula of a pointed structure at a cap/depth bound pins
down its equivalence class: level 0 is the full atomic description; each
further level conjoins, per agent and per equivalence class of successors,
grade assertions up to the capped count and negated grades above it.

Successor classes alone do not pin the class down: a point whose class has
no members among some agent's successors is not mentioned at all, so e.g. a
successor-free point would get a trivially true formula.  Three completions
are exposed:

* default: one conjunct per agent asserting that every successor falls into
  one of the realized classes (a negated grade-1 modality over the negated
  disjunction of class formulas); sound and complete with no catalog;
* catalog mode: an explicit negated grade-1 conjunct for every catalog type
  with zero successor count, as a completion relative to a full catalog;
* bare mode (``exclude_unrealized=False``): successor classes only.  This
  variant does not define the class and is exposed for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

from .equivalence import atomic_history, bounded_equivalence, refine, type_descriptor
from .errors import GradedModalError, ResourceLimitError, SignatureError
from .kripke import KripkeStructure, PointedStructure, Signature
from .semantics import satisfies
from .syntax import (
    And,
    Diamond,
    Formula,
    FragmentBound,
    Not,
    Or,
    Prop,
    and_all,
    format_formula,
    in_fragment,
    nesting_depth,
    or_all,
)


def _atomic_description(sig: Signature, atoms: tuple[bool, ...]) -> Formula:
    literals: list[Formula] = []
    for prop, holds in zip(sig.props, atoms):
        literals.append(Prop(prop) if holds else Not(Prop(prop)))
    return and_all(literals)


def _grade_conjuncts(agent: str, capped: int, cap: int, child: Formula) -> list[Formula]:
    conjuncts: list[Formula] = []
    for k in range(1, capped + 1):
        conjuncts.append(Diamond(agent, k, child))
    for k in range(capped + 1, cap + 1):
        conjuncts.append(Not(Diamond(agent, k, child)))
    return conjuncts


def characteristic_formula(
    target: PointedStructure,
    cap: int,
    depth: int,
    *,
    catalog: Optional["TypeCatalog"] = None,
    exclude_unrealized: bool = True,
) -> Formula:
    """The formula defining the cap/depth equivalence class of the target.

    Conjuncts are deduplicated per equivalence class of successors, one
    canonical representative per class.  See the module docstring for the
    three completion modes.
    """
    if cap < 0 or depth < 0:
        raise ValueError("cap and depth must be nonnegative")
    m = target.structure
    sig = m.signature
    if catalog is not None:
        if catalog.signature != sig:
            raise SignatureError("catalog signature differs from the structure's")
        if catalog.cap != cap or catalog.depth < depth:
            raise ValueError("catalog bounds do not cover the requested bounds")
        return _characteristic_via_catalog(target, cap, depth, catalog)

    history = atomic_history(m, cap)
    for _ in range(depth):
        history = refine(history)

    memo: dict[tuple[int, int], Formula] = {}

    def class_formula(level: int, cls: int) -> Formula:
        key = (level, cls)
        cached = memo.get(key)
        if cached is not None:
            return cached
        rep = min(w for w in m.worlds() if history.levels[level][w] == cls)
        atoms = tuple(rep in m.valuation[p] for p in sig.props)
        if level == 0:
            formula = _atomic_description(sig, atoms)
        else:
            conjuncts = [class_formula(level - 1, history.levels[level - 1][rep])]
            for agent in sig.agents:
                counts: dict[int, int] = {}
                for v in m.successors(agent, rep):
                    child_cls = history.levels[level - 1][v]
                    counts[child_cls] = counts.get(child_cls, 0) + 1
                realized = sorted(counts)
                for child_cls in realized:
                    child = class_formula(level - 1, child_cls)
                    capped = min(counts[child_cls], cap)
                    conjuncts.extend(_grade_conjuncts(agent, capped, cap, child))
                if exclude_unrealized and cap >= 1:
                    body = or_all([class_formula(level - 1, c) for c in realized])
                    conjuncts.append(Not(Diamond(agent, 1, Not(body))))
            formula = and_all(conjuncts)
        memo[key] = formula
        return formula

    return class_formula(depth, history.levels[depth][target.point])


def _characteristic_via_catalog(
    target: PointedStructure, cap: int, depth: int, catalog: "TypeCatalog"
) -> Formula:
    m = target.structure
    sig = m.signature
    level_descs = [
        [type_descriptor(m, w, cap, lvl) for w in m.worlds()] for lvl in range(depth + 1)
    ]

    def world_formula(level: int, world: int) -> Formula:
        if level == 0:
            return catalog.formula_for(0, level_descs[0][world])
        conjuncts = [world_formula(level - 1, world)]
        for agent in sig.agents:
            counts: dict = {}
            for v in m.successors(agent, world):
                d = level_descs[level - 1][v]
                counts[d] = counts.get(d, 0) + 1
            for d in catalog.descriptors(level - 1):
                child = catalog.formula_for(level - 1, d)
                capped = min(counts.get(d, 0), cap)
                if capped == 0:
                    if cap >= 1:
                        conjuncts.append(Not(Diamond(agent, 1, child)))
                else:
                    conjuncts.extend(_grade_conjuncts(agent, capped, cap, child))
        return and_all(conjuncts)

    return world_formula(depth, target.point)


@dataclass(frozen=True)
class TypeEntry:
    type_id: int
    formula: Formula
    model: PointedStructure


@dataclass(frozen=True)
class TypeCatalog:
    """All equivalence types at a bound, with defining formulas and models.

    Entries are pairwise inequivalent and every pointed structure of the
    signature satisfies exactly one entry formula at the bound.  Internal
    per-level descriptor/formula tables back the catalog completion mode of
    ``characteristic_formula``.
    """

    signature: Signature
    cap: int
    depth: int
    entries: tuple[TypeEntry, ...]
    level_descriptors: tuple[tuple, ...]
    level_formulas: tuple[tuple[Formula, ...], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def descriptors(self, level: int):
        return self.level_descriptors[level]

    def formula_for(self, level: int, descriptor) -> Formula:
        idx = self.level_descriptors[level].index(descriptor)
        return self.level_formulas[level][idx]

    def to_json_dict(self) -> dict:
        from .kripke import dump_structure

        return {
            "cap": self.cap,
            "depth": self.depth,
            "agents": list(self.signature.agents),
            "props": list(self.signature.props),
            "entries": [
                {
                    "type_id": e.type_id,
                    "formula": format_formula(e.formula),
                    "model": dump_structure(e.model, name=f"type{e.type_id}"),
                }
                for e in self.entries
            ],
        }


def catalog_size(sig: Signature, cap: int, depth: int) -> int:
    """Number of types at the bound, computable without materializing them."""
    count = 2 ** len(sig.props)
    base = 2 ** len(sig.props)
    for _ in range(depth):
        count = base * (cap + 1) ** (len(sig.agents) * count)
    return count


def _lift_descriptor(atoms: tuple, count_maps: list[dict], level: int, cap: int):
    """Assemble the canonical descriptor for a root with the given children.

    ``count_maps`` holds, per agent, the map from child descriptors at
    ``level - 1`` to their (positive, capped) multiplicities.  The embedded
    lower-level descriptor is recomputed by truncating the children.
    """
    if level == 0:
        return atoms
    body = tuple(tuple(sorted(cm.items())) for cm in count_maps)
    if level == 1:
        return (atoms, body)
    truncated = []
    for cm in count_maps:
        t: dict = {}
        for d, n in cm.items():
            td = d[0]
            t[td] = min(cap, t.get(td, 0) + n)
        truncated.append({d: n for d, n in t.items() if n > 0})
    return (_lift_descriptor(atoms, truncated, level - 1, cap), body)


def _realize(sig: Signature, atoms: tuple, children: list[tuple[str, PointedStructure]]) -> PointedStructure:
    """A tree with the given root label and child subtrees."""
    world_count = 1 + sum(c.structure.world_count for _, c in children)
    edges: dict[str, set] = {a: set() for a in sig.agents}
    valuation: dict[str, set] = {p: set() for p in sig.props}
    for prop, holds in zip(sig.props, atoms):
        if holds:
            valuation[prop].add(0)
    offset = 1
    for agent, child in children:
        sub = child.structure
        edges[agent].add((0, offset + child.point))
        for ag in sig.agents:
            edges[ag].update((offset + u, offset + v) for u, v in sub.edges[ag])
        for p in sig.props:
            valuation[p].update(offset + w for w in sub.valuation[p])
        offset += sub.world_count
    return PointedStructure(KripkeStructure(sig, world_count, edges, valuation), 0)


def enumerate_types(
    sig: Signature,
    cap: int,
    depth: int,
    *,
    max_entries: int = 5000,
    verify: bool = True,
) -> TypeCatalog:
    """Materialize every type at the bound with a formula and a canonical model.

    The catalog size is computed up front and guarded before any
    materialization.  Canonical models realize a type as a tree with exactly
    n children per child type, n being the capped count.  With ``verify``
    the pairwise inequivalence of all canonical models is re-checked by
    refining their disjoint union.
    """
    if cap < 0 or depth < 0:
        raise ValueError("cap and depth must be nonnegative")
    size = catalog_size(sig, cap, depth)
    if size > max_entries:
        raise ResourceLimitError(
            f"catalog would hold {size} entries, above the guard of {max_entries}"
        )

    atom_options = sorted(product((False, True), repeat=len(sig.props)))
    level_descs: list[list] = [list(atom_options)]
    level_models: list[dict] = [
        {atoms: _realize(sig, atoms, []) for atoms in atom_options}
    ]
    level_formulas: list[dict] = [
        {atoms: _atomic_description(sig, atoms) for atoms in atom_options}
    ]

    for level in range(1, depth + 1):
        prev = level_descs[-1]
        descs = []
        models: dict = {}
        formulas: dict = {}
        count_choices = list(product(range(cap + 1), repeat=len(prev)))
        for atoms in atom_options:
            for combo in product(count_choices, repeat=len(sig.agents)):
                count_maps = [
                    {prev[i]: n for i, n in enumerate(per_agent) if n > 0}
                    for per_agent in combo
                ]
                desc = _lift_descriptor(atoms, count_maps, level, cap)
                children = []
                conjuncts = [level_formulas[level - 1][desc[0]]]
                for agent, cm in zip(sig.agents, count_maps):
                    for d in prev:
                        child_formula = level_formulas[level - 1][d]
                        n = cm.get(d, 0)
                        if n == 0:
                            if cap >= 1:
                                conjuncts.append(Not(Diamond(agent, 1, child_formula)))
                        else:
                            conjuncts.extend(_grade_conjuncts(agent, n, cap, child_formula))
                            children.extend(
                                (agent, level_models[level - 1][d]) for _ in range(n)
                            )
                descs.append(desc)
                models[desc] = _realize(sig, atoms, children)
                formulas[desc] = and_all(conjuncts)
        order = sorted(range(len(descs)), key=lambda i: descs[i])
        descs = [descs[i] for i in order]
        level_descs.append(descs)
        level_models.append(models)
        level_formulas.append(formulas)

    final = level_descs[depth]
    entries = tuple(
        TypeEntry(i, level_formulas[depth][d], level_models[depth][d])
        for i, d in enumerate(final)
    )
    catalog = TypeCatalog(
        sig,
        cap,
        depth,
        entries,
        tuple(tuple(level) for level in level_descs),
        tuple(
            tuple(level_formulas[lvl][d] for d in level_descs[lvl])
            for lvl in range(depth + 1)
        ),
    )
    if verify:
        _verify_catalog(catalog)
    return catalog


def _verify_catalog(catalog: TypeCatalog):
    from .kripke import disjoint_union, part_offsets

    models = [e.model.structure for e in catalog.entries]
    if len(models) < 2:
        return
    arena = disjoint_union(models)
    offsets = part_offsets(models)
    history = atomic_history(arena, catalog.cap, offsets)
    for _ in range(catalog.depth):
        history = refine(history)
    final = history.levels[-1]
    points = [final[off + e.model.point] for off, e in zip(offsets, catalog.entries)]
    if len(set(points)) != len(points):
        raise GradedModalError("catalog entries are not pairwise inequivalent")


def normal_form(
    formula: Formula,
    cap: int,
    depth: int,
    *,
    signature: Optional[Signature] = None,
    catalog: Optional[TypeCatalog] = None,
    max_entries: int = 5000,
) -> Formula:
    """Equivalent disjunction of the type formulas whose models satisfy it.

    The empty disjunction is ``false``.  Requires the input to lie inside
    the cap/depth fragment.  Without an explicit signature or catalog, the
    signature is inferred from the symbols occurring in the formula.
    """
    if not in_fragment(formula, FragmentBound(cap, depth)):
        raise ValueError("formula lies outside the requested fragment")
    if catalog is None:
        if signature is None:
            signature = inferred_signature(formula)
        catalog = enumerate_types(signature, cap, depth, max_entries=max_entries)
    disjuncts = [e.formula for e in catalog.entries if satisfies(e.model, formula)]
    return or_all(disjuncts)


def inferred_signature(formula: Formula) -> Signature:
    """The minimal signature carrying the formula's agents and propositions."""
    agents: set[str] = set()
    props: set[str] = set()

    def walk(f: Formula):
        if isinstance(f, Prop):
            props.add(f.name)
        elif isinstance(f, Not):
            walk(f.child)
        elif isinstance(f, (And, Or)):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, Diamond):
            agents.add(f.agent)
            walk(f.child)

    walk(formula)
    return Signature(tuple(sorted(agents)), tuple(sorted(props)))


def _conjuncts(formula: Formula) -> list[Formula]:
    if isinstance(formula, And):
        return _conjuncts(formula.left) + _conjuncts(formula.right)
    return [formula]


def distinguishing_formula(
    a: PointedStructure, b: PointedStructure, cap: int, depth: int
) -> Optional[Formula]:
    """A fragment formula true at ``a`` and false at ``b``, if one exists.

    Returns None when the points are equivalent at the bound.  Otherwise
    the characteristic formula of ``a`` is pruned down greedily: negated
    conjuncts are preferred, deeper conjuncts first, ties broken by the
    printed form, and the first conjunct that ``b`` falsifies wins.
    """
    if bounded_equivalence(a, b, cap, depth):
        return None
    chi = characteristic_formula(a, cap, depth)
    candidates = sorted(
        _conjuncts(chi),
        key=lambda f: (
            0 if isinstance(f, Not) else 1,
            -nesting_depth(f),
            format_formula(f),
        ),
    )
    for conjunct in candidates:
        if not satisfies(b, conjunct):
            return conjunct
    raise AssertionError("inequivalent points both satisfy the characteristic formula")
