"""Finite Kripke structures and structure-level constructions.

Worlds are dense integer indices 0..n-1 per structure.  Combinators relabel
deterministically (parts in list order; in unravellings the tree part comes
before the continuation copy), so outputs are reproducible bit for bit.
All values are immutable after construction and every operation is a pure
function, so any value may be shared across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Union

from .errors import ParseError, SignatureError

WorldId = int


@dataclass(frozen=True)
class Signature:
    """Ordered agent and proposition names shared by a family of structures."""

    agents: tuple[str, ...] = ()
    props: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "props", tuple(self.props))
        for kind, names in (("agent", self.agents), ("proposition", self.props)):
            for name in names:
                if not isinstance(name, str) or not name:
                    raise SignatureError(f"{kind} names must be nonempty strings, got {name!r}")
            if len(set(names)) != len(names):
                raise SignatureError(f"duplicate {kind} names in {names!r}")


class KripkeStructure:
    """A finite Kripke structure: worlds, per-agent edges, per-prop valuations.

    ``world_count == 0`` is permitted only for the empty aggregate produced by
    ``copies(m, 0)``, which is legal solely as a ``disjoint_union`` operand;
    standalone structures have at least one world.
    """

    __slots__ = ("signature", "world_count", "edges", "valuation", "_succ", "_hash")

    def __init__(
        self,
        signature: Signature,
        world_count: int,
        edges: Mapping[str, Iterable[tuple[int, int]]] | None = None,
        valuation: Mapping[str, Iterable[int]] | None = None,
    ):
        edges = dict(edges or {})
        valuation = dict(valuation or {})
        for agent in edges:
            if agent not in signature.agents:
                raise SignatureError(f"unknown agent {agent!r} in edges")
        for prop in valuation:
            if prop not in signature.props:
                raise SignatureError(f"unknown proposition {prop!r} in valuation")
        if world_count < 0:
            raise ValueError("world_count must be nonnegative")
        norm_edges: dict[str, frozenset[tuple[int, int]]] = {}
        for agent in signature.agents:
            pairs = frozenset((int(u), int(v)) for u, v in edges.get(agent, ()))
            for u, v in pairs:
                if not (0 <= u < world_count and 0 <= v < world_count):
                    raise ValueError(f"edge ({u},{v}) of agent {agent!r} out of range")
            norm_edges[agent] = pairs
        norm_val: dict[str, frozenset[int]] = {}
        for prop in signature.props:
            worlds = frozenset(int(w) for w in valuation.get(prop, ()))
            for w in worlds:
                if not 0 <= w < world_count:
                    raise ValueError(f"world {w} in valuation of {prop!r} out of range")
            norm_val[prop] = worlds
        self.signature = signature
        self.world_count = world_count
        self.edges = MappingProxyType(norm_edges)
        self.valuation = MappingProxyType(norm_val)
        succ: dict[str, tuple[tuple[int, ...], ...]] = {}
        for agent in signature.agents:
            per_world: list[list[int]] = [[] for _ in range(world_count)]
            for u, v in norm_edges[agent]:
                per_world[u].append(v)
            succ[agent] = tuple(tuple(sorted(vs)) for vs in per_world)
        self._succ = succ
        self._hash = None

    def worlds(self) -> range:
        return range(self.world_count)

    def successors(self, agent: str, world: int) -> tuple[int, ...]:
        """All immediate successors of ``world`` along ``agent``'s relation."""
        if agent not in self._succ:
            raise SignatureError(f"unknown agent {agent!r}")
        if not 0 <= world < self.world_count:
            raise ValueError(f"world {world} out of range")
        return self._succ[agent][world]

    def props_of(self, world: int) -> tuple[str, ...]:
        return tuple(p for p in self.signature.props if world in self.valuation[p])

    def edge_count(self) -> int:
        return sum(len(pairs) for pairs in self.edges.values())

    def _key(self):
        return (
            self.signature,
            self.world_count,
            tuple(sorted((a, tuple(sorted(p))) for a, p in self.edges.items())),
            tuple(sorted((p, tuple(sorted(ws))) for p, ws in self.valuation.items())),
        )

    def __eq__(self, other):
        return isinstance(other, KripkeStructure) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return (
            f"KripkeStructure(|W|={self.world_count}, "
            f"agents={list(self.signature.agents)}, props={list(self.signature.props)}, "
            f"edges={self.edge_count()})"
        )


@dataclass(frozen=True)
class PointedStructure:
    """A Kripke structure with a distinguished world for evaluation."""

    structure: KripkeStructure
    point: int

    def __post_init__(self):
        if not 0 <= self.point < self.structure.world_count:
            raise ValueError(f"point {self.point} out of range")

    @property
    def signature(self) -> Signature:
        return self.structure.signature


def _require_same_signature(parts: Iterable[KripkeStructure]) -> Signature:
    sigs = {m.signature for m in parts}
    if len(sigs) != 1:
        raise SignatureError(f"parts carry {len(sigs)} distinct signatures")
    return next(iter(sigs))


def disjoint_union(
    parts: list[KripkeStructure],
    point_from: Optional[tuple[int, int]] = None,
) -> Union[KripkeStructure, PointedStructure]:
    """Disjoint union of ``parts``, relabelled densely in list order.

    ``point_from = (part_index, world)`` points the result at that world's
    relabelled copy.  Parts may be empty aggregates; the union itself must be
    nonempty.
    """
    if not parts:
        raise ValueError("disjoint_union needs at least one part")
    sig = _require_same_signature(parts)
    offsets = []
    total = 0
    for m in parts:
        offsets.append(total)
        total += m.world_count
    if total == 0:
        raise ValueError("disjoint union of empty aggregates is empty")
    edges: dict[str, set[tuple[int, int]]] = {a: set() for a in sig.agents}
    valuation: dict[str, set[int]] = {p: set() for p in sig.props}
    for m, off in zip(parts, offsets):
        for a in sig.agents:
            edges[a].update((u + off, v + off) for u, v in m.edges[a])
        for p in sig.props:
            valuation[p].update(w + off for w in m.valuation[p])
    result = KripkeStructure(sig, total, edges, valuation)
    if point_from is None:
        return result
    part, world = point_from
    if not 0 <= part < len(parts) or not 0 <= world < parts[part].world_count:
        raise ValueError(f"invalid point_from {point_from!r}")
    return PointedStructure(result, offsets[part] + world)


def part_offsets(parts: list[KripkeStructure]) -> tuple[int, ...]:
    """Starting world index of each part inside their disjoint union."""
    offsets = []
    total = 0
    for m in parts:
        offsets.append(total)
        total += m.world_count
    return tuple(offsets)


def copies(m: KripkeStructure, count: int) -> KripkeStructure:
    """``count`` relabelled disjoint copies of ``m``.

    ``copies(m, 0)`` is the empty aggregate, legal only as a union operand.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return KripkeStructure(m.signature, 0)
    return disjoint_union([m] * count)  # type: ignore[return-value]


def _symmetric_adjacency(m: KripkeStructure, allowed: Optional[frozenset[int]] = None):
    adj: dict[int, set[int]] = {}
    for pairs in m.edges.values():
        for u, v in pairs:
            if allowed is not None and (u not in allowed or v not in allowed):
                continue
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    return adj


def neighborhood(m: KripkeStructure, world: int, radius: int) -> frozenset[int]:
    """Worlds at undirected distance <= radius from ``world``.

    Distance is taken in the union of the symmetrisations of all agent
    relations; radius 0 yields ``{world}``.
    """
    if not 0 <= world < m.world_count:
        raise ValueError(f"world {world} out of range")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    adj = _symmetric_adjacency(m)
    seen = {world}
    frontier = [world]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    return frozenset(seen)


def restrict(
    m: KripkeStructure,
    worlds: Iterable[int],
    point: Optional[int] = None,
) -> Union[KripkeStructure, PointedStructure]:
    """Substructure induced on ``worlds``, relabelled densely by sorted order."""
    keep = sorted(set(int(w) for w in worlds))
    if not keep:
        raise ValueError("cannot restrict to an empty world set")
    for w in keep:
        if not 0 <= w < m.world_count:
            raise ValueError(f"world {w} out of range")
    relabel = {w: i for i, w in enumerate(keep)}
    kept = set(keep)
    edges = {
        a: {(relabel[u], relabel[v]) for u, v in m.edges[a] if u in kept and v in kept}
        for a in m.signature.agents
    }
    valuation = {
        p: {relabel[w] for w in m.valuation[p] if w in kept} for p in m.signature.props
    }
    result = KripkeStructure(m.signature, len(keep), edges, valuation)
    if point is None:
        return result
    if point not in kept:
        raise ValueError(f"point {point} not in the restricted world set")
    return PointedStructure(result, relabel[point])


@dataclass(frozen=True)
class TreelikeReport:
    """Outcome of a rooted-tree-likeness check, with a witness on failure.

    ``failed`` is one of ``"disjointness"``, ``"acyclicity"``, ``"direction"``
    or ``None``; the witness is a shared undirected edge with its two agents,
    a cycle as a world tuple, or a wrongly directed edge with its agent.
    """

    ok: bool
    failed: Optional[str] = None
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.ok


def is_rooted_treelike(m: KripkeStructure, root: int, radius: int) -> TreelikeReport:
    """Check that ``m`` is rooted-tree-like to depth ``radius`` around ``root``.

    Within the restriction to the radius-neighbourhood: (a) the symmetrised
    agent relations are pairwise disjoint, (b) their union is an acyclic
    undirected graph, and (c) every edge runs from a world at distance d to
    one at distance d+1 from the root.  Conditions are checked in that order
    and the first failure is reported.
    """
    hood = neighborhood(m, root, radius)
    sub = restrict(m, hood, point=root)
    assert isinstance(sub, PointedStructure)
    s, r = sub.structure, sub.point

    undirected: dict[frozenset[int], str] = {}
    for agent in s.signature.agents:
        for u, v in sorted(s.edges[agent]):
            key = frozenset((u, v))
            owner = undirected.get(key)
            if owner is not None and owner != agent:
                return TreelikeReport(False, "disjointness", (owner, agent, (u, v)))
            undirected[key] = agent

    adj: dict[int, list[int]] = {w: [] for w in s.worlds()}
    for key in undirected:
        if len(key) == 1:
            (u,) = key
            return TreelikeReport(False, "acyclicity", (u, u))
        u, v = sorted(key)
        adj[u].append(v)
        adj[v].append(u)
    parent: dict[int, Optional[int]] = {}
    for start in s.worlds():
        if start in parent:
            continue
        parent[start] = None
        stack = [(start, None)]
        while stack:
            node, par = stack.pop()
            for nb in adj[node]:
                if nb == par:
                    # One tree edge back to the parent is fine; a parallel
                    # edge cannot occur once disjointness holds.
                    par = -1  # consume the single allowed back-step
                    continue
                if nb in parent:
                    # Reconstruct the cycle through the DFS parents.
                    path_a, path_b = [node], [nb]
                    seen_a = {node}
                    x = node
                    while parent[x] is not None:
                        x = parent[x]
                        path_a.append(x)
                        seen_a.add(x)
                    y = nb
                    while y not in seen_a:
                        y = parent[y]
                        path_b.append(y)
                    cut = path_a.index(path_b[-1])
                    cycle = tuple(path_a[: cut + 1] + path_b[-2::-1])
                    return TreelikeReport(False, "acyclicity", cycle)
                parent[nb] = node
                stack.append((nb, node))

    dist = {r: 0}
    queue = deque([r])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    for agent in s.signature.agents:
        for u, v in sorted(s.edges[agent]):
            if dist.get(v, -1) != dist.get(u, -1) + 1:
                return TreelikeReport(False, "direction", (agent, (u, v)))
    return TreelikeReport(True)


def unravel(pointed: PointedStructure, depth: int) -> PointedStructure:
    """Partial directed tree unravelling to ``depth``, merged with one copy.

    The tree part holds every labelled path from the point with fewer than
    ``depth`` steps, each step recording the agent taken; a path node carries
    the propositions of its endpoint and has, for each agent, one child per
    successor of its endpoint.  Path nodes at the frontier (``depth - 1``
    steps) get their agent edges redirected into a single appended relabelled
    copy of the original structure, which continues the behaviour beyond the
    unravelled depth.  The result is pointed at the empty path.

    A single shared continuation copy suffices: each frontier node keeps the
    per-agent successor counts of its endpoint world.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    m, start = pointed.structure, pointed.point
    sig = m.signature
    agent_index = {a: i for i, a in enumerate(sig.agents)}

    paths: list[tuple[tuple[int, int], ...]] = [()]
    frontier: list[tuple[tuple[int, int], ...]] = [()]
    for _ in range(depth - 1):
        nxt = []
        for path in frontier:
            endpoint = path[-1][1] if path else start
            for agent in sig.agents:
                ai = agent_index[agent]
                for v in m.successors(agent, endpoint):
                    nxt.append(path + ((ai, v),))
        nxt.sort()
        paths.extend(nxt)
        frontier = nxt

    tree_size = len(paths)
    node_of = {path: i for i, path in enumerate(paths)}
    copy_off = tree_size
    total = tree_size + m.world_count

    edges: dict[str, set[tuple[int, int]]] = {a: set() for a in sig.agents}
    valuation: dict[str, set[int]] = {p: set() for p in sig.props}
    for path in paths:
        endpoint = path[-1][1] if path else start
        node = node_of[path]
        for p in sig.props:
            if endpoint in m.valuation[p]:
                valuation[p].add(node)
        at_frontier = len(path) == depth - 1
        for agent in sig.agents:
            ai = agent_index[agent]
            for v in m.successors(agent, endpoint):
                if at_frontier:
                    edges[agent].add((node, copy_off + v))
                else:
                    edges[agent].add((node, node_of[path + ((ai, v),)]))
    for agent in sig.agents:
        edges[agent].update((copy_off + u, copy_off + v) for u, v in m.edges[agent])
    for p in sig.props:
        valuation[p].update(copy_off + w for w in m.valuation[p])

    return PointedStructure(KripkeStructure(sig, total, edges, valuation), 0)


# ---------------------------------------------------------------------------
# Structure text format.
#
#   structure <name>
#   agents: a b
#   props: p q
#   worlds: <n>
#   edge <agent>: <u> <v>        (one line per edge)
#   prop <name>: <u> <u> ...
#   point: <u>                   (optional)
#
# '#' starts a comment; blank lines are ignored.  The canonical serializer
# emits blocks in this order with edges sorted lexicographically.
# ---------------------------------------------------------------------------


def load_named_structure(text: str) -> tuple[str, Union[KripkeStructure, PointedStructure]]:
    """Parse the text format; returns the declared name and the structure."""
    name = None
    agents: Optional[list[str]] = None
    props: Optional[list[str]] = None
    world_count: Optional[int] = None
    edges: dict[str, set[tuple[int, int]]] = {}
    valuation: dict[str, set[int]] = {}
    point: Optional[int] = None

    def fail(msg: str, lineno: int):
        raise ParseError(msg, line=lineno)

    def parse_int(token: str, lineno: int) -> int:
        try:
            return int(token)
        except ValueError:
            fail(f"expected an integer, got {token!r}", lineno)
            raise AssertionError  # unreachable

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if name is None:
            head, _, rest = line.partition(" ")
            if head != "structure" or not rest.strip():
                fail("expected 'structure <name>' as the first directive", lineno)
            name = rest.strip()
            continue
        if line.startswith("structure "):
            fail("multiple 'structure' blocks are not supported", lineno)
        key, sep, rest = line.partition(":")
        if not sep:
            fail(f"malformed line {line!r}", lineno)
        key = key.strip()
        fields = rest.split()
        if key == "agents":
            if agents is not None:
                fail("duplicate 'agents' line", lineno)
            agents = fields
        elif key == "props":
            if props is not None:
                fail("duplicate 'props' line", lineno)
            props = fields
        elif key == "worlds":
            if world_count is not None:
                fail("duplicate 'worlds' line", lineno)
            if len(fields) != 1:
                fail("'worlds' takes exactly one number", lineno)
            world_count = parse_int(fields[0], lineno)
            if world_count < 1:
                fail("structures must have at least one world", lineno)
        elif key.startswith("edge "):
            agent = key[len("edge "):].strip()
            if agents is None or world_count is None:
                fail("'edge' lines require 'agents' and 'worlds' first", lineno)
            if agent not in agents:
                fail(f"unknown agent {agent!r}", lineno)
            if len(fields) != 2:
                fail("'edge' takes exactly two worlds", lineno)
            u, v = (parse_int(t, lineno) for t in fields)
            if not (0 <= u < world_count and 0 <= v < world_count):
                fail(f"edge ({u},{v}) out of range", lineno)
            edges.setdefault(agent, set()).add((u, v))
        elif key.startswith("prop "):
            prop = key[len("prop "):].strip()
            if props is None or world_count is None:
                fail("'prop' lines require 'props' and 'worlds' first", lineno)
            if prop not in props:
                fail(f"unknown proposition {prop!r}", lineno)
            ws = [parse_int(t, lineno) for t in fields]
            for w in ws:
                if not 0 <= w < world_count:
                    fail(f"world {w} out of range", lineno)
            valuation.setdefault(prop, set()).update(ws)
        elif key == "point":
            if world_count is None:
                fail("'point' requires 'worlds' first", lineno)
            if len(fields) != 1:
                fail("'point' takes exactly one world", lineno)
            point = parse_int(fields[0], lineno)
            if not 0 <= point < world_count:
                fail(f"point {point} out of range", lineno)
        else:
            fail(f"unknown directive {key!r}", lineno)

    if name is None:
        raise ParseError("empty input: no 'structure' directive", line=1)
    if world_count is None:
        raise ParseError("missing 'worlds' line", line=1)
    sig = Signature(tuple(agents or ()), tuple(props or ()))
    m = KripkeStructure(sig, world_count, edges, valuation)
    if point is None:
        return name, m
    return name, PointedStructure(m, point)


def load_structure(text: str) -> Union[KripkeStructure, PointedStructure]:
    return load_named_structure(text)[1]


def dump_structure(value: Union[KripkeStructure, PointedStructure], name: str = "m") -> str:
    """Canonical text serialization; inverse of ``load_structure``."""
    point = None
    if isinstance(value, PointedStructure):
        point = value.point
        m = value.structure
    else:
        m = value
    if m.world_count < 1:
        raise ValueError("cannot serialize an empty aggregate")
    lines = [f"structure {name}"]
    lines.append(("agents: " + " ".join(m.signature.agents)).rstrip())
    lines.append(("props: " + " ".join(m.signature.props)).rstrip())
    lines.append(f"worlds: {m.world_count}")
    for agent in sorted(m.signature.agents):
        for u, v in sorted(m.edges[agent]):
            lines.append(f"edge {agent}: {u} {v}")
    for prop in m.signature.props:
        worlds = sorted(m.valuation[prop])
        if worlds:
            lines.append(f"prop {prop}: " + " ".join(str(w) for w in worlds))
    if point is not None:
        lines.append(f"point: {point}")
    return "\n".join(lines) + "\n"
