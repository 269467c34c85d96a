"""Multigraphs attached to divergence-space components, hairy-cycle
classification, the key-edge search, and vanishing certificates.

A component functional T^{j_1...j_p; a_1 b_1 c_1 d_1 ...} determines a
multigraph on the index letters: one edge per index pair of each quatern
(the j letters are ignored).  When the distinguished letter j_p is
connected to a cycle, iterating the cyclic-sum identities walks the
functional along the graph and ends at a component with three equal
indices, which vanishes; ``vanish_by_cycle`` records that walk as a
replayable rewrite trace.

Conventions adopted here (the underlying topological definitions leave
them open):

* a loop is a cycle, and a pair of parallel edges is a 2-cycle;
* a hair may contain any number of edges (a half-open simple path);
* a vertex is simple when exactly one edge end touches it, so loop
  vertices are never simple.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

F = Fraction


@dataclass(frozen=True)
class Multigraph:
    """Vertices 1..num_vertices; edges as sorted pairs, loops allowed."""
    num_vertices: int
    edges: tuple

    def __init__(self, num_vertices: int, edges):
        norm = []
        for (u, v) in edges:
            if not (1 <= u <= num_vertices and 1 <= v <= num_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            norm.append((min(u, v), max(u, v)))
        object.__setattr__(self, "num_vertices", num_vertices)
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        """Edge ends at v; a loop contributes two."""
        d = 0
        for (a, b) in self.edges:
            if a == v:
                d += 1
            if b == v:
                d += 1
        return d

    def is_simple_vertex(self, v: int) -> bool:
        return self.degree(v) == 1

    def incident_edges(self, v: int):
        return [i for i, (a, b) in enumerate(self.edges) if a == v or b == v]

    def without_edge(self, index: int) -> "Multigraph":
        return Multigraph(self.num_vertices,
                          self.edges[:index] + self.edges[index + 1:])

    def component_of(self, v: int):
        """(vertex set, edge index set) of v's connected component."""
        seen = {v}
        frontier = [v]
        while frontier:
            x = frontier.pop()
            for (a, b) in self.edges:
                if a == x and b not in seen:
                    seen.add(b)
                    frontier.append(b)
                if b == x and a not in seen:
                    seen.add(a)
                    frontier.append(a)
        eids = {i for i, (a, b) in enumerate(self.edges) if a in seen}
        return seen, eids

    def components(self):
        """Connected components among vertices that carry at least one edge,
        plus isolated vertices as singletons."""
        out = []
        assigned = set()
        for v in range(1, self.num_vertices + 1):
            if v in assigned:
                continue
            vs, es = self.component_of(v)
            assigned |= vs
            out.append((vs, es))
        return out

    def to_json(self):
        return {"num_vertices": self.num_vertices,
                "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class ComponentKey:
    """An index word j_1..j_p plus m quaterns (a,b,c,d), letters in 1..n."""
    n: int
    word: tuple
    quaterns: tuple

    def __init__(self, n, word, quaterns):
        word = tuple(word)
        quaterns = tuple(tuple(q) for q in quaterns)
        for letter in word + tuple(x for q in quaterns for x in q):
            if not 1 <= letter <= n:
                raise ValueError(f"index letter {letter} out of range 1..{n}")
        for q in quaterns:
            if len(q) != 4:
                raise ValueError("quaterns must have four indices")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "word", word)
        object.__setattr__(self, "quaterns", quaterns)

    @property
    def p(self) -> int:
        return len(self.word)

    @property
    def m(self) -> int:
        return len(self.quaterns)

    def replace(self, new_last: int, qi: int, side: str, new_pair) -> "ComponentKey":
        word = self.word[:-1] + (new_last,)
        q = list(self.quaterns[qi])
        if side == "ab":
            q[0], q[1] = new_pair
        else:
            q[2], q[3] = new_pair
        quaterns = self.quaterns[:qi] + (tuple(q),) + self.quaterns[qi + 1:]
        return ComponentKey(self.n, word, quaterns)

    def __str__(self):
        blocks = ["".join(map(str, self.word))]
        blocks += ["".join(map(str, q)) for q in self.quaterns]
        return ";".join(blocks)

    def to_json(self):
        return {"n": self.n, "word": list(self.word),
                "quaterns": [list(q) for q in self.quaterns]}


class KeyParseError(ValueError):
    def __init__(self, message, column):
        super().__init__(f"{message} (column {column})")
        self.column = column


def parse_component_key(text: str, n: int) -> ComponentKey:
    """Parse "j1..jp;a1b1c1d1;..." — digit strings, or comma-separated ints."""
    groups = []
    col = 0
    for chunk in text.split(";"):
        if "," in chunk:
            vals = []
            sub = col
            for item in chunk.split(","):
                if not item.strip().isdigit():
                    raise KeyParseError(f"expected an integer, got {item!r}", sub)
                vals.append(int(item))
                sub += len(item) + 1
            groups.append(vals)
        else:
            vals = []
            for off, ch in enumerate(chunk):
                if not ch.isdigit() or ch == "0":
                    raise KeyParseError(f"expected a digit 1-9, got {ch!r}",
                                        col + off)
                vals.append(int(ch))
            groups.append(vals)
        col += len(chunk) + 1
    if not groups or not groups[0]:
        raise KeyParseError("empty index word", 0)
    word, quats = groups[0], groups[1:]
    for gi, q in enumerate(quats):
        if len(q) != 4:
            raise KeyParseError("quatern must have exactly four indices",
                                sum(len(g) + 1 for g in groups[:gi + 1]))
    try:
        return ComponentKey(n, word, quats)
    except ValueError as exc:
        raise KeyParseError(str(exc), 0) from None


def graph_of_component(key: ComponentKey) -> Multigraph:
    """One edge a_i-b_i and one c_i-d_i per quatern; j letters are ignored."""
    edges = []
    for (a, b, c, d) in key.quaterns:
        edges.append((a, b))
        edges.append((c, d))
    return Multigraph(key.n, edges)


# ---------------------------------------------------------------------------
# cycles and hairy cycles
# ---------------------------------------------------------------------------

def _cycles(g: Multigraph):
    """All cycles as (vertex tuple, edge id tuple), deterministic order.

    Covers loops, parallel-pair 2-cycles, and simple cycles of length >= 3
    with every choice of parallel edge along the way.
    """
    cycles = []
    for i, (a, b) in enumerate(g.edges):
        if a == b:
            cycles.append(((a,), (i,)))
    by_pair: dict[tuple, list[int]] = {}
    for i, (a, b) in enumerate(g.edges):
        if a != b:
            by_pair.setdefault((a, b), []).append(i)
    for pair, ids in sorted(by_pair.items()):
        for i, j in itertools.combinations(ids, 2):
            cycles.append((pair, (i, j)))
    # simple vertex cycles of length >= 3 on the underlying simple graph
    pairs = sorted(by_pair)
    adj: dict[int, set] = {}
    for (a, b) in pairs:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    def extend(path, start):
        last = path[-1]
        for nxt in sorted(adj.get(last, ())):
            if nxt == start and len(path) >= 3:
                yield tuple(path)
            elif nxt > start and nxt not in path:
                yield from extend(path + [nxt], start)

    seen = set()
    for start in sorted(adj):
        for vcycle in extend([start], start):
            canon = _canonical_cycle(vcycle)
            if canon in seen:
                continue
            seen.add(canon)
            hops = list(zip(vcycle, vcycle[1:] + vcycle[:1]))
            for choice in itertools.product(
                    *[by_pair[(min(u, v), max(u, v))] for (u, v) in hops]):
                cycles.append((vcycle, tuple(choice)))
    cycles.sort(key=lambda c: (len(c[1]), c[0], c[1]))
    return cycles


def _canonical_cycle(vcycle):
    rotations = [tuple(vcycle[i:] + vcycle[:i]) for i in range(len(vcycle))]
    rev = tuple(reversed(vcycle))
    rotations += [tuple(rev[i:] + rev[:i]) for i in range(len(rev))]
    return min(rotations)


@dataclass
class Hair:
    """A half-open simple path: tip first, attachment edge last."""
    vertices: tuple      # path from the free tip towards the cycle
    edge_ids: tuple      # including the final stub into the cycle
    attach_vertex: int   # the cycle vertex the stub reaches

    def to_json(self):
        return {"vertices": list(self.vertices),
                "edges": list(self.edge_ids), "attach": self.attach_vertex}


@dataclass
class HairyDecomposition:
    cycle_vertices: tuple
    cycle_edge_ids: tuple
    hairs: list

    def to_json(self):
        return {"cycle_vertices": list(self.cycle_vertices),
                "cycle_edges": list(self.cycle_edge_ids),
                "hairs": [h.to_json() for h in self.hairs]}


def classify_hairy(g: Multigraph, component=None):
    """HairyDecomposition if some cycle's closed removal leaves only hairs,
    else None.  ``g`` must be connected (restrict to one component first).
    """
    if component is None:
        comps = g.components()
        if len(comps) != 1:
            raise ValueError("classify_hairy expects a connected graph")
        component = comps[0]
    comp_vs, comp_es = component
    for vcycle, ecycle in _cycles(g):
        if not set(vcycle) <= comp_vs:
            continue
        deco = _try_cycle(g, comp_vs, comp_es, vcycle, ecycle)
        if deco is not None:
            return deco
    return None


def _try_cycle(g, comp_vs, comp_es, vcycle, ecycle):
    cyc_vs = set(vcycle)
    cyc_es = set(ecycle)
    outside_vs = comp_vs - cyc_vs
    stub_edges = []
    outside_edges = []
    for i in comp_es:
        if i in cyc_es:
            continue
        a, b = g.edges[i]
        in_a, in_b = a in cyc_vs, b in cyc_vs
        if in_a and in_b:
            return None          # chord, extra parallel, or loop on the cycle
        if in_a or in_b:
            stub_edges.append(i)
        else:
            outside_edges.append(i)
    # split outside vertices into connected pieces via outside edges
    parent = {v: v for v in outside_vs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in outside_edges:
        a, b = g.edges[i]
        if a == b:
            return None          # loop off the cycle: not a hair
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    pieces: dict[int, dict] = {}
    for v in outside_vs:
        pieces.setdefault(find(v), {"vs": set(), "es": [], "stubs": []})[
            "vs"].add(v)
    for i in outside_edges:
        pieces[find(g.edges[i][0])]["es"].append(i)
    for i in stub_edges:
        a, b = g.edges[i]
        out_v = a if a not in cyc_vs else b
        pieces[find(out_v)]["stubs"].append(i)
    hairs = []
    for root in sorted(pieces):
        piece = pieces[root]
        vs, es, stubs = piece["vs"], piece["es"], piece["stubs"]
        if len(stubs) != 1:
            return None
        if len(es) != len(vs) - 1:
            return None          # not a tree: some cycle survives off the cycle
        deg = {v: 0 for v in vs}
        for i in es:
            a, b = g.edges[i]
            deg[a] += 1
            deg[b] += 1
        stub = stubs[0]
        a, b = g.edges[stub]
        attach = a if a in cyc_vs else b
        start = b if a in cyc_vs else a
        deg[start] += 1
        if any(d > 2 for d in deg.values()):
            return None          # branching or stub at mid-path: not [0,1)
        # walk the path from the stub end to the free tip
        order = [start]
        walk_edges = []
        remaining = set(es)
        while remaining:
            nxt = None
            for i in sorted(remaining):
                x, y = g.edges[i]
                if x == order[-1] and y not in order:
                    nxt = (i, y)
                    break
                if y == order[-1] and x not in order:
                    nxt = (i, x)
                    break
            if nxt is None:
                return None      # guard: piece failed to be one path
            remaining.discard(nxt[0])
            walk_edges.append(nxt[0])
            order.append(nxt[1])
        hairs.append(Hair(vertices=tuple(reversed(order)),
                          edge_ids=tuple(reversed(walk_edges)) + (stub,),
                          attach_vertex=attach))
    return HairyDecomposition(cycle_vertices=tuple(vcycle),
                              cycle_edge_ids=tuple(ecycle), hairs=hairs)


def connected_to_cycle(g: Multigraph, v: int) -> bool:
    """True iff v's connected component contains a cycle (loops count)."""
    vs, es = g.component_of(v)
    return len(es) >= len(vs)


@dataclass
class KeyEdge:
    k: int
    l: int
    edge_index: int

    def to_json(self):
        return {"k": self.k, "l": self.l, "edge_index": self.edge_index}


@dataclass
class HairyForestCertificate:
    components: list     # [(sorted vertex list, HairyDecomposition)]

    def to_json(self):
        return {"components": [
            {"vertices": sorted(vs), "decomposition": deco.to_json()}
            for vs, deco in self.components]}


def key_edge(g: Multigraph):
    """An edge (k, l) with both ends non-simple and k still connected to a
    cycle after its removal — or a hairy-cycle certificate per component.

    Requires e >= v.  The edge branch is preferred and searched in
    lexicographic (k, l, multiplicity-index) order.
    """
    if g.num_edges < g.num_vertices:
        raise ValueError("key_edge requires e >= v")
    candidates = []
    for idx, (a, b) in enumerate(g.edges):
        candidates.append((a, b, idx))
        if a != b:
            candidates.append((b, a, idx))
    for k, l, idx in sorted(candidates):
        if g.is_simple_vertex(k) or g.is_simple_vertex(l):
            continue
        if connected_to_cycle(g.without_edge(idx), k):
            return KeyEdge(k=k, l=l, edge_index=idx)
    pieces = []
    for vs, es in g.components():
        if not es:
            raise AssertionError(
                "no key edge and an isolated vertex: e >= v dichotomy violated")
        deco = classify_hairy(g, component=(vs, es))
        if deco is None:
            raise AssertionError(
                "no key edge and a non-hairy component: dichotomy violated")
        pieces.append((vs, deco))
    return HairyForestCertificate(components=pieces)


# ---------------------------------------------------------------------------
# rewrite traces
# ---------------------------------------------------------------------------

@dataclass
class RewriteStep:
    rule: str            # "cyclic-ab" | "cyclic-cd" | "triple-equal"
    quatern_index: int
    triple: tuple        # (j, x, y) the identity was instantiated on
    key_after: ComponentKey | None
    cumulative_factor: F

    def to_json(self):
        return {"rule": self.rule, "quatern": self.quatern_index,
                "triple": list(self.triple),
                "key_after": None if self.key_after is None
                else str(self.key_after),
                "cumulative_factor": f"{self.cumulative_factor.numerator}/"
                                     f"{self.cumulative_factor.denominator}"}


@dataclass
class RewriteTrace:
    initial_key: ComponentKey
    steps: list

    def to_json(self):
        return {"initial_key": str(self.initial_key),
                "steps": [s.to_json() for s in self.steps]}


def _edge_location(edge_id: int):
    """Graph edge id -> (quatern index, pair side); edges are emitted in
    (ab, cd) order per quatern by graph_of_component."""
    return edge_id // 2, ("ab" if edge_id % 2 == 0 else "cd")


def _cycle_through(g: Multigraph, v: int):
    """Vertex/edge lists of some cycle through v, or None."""
    for i in g.incident_edges(v):
        a, b = g.edges[i]
        if a == b == v:
            return [v], [i]
    for i in sorted(g.incident_edges(v)):
        a, b = g.edges[i]
        u = b if a == v else a
        path = _bfs_path(g.without_edge(i), u, v)
        if path is not None:
            verts, eids = path
            eids = [_reindex_edge(g, i, e) for e in eids]
            return [v] + verts[:-1], [i] + eids
    return None


def _reindex_edge(g: Multigraph, removed: int, idx: int) -> int:
    return idx if idx < removed else idx + 1


def _bfs_path(g: Multigraph, src: int, dst: int):
    """(vertex path src..dst, edge id path) in g, or None."""
    if src == dst:
        return [src], []
    prev = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for v in frontier:
            for i, (a, b) in enumerate(g.edges):
                if a == v and b not in prev:
                    prev[b] = (v, i)
                    nxt.append(b)
                elif b == v and a not in prev:
                    prev[a] = (v, i)
                    nxt.append(a)
        if dst in prev:
            break
        frontier = nxt
    if dst not in prev:
        return None
    verts = [dst]
    eids = []
    cur = dst
    while prev[cur] is not None:
        v, i = prev[cur]
        eids.append(i)
        verts.append(v)
        cur = v
    return list(reversed(verts)), list(reversed(eids))


def vanish_by_cycle(key: ComponentKey):
    """Rewrite trace proving the component functional vanishes, when the
    distinguished letter is connected to a cycle; None otherwise.

    The walk follows a shortest path to a vertex lying on a cycle, traverses
    the cycle, and annihilates on the loop created when entering it.  Each
    step instantiates one cyclic-sum identity; factors are exact.
    """
    g = graph_of_component(key)
    jp = key.word[-1]
    if not connected_to_cycle(g, jp):
        return None
    comp_vs, _ = g.component_of(jp)
    # nearest vertex on a cycle, by BFS rings from jp
    rings = [[jp]]
    seen = {jp}
    target = None
    while target is None:
        for v in rings[-1]:
            if _cycle_through(g, v) is not None:
                target = v
                break
        if target is not None:
            break
        nxt = []
        for v in rings[-1]:
            for (a, b) in g.edges:
                for u, w in ((a, b), (b, a)):
                    if u == v and w not in seen:
                        seen.add(w)
                        nxt.append(w)
        if not nxt:
            raise AssertionError("no cycle reachable despite e >= v test")
        rings.append(sorted(nxt))
    verts, path_eids = _bfs_path(g, jp, target)
    cyc_verts, cyc_eids = _cycle_through(g, target)
    walk = []        # (from_vertex, to_vertex, edge id)
    for (u, w), eid in zip(zip(verts, verts[1:]), path_eids):
        walk.append((u, w, eid))
    if len(cyc_verts) == 1:        # loop at the target
        walk.append((target, target, cyc_eids[0]))
    else:
        ring = cyc_verts + [target]
        for (u, w), eid in zip(zip(ring, ring[1:]), cyc_eids):
            walk.append((u, w, eid))

    steps = []
    current = key
    factor = F(1)
    first_cycle_pair = None
    path_len = len(verts) - 1
    for step_no, (x, y, eid) in enumerate(walk):
        qi, side = _edge_location(eid)
        pair = current.quaterns[qi][:2] if side == "ab" \
            else current.quaterns[qi][2:]
        if set(pair) != {x, y}:
            raise AssertionError(
                f"walk edge ({x},{y}) missing at quatern {qi}/{side} of {current}")
        if step_no == path_len:
            first_cycle_pair = (qi, side)
        if x == y:
            steps.append(RewriteStep(rule="triple-equal",
                                     quatern_index=qi, triple=(x, x, x),
                                     key_after=None,
                                     cumulative_factor=factor))
            return RewriteTrace(initial_key=key, steps=steps)
        rule = "cyclic-ab" if side == "ab" else "cyclic-cd"
        current = current.replace(y, qi, side, (x, x))
        factor *= F(-1, 2)
        steps.append(RewriteStep(rule=rule, quatern_index=qi,
                                 triple=(x, x, y), key_after=current,
                                 cumulative_factor=factor))
    # back at the cycle entry: annihilate on the loop created there
    qi, side = first_cycle_pair
    steps.append(RewriteStep(rule="triple-equal", quatern_index=qi,
                             triple=(target, target, target), key_after=None,
                             cumulative_factor=factor))
    return RewriteTrace(initial_key=key, steps=steps)


def zero_functional_oracle(key: ComponentKey, space) -> bool:
    """True iff the coordinate functional of the key vanishes on the whole
    computed divergence space (linear-algebra cross-check of the traces)."""
    from .divspaces import explicit_component
    problem = space.problem
    if (key.n, key.p, key.m) != (problem.n, problem.p, problem.m):
        raise ValueError("component key does not match the divergence space")
    for vec in space.basis.vectors:
        if explicit_component(problem, vec, key.word, key.quaterns):
            return False
    return True


def replay_trace(trace: RewriteTrace, space) -> bool:
    """Replay each rewrite step as a linear identity on the space's basis.

    Verifies every instantiated cyclic identity numerically and that the
    final annihilation component evaluates to zero, so a verified trace is
    a machine-checked proof that the initial functional vanishes.
    """
    from .divspaces import explicit_component
    problem = space.problem

    def ev(k: ComponentKey, vec):
        return explicit_component(problem, vec, k.word, k.quaterns)

    current = trace.initial_key
    for step in trace.steps:
        for vec in space.basis.vectors:
            if step.rule == "triple-equal":
                if 3 * ev(current, vec) != 0:
                    return False
            else:
                nxt = step.key_after
                if 2 * ev(current, vec) + ev(nxt, vec) != 0:
                    return False
        if step.key_after is not None:
            current = step.key_after
    for vec in space.basis.vectors:
        if ev(trace.initial_key, vec):
            return False
    return True


# ---------------------------------------------------------------------------
# seeded random instances for the property suite
# ---------------------------------------------------------------------------

def random_multigraph(rng: random.Random, max_vertices=8, max_edges=12,
                      require_e_ge_v=True) -> Multigraph:
    v = rng.randint(1, max_vertices)
    lo = v if require_e_ge_v else 0
    if lo > max_edges:
        v = max_edges
        lo = v
    e = rng.randint(lo, max_edges)
    edges = []
    for _ in range(e):
        if rng.random() < 0.15:
            a = rng.randint(1, v)
            edges.append((a, a))
        else:
            a, b = rng.randint(1, v), rng.randint(1, v)
            edges.append((a, b))
    return Multigraph(v, edges)
