"""Finite windows of Cayley and Schreier graphs with generator-labeled edges.

A window is a finite piece of an infinite labeled graph together with a
declared *interior*: the vertices whose full generator star is present, so
that any computation touching the complement of a set (boundaries, translates)
agrees with the infinite graph as long as it stays inside the interior.

Vertex ids are strings.  Built-in families use canonical forms:

* integer lattice Z^d: comma-joined coordinates, e.g. ``"2,-1"``; generator
  labels ``"+i"`` / ``"-i"`` for axis i (1-based),
* free group F_k: freely reduced words over ``a, b, c, ...`` with uppercase
  letters as inverses (identity is the empty string ``""``).

Generators act on the left, matching the left Cayley graph convention
(x and y adjacent when x = s.y); the edge label names the left multiplier.
"""

from __future__ import annotations

import json
import string
from collections import deque
from dataclasses import dataclass

Word = tuple[str, ...]

IDENTITY_WORD: Word = ()


class GraphError(ValueError):
    """Invalid graph construction, file, or operation precondition."""


@dataclass(frozen=True)
class GeneratorSet:
    """A symmetric generating set: labels closed under the inverse pairing."""

    labels: tuple[str, ...]
    involution: dict[str, str]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise GraphError("duplicate generator labels")
        for s in self.labels:
            if not s:
                raise GraphError("empty generator label")
            if any(ch in s for ch in "|, \t\n"):
                raise GraphError(f"label {s!r} contains a reserved character")
            t = self.involution.get(s)
            if t is None or t not in self.labels:
                raise GraphError(f"label {s!r} has no inverse in the set")
            if self.involution.get(t) != s:
                raise GraphError(f"involution is not an involution at {s!r}")

    def inverse(self, label: str) -> str:
        return self.involution[label]

    def inverse_word(self, word: Word) -> Word:
        return tuple(self.involution[s] for s in reversed(word))


def zd_generators(d: int) -> GeneratorSet:
    """Standard generators of Z^d: one +/- pair per axis."""
    labels = []
    invol = {}
    for i in range(1, d + 1):
        a, b = f"+{i}", f"-{i}"
        labels += [a, b]
        invol[a], invol[b] = b, a
    return GeneratorSet(tuple(labels), invol)


def free_generators(rank: int) -> GeneratorSet:
    """Standard generators of F_k: lowercase letters, uppercase inverses."""
    if rank < 1 or rank > 26:
        raise GraphError("free rank must be in 1..26")
    labels = []
    invol = {}
    for ch in string.ascii_lowercase[:rank]:
        labels += [ch, ch.upper()]
        invol[ch], invol[ch.upper()] = ch.upper(), ch
    return GeneratorSet(tuple(labels), invol)


def parse_word(text: str) -> Word:
    """Parse a word given as comma- or whitespace-separated labels.

    >>> parse_word("+1,+1,-2")
    ('+1', '+1', '-2')
    >>> parse_word("")
    ()
    """
    text = text.strip()
    if not text:
        return ()
    parts = text.replace(",", " ").split()
    return tuple(parts)


def format_word(word: Word) -> str:
    return ",".join(word)


@dataclass(frozen=True)
class FamilyTag:
    """Provenance of a built-in window: lattice dimension or free rank."""

    kind: str  # "z" | "free"
    dim: int
    radius: int


class LabeledGraph:
    """Immutable finite window with a partial generator action per label."""

    def __init__(self, generators: GeneratorSet, adjacency: dict,
                 interior, family: FamilyTag | None = None,
                 degree_bound: int | None = None):
        self.generators = generators
        self._adj = {v: dict(out) for v, out in adjacency.items()}
        self.vertices = tuple(sorted(self._adj))
        self.vertex_set = frozenset(self.vertices)
        self.interior = frozenset(interior)
        self.family = family
        self._validate()
        self._nbrs = {
            v: tuple(sorted({u for u in out.values() if u != v}))
            for v, out in self._adj.items()
        }
        max_deg = max((len(nb) for nb in self._nbrs.values()), default=0)
        if degree_bound is None:
            degree_bound = max_deg
        elif degree_bound < max_deg:
            raise GraphError("declared degree_bound below actual max degree")
        self.degree_bound = degree_bound
        self._depth_interiors: dict[int, frozenset] = {}

    def _validate(self):
        labels = set(self.generators.labels)
        for v, out in self._adj.items():
            for s, u in out.items():
                if s not in labels:
                    raise GraphError(f"edge at {v!r} uses unknown label {s!r}")
                if u not in self._adj:
                    raise GraphError(f"edge {v!r} --{s}--> {u!r} dangles")
                back = self._adj[u].get(self.generators.inverse(s))
                if back != v:
                    raise GraphError(
                        f"asymmetric edge {v!r} --{s}--> {u!r}: "
                        f"missing inverse edge")
        if not self.interior <= self.vertex_set:
            raise GraphError("interior contains unknown vertex ids")
        for v in self.interior:
            missing = labels - set(self._adj[v])
            if missing:
                raise GraphError(
                    f"interior vertex {v!r} lacks edges for {sorted(missing)}")

    # -- queries ----------------------------------------------------------

    def __contains__(self, v) -> bool:
        return v in self.vertex_set

    def __len__(self) -> int:
        return len(self.vertices)

    def act(self, label: str, v: str) -> str | None:
        """Apply one generator; None when the edge is absent."""
        return self._adj[v].get(label)

    def neighbors(self, v: str) -> tuple:
        return self._nbrs[v]

    def out_edges(self, v: str):
        """Sorted (label, target) pairs at v."""
        return sorted(self._adj[v].items())

    def edges(self):
        """Directed labeled edges (u, v, label) in deterministic order."""
        for u in self.vertices:
            for s, v in sorted(self._adj[u].items()):
                yield u, v, s

    def edge_count(self) -> int:
        """Undirected edge count (self-loops counted once)."""
        return sum(
            1 for u, v, s in self.edges()
            if (u, s) <= (v, self.generators.inverse(s))
        )

    def depth_interior(self, k: int) -> frozenset:
        """Vertices where every word of length <= k acts inside the window.

        Depth 1 is the declared interior; deeper levels require every
        generator image to sit one level shallower.
        """
        if k < 0:
            raise GraphError("depth must be >= 0")
        if k == 0:
            return self.vertex_set
        if k in self._depth_interiors:
            return self._depth_interiors[k]
        prev = self.depth_interior(k - 1)
        cur = frozenset(
            v for v in self.interior
            if all(self._adj[v].get(s) in prev for s in self.generators.labels)
        )
        self._depth_interiors[k] = cur
        return cur


# -- spec operations -------------------------------------------------------


def apply_word(g: LabeledGraph, word: Word, v: str) -> str | None:
    """Apply a word to a vertex, last letter first; None if it exits the window.

    The word (g1, ..., gm) acts as the group element g1 g2 ... gm, i.e.
    g1.(g2.(...(gm.v))).
    """
    if v not in g.vertex_set:
        raise GraphError(f"unknown vertex {v!r}")
    for s in reversed(word):
        v = g.act(s, v)
        if v is None:
            return None
    return v


def translate(g: LabeledGraph, word: Word, F) -> frozenset:
    """The set w.F; raises when any translate exits the window."""
    out = set()
    for x in F:
        y = apply_word(g, word, x)
        if y is None:
            raise GraphError(
                f"translate of {x!r} by {format_word(word)!r} exits the window")
        out.add(y)
    return frozenset(out)


def boundary(g: LabeledGraph, F) -> list:
    """Vertices of F with a neighbor outside F.  Requires F inside the interior."""
    fset = frozenset(F)
    if not fset <= g.interior:
        bad = sorted(fset - g.interior)[:3]
        raise GraphError(f"boundary needs F inside the interior; offending ids {bad}")
    return sorted(x for x in fset
                  if any(u not in fset for u in g.neighbors(x)))


def neighborhood(g: LabeledGraph, A, r: int) -> list:
    """All window vertices at graph distance <= r from A."""
    if r < 0:
        raise GraphError("radius must be >= 0")
    dist = bfs_distances(g, A, cutoff=r)
    return sorted(dist)


def bfs_distances(g: LabeledGraph, sources, cutoff: int | None = None) -> dict:
    """Graph distances from a vertex set, optionally capped at `cutoff`."""
    dist = {}
    dq = deque()
    for v in sorted(set(sources)):
        if v not in g.vertex_set:
            raise GraphError(f"unknown vertex {v!r}")
        dist[v] = 0
        dq.append(v)
    while dq:
        v = dq.popleft()
        d = dist[v]
        if cutoff is not None and d >= cutoff:
            continue
        for u in g.neighbors(v):
            if u not in dist:
                dist[u] = d + 1
                dq.append(u)
    return dist


def induced_components(g: LabeledGraph, subset) -> list[list]:
    """Connected components of the induced subgraph, each sorted; components
    ordered by their smallest vertex."""
    sub = frozenset(subset)
    seen = set()
    comps = []
    for v in sorted(sub):
        if v in seen:
            continue
        comp = [v]
        seen.add(v)
        dq = deque([v])
        while dq:
            x = dq.popleft()
            for u in g.neighbors(x):
                if u in sub and u not in seen:
                    seen.add(u)
                    comp.append(u)
                    dq.append(u)
        comps.append(sorted(comp))
    return comps


def components(g: LabeledGraph, removed) -> list[list]:
    """Components of the window after deleting `removed` (with incident edges)."""
    rem = frozenset(removed)
    if not rem <= g.vertex_set:
        raise GraphError("removed set contains unknown vertex ids")
    return induced_components(g, g.vertex_set - rem)


def sphere_decomposition(g: LabeledGraph, center: str, r: int) -> list[list]:
    """Spheres S_0..S_r around a center, each sorted; errors if the ball pokes
    out of the interior (its 1-neighborhood must be complete)."""
    dist = bfs_distances(g, [center], cutoff=r)
    ball = set(dist)
    if not ball <= g.interior:
        raise GraphError("ball of radius %d around %r exits the interior" % (r, center))
    spheres = [[] for _ in range(r + 1)]
    for v, d in dist.items():
        spheres[d].append(v)
    for sp in spheres:
        sp.sort()
        if not sp:
            raise GraphError("window too small: empty sphere inside radius %d" % r)
    return spheres


# -- built-in families -----------------------------------------------------


def zd_id(vec) -> str:
    return ",".join(str(c) for c in vec)


def zd_vec(vid: str) -> tuple[int, ...]:
    return tuple(int(c) for c in vid.split(","))


def _zd_ball_vectors(d: int, r: int):
    if d == 0:
        yield ()
        return
    for head in range(-r, r + 1):
        for tail in _zd_ball_vectors(d - 1, r - abs(head)):
            yield (head,) + tail


def _free_reduce(word: str, invol: dict[str, str]) -> str:
    out = []
    for ch in word:
        if out and out[-1] == invol[ch]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def build_cayley_window(family: str, *, dim: int = 1, radius: int,
                        generators: GeneratorSet | None = None) -> LabeledGraph:
    """Ball of `radius` around the identity in Z^d ("z") or F_k ("free"),
    with interior the ball of radius-1.

    >>> g = build_cayley_window("z", dim=1, radius=3)
    >>> len(g), g.edge_count(), sorted(g.interior)
    (7, 6, ['-1', '-2', '0', '1', '2'])
    >>> len(build_cayley_window("free", dim=2, radius=2))
    17
    """
    if radius < 0:
        raise GraphError("radius must be >= 0")
    if family == "z":
        gens = generators or zd_generators(dim)
        if len(gens.labels) != 2 * dim:
            raise GraphError("Z^d needs the 2d standard generators")
        verts = {zd_id(v): v for v in _zd_ball_vectors(dim, radius)}
        adj: dict = {vid: {} for vid in verts}
        for vid, vec in verts.items():
            for i in range(dim):
                up = list(vec)
                up[i] += 1
                uid = zd_id(up)
                if uid in verts:
                    adj[vid][f"+{i + 1}"] = uid
                    adj[uid][f"-{i + 1}"] = vid
        interior = {vid for vid, vec in verts.items()
                    if sum(abs(c) for c in vec) <= radius - 1}
        return LabeledGraph(gens, adj, interior,
                            family=FamilyTag("z", dim, radius))
    if family == "free":
        gens = generators or free_generators(dim)
        invol = gens.involution
        words = [""]
        frontier = [""]
        for _ in range(radius):
            nxt = []
            for w in frontier:
                for s in gens.labels:
                    u = _free_reduce(s + w, invol)
                    if len(u) == len(w) + 1:
                        nxt.append(u)
            words += nxt
            frontier = nxt
        verts = set(words)
        adj = {w: {} for w in verts}
        for w in verts:
            for s in gens.labels:
                u = _free_reduce(s + w, invol)
                if u in verts:
                    adj[w][s] = u
        interior = {w for w in verts if len(w) <= radius - 1}
        return LabeledGraph(gens, adj, interior,
                            family=FamilyTag("free", dim, radius))
    raise GraphError(f"unsupported family {family!r}")


def identity_id(family: FamilyTag) -> str:
    if family.kind == "z":
        return zd_id((0,) * family.dim)
    return ""


def family_compose(family: FamilyTag, a: str, b: str) -> str:
    """Canonical product a.b of two group elements given by vertex ids."""
    if family.kind == "z":
        return zd_id(x + y for x, y in zip(zd_vec(a), zd_vec(b)))
    invol = free_generators(family.dim).involution
    return _free_reduce(a + b, invol)


def family_inverse(family: FamilyTag, a: str) -> str:
    if family.kind == "z":
        return zd_id(-x for x in zd_vec(a))
    return a[::-1].swapcase()


def family_norm(family: FamilyTag, a: str) -> int:
    if family.kind == "z":
        return sum(abs(x) for x in zd_vec(a))
    return len(a)


def element_word(family: FamilyTag, a: str) -> Word:
    """A shortest word spelling the element `a` (letters applied right-to-left)."""
    if family.kind == "free":
        return tuple(a)
    letters = []
    for i, c in enumerate(zd_vec(a), start=1):
        letters += [f"+{i}" if c > 0 else f"-{i}"] * abs(c)
    return tuple(letters)


def ball_elements(family: FamilyTag, k: int, *, exact: bool = False) -> list[str]:
    """Canonical ids of the elements of S^k: norm <= k, and norm = k (mod 2)
    in exact mode (a product of exactly k generators can only change the
    norm parity by k)."""
    if family.kind == "z":
        ids = [zd_id(v) for v in _zd_ball_vectors(family.dim, k)]
    else:
        gens = free_generators(family.dim)
        out = [""]
        frontier = [""]
        for _ in range(k):
            nxt = []
            for w in frontier:
                for s in gens.labels:
                    u = _free_reduce(s + w, gens.involution)
                    if len(u) == len(w) + 1:
                        nxt.append(u)
            out += nxt
            frontier = nxt
        ids = out
    if exact:
        ids = [a for a in ids if family_norm(family, a) % 2 == k % 2]
    return sorted(ids, key=lambda a: (family_norm(family, a), a))


def box_vertices(ranges):
    """Lattice vectors of the axis box [(a1,b1), ...], bounds inclusive."""
    if not ranges:
        yield ()
        return
    (a, b), rest = ranges[0], ranges[1:]
    for head in range(a, b + 1):
        for tail in box_vertices(rest):
            yield (head,) + tail


def zd_box(ranges) -> list[str]:
    """Sorted ids of an axis-aligned box in Z^d.

    >>> zd_box([(0, 1), (0, 1)])
    ['0,0', '0,1', '1,0', '1,1']
    """
    return sorted(zd_id(v) for v in box_vertices(ranges))


def zd_ball_size(d: int, r: int) -> int:
    """Number of Z^d lattice points with l1 norm <= r.

    >>> zd_ball_size(2, 1), zd_ball_size(1, 3)
    (5, 7)
    """
    counts = [1] + [0] * r
    for _ in range(d):
        new = [0] * (r + 1)
        for s in range(r + 1):
            c = counts[s]
            if c:
                new[s] += c
                for t in range(1, r - s + 1):
                    new[s + t] += 2 * c
        counts = new
    return sum(counts)


def free_ball_size(rank: int, r: int) -> int:
    """Number of reduced words of length <= r in F_rank."""
    if rank == 1:
        return 2 * r + 1
    q = 2 * rank - 1
    return 1 + 2 * rank * (q**r - 1) // (q - 1)


def ball_size_bound(g: LabeledGraph, diameter: int) -> int:
    """Upper bound on the size of a vertex set of the given ambient diameter."""
    if g.family is not None:
        if g.family.kind == "z":
            return zd_ball_size(g.family.dim, diameter)
        return free_ball_size(g.family.dim, diameter)
    deg = max(g.degree_bound, 1)
    if deg <= 2:
        return 2 * diameter + 1
    return 1 + deg * ((deg - 1) ** diameter - 1) // (deg - 2)


# -- interchange format ----------------------------------------------------


def graph_to_doc(g: LabeledGraph) -> dict:
    """Order-insensitive interchange document (each undirected edge once)."""
    gens = [{"label": s, "inverse": g.generators.inverse(s)}
            for s in g.generators.labels]
    edges = []
    for u, v, s in g.edges():
        if (u, s) <= (v, g.generators.inverse(s)):
            edges.append({"from": u, "to": v, "label": s})
    doc = {
        "kind": "graph",
        "generators": gens,
        "vertices": list(g.vertices),
        "edges": edges,
        "interior": sorted(g.interior),
    }
    if g.family is not None:
        doc["family"] = {"kind": g.family.kind, "dim": g.family.dim,
                         "radius": g.family.radius}
    return doc


def graph_from_doc(doc: dict) -> LabeledGraph:
    try:
        gen_items = doc["generators"]
        vertex_ids = doc["vertices"]
        edge_items = doc["edges"]
        interior = doc["interior"]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"graph document missing field: {exc}") from exc
    labels = tuple(item["label"] for item in gen_items)
    invol = {item["label"]: item["inverse"] for item in gen_items}
    gens = GeneratorSet(labels, invol)
    if len(set(vertex_ids)) != len(vertex_ids):
        raise GraphError("duplicate vertex ids")
    adj: dict = {v: {} for v in vertex_ids}
    for item in edge_items:
        u, v, s = item["from"], item["to"], item["label"]
        if u not in adj or v not in adj:
            raise GraphError(f"edge {u!r}->{v!r} references unknown vertex id")
        if s not in invol:
            raise GraphError(f"edge {u!r}->{v!r} uses unknown label {s!r}")
        for a, b, lab in ((u, v, s), (v, u, invol[s])):
            prev = adj[a].get(lab)
            if prev is not None and prev != b:
                raise GraphError(
                    f"label {lab!r} is not a partial bijection at {a!r}")
            adj[a][lab] = b
    fam = None
    if "family" in doc:
        f = doc["family"]
        fam = FamilyTag(f["kind"], int(f["dim"]), int(f["radius"]))
    return LabeledGraph(gens, adj, interior, family=fam)


def load_graph(path) -> LabeledGraph:
    """Load and fully validate a graph interchange file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"cannot parse graph file: {exc}") from exc
    return graph_from_doc(doc)


def save_graph(g: LabeledGraph, path) -> None:
    from .reports import dump_doc
    dump_doc(graph_to_doc(g), path)
