"""The w-Folner / w-compression dichotomy engine.

Suppliers are the depth-k interior vertices, each shipping its full weight
w(x); buyers are the T-images with budget w(y)/2 (T = words of length <= k,
identity included).  The transportation problem is solved by an exact
blocking-flow max-flow over integers after clearing denominators:

* a saturating flow yields Psi_g(x) = a_g(x)/w(x) with pointwise sum 1 and
  buyer loads sum_g Psi_g(g^-1 x) w(g^-1 x)/w(x) <= 1/2 -- a compression
  certificate,
* otherwise the residual reachability gives a supplier set L with
  w(L) > w(N(L))/2 -- a Hall-violating cut witness, i.e. a non-doubling set.

Flow variables sit on edges (x, y, g) with y = g.x, so the buyer intake at y
is literally sum_g a_g(g^-1 y), the indexing of the compression condition.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .graphs import (GraphError, LabeledGraph, Word, apply_word, ball_elements,
                     element_word, format_word, neighborhood)
from .weights import WeightFunction


@dataclass
class TransportInstance:
    """Bipartite supply/budget problem for one window, weight, and power k."""

    suppliers: tuple
    buyers: tuple
    edges: tuple          # (x, y, word) with y = word applied to x
    supply: dict          # x -> w(x)
    capacity: dict        # y -> capacity_fraction * w(y)
    T: tuple[Word, ...]
    k: int
    exact_k: bool
    capacity_fraction: Fraction

    def neighbors_of(self, L) -> list:
        lset = frozenset(L)
        return sorted({y for x, y, _ in self.edges if x in lset})


@dataclass
class FlowAssignment:
    flow: dict            # (x, y, word) -> Fraction
    feasible: bool
    value: Fraction
    source_reachable: frozenset = field(default_factory=frozenset)

    def shipped(self, x) -> Fraction:
        return sum((f for (u, _, _), f in self.flow.items() if u == x), Fraction(0))


@dataclass
class CompressionSystem:
    """Psi_g(x) on suppliers: pointwise sum 1, pulled-back buyer load < 1/2."""

    T: tuple[Word, ...]
    psi: dict             # (word, x) -> Fraction
    suppliers: tuple
    buyers: tuple


@dataclass
class CutWitness:
    """Hall violation: w(L) > w(K)/2 with K all buyers adjacent to L."""

    L: tuple
    K: tuple
    lhs: Fraction
    rhs: Fraction


@dataclass
class DoublingReport:
    ratio: Fraction
    holds: bool           # ratio > 2
    expanded: tuple


def action_words(g: LabeledGraph, k: int, *, exact_k: bool = False) -> list[Word]:
    """Deterministic word list for T = S^k restricted to the window.

    Built-in families enumerate canonical element representatives; custom
    windows enumerate words over the labels, deduplicated by their action
    table on the depth-k interior (distinct words of a quotient act alike).
    """
    if k < 0:
        raise GraphError("word power k must be >= 0")
    if g.family is not None:
        fam = g.family
        return [element_word(fam, a) for a in ball_elements(fam, k, exact=exact_k)]
    deep = sorted(g.depth_interior(k))
    seen: dict[tuple, Word] = {}
    frontier: list[Word] = [()]
    pool: list[Word] = [()]
    for _ in range(k):
        nxt = []
        for word in frontier:
            for s in g.generators.labels:
                nxt.append((s,) + word)
        pool += nxt
        frontier = nxt
    words = []
    for word in sorted(pool, key=lambda t: (len(t), t)):
        if exact_k and len(word) % 2 != k % 2:
            continue
        table = tuple(apply_word(g, word, v) for v in deep)
        if table not in seen:
            seen[table] = word
            words.append(word)
    return words


def build_transport(g: LabeledGraph, w: WeightFunction, k: int, *,
                    exact_k: bool = False,
                    capacity_fraction: Fraction = Fraction(1, 2)) -> TransportInstance:
    """Instance with suppliers = depth-k interior, buyers = their T-images."""
    if not 0 < capacity_fraction < 1:
        raise GraphError("capacity fraction must sit in (0,1)")
    suppliers = sorted(g.depth_interior(k))
    if not suppliers:
        raise GraphError("empty supplier set: window too shallow for this k")
    T = action_words(g, k, exact_k=exact_k)
    edges = []
    buyers = set()
    for x in suppliers:
        for word in T:
            y = apply_word(g, word, x)
            assert y is not None  # depth-k interior guarantees definedness
            edges.append((x, y, word))
            buyers.add(y)
    buyers = tuple(sorted(buyers))
    supply = {x: w(x) for x in suppliers}
    capacity = {y: capacity_fraction * w(y) for y in buyers}
    edges.sort(key=lambda e: (e[0], e[2], e[1]))
    return TransportInstance(tuple(suppliers), buyers, tuple(edges), supply,
                             capacity, tuple(T), k, exact_k, capacity_fraction)


class _Dinic:
    """Blocking-flow max flow on integer capacities (python bigints)."""

    def __init__(self, n: int):
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, cap: int) -> int:
        idx = len(self.to)
        self.adj[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.adj[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        return idx

    def _levels(self, s: int, t: int):
        level = [-1] * len(self.adj)
        level[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for idx in self.adj[u]:
                v = self.to[idx]
                if self.cap[idx] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    dq.append(v)
        return level if level[t] >= 0 else None

    def _augment_once(self, s: int, t: int, level, it) -> int:
        """One augmenting path in the level graph via advance/retreat with
        current-arc pointers; 0 when the level graph is exhausted."""
        path: list[int] = []
        u = s
        while True:
            if u == t:
                pushed = min(self.cap[idx] for idx in path)
                for idx in path:
                    self.cap[idx] -= pushed
                    self.cap[idx ^ 1] += pushed
                return pushed
            advanced = False
            while it[u] < len(self.adj[u]):
                idx = self.adj[u][it[u]]
                v = self.to[idx]
                if self.cap[idx] > 0 and level[v] == level[u] + 1:
                    path.append(idx)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if advanced:
                continue
            if u == s:
                return 0
            level[u] = -1  # dead end: prune and retreat
            idx = path.pop()
            u = self.to[idx ^ 1]
            it[u] += 1

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        n = len(self.adj)
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            it = [0] * n
            while True:
                pushed = self._augment_once(s, t, level, it)
                if not pushed:
                    break
                total += pushed

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for idx in self.adj[u]:
                v = self.to[idx]
                if self.cap[idx] > 0 and v not in seen:
                    seen.add(v)
                    dq.append(v)
        return seen


def max_flow(inst: TransportInstance) -> FlowAssignment:
    """Exact maximum flow; feasible iff every supply ships in full."""
    scale = lcm(*(f.denominator for f in inst.supply.values()),
                *(f.denominator for f in inst.capacity.values()))
    sidx = {x: i + 1 for i, x in enumerate(inst.suppliers)}
    bidx = {y: len(inst.suppliers) + 1 + j for j, y in enumerate(inst.buyers)}
    n = len(inst.suppliers) + len(inst.buyers) + 2
    src, snk = 0, n - 1
    net = _Dinic(n)
    for x in inst.suppliers:
        net.add_edge(src, sidx[x], int(inst.supply[x] * scale))
    edge_ids = {}
    for x, y, word in inst.edges:
        edge_ids[(x, y, word)] = net.add_edge(
            sidx[x], bidx[y], int(inst.supply[x] * scale))
    for y in inst.buyers:
        net.add_edge(bidx[y], snk, int(inst.capacity[y] * scale))
    value = net.max_flow(src, snk)
    total = sum(int(f * scale) for f in inst.supply.values())
    flow = {}
    for key, idx in edge_ids.items():
        f = net.cap[idx ^ 1]  # flow on the forward arc = reverse capacity
        if f:
            flow[key] = Fraction(f, scale)
    reach = net.reachable(src)
    reach_sup = frozenset(x for x in inst.suppliers if sidx[x] in reach)
    return FlowAssignment(flow, value == total, Fraction(value, scale), reach_sup)


def extract_compression(flow: FlowAssignment, inst: TransportInstance,
                        w: WeightFunction) -> CompressionSystem:
    """Psi_g(x) = a_g(x)/w(x) from a saturating flow."""
    if not flow.feasible:
        raise GraphError("cannot extract a compression system from an infeasible flow")
    psi = {}
    for (x, _, word), f in flow.flow.items():
        if f:
            psi[(word, x)] = f / w(x)
    return CompressionSystem(inst.T, psi, inst.suppliers, inst.buyers)


@dataclass
class CompressionCheck:
    ok: bool
    min_slack: Fraction | None     # min over buyers of 1/2 - load
    worst_buyer: str | None
    failures: list

    def __bool__(self) -> bool:
        return self.ok


def verify_compression(cs: CompressionSystem, w: WeightFunction,
                       inst: TransportInstance, *, strict: bool = False,
                       bound: Fraction = Fraction(1, 2)) -> CompressionCheck:
    """Exact check of both compression conditions with per-vertex slack.

    Condition 1: sum_g Psi_g(x) = 1 on suppliers (and every Psi in [0,1]).
    Condition 2: sum_g Psi_g(g^-1 x) w(g^-1 x)/w(x) <= bound on buyers
    (< with strict=True, the paper's inequality).  The bound is the
    compression-definition constant (1/2), not the solver capacity, which a
    strict solve deliberately scales below it.
    """
    failures = []
    for (word, x), val in cs.psi.items():
        if not 0 <= val <= 1:
            failures.append(("psi-range", x, format_word(word), val))
    sums = {x: Fraction(0) for x in cs.suppliers}
    for (word, x), val in cs.psi.items():
        if x not in sums:
            failures.append(("psi-off-supplier", x, format_word(word), val))
            continue
        sums[x] += val
    for x, s in sorted(sums.items()):
        if s != 1:
            failures.append(("sum-not-one", x, None, s))
    load = {y: Fraction(0) for y in cs.buyers}
    for x, y, word in inst.edges:
        val = cs.psi.get((word, x))
        if val:
            load[y] += val * w(x) / w(y)
    min_slack = None
    worst = None
    for y, q in sorted(load.items()):
        slack = bound - q
        if min_slack is None or slack < min_slack:
            min_slack, worst = slack, y
        if q > bound or (strict and q == bound):
            failures.append(("load-over", y, None, q))
    return CompressionCheck(not failures, min_slack, worst, failures)


def min_cut_witness(inst: TransportInstance, flow: FlowAssignment) -> CutWitness:
    """Hall-violating supplier set from residual reachability."""
    if flow.feasible:
        raise GraphError("min cut witness requested for a feasible instance")
    L = tuple(sorted(flow.source_reachable))
    K = tuple(inst.neighbors_of(L))
    lhs = sum((inst.supply[x] for x in L), Fraction(0))
    rhs = sum((inst.capacity[y] for y in K), Fraction(0))
    if not lhs > rhs:
        raise AssertionError("residual cut fails to violate the Hall condition")
    return CutWitness(L, K, lhs, rhs)


def doubling_check(g: LabeledGraph, w: WeightFunction, C, k: int) -> DoublingReport:
    """ratio = w(B_k C)/w(C) with B_k C the k-step image of C; holds iff > 2."""
    cset = frozenset(C)
    if not cset:
        raise GraphError("doubling check needs a nonempty set")
    if not cset <= g.depth_interior(k):
        raise GraphError("k-neighborhood of C exits the window")
    expanded = neighborhood(g, cset, k)
    ratio = w.total(expanded) / w.total(cset)
    return DoublingReport(ratio, ratio > 2, tuple(expanded))


@dataclass
class SolveResult:
    """Outcome of the window-scale dichotomy: exactly one certificate."""

    kind: str                       # "compression" | "cut"
    instance: TransportInstance
    flow: FlowAssignment
    system: CompressionSystem | None = None
    witness: CutWitness | None = None
    strict: bool = False
    strict_requested: bool = False
    strict_failed: bool = False
    doubling_ratio: Fraction | None = None
    target: Fraction = Fraction(1, 2)  # compression-definition bound


def solve_transport(g: LabeledGraph, w: WeightFunction, k: int, *,
                    exact_k: bool = False, strict: bool = False,
                    capacity_fraction: Fraction = Fraction(1, 2)) -> SolveResult:
    """Run the dichotomy; with strict=True, rescale buyer budgets by
    2/(ratio+2) (ratio = measured doubling of the supplier set) and re-solve,
    so a saturating flow has loads strictly below 1/2."""
    inst = build_transport(g, w, k, exact_k=exact_k,
                           capacity_fraction=capacity_fraction)
    flow = max_flow(inst)
    if not flow.feasible:
        witness = min_cut_witness(inst, flow)
        return SolveResult("cut", inst, flow, witness=witness,
                           strict_requested=strict, target=capacity_fraction)
    ratio = (w.total(inst.buyers if not exact_k else
                     neighborhood(g, inst.suppliers, k))
             / w.total(inst.suppliers))
    if strict and ratio > 2:
        scaled = 2 * capacity_fraction / (ratio / 2 + 1)
        inst2 = build_transport(g, w, k, exact_k=exact_k,
                                capacity_fraction=scaled)
        flow2 = max_flow(inst2)
        if flow2.feasible:
            cs = extract_compression(flow2, inst2, w)
            return SolveResult("compression", inst2, flow2, system=cs,
                               strict=True, strict_requested=True,
                               doubling_ratio=ratio, target=capacity_fraction)
    cs = extract_compression(flow, inst, w)
    return SolveResult("compression", inst, flow, system=cs,
                       strict=False, strict_requested=strict,
                       strict_failed=strict, doubling_ratio=ratio,
                       target=capacity_fraction)


def stage_contradiction(cs: CompressionSystem, inst: TransportInstance,
                        w: WeightFunction, stage) -> tuple[Fraction, Fraction]:
    """Stage-measure shadow of the no-invariant-mean argument.

    Returns (q1, q2): q1 = stage integral of sum_g Psi_g (equals the stage
    weight of the supplier part, i.e. 1 minus the boundary defect), and
    q2 = stage integral of the pulled-back load (at most 1/2).  A w-invariant
    mean would force q1 = q2, which the gap contradicts.
    """
    fset = frozenset(stage)
    wF = w.total(fset)
    sup = fset & set(cs.suppliers)
    q1 = w.total(sup) / wF
    load_total = Fraction(0)
    for x, y, word in inst.edges:
        if y in fset:
            val = cs.psi.get((word, x))
            if val:
                load_total += val * w(x)
    q2 = load_total / wF
    return q1, q2
