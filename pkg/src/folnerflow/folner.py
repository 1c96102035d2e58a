"""Weighted Folner defects, parametric candidate search, and finite-stage
means with invariance-defect measurement.

The ultrafilter limit behind the invariant mean is not computable; everything
here is the stage-n shadow: exact translate ratios w(gF u F)/w(F), the stage
measure w(A n F)/w(F), and the exact invariance defect of a stage against a
group element.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graphs import (GraphError, LabeledGraph, Word, box_vertices, identity_id,
                     translate, zd_id)
from .weights import WeightFunction


@dataclass
class FolnerReport:
    """Exact translate ratios of one candidate set against a word list."""

    F: tuple
    test_words: tuple[Word, ...]
    ratios: dict[Word, Fraction]
    defect: Fraction

    def __post_init__(self):
        assert all(r >= 1 for r in self.ratios.values())
        assert self.defect == max(self.ratios.values()) - 1


def generator_words(g: LabeledGraph) -> list[Word]:
    """The default test set L: single-letter words, one per generator."""
    return [(s,) for s in g.generators.labels]


def folner_defect(g: LabeledGraph, w: WeightFunction, F, L) -> FolnerReport:
    """Max over g in L of w(gF u F)/w(F) - 1, all ratios exact.

    Every translate must stay inside the window (GraphError otherwise);
    a defined stepwise translate agrees with the infinite graph.
    """
    fset = frozenset(F)
    if not fset:
        raise GraphError("Folner defect of the empty set is undefined")
    wf = w.total(fset)
    ratios = {}
    for word in L:
        gF = translate(g, word, fset)
        ratios[word] = w.total(gF | fset) / wf
    defect = max(ratios.values()) - 1
    return FolnerReport(tuple(sorted(fset)), tuple(L), ratios, defect)


def _boxes_fitting(g: LabeledGraph, depth: int):
    """Axis-aligned boxes of Z^d whose vertices all sit in the depth-interior.

    A box [a1,b1]x...x[ad,bd] fits the l1 ball of radius R iff the worst
    corner does: sum_i max(|ai|, |bi|) <= R.
    """
    fam = g.family
    R = fam.radius - depth
    if R < 0:
        return
    d = fam.dim

    def rec(prefix, used):
        if len(prefix) == d:
            yield tuple(prefix)
            return
        for a in range(-(R - used), R - used + 1):
            for b in range(a, R - used + 1):
                cost = max(abs(a), abs(b))
                if used + cost <= R:
                    yield from rec(prefix + [(a, b)], used + cost)

    yield from rec([], 0)


def _ball_candidates(g: LabeledGraph, centers, depth: int):
    from .graphs import bfs_distances
    deep = g.depth_interior(depth)
    for c in centers:
        r = 0
        while True:
            dist = bfs_distances(g, [c], cutoff=r)
            ball = frozenset(dist)
            if not ball <= deep:
                break
            yield tuple(sorted(ball))
            r += 1


def folner_search(g: LabeledGraph, w: WeightFunction, L=None, *,
                  shape_budget: int = 200_000, centers=None) -> FolnerReport:
    """Minimum-defect report over the window's parametric shapes: axis boxes
    for Z^d windows, centered balls otherwise.  Ties break to smaller |F|,
    then lexicographic vertex ids.
    """
    if L is None:
        L = generator_words(g)
    depth = max((len(word) for word in L), default=1)
    fam = g.family
    candidates = []
    if fam is not None and fam.kind == "z":
        deep = g.depth_interior(depth)
        for ranges in _boxes_fitting(g, depth):
            ids = tuple(sorted(zd_id(v) for v in box_vertices(ranges)))
            if all(x in deep for x in ids):
                candidates.append(ids)
            if len(candidates) > shape_budget:
                raise GraphError("shape budget exceeded; raise shape_budget")
    else:
        cts = list(centers) if centers else [identity_id(fam) if fam else g.vertices[0]]
        for ids in _ball_candidates(g, cts, depth):
            candidates.append(ids)
            if len(candidates) > shape_budget:
                raise GraphError("shape budget exceeded; raise shape_budget")
    if not candidates:
        raise GraphError("no candidate shape fits the window at this depth")
    best = None
    best_key = None
    for ids in candidates:
        rep = folner_defect(g, w, ids, L)
        key = (rep.defect, len(ids), ids)
        if best_key is None or key < best_key:
            best, best_key = rep, key
    return best


@dataclass
class StageMean:
    """One stage F_n of a Folner sequence with its weight function."""

    F: tuple
    w: WeightFunction
    n: int

    def __post_init__(self):
        self.F = tuple(sorted(self.F))
        if not self.F:
            raise GraphError("stage set must be nonempty")
        self._wF = self.w.total(self.F)
        self._fset = frozenset(self.F)

    @property
    def stage_weight(self) -> Fraction:
        return self._wF


def stage_mean(m: StageMean, A) -> Fraction:
    """The stage measure w(A n F_n)/w(F_n).

    >>> m = StageMean(("0", "1"), WeightFunction.unit(), 1)
    >>> stage_mean(m, ["1", "5"])
    Fraction(1, 2)
    """
    inter = m._fset.intersection(A)
    return m.w.total(inter) / m.stage_weight


def invariance_defect(m: StageMean, A, word: Word, graph: LabeledGraph,
                      w: WeightFunction | None = None) -> Fraction:
    """|w(gA n F_n) - w(gA n gF_n)| / w(F_n), exactly.

    The second term is the cocycle-weighted stage integral of the indicator
    of A, so this is the stage-n defect of the quasi-invariance identity.
    Both translates must stay inside the window.
    """
    w = w or m.w
    aset = frozenset(A)
    gA = translate(graph, word, aset)
    gF = translate(graph, word, m._fset)
    lhs = w.total(gA & m._fset)
    rhs = w.total(gA & gF)
    return abs(lhs - rhs) / m.stage_weight


def symmetric_difference_bound(m: StageMean, word: Word, graph: LabeledGraph) -> Fraction:
    """w(gF_n symmetric-difference F_n)/w(F_n): dominates every invariance defect."""
    gF = translate(graph, word, m._fset)
    return m.w.total(gF ^ m._fset) / m.stage_weight
