"""Positive rational vertex weights: balancedness, cocycles, ball weights,
even partitions.

All arithmetic is exact (`fractions.Fraction`): the flow feasibility and
separator checks downstream are strict inequalities that must not be muddied
by rounding.  Fraction strings serialize in lowest terms ("3/4", "2").
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .graphs import GraphError, LabeledGraph, Word, apply_word, format_word
from .graphs import sphere_decomposition, zd_vec


class WeightError(ValueError):
    """Invalid weight function or weight operation."""


def parse_fraction(text: str) -> Fraction:
    """Exact fraction from "p/q", integer, or decimal text."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise WeightError(f"cannot parse fraction {text!r}") from exc


def fraction_str(x: Fraction) -> str:
    return str(Fraction(x))


class WeightFunction:
    """Total positive weight map: explicit values plus a default for the rest."""

    def __init__(self, values: dict | None = None, default=Fraction(1)):
        self.default = Fraction(default)
        if self.default <= 0:
            raise WeightError("default weight must be positive")
        self.values: dict[str, Fraction] = {}
        for v, x in (values or {}).items():
            x = Fraction(x)
            if x <= 0:
                raise WeightError(f"weight at {v!r} must be positive")
            self.values[v] = x

    @classmethod
    def unit(cls) -> "WeightFunction":
        return cls()

    def __call__(self, v: str) -> Fraction:
        return self.values.get(v, self.default)

    def total(self, H) -> Fraction:
        return sum((self(v) for v in H), Fraction(0))

    def to_doc(self) -> dict:
        return {
            "kind": "weights",
            "default": fraction_str(self.default),
            "values": {v: fraction_str(x) for v, x in sorted(self.values.items())},
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "WeightFunction":
        try:
            default = parse_fraction(doc["default"])
            values = {v: parse_fraction(x) for v, x in doc.get("values", {}).items()}
        except (KeyError, TypeError) as exc:
            raise WeightError(f"bad weight document: {exc}") from exc
        return cls(values, default)


def load_weights(path) -> WeightFunction:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise WeightError(f"cannot parse weight file: {exc}") from exc
    return WeightFunction.from_doc(doc)


def save_weights(w: WeightFunction, path) -> None:
    from .reports import dump_doc
    dump_doc(w.to_doc(), path)


def pow2_line_weight(g: LabeledGraph) -> WeightFunction:
    """w(x) = 2^x on a Z^1 window (the weighted line where Z stops being
    w-Folner and gains a compression system)."""
    if g.family is None or g.family.kind != "z" or g.family.dim != 1:
        raise WeightError("pow2 weights are defined on Z^1 windows")
    vals = {v: Fraction(2) ** zd_vec(v)[0] for v in g.vertices}
    return WeightFunction(vals, default=Fraction(1))


# -- spec operations -------------------------------------------------------


def total_weight(w: WeightFunction, H) -> Fraction:
    """Exact weight of a vertex set; empty set weighs 0.

    >>> total_weight(WeightFunction.unit(), ["a", "b", "c"])
    Fraction(3, 1)
    """
    return w.total(H)


@dataclass(frozen=True)
class BalancednessReport:
    constant: Fraction
    witness_edge: tuple  # (u, v, label) attaining the max ratio


def balancedness(g: LabeledGraph, w: WeightFunction) -> BalancednessReport:
    """Smallest C with 1/C <= w(y)/w(x) <= C over all edges, with a witness."""
    best = None
    witness = None
    for u, v, s in g.edges():
        if (u, s) > (v, g.generators.inverse(s)):
            continue
        r = w(v) / w(u)
        r = max(r, 1 / r)
        if best is None or r > best:
            best, witness = r, (u, v, s)
    if best is None:
        raise WeightError("balancedness needs at least one edge")
    return BalancednessReport(best, witness)


def cocycle(w: WeightFunction, word: Word, x: str, graph: LabeledGraph) -> Fraction:
    """The Radon-Nikodym cocycle w(gx)/w(x); errors when gx exits the window."""
    gx = apply_word(graph, word, x)
    if gx is None:
        raise GraphError(
            f"cocycle undefined: {format_word(word)!r} moves {x!r} out of the window")
    return w(gx) / w(x)


def ball_weight(tree_window: LabeledGraph, center: str, r: int) -> WeightFunction:
    """Sphere-flattened ball weight: each sphere S_i carries equal total mass,
    normalized so the boundary sphere has per-point weight 1 (so points of S_i
    weigh |S_r|/|S_i| and the ball weighs (r+1)|S_r|).  Vertices outside the
    ball keep weight 1.

    >>> g = __import__("folnerflow.graphs", fromlist=["x"]).build_cayley_window("free", dim=2, radius=2)
    >>> wf = ball_weight(g, "", 1)
    >>> [wf(v) for v in ("", "a", "B")]
    [Fraction(4, 1), Fraction(1, 1), Fraction(1, 1)]
    """
    if r < 0:
        raise WeightError("ball radius must be >= 0")
    spheres = sphere_decomposition(tree_window, center, r)
    boundary_size = len(spheres[r])
    vals = {}
    for sp in spheres:
        per_point = Fraction(boundary_size, len(sp))
        for v in sp:
            vals[v] = per_point
    return WeightFunction(vals, default=Fraction(1))


class PartitionInfeasible(WeightError):
    """Even partition impossible at this radius; carries the blocking vertex."""

    def __init__(self, message: str, blocking_vertex: str | None):
        super().__init__(message)
        self.blocking_vertex = blocking_vertex


def even_partition(spheres, w: WeightFunction, k: int) -> list[list]:
    """Split a sphere-ordered ball into k parts, each of weight < (2/k) of the
    ball, by a greedy sphere-major sweep that closes a part once it reaches
    a 1/k share.  Raises PartitionInfeasible (naming the blocking vertex)
    when some part inevitably overshoots the 2/k bound.
    """
    if k < 1:
        raise WeightError("k must be >= 1")
    order = [v for sp in spheres for v in sorted(sp)]
    total = w.total(order)
    share = total / k
    bound = 2 * share
    parts: list[list] = []
    cur: list = []
    acc = Fraction(0)
    for v in order:
        cur.append(v)
        acc += w(v)
        if acc >= share and len(parts) < k - 1:
            parts.append(cur)
            cur, acc = [], Fraction(0)
    if cur:
        parts.append(cur)
    for p in parts:
        pw = w.total(p)
        if pw >= bound:
            blocker = max(p, key=lambda v: (w(v), v))
            raise PartitionInfeasible(
                f"part of weight {pw} reaches the 2/k bound {bound}; "
                f"heaviest vertex {blocker!r}",
                blocking_vertex=blocker)
    if len(parts) < k:
        raise PartitionInfeasible(
            f"greedy sweep ran out of vertices before filling {k} parts",
            blocking_vertex=None)
    return parts
