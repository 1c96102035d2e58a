"""(w,eps)-separating sets: exhaustive optimum, asymptotic-dimension shells,
the randomized Folner-tiling separator, quasi-isometry transfer, and the
bounded-piece decomposition driven by a Folner stage sequence.

Every separator re-verifies its own guarantees exactly: component sizes are
recounted and each claimed inequality is stored with both sides as exact
fractions.
"""

from __future__ import annotations

import hashlib
import math
import random
import weakref
from dataclasses import dataclass, field
from fractions import Fraction

from .graphs import (LabeledGraph, ball_size_bound, bfs_distances, boundary,
                     family_compose, family_inverse, identity_id,
                     induced_components, neighborhood, zd_vec)
from .weights import WeightFunction, fraction_str


class SeparatorError(ValueError):
    """Separator precondition or backend failure."""


@dataclass
class Inequality:
    """A verified claim lhs <= rhs (or strict), both sides exact."""

    name: str
    lhs: Fraction
    rhs: Fraction
    strict: bool = False

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs if self.strict else self.lhs <= self.rhs

    def to_doc(self) -> dict:
        return {"name": self.name, "lhs": fraction_str(self.lhs),
                "rhs": fraction_str(self.rhs),
                "relation": "<" if self.strict else "<=",
                "holds": self.holds}


@dataclass
class SeparatorResult:
    M: tuple
    weight_fraction: Fraction
    max_component: int
    method: str
    seed: int | None = None
    extras: dict = field(default_factory=dict)
    inequalities: list = field(default_factory=list)


def check_separator(g: LabeledGraph, H, w: WeightFunction, M) -> tuple[Fraction, int]:
    """Recompute (weight fraction, max component) of a separator from scratch."""
    hset = frozenset(H)
    mset = frozenset(M)
    if not mset <= hset:
        raise SeparatorError("separator must be a subset of H")
    comps = induced_components(g, hset - mset)
    maxc = max((len(c) for c in comps), default=0)
    return w.total(mset) / w.total(hset), maxc


# -- brute force -----------------------------------------------------------

_mask_cache: "weakref.WeakKeyDictionary[LabeledGraph, dict]" = weakref.WeakKeyDictionary()


def _minimal_valid_masks(g: LabeledGraph, order: tuple, K: int) -> list[int]:
    """Minimal removal masks leaving all induced components of size <= K.

    Validity is upward closed in the removed set, so minimality is a
    single-bit-down check against the full validity table.
    """
    per_graph = _mask_cache.setdefault(g, {})
    key = (order, K)
    if key in per_graph:
        return per_graph[key]
    n = len(order)
    idx = {v: i for i, v in enumerate(order)}
    hset = frozenset(order)
    nbr = [0] * n
    for v in order:
        m = 0
        for u in g.neighbors(v):
            if u in hset:
                m |= 1 << idx[u]
        nbr[idx[v]] = m
    full = (1 << n) - 1
    valid = bytearray(1 << n)
    for rem in range(1 << n):
        kept = full ^ rem
        todo = kept
        ok = True
        while todo:
            seed = todo & -todo
            comp = seed
            frontier = seed
            while frontier:
                new = 0
                f = frontier
                while f:
                    b = f & -f
                    f ^= b
                    new |= nbr[b.bit_length() - 1]
                frontier = new & kept & ~comp
                comp |= frontier
            if comp.bit_count() > K:
                ok = False
                break
            todo &= ~comp
        valid[rem] = ok
    minimal = []
    for rem in range(1 << n):
        if not valid[rem]:
            continue
        m = rem
        is_min = True
        while m:
            b = m & -m
            m ^= b
            if valid[rem ^ b]:
                is_min = False
                break
        if is_min:
            minimal.append(rem)
    per_graph[key] = minimal
    return minimal


def brute_separator(g: LabeledGraph, H, w: WeightFunction, K: int, *,
                    cap: int = 20) -> SeparatorResult:
    """Exhaustive minimum-weight M leaving components of size <= K; ties break
    to fewer vertices, then lexicographic ids.  Only minimal removal sets are
    scanned (positive weights put the optimum on that antichain).
    """
    order = tuple(sorted(H))
    n = len(order)
    if n > cap:
        raise SeparatorError(f"brute force capped at {cap} vertices, got {n}")
    if K < 1:
        raise SeparatorError("component bound K must be >= 1")
    if n == 0:
        return SeparatorResult((), Fraction(0), 0, "brute", extras={"K": K})
    weights = [w(v) for v in order]
    best = None
    best_key = None
    for rem in _minimal_valid_masks(g, order, K):
        ids = tuple(order[i] for i in range(n) if rem >> i & 1)
        wt = sum((weights[i] for i in range(n) if rem >> i & 1), Fraction(0))
        key = (wt, len(ids), ids)
        if best_key is None or key < best_key:
            best, best_key = ids, key
    frac, maxc = check_separator(g, order, w, best)
    assert maxc <= K
    return SeparatorResult(best, frac, maxc, "brute",
                           extras={"K": K, "optimal": True})


# -- asymptotic-dimension shells -------------------------------------------


@dataclass
class CoverFamily:
    """Families of far-apart bounded bricks jointly covering the window."""

    families: list            # list of families; each a list of sorted tuples
    r: int                    # same-family separation scale
    R: int                    # component diameter bound

    def family_count(self) -> int:
        return len(self.families)

    def to_doc(self) -> dict:
        return {"kind": "cover", "r": self.r, "R": self.R,
                "families": [[list(c) for c in fam] for fam in self.families]}

    @classmethod
    def from_doc(cls, doc: dict) -> "CoverFamily":
        try:
            fams = [[tuple(c) for c in fam] for fam in doc["families"]]
            return cls(fams, int(doc["r"]), int(doc["R"]))
        except (KeyError, TypeError) as exc:
            raise SeparatorError(f"bad cover document: {exc}") from exc


def asdim_cover(g: LabeledGraph, r: int) -> CoverFamily:
    """Parity-brick cover of a Z^d window: 2^d families of side-r bricks,
    same-family bricks at l1 distance > r, brick diameter <= d(r-1)."""
    if g.family is None or g.family.kind != "z":
        raise SeparatorError(
            "built-in covers exist for Z^d windows only; supply a cover file")
    if r < 1:
        raise SeparatorError("cover scale r must be >= 1")
    d = g.family.dim
    groups: dict = {}
    for v in g.vertices:
        vec = zd_vec(v)
        block = tuple(c // r for c in vec)
        parity = tuple(b % 2 for b in block)
        groups.setdefault(parity, {}).setdefault(block, []).append(v)
    families = []
    for parity in sorted({p for p in groups}):
        comps = []
        for block in sorted(groups[parity]):
            for comp in induced_components(g, groups[parity][block]):
                comps.append(tuple(comp))
        families.append(comps)
    cover = CoverFamily(families, r, d * (r - 1))
    validate_cover(g, cover)
    return cover


def validate_cover(g: LabeledGraph, cover: CoverFamily) -> None:
    """Re-check the cover invariants: coverage, same-family separation >= r,
    per-component diameter <= R."""
    covered = set()
    for fam in cover.families:
        fam_vertices = set()
        for comp in fam:
            cset = set(comp)
            if cset & fam_vertices:
                raise SeparatorError("cover components overlap within a family")
            fam_vertices |= cset
        covered |= fam_vertices
        # nearest-component labels; a short inter-component path would show up
        # as an edge whose endpoint labels differ with depth sum < r - 1
        label = {}
        dist = {}
        frontier = []
        for ci, comp in enumerate(fam):
            for v in comp:
                label[v] = ci
                dist[v] = 0
                frontier.append(v)
        cap = (cover.r + 1) // 2
        frontier = sorted(frontier)
        depth = 0
        while frontier and depth < cap:
            nxt = []
            for v in frontier:
                for u in g.neighbors(v):
                    if u not in label:
                        label[u] = label[v]
                        dist[u] = depth + 1
                        nxt.append(u)
            frontier = sorted(nxt)
            depth += 1
        for u in label:
            for v in g.neighbors(u):
                if v in label and label[u] != label[v]:
                    if dist[u] + dist[v] + 1 < cover.r:
                        raise SeparatorError(
                            f"cover components {label[u]} and {label[v]} are "
                            f"at distance {dist[u] + dist[v] + 1} < r={cover.r}")
        for comp in fam:
            if _component_diameter_bound(g, comp) > cover.R:
                raise SeparatorError("cover component exceeds diameter bound R")
    missing = g.vertex_set - covered
    if missing:
        raise SeparatorError(
            f"cover misses {len(missing)} vertices, e.g. {sorted(missing)[:3]}")


def _component_diameter_bound(g: LabeledGraph, comp) -> int:
    if g.family is not None and g.family.kind == "z":
        vecs = [zd_vec(v) for v in comp]
        return sum(max(c[i] for c in vecs) - min(c[i] for c in vecs)
                   for i in range(len(vecs[0])))
    worst = 0
    for v in comp:
        dist = bfs_distances(g, [v])
        worst = max(worst, max(dist.get(u, 10**9) for u in comp))
    return worst


def asdim_separator(g: LabeledGraph, H, w: WeightFunction, eps: Fraction,
                    cover: CoverFamily | None = None) -> SeparatorResult:
    """Shell separator: around each cover family pick the lightest of the
    1 + floor(1/eps) disjoint shells S_i(t) (ambient distance exactly t from
    the family), guaranteeing w(S) <= (families) * eps * w(H) and ambient
    component diameter <= families * (R+1)."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise SeparatorError("eps must sit in (0,1)")
    depth = 1 + math.floor(1 / eps)
    if cover is None:
        cover = asdim_cover(g, 2 * depth)
    if cover.r < 2 * depth:
        raise SeparatorError(
            f"cover scale r={cover.r} below 2(1+[1/eps])={2 * depth}")
    hset = frozenset(H)
    if not hset <= g.vertex_set:
        raise SeparatorError("H contains unknown vertex ids")
    reach = frozenset(neighborhood(g, hset, depth))
    if not reach <= g.interior:
        raise SeparatorError(
            "window too small: the shell neighborhood of H leaves the interior")
    wH = w.total(hset)
    m = cover.family_count()
    sep: set = set()
    chosen = []
    for fi, fam in enumerate(cover.families):
        union = [v for comp in fam for v in comp]
        dist = bfs_distances(g, union, cutoff=depth)
        shell_weight = [Fraction(0)] * (depth + 1)
        shell_members: list[list] = [[] for _ in range(depth + 1)]
        for v, dv in dist.items():
            if dv >= 1 and v in hset:
                shell_weight[dv] += w(v)
                shell_members[dv].append(v)
        t_best = min(range(1, depth + 1), key=lambda t: (shell_weight[t], t))
        chosen.append({"family": fi, "t": t_best,
                       "weight": fraction_str(shell_weight[t_best])})
        sep.update(shell_members[t_best])
    M = tuple(sorted(sep))
    frac, maxc = check_separator(g, hset, w, M)
    diameter_bound = m * (cover.R + 1)
    component_bound = ball_size_bound(g, diameter_bound)
    ineqs = [
        Inequality("separator-weight", w.total(M), m * eps * wH),
        Inequality("max-component", Fraction(maxc), Fraction(component_bound)),
    ]
    if not all(iq.holds for iq in ineqs):
        raise AssertionError("asdim separator failed its own guarantee")
    return SeparatorResult(
        M, frac, maxc, "asdim",
        extras={"families": m, "shell_depth": depth, "r": cover.r,
                "R": cover.R, "eps": fraction_str(eps), "chosen": chosen,
                "diameter_bound": diameter_bound,
                "component_bound": component_bound},
        inequalities=ineqs)


# -- randomized Folner-tiling separator -------------------------------------

_SCALE_BITS = 64
_SCALE = 1 << _SCALE_BITS


def _exp_upper_bound(n: int) -> Fraction:
    """Certified rational upper bound on e^{-n}: the reciprocal of a partial
    sum of the series for e^n."""
    total = Fraction(0)
    term = Fraction(1)
    for j in range(1, 3 * n + 2):
        total += term
        term = term * n / j
    return 1 / total


@dataclass
class FolnerTiling:
    """A Folner stage F_n with its boundary and the dyadic sampling rate
    p = 1 - t, t = (X+1)/2^64, where X is the largest integer with
    (X/2^64)^|bd F| <= 1 - 1/n.  Rounding p downward keeps the expected
    shell weight at most w(H)/n exactly."""

    F: tuple
    boundary: tuple
    n: int
    threshold: int            # site in R iff 64-bit draw < threshold

    @property
    def p_hat(self) -> Fraction:
        return Fraction(self.threshold, _SCALE)

    @property
    def miss_term(self) -> Fraction:
        """Exact P[a fixed vertex stays uncovered] = (1-p)^{|F|}."""
        return (1 - self.p_hat) ** len(self.F)

    @property
    def shell_term(self) -> Fraction:
        return Fraction(1, self.n)

    def exp_bound(self) -> Fraction:
        return _exp_upper_bound(self.n)

    def paper_regime(self) -> bool:
        return len(self.boundary) * self.n**2 <= len(self.F)


def build_folner_tiling(g: LabeledGraph, F, n: int) -> FolnerTiling:
    """Tiling from a stage set F inside the interior of a built-in window."""
    if g.family is None:
        raise SeparatorError(
            "the randomized separator needs a built-in group window "
            "(right translation is undefined on custom Schreier windows)")
    if n < 1:
        raise SeparatorError("stage index n must be >= 1")
    fset = frozenset(F)
    if identity_id(g.family) not in fset:
        raise SeparatorError("the tile F must contain the identity")
    bd = tuple(boundary(g, fset))
    if n == 1:
        return FolnerTiling(tuple(sorted(fset)), bd, 1, _SCALE)
    b = len(bd)
    if b == 0:
        raise SeparatorError("tile with empty boundary cannot be sampled")
    # largest X with (X/2^64)^b <= (n-1)/n
    lo, hi = 0, _SCALE
    rhs = (n - 1) * _SCALE**b
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**b * n <= rhs:
            lo = mid
        else:
            hi = mid - 1
    threshold = _SCALE - (lo + 1)
    return FolnerTiling(tuple(sorted(fset)), bd, n, threshold)


def _trial_rng(seed: int, trial: int) -> random.Random:
    digest = hashlib.sha256(f"folnerflow:{seed}:{trial}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


def random_folner_separator(g: LabeledGraph, H, w: WeightFunction,
                            tiling: FolnerTiling, *, seed: int = 0,
                            max_trials: int = 20) -> SeparatorResult:
    """Sample sparse translate sets R until w(S u B) clears the Markov-doubled
    expectation bound 2(1/n + (1-p)^|F|) w(H); every trial (accepted or not)
    splits H into pieces of size at most |F|.

    S = (bd F)R n H, B = H \\ FR.  Products are taken by canonical group
    arithmetic, so only translates meeting H matter.
    """
    fam = g.family
    if fam is None:
        raise SeparatorError("randomized separator needs a built-in group window")
    hset = frozenset(H)
    if not hset <= g.vertex_set:
        raise SeparatorError("H contains unknown vertex ids")
    wH = w.total(hset)
    finv = [family_inverse(fam, f) for f in tiling.F]
    sites = sorted({family_compose(fam, fi, h) for fi in finv for h in hset})
    accept_bound = 2 * (tiling.shell_term + tiling.miss_term) * wH
    paper_bound = 2 * (tiling.shell_term + tiling.exp_bound()) * wH
    best = None
    best_key = None
    for trial in range(max_trials):
        rng = _trial_rng(seed, trial)
        R = [v for v in sites if rng.getrandbits(_SCALE_BITS) < tiling.threshold]
        covered = set()
        shell = set()
        for v in R:
            for f in tiling.F:
                p = family_compose(fam, f, v)
                if p in hset:
                    covered.add(p)
            for b in tiling.boundary:
                p = family_compose(fam, b, v)
                if p in hset:
                    shell.add(p)
        B = hset - covered
        M = tuple(sorted(shell | B))
        frac, maxc = check_separator(g, hset, w, M)
        if maxc > len(tiling.F):
            raise AssertionError("component exceeded |F|: translation broke edges")
        wM = w.total(M)
        accepted = wM <= accept_bound
        key = (wM, trial)
        if best_key is None or key < best_key:
            best_key = key
            best = (M, frac, maxc, trial, accepted, wM)
        if accepted:
            break
    M, frac, maxc, trial, accepted, wM = best
    ineqs = [Inequality("max-component", Fraction(maxc), Fraction(len(tiling.F)))]
    if accepted:
        ineqs.append(Inequality("accepted-weight", wM, accept_bound))
    return SeparatorResult(
        M, frac, maxc, "random-folner", seed=seed,
        extras={"n": tiling.n, "trial": trial, "accepted": accepted,
                "unaccepted": not accepted,
                "p_hat": fraction_str(tiling.p_hat),
                "accept_bound": fraction_str(accept_bound),
                "paper_bound": fraction_str(paper_bound),
                "paper_regime": tiling.paper_regime(),
                "component_bound": len(tiling.F),
                "tile_size": len(tiling.F),
                "tile_boundary": len(tiling.boundary)},
        inequalities=ineqs)


# -- quasi-isometry transfer -------------------------------------------------


@dataclass
class QIMap:
    """Tabulated quasi-isometry with its nearest-point retraction."""

    g1: LabeledGraph
    g2: LabeledGraph
    iota: dict
    c: int
    f: dict
    C: int


def build_qi_map(g1: LabeledGraph, g2: LabeledGraph, iota: dict, c: int, *,
                 pair_budget: int = 1500) -> QIMap:
    """Validate the (c,c) quasi-isometry inequalities, c-density, and preimage
    bounds, and tabulate f(z) = nearest iota-image (ties to the smallest
    preimage id)."""
    if c < 1:
        raise SeparatorError("quasi-isometry constant c must be >= 1")
    if set(iota) != set(g1.vertices):
        raise SeparatorError("iota must be defined on every vertex of G1")
    for x, z in iota.items():
        if z not in g2.vertex_set:
            raise SeparatorError(f"iota({x!r}) = {z!r} is not a G2 vertex")
    d = max(g1.degree_bound, g2.degree_bound)
    C = max(d ** (2 * c + 1), c * c)
    preimages: dict = {}
    for x in g1.vertices:
        preimages.setdefault(iota[x], []).append(x)
    for z, xs in preimages.items():
        if len(xs) > c * c:
            raise SeparatorError(
                f"{z!r} has {len(xs)} iota-preimages, above c^2 = {c * c}")
    images = sorted(preimages)
    image_dist = {u: bfs_distances(g2, [u]) for u in images}
    f = {}
    for z in g2.vertices:
        best = None
        for u in images:
            du = image_dist[u].get(z)
            if du is None:
                continue
            cand = (du, min(preimages[u]))
            if best is None or cand < best:
                best = cand
        if best is None or best[0] > c:
            raise SeparatorError(
                f"iota image is not c-dense: {z!r} is farther than c = {c}")
        f[z] = best[1]
    fcounts: dict = {}
    for z, x in f.items():
        fcounts[x] = fcounts.get(x, 0) + 1
    worst = max(fcounts.values())
    if worst > C * C:
        raise SeparatorError(f"f has {worst} preimages somewhere, above C^2")
    # quasi-isometry inequalities on all pairs, or a seeded sample
    verts = list(g1.vertices)
    pairs = []
    if len(verts) * (len(verts) - 1) // 2 <= pair_budget:
        pairs = [(a, b) for i, a in enumerate(verts) for b in verts[i + 1:]]
    else:
        rng = random.Random(f"folnerflow-qi:{len(verts)}")
        for _ in range(pair_budget):
            a, b = rng.sample(verts, 2)
            pairs.append((a, b))
    sources = sorted({a for a, _ in pairs})
    d1 = {a: bfs_distances(g1, [a]) for a in sources}
    for a, b in pairs:
        if b not in d1[a]:
            continue  # disconnected pair carries no constraint in the window
        dd1 = d1[a][b]
        dd2 = image_dist[iota[a]].get(iota[b]) if iota[a] in image_dist else None
        if dd2 is None:
            raise SeparatorError("iota images disconnected inside the G2 window")
        if not (Fraction(dd1, c) - c <= dd2 <= c * dd1 + c):
            raise SeparatorError(
                f"quasi-isometry inequality fails on pair ({a!r}, {b!r}): "
                f"d1={dd1}, d2={dd2}, c={c}")
    return QIMap(g1, g2, iota, c, f, C)


def qi_transfer(qi: QIMap, H1, w: WeightFunction, backend, eps: Fraction) -> SeparatorResult:
    """Pull a separator for the fattened image back through the quasi-isometry.

    Builds H2+ (the 2c-neighborhood of iota(H1)), the pushed weights
    w'(z) = w(f(z)) and w''(z) = sum of w' over the 2c-ball, runs the backend
    on (H2+, w''), fattens its separator by 2c, and returns the iota-preimage.
    The component-separation claim is checked by cross-tabulation on every run.
    """
    eps = Fraction(eps)
    g1, g2, c = qi.g1, qi.g2, qi.c
    h1 = frozenset(H1)
    if not h1 <= g1.vertex_set:
        raise SeparatorError("H1 contains unknown vertex ids")
    H2 = sorted({qi.iota[x] for x in h1})
    H2p = frozenset(neighborhood(g2, H2, 2 * c))
    wprime = {z: w(qi.f[z]) for z in H2p}
    wpp_vals = {}
    for z in sorted(H2p):
        ball = bfs_distances(g2, [z], cutoff=2 * c)
        wpp_vals[z] = sum((wprime[y] for y in ball if y in H2p), Fraction(0))
    wpp = WeightFunction(wpp_vals, default=Fraction(1))
    sep2 = backend(g2, tuple(sorted(H2p)), wpp, eps)
    K2 = sep2.max_component
    backend_fraction = wpp.total(sep2.M) / wpp.total(H2p)
    splus_dist = bfs_distances(g2, sep2.M, cutoff=2 * c) if sep2.M else {}
    Splus = frozenset(z for z in splus_dist if z in H2p)
    M1 = tuple(sorted(x for x in h1 if qi.iota[x] in Splus))
    frac, maxc = check_separator(g1, h1, w, M1)
    comps2 = induced_components(g2, H2p - frozenset(sep2.M))
    comp2_id = {v: i for i, comp in enumerate(comps2) for v in comp}
    comps1 = induced_components(g1, h1 - frozenset(M1))
    for comp in comps1:
        images = {comp2_id[qi.iota[x]] for x in comp}
        if len(images) != 1:
            raise AssertionError(
                "component-separation claim failed: one H1 piece maps onto "
                "several pieces of H2+ \\ S")
    wH1 = w.total(h1)
    C = Fraction(qi.C)
    ineqs = [
        Inequality("transfer-weight", w.total(M1), C**3 * eps * wH1),
        Inequality("transfer-component", Fraction(maxc), C * K2),
        Inequality("pushforward-weight", wpp.total(H2p), C**3 * wH1),
        Inequality("fattened-shell",
                   sum((wprime[z] for z in Splus), Fraction(0)),
                   wpp.total(sep2.M)),
    ]
    return SeparatorResult(
        M1, frac, maxc, "qi-transfer",
        extras={"c": c, "C": qi.C, "eps": fraction_str(eps),
                "backend_method": sep2.method, "backend_K": K2,
                "backend_M": list(sep2.M),
                "backend_fraction": fraction_str(backend_fraction),
                "backend_met_eps": backend_fraction <= eps,
                "claim_checked": True,
                "component_bound": int(C * K2)},
        inequalities=ineqs)


def brute_backend(K: int, *, cap: int = 20):
    """Backend adapter: exhaustive separator with component bound K."""

    def run(g, H, wf, eps):
        return brute_separator(g, H, wf, K, cap=cap)

    return run


def asdim_backend(cover: CoverFamily | None = None):
    """Backend adapter: shell separator at eps/|families|, guaranteeing a
    strict (w,eps) fraction (the per-family bound w(H)/(1+[families/eps]) is
    strictly below (eps/families) w(H))."""

    def run(g, H, wf, eps):
        m = 2 ** g.family.dim if cover is None else cover.family_count()
        return asdim_separator(g, H, wf, Fraction(eps) / m, cover=cover)

    return run


# -- Folner-stage decomposition ----------------------------------------------


@dataclass
class StageDecomposition:
    n: int
    F: tuple
    separator: SeparatorResult
    boundary_set: tuple
    ratio: Fraction
    bound: Fraction
    ok: bool
    max_component: int


def folner_decomposition(g: LabeledGraph, w: WeightFunction, stages, delta,
                         backend) -> list[StageDecomposition]:
    """Per stage F_n: carve out a (w,delta)-separator F_n^delta, keep the
    bounded pieces, make everything else a singleton, and measure the exact
    stage weight of the piece boundary; checked against C|S| delta with C the
    balancedness constant.
    """
    from .weights import balancedness
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise SeparatorError("delta must sit in (0,1)")
    C = balancedness(g, w).constant
    bound = C * len(g.generators.labels) * delta
    out = []
    for n, F in enumerate(stages, start=1):
        fset = frozenset(F)
        sep = backend(g, tuple(sorted(fset)), w, delta)
        if not sep.weight_fraction < delta:
            raise SeparatorError(
                f"backend failure: separator fraction {sep.weight_fraction} "
                f"not below delta={delta}")
        mset = frozenset(sep.M)
        kept = fset - mset
        comps = induced_components(g, kept)
        comp_id = {v: i for i, comp in enumerate(comps) for v in comp}
        bdry = set()
        for x in fset:
            if x in mset:
                if any(u != x for u in g.neighbors(x)):
                    bdry.add(x)
                continue
            for u in g.neighbors(x):
                if u not in kept or comp_id[u] != comp_id[x]:
                    bdry.add(x)
                    break
        ratio = w.total(bdry) / w.total(fset)
        maxc = max((len(c) for c in comps), default=0)
        out.append(StageDecomposition(
            n, tuple(sorted(fset)), sep, tuple(sorted(bdry)), ratio, bound,
            ratio <= bound, maxc))
    return out
