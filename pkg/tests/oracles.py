"""Independent brute-force oracles the implementation is checked against.

These deliberately avoid the library's solver paths: Hall feasibility and
min-cut values come from full subset enumeration, separators from scanning
every removal set, and connected-set enumeration grows sets vertex by vertex.
"""

from fractions import Fraction
from math import lcm

from folnerflow.graphs import induced_components


def _int_scaled(inst):
    scale = lcm(*(f.denominator for f in inst.supply.values()),
                *(f.denominator for f in inst.capacity.values()))
    sup = [int(inst.supply[x] * scale) for x in inst.suppliers]
    buyer_idx = {y: j for j, y in enumerate(inst.buyers)}
    caps = [int(inst.capacity[y] * scale) for y in inst.buyers]
    nmask = [0] * len(inst.suppliers)
    sidx = {x: i for i, x in enumerate(inst.suppliers)}
    for x, y, _ in inst.edges:
        nmask[sidx[x]] |= 1 << buyer_idx[y]
    return scale, sup, caps, nmask


def hall_feasible(inst) -> bool:
    """Transportation feasibility by checking w(L) <= cap(N(L)) over all
    2^{|A|} supplier subsets."""
    scale, sup, caps, nmask = _int_scaled(inst)
    n = len(sup)
    capw_of = {}
    wl = [0] * (1 << n)
    nm = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        i = low.bit_length() - 1
        wl[mask] = wl[mask ^ low] + sup[i]
        nm[mask] = nm[mask ^ low] | nmask[i]
        key = nm[mask]
        if key not in capw_of:
            total = 0
            mm = key
            while mm:
                b = mm & -mm
                mm ^= b
                total += caps[b.bit_length() - 1]
            capw_of[key] = total
        if wl[mask] > capw_of[key]:
            return False
    return True


def min_cut_value(inst) -> Fraction:
    """min over L of w(A \\ L) + cap(N(L)), the exact min-cut value."""
    scale, sup, caps, nmask = _int_scaled(inst)
    n = len(sup)
    total_sup = sum(sup)
    best = None
    for mask in range(1 << n):
        wl = 0
        nm = 0
        m = mask
        while m:
            b = m & -m
            m ^= b
            i = b.bit_length() - 1
            wl += sup[i]
            nm |= nmask[i]
        capw = 0
        while nm:
            b = nm & -nm
            nm ^= b
            capw += caps[b.bit_length() - 1]
        cut = (total_sup - wl) + capw
        if best is None or cut < best:
            best = cut
    return Fraction(best, scale)


def separator_oracle(g, H, w, K):
    """Minimum-weight removal set over all subsets (not just minimal ones)."""
    order = sorted(H)
    n = len(order)
    best = None
    best_key = None
    for mask in range(1 << n):
        M = [order[i] for i in range(n) if mask >> i & 1]
        kept = set(order) - set(M)
        comps = induced_components(g, kept)
        if any(len(c) > K for c in comps):
            continue
        wt = sum((w(v) for v in M), Fraction(0))
        key = (wt, len(M), tuple(M))
        if best_key is None or key < best_key:
            best, best_key = M, key
    return tuple(best), best_key[0]


def connected_sets_upto(g, allowed, max_size):
    """All connected subsets of `allowed` with 1 <= size <= max_size,
    deduplicated by a seen-set while growing one boundary vertex at a time."""
    aset = set(allowed)
    seen = set()
    out = []

    def grow(current):
        key = frozenset(current)
        if key in seen:
            return
        seen.add(key)
        out.append(tuple(sorted(current)))
        if len(current) == max_size:
            return
        nbrs = set()
        for v in current:
            nbrs.update(u for u in g.neighbors(v) if u in aset)
        for u in sorted(nbrs - current):
            grow(current | {u})

    for root in sorted(aset):
        grow({root})
    return out
