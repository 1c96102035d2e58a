"""Report and certificate documents, and their independent re-verification.

Every document embeds both sides of every claimed inequality as exact
fraction strings, plus enough context (window family parameters, or file
paths with sha256 digests, or inline copies) that `verify_report` can re-check
each claim from the document alone -- it recomputes set weights, component
sizes, translate ratios, and compression loads, but never re-runs a solver.

Documents are serialized canonically (sorted keys, fixed indentation), so a
fixed configuration and seed produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction

from .graphs import (GraphError, LabeledGraph, apply_word, ball_size_bound,
                     build_cayley_window, format_word, graph_from_doc,
                     graph_to_doc, induced_components, load_graph,
                     neighborhood, parse_word, sphere_decomposition)
from .weights import (WeightFunction, balancedness, ball_weight, fraction_str,
                      load_weights, parse_fraction, pow2_line_weight)
from .compression import (CompressionSystem, build_transport,
                          verify_compression)
from .folner import StageMean, folner_defect, invariance_defect, stage_mean
from .separators import (CoverFamily, SeparatorResult, build_folner_tiling,
                         build_qi_map, check_separator, validate_cover)


class VerificationFailure(Exception):
    """First failing claim of a report, as a human-readable message."""


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def dump_doc(doc: dict, path=None) -> str:
    text = canonical_json(doc)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def load_doc(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise VerificationFailure(f"cannot parse document: {exc}") from exc


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolve(path: str, base: str | None) -> str:
    """Referenced input files resolve as given (cwd) first, then relative to
    the report's own directory."""
    if os.path.isabs(path) or os.path.exists(path) or not base:
        return path
    return os.path.join(base, path)


# -- context blocks ----------------------------------------------------------


def window_context(g: LabeledGraph, path=None) -> dict:
    if g.family is not None:
        return {"family": g.family.kind, "dim": g.family.dim,
                "radius": g.family.radius}
    if path is not None:
        return {"path": str(path), "sha256": _sha256(path)}
    return {"inline": graph_to_doc(g)}


def window_from_context(ctx: dict, base: str | None = None) -> LabeledGraph:
    if "family" in ctx:
        return build_cayley_window(ctx["family"], dim=int(ctx["dim"]),
                                   radius=int(ctx["radius"]))
    if "path" in ctx:
        path = _resolve(ctx["path"], base)
        if _sha256(path) != ctx.get("sha256"):
            raise VerificationFailure(f"graph file {ctx['path']} hash mismatch")
        return load_graph(path)
    if "inline" in ctx:
        return graph_from_doc(ctx["inline"])
    raise VerificationFailure("window context lacks family, path, and inline")


def weight_context(w: WeightFunction, *, preset: str | None = None,
                   path=None, preset_args: dict | None = None) -> dict:
    if preset is not None:
        ctx = {"preset": preset}
        ctx.update(preset_args or {})
        return ctx
    if path is not None:
        return {"path": str(path), "sha256": _sha256(path)}
    return {"inline": w.to_doc()}


def weights_from_context(ctx: dict, g: LabeledGraph,
                         base: str | None = None) -> WeightFunction:
    if "preset" in ctx:
        preset = ctx["preset"]
        if preset == "unit":
            return WeightFunction.unit()
        if preset == "pow2":
            return pow2_line_weight(g)
        if preset == "ball":
            return ball_weight(g, ctx["center"], int(ctx["radius"]))
        raise VerificationFailure(f"unknown weight preset {preset!r}")
    if "path" in ctx:
        path = _resolve(ctx["path"], base)
        if _sha256(path) != ctx.get("sha256"):
            raise VerificationFailure(f"weight file {ctx['path']} hash mismatch")
        return load_weights(path)
    if "inline" in ctx:
        return WeightFunction.from_doc(ctx["inline"])
    raise VerificationFailure("weight context lacks preset, path, and inline")


# -- certificates ------------------------------------------------------------


def certificate_doc(result, window_ctx: dict, weights_ctx: dict) -> dict:
    """Certificate file for a dichotomy outcome (kind compression|cut)."""
    inst = result.instance
    doc = {
        "kind": result.kind,
        "window": window_ctx,
        "weights": weights_ctx,
        "k": inst.k,
        "exact_k": inst.exact_k,
        "capacity_fraction": fraction_str(inst.capacity_fraction),
        "T": [format_word(t) for t in inst.T],
    }
    if result.kind == "compression":
        doc["bound"] = fraction_str(result.target)
        doc["strict"] = result.strict
        doc["psi"] = {
            f"{format_word(word)}|{x}": fraction_str(val)
            for (word, x), val in sorted(result.system.psi.items())
        }
        if result.doubling_ratio is not None:
            doc["doubling_ratio"] = fraction_str(result.doubling_ratio)
    else:
        cw = result.witness
        doc["witness"] = {
            "L": list(cw.L), "K": list(cw.K),
            "lhs": fraction_str(cw.lhs), "rhs": fraction_str(cw.rhs),
        }
    return doc


def _rebuild_instance(doc: dict, base: str | None):
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    inst = build_transport(g, w, int(doc["k"]), exact_k=bool(doc["exact_k"]),
                           capacity_fraction=parse_fraction(doc["capacity_fraction"]))
    stored_T = [parse_word(t) for t in doc["T"]]
    if tuple(stored_T) != inst.T:
        raise VerificationFailure("word list T does not match the instance")
    return g, w, inst


def verify_certificate(doc: dict, base: str | None = None) -> None:
    g, w, inst = _rebuild_instance(doc, base)
    if doc["kind"] == "compression":
        psi = {}
        for key, val in doc["psi"].items():
            word_text, _, x = key.partition("|")
            psi[(parse_word(word_text), x)] = parse_fraction(val)
        cs = CompressionSystem(inst.T, psi, inst.suppliers, inst.buyers)
        check = verify_compression(cs, w, inst, strict=bool(doc["strict"]),
                                   bound=parse_fraction(doc["bound"]))
        if not check.ok:
            kind, vertex, word, value = check.failures[0]
            raise VerificationFailure(
                f"compression check {kind} fails at {vertex!r} (value {value})")
        return
    if doc["kind"] == "cut":
        wit = doc["witness"]
        L = tuple(wit["L"])
        if not set(L) <= set(inst.suppliers):
            raise VerificationFailure("cut witness L is not a supplier subset")
        K = tuple(inst.neighbors_of(L))
        if K != tuple(wit["K"]):
            raise VerificationFailure("cut witness K is not the neighborhood of L")
        lhs = sum((inst.supply[x] for x in L), Fraction(0))
        rhs = sum((inst.capacity[y] for y in K), Fraction(0))
        if fraction_str(lhs) != wit["lhs"] or fraction_str(rhs) != wit["rhs"]:
            raise VerificationFailure("cut witness sides do not recompute")
        if not lhs > rhs:
            raise VerificationFailure("cut witness does not violate the Hall condition")
        return
    raise VerificationFailure(f"unknown certificate kind {doc['kind']!r}")


# -- separator reports --------------------------------------------------------


def separator_doc(res: SeparatorResult, H, window_ctx: dict, weights_ctx: dict,
                  params: dict | None = None) -> dict:
    extras = dict(res.extras)
    extras.update(params or {})
    return {
        "kind": "separator",
        "method": res.method,
        "window": window_ctx,
        "weights": weights_ctx,
        "H": sorted(H),
        "M": list(res.M),
        "weight_fraction": fraction_str(res.weight_fraction),
        "max_component": res.max_component,
        "seed": res.seed,
        "params": extras,
        "inequalities": [iq.to_doc() for iq in res.inequalities],
    }


def _expected_bounds(doc: dict, g: LabeledGraph, w: WeightFunction) -> dict:
    """Recompute the rhs of the known inequality names from the params block."""
    method = doc["method"]
    p = doc["params"]
    H = doc["H"]
    wH = w.total(H)
    out = {}
    if method == "asdim":
        m = int(p["families"])
        eps = parse_fraction(p["eps"])
        out["separator-weight"] = m * eps * wH
        diameter = m * (int(p["R"]) + 1)
        out["max-component"] = Fraction(ball_size_bound(g, diameter))
    elif method == "random-folner":
        tiling = build_folner_tiling(g, p["tile"], int(p["n"]))
        out["max-component"] = Fraction(len(tiling.F))
        out["accepted-weight"] = 2 * (tiling.shell_term + tiling.miss_term) * wH
    elif method == "brute":
        out["max-component"] = Fraction(int(p["K"]))
    elif method == "qi-transfer":
        C = Fraction(int(p["C"]))
        out["transfer-weight"] = C**3 * parse_fraction(p["eps"]) * wH
        out["transfer-component"] = C * int(p["backend_K"])
    return out


def verify_separator(doc: dict, base: str | None = None) -> None:
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    H, M = doc["H"], doc["M"]
    frac, maxc = check_separator(g, H, w, M)
    if fraction_str(frac) != doc["weight_fraction"]:
        raise VerificationFailure(
            f"weight fraction recomputes to {fraction_str(frac)}, "
            f"stored {doc['weight_fraction']}")
    if maxc != int(doc["max_component"]):
        raise VerificationFailure(
            f"max component recomputes to {maxc}, stored {doc['max_component']}")
    expected = _expected_bounds(doc, g, w)
    lhs_by_name = {
        "separator-weight": w.total(M),
        "accepted-weight": w.total(M),
        "transfer-weight": w.total(M),
        "max-component": Fraction(maxc),
        "transfer-component": Fraction(maxc),
    }
    for iq in doc["inequalities"]:
        name = iq["name"]
        lhs, rhs = parse_fraction(iq["lhs"]), parse_fraction(iq["rhs"])
        if name in lhs_by_name and lhs != lhs_by_name[name]:
            raise VerificationFailure(f"inequality {name}: lhs does not recompute")
        if name in expected and rhs != expected[name]:
            raise VerificationFailure(f"inequality {name}: rhs does not recompute")
        ok = lhs < rhs if iq["relation"] == "<" else lhs <= rhs
        if not ok or not iq.get("holds", False):
            raise VerificationFailure(f"inequality {name} does not hold")
    if doc["method"] == "qi-transfer":
        _verify_transfer_geometry(doc, g, w, base)


def _verify_transfer_geometry(doc: dict, g1: LabeledGraph, w: WeightFunction,
                              base: str | None) -> None:
    """Re-check the component-separation claim and the pushed-weight chain of
    a transfer report from its stored backend separator."""
    p = doc["params"]
    g2 = window_from_context(p["window2"], base)
    c = int(p["c"])
    iota_ctx = p.get("iota", {"type": "identity"})
    if iota_ctx.get("type") == "identity":
        iota = {x: x for x in g1.vertices}
    else:
        iota = dict(iota_ctx["map"])
    qi = build_qi_map(g1, g2, iota, c)
    if qi.C != int(p["C"]):
        raise VerificationFailure("transfer constant C does not recompute")
    H1 = frozenset(doc["H"])
    from .graphs import bfs_distances
    H2 = sorted({iota[x] for x in H1})
    H2p = frozenset(neighborhood(g2, H2, 2 * c))
    S = tuple(p["backend_M"])
    if not set(S) <= H2p:
        raise VerificationFailure("backend separator is not a subset of H2+")
    splus = frozenset(z for z in (bfs_distances(g2, S, cutoff=2 * c) if S else {})
                      if z in H2p)
    M_expected = sorted(x for x in H1 if iota[x] in splus)
    if M_expected != list(doc["M"]):
        raise VerificationFailure("transfer separator M does not recompute")
    comps2 = induced_components(g2, H2p - frozenset(S))
    cid2 = {v: i for i, comp in enumerate(comps2) for v in comp}
    for comp in induced_components(g1, H1 - set(doc["M"])):
        if len({cid2[iota[x]] for x in comp}) != 1:
            raise VerificationFailure("component-separation claim fails")
    maxc2 = max((len(cc) for cc in comps2), default=0)
    if maxc2 > int(p["backend_K"]):
        raise VerificationFailure("backend component bound is violated")


# -- folner / mean / decomposition reports -----------------------------------


def folner_doc(report, window_ctx: dict, weights_ctx: dict) -> dict:
    return {
        "kind": "folner",
        "window": window_ctx,
        "weights": weights_ctx,
        "F": list(report.F),
        "L": [format_word(t) for t in report.test_words],
        "ratios": {format_word(t): fraction_str(r)
                   for t, r in sorted(report.ratios.items())},
        "defect": fraction_str(report.defect),
    }


def verify_folner(doc: dict, base: str | None = None) -> None:
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    L = [parse_word(t) for t in doc["L"]]
    rep = folner_defect(g, w, doc["F"], L)
    for t in L:
        stored = doc["ratios"].get(format_word(t))
        if stored != fraction_str(rep.ratios[t]):
            raise VerificationFailure(
                f"ratio for word {format_word(t)!r} does not recompute")
    if doc["defect"] != fraction_str(rep.defect):
        raise VerificationFailure("defect does not recompute")


def mean_doc(stages: list[dict], window_ctx: dict, weights_ctx: dict) -> dict:
    return {"kind": "mean", "window": window_ctx, "weights": weights_ctx,
            "stages": stages}


def verify_mean(doc: dict, base: str | None = None) -> None:
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    for entry in doc["stages"]:
        m = StageMean(tuple(entry["F"]), w, int(entry["n"]))
        mu = stage_mean(m, entry["A"])
        if fraction_str(mu) != entry["mu"]:
            raise VerificationFailure(f"stage {entry['n']}: mu does not recompute")
        if entry.get("word") is not None:
            d = invariance_defect(m, entry["A"], parse_word(entry["word"]), g, w)
            if fraction_str(d) != entry["invariance_defect"]:
                raise VerificationFailure(
                    f"stage {entry['n']}: invariance defect does not recompute")


def decomposition_doc(stages, delta, window_ctx: dict, weights_ctx: dict,
                      backend_name: str) -> dict:
    return {
        "kind": "decomposition",
        "window": window_ctx,
        "weights": weights_ctx,
        "delta": fraction_str(Fraction(delta)),
        "backend": backend_name,
        "stages": [{
            "n": st.n,
            "F": list(st.F),
            "separator_M": list(st.separator.M),
            "boundary": list(st.boundary_set),
            "ratio": fraction_str(st.ratio),
            "bound": fraction_str(st.bound),
            "ok": st.ok,
            "max_component": st.max_component,
        } for st in stages],
    }


def verify_decomposition(doc: dict, base: str | None = None) -> None:
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    delta = parse_fraction(doc["delta"])
    C = balancedness(g, w).constant
    bound = C * len(g.generators.labels) * delta
    for entry in doc["stages"]:
        fset = frozenset(entry["F"])
        mset = frozenset(entry["separator_M"])
        if not mset <= fset:
            raise VerificationFailure(f"stage {entry['n']}: separator not inside F")
        if not w.total(mset) / w.total(fset) < delta:
            raise VerificationFailure(
                f"stage {entry['n']}: separator fraction not below delta")
        kept = fset - mset
        comps = induced_components(g, kept)
        cid = {v: i for i, comp in enumerate(comps) for v in comp}
        bdry = set()
        for x in fset:
            if x in mset:
                if any(u != x for u in g.neighbors(x)):
                    bdry.add(x)
                continue
            if any(u not in kept or cid[u] != cid[x] for u in g.neighbors(x)):
                bdry.add(x)
        if sorted(bdry) != entry["boundary"]:
            raise VerificationFailure(
                f"stage {entry['n']}: boundary set does not recompute")
        ratio = w.total(bdry) / w.total(fset)
        if fraction_str(ratio) != entry["ratio"]:
            raise VerificationFailure(f"stage {entry['n']}: ratio does not recompute")
        if fraction_str(bound) != entry["bound"]:
            raise VerificationFailure(f"stage {entry['n']}: bound does not recompute")
        if bool(ratio <= bound) != bool(entry["ok"]):
            raise VerificationFailure(f"stage {entry['n']}: ok flag is wrong")
        maxc = max((len(cc) for cc in comps), default=0)
        if maxc != int(entry["max_component"]):
            raise VerificationFailure(
                f"stage {entry['n']}: max component does not recompute")


# -- weight-side reports -------------------------------------------------------


def balance_doc(report, window_ctx: dict, weights_ctx: dict) -> dict:
    u, v, s = report.witness_edge
    return {"kind": "balance", "window": window_ctx, "weights": weights_ctx,
            "constant": fraction_str(report.constant),
            "witness_edge": [u, v, s]}


def verify_balance(doc: dict, base: str | None = None) -> None:
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    rep = balancedness(g, w)
    if fraction_str(rep.constant) != doc["constant"]:
        raise VerificationFailure("balancedness constant does not recompute")
    u, v, s = doc["witness_edge"]
    if apply_word(g, (s,), u) != v:
        raise VerificationFailure("witness edge is not an edge")
    r = w(v) / w(u)
    if max(r, 1 / r) != rep.constant:
        raise VerificationFailure("witness edge does not attain the constant")


def partition_doc(parts, center: str, radius: int, k: int, window_ctx: dict,
                  weights_ctx: dict) -> dict:
    return {"kind": "partition", "window": window_ctx, "weights": weights_ctx,
            "center": center, "radius": radius, "k": k,
            "parts": [list(p) for p in parts]}


def verify_partition(doc: dict, base: str | None = None) -> None:
    g = window_from_context(doc["window"], base)
    w = weights_from_context(doc["weights"], g, base)
    spheres = sphere_decomposition(g, doc["center"], int(doc["radius"]))
    ball = {v for sp in spheres for v in sp}
    parts = [list(p) for p in doc["parts"]]
    seen: set = set()
    for p in parts:
        pset = set(p)
        if pset & seen:
            raise VerificationFailure("partition parts overlap")
        seen |= pset
    if seen != ball:
        raise VerificationFailure("partition does not cover the ball")
    total = w.total(ball)
    k = int(doc["k"])
    if len(parts) != k:
        raise VerificationFailure("partition has the wrong number of parts")
    for p in parts:
        if not w.total(p) < 2 * total / k:
            raise VerificationFailure("a part reaches the 2/k weight bound")


# -- entry point ---------------------------------------------------------------


def verify_doc(doc: dict, base: str | None = None) -> None:
    kind = doc.get("kind")
    if kind in ("compression", "cut"):
        verify_certificate(doc, base)
    elif kind == "separator":
        verify_separator(doc, base)
    elif kind == "folner":
        verify_folner(doc, base)
    elif kind == "mean":
        verify_mean(doc, base)
    elif kind == "decomposition":
        verify_decomposition(doc, base)
    elif kind == "balance":
        verify_balance(doc, base)
    elif kind == "partition":
        verify_partition(doc, base)
    elif kind == "graph":
        graph_from_doc(doc)
    elif kind == "weights":
        WeightFunction.from_doc(doc)
    elif kind == "cover":
        if "window" not in doc:
            raise VerificationFailure("cover document lacks a window context")
        g = window_from_context(doc["window"], base)
        validate_cover(g, CoverFamily.from_doc(doc))
    else:
        raise VerificationFailure(f"unknown document kind {kind!r}")


def verify_report(path) -> tuple[bool, str]:
    """Re-verify every claim embedded in a report or certificate file."""
    base = os.path.dirname(os.path.abspath(path))
    try:
        doc = load_doc(path)
        verify_doc(doc, base)
    except VerificationFailure as exc:
        return False, str(exc)
    except (GraphError, ValueError, KeyError, TypeError, OSError) as exc:
        return False, f"malformed document: {exc}"
    return True, "ok"
