"""Command-line front end.

Subcommands: graph build|check, weight ball|balance|partition,
folner defect|search, mean stage, compress solve|verify,
sep brute|asdim|random|transfer|decompose, verify.

Every run is deterministic given its flags (seed defaults to 0, overridable
via FOLNERFLOW_SEED); reports embed both sides of each verified inequality as
exact fraction strings and carry enough context for `folnerflow verify` to
re-check them without re-running any solver.

Exit codes: 0 success with all invariants verified, 2 valid run but no
certificate/accepted trial (cut witness, rejected trials, infeasible
partition), 1 input error (a single-line JSON error object on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from fractions import Fraction

from . import compression, folner, graphs, reports, separators, weights
from .graphs import GraphError, parse_word
from .weights import WeightFunction, parse_fraction, fraction_str


class CliError(ValueError):
    pass


# -- shared flag groups ------------------------------------------------------


def _add_window_flags(p, suffix=""):
    p.add_argument(f"--family{suffix}", default="z",
                   choices=["z", "free", "file"],
                   help="window family (file = load --graph%s)" % suffix)
    p.add_argument(f"--dim{suffix}", type=int, default=1,
                   help="lattice dimension / free rank")
    p.add_argument(f"--radius{suffix}", type=int, default=None,
                   help="window radius around the identity")
    p.add_argument(f"--graph{suffix}", default=None,
                   help="graph interchange file (family=file)")


def _add_weight_flags(p):
    p.add_argument("--weights", default=None, help="weight file")
    p.add_argument("--weight-preset", default=None,
                   choices=["unit", "pow2", "ball"],
                   help="built-in weights (default unit)")
    p.add_argument("--weight-center", default=None,
                   help="ball-weight center id (default identity)")
    p.add_argument("--weight-radius", type=int, default=None,
                   help="ball-weight radius")


def _add_set_flags(p, name="--set", dest="set_spec", required=True,
                   what="vertex set"):
    p.add_argument(f"{name}-box", dest=dest + "_box", default=None,
                   help=f"{what} as per-axis ranges 'a:b,c:d' (z windows)")
    p.add_argument(f"{name}-ball", dest=dest + "_ball", default=None,
                   help=f"{what} as 'center:radius' (graph ball)")
    p.add_argument(f"{name}-file", dest=dest + "_file", default=None,
                   help=f"{what} as a JSON list of vertex ids")


def _build_window(args, suffix=""):
    fam = getattr(args, f"family{suffix}")
    if fam == "file":
        path = getattr(args, f"graph{suffix}")
        if not path:
            raise CliError(f"--family{suffix} file needs --graph{suffix}")
        g = graphs.load_graph(path)
        ctx = reports.window_context(g, path=path)
        return g, ctx
    radius = getattr(args, f"radius{suffix}")
    if radius is None:
        raise CliError(f"--radius{suffix} is required for built-in families")
    if radius < 1:
        raise CliError("radius must be >= 1")
    g = graphs.build_cayley_window(fam, dim=getattr(args, f"dim{suffix}"),
                                   radius=radius)
    return g, reports.window_context(g)


def _build_weights(args, g):
    if args.weights:
        return weights.load_weights(args.weights), reports.weight_context(
            None, path=args.weights)
    preset = args.weight_preset or "unit"
    if preset == "unit":
        return WeightFunction.unit(), {"preset": "unit"}
    if preset == "pow2":
        return weights.pow2_line_weight(g), {"preset": "pow2"}
    if preset == "ball":
        if args.weight_radius is None:
            raise CliError("--weight-preset ball needs --weight-radius")
        center = args.weight_center
        if center is None:
            if g.family is None:
                raise CliError("--weight-center is required on custom windows")
            center = graphs.identity_id(g.family)
        w = weights.ball_weight(g, center, args.weight_radius)
        return w, {"preset": "ball", "center": center,
                   "radius": args.weight_radius}
    raise CliError(f"unknown weight preset {preset!r}")


def _parse_ranges(text):
    ranges = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        ranges.append((int(a), int(b)))
    return ranges


def _resolve_set(args, g, dest="set_spec", what="vertex set"):
    box = getattr(args, dest + "_box")
    ball = getattr(args, dest + "_ball")
    path = getattr(args, dest + "_file")
    given = [x for x in (box, ball, path) if x]
    if len(given) != 1:
        raise CliError(f"specify exactly one of the {what} flags")
    if box:
        if g.family is None or g.family.kind != "z":
            raise CliError("box sets need a Z^d window")
        ids = graphs.zd_box(_parse_ranges(box))
    elif ball:
        center, _, r = ball.rpartition(":")
        ids = graphs.neighborhood(g, [center], int(r))
    else:
        import json
        with open(path, "r", encoding="utf-8") as fh:
            ids = json.load(fh)
    missing = [v for v in ids if v not in g.vertex_set]
    if missing:
        raise CliError(f"{what} contains ids outside the window: {missing[:3]}")
    return sorted(ids)


def _parse_words(text, g):
    if text is None:
        return folner.generator_words(g)
    return [parse_word(t) for t in text.split(";")]


def _parse_stages(text):
    parts = [int(x) for x in text.split(":")]
    if len(parts) == 2:
        a, b, s = parts[0], parts[1], 1
    elif len(parts) == 3:
        a, b, s = parts
    else:
        raise CliError("--stages wants 'start:stop[:step]'")
    if a < 1 or b < a or s < 1:
        raise CliError("bad stage range")
    return list(range(a, b + 1, s))


def _stage_set(g, n, shape):
    if shape == "box":
        if g.family is None or g.family.kind != "z":
            raise CliError("box stages need a Z^d window")
        return graphs.zd_box([(0, n - 1)] * g.family.dim)
    center = graphs.identity_id(g.family) if g.family else g.vertices[0]
    return graphs.neighborhood(g, [center], n)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_doc(args, doc: dict) -> None:
    _emit(args, reports.canonical_json(doc))


def _default_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("FOLNERFLOW_SEED", "0"))


# -- command implementations ---------------------------------------------------


def _cmd_graph_build(args) -> int:
    g, _ = _build_window(args)
    _emit_doc(args, graphs.graph_to_doc(g))
    return 0


def _cmd_graph_check(args) -> int:
    graphs.load_graph(args.path)
    print(f"ok: {args.path} is a valid labeled window")
    return 0


def _cmd_weight_ball(args) -> int:
    g, gctx = _build_window(args)
    center = args.center
    if center is None:
        if g.family is None:
            raise CliError("--center is required on custom windows")
        center = graphs.identity_id(g.family)
    w = weights.ball_weight(g, center, args.ball_radius)
    doc = w.to_doc()
    doc["provenance"] = {"window": gctx, "center": center,
                         "radius": args.ball_radius}
    _emit_doc(args, doc)
    return 0


def _cmd_weight_balance(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    rep = weights.balancedness(g, w)
    _emit_doc(args, reports.balance_doc(rep, gctx, wctx))
    return 0


def _cmd_weight_partition(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    center = args.center
    if center is None:
        if g.family is None:
            raise CliError("--center is required on custom windows")
        center = graphs.identity_id(g.family)
    spheres = graphs.sphere_decomposition(g, center, args.ball_radius)
    try:
        parts = weights.even_partition(spheres, w, args.parts)
    except weights.PartitionInfeasible as exc:
        sys.stderr.write(reports.canonical_json(
            {"error": str(exc), "blocking_vertex": exc.blocking_vertex}))
        return 2
    _emit_doc(args, reports.partition_doc(parts, center, args.ball_radius,
                                          args.parts, gctx, wctx))
    return 0


def _cmd_folner_defect(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    L = _parse_words(args.words, g)
    if args.stages:
        ns = _parse_stages(args.stages)
        buf = io.StringIO()
        writer = csv.writer(buf)
        labels = [graphs.format_word(t) for t in L]
        writer.writerow(["n", "size", "weight", "defect"] + labels)
        for n in ns:
            F = _stage_set(g, n, args.stage_shape)
            rep = folner.folner_defect(g, w, F, L)
            writer.writerow(
                [n, len(F), fraction_str(w.total(F)), fraction_str(rep.defect)]
                + [fraction_str(rep.ratios[t]) for t in L])
        _emit(args, buf.getvalue())
        return 0
    F = _resolve_set(args, g)
    rep = folner.folner_defect(g, w, F, L)
    _emit_doc(args, reports.folner_doc(rep, gctx, wctx))
    return 0


def _cmd_folner_search(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    L = _parse_words(args.words, g)
    rep = folner.folner_search(g, w, L, shape_budget=args.budget)
    _emit_doc(args, reports.folner_doc(rep, gctx, wctx))
    return 0


def _cmd_mean_stage(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    A = _resolve_set(args, g, what="test set A")
    word = parse_word(args.word) if args.word is not None else None
    entries = []
    for n in _parse_stages(args.stages):
        F = _stage_set(g, n, args.stage_shape)
        m = folner.StageMean(tuple(F), w, n)
        entry = {"n": n, "F": list(m.F), "A": list(A),
                 "mu": fraction_str(folner.stage_mean(m, A)),
                 "word": None, "invariance_defect": None}
        if word is not None:
            d = folner.invariance_defect(m, A, word, g, w)
            entry["word"] = graphs.format_word(word)
            entry["invariance_defect"] = fraction_str(d)
        entries.append(entry)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["n", "size", "weight", "mu", "invariance_defect"])
        for e in entries:
            writer.writerow([e["n"], len(e["F"]),
                             fraction_str(w.total(e["F"])), e["mu"],
                             e["invariance_defect"] or ""])
        _emit(args, buf.getvalue())
    else:
        _emit_doc(args, reports.mean_doc(entries, gctx, wctx))
    return 0


def _cmd_compress_solve(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    result = compression.solve_transport(
        g, w, args.k, exact_k=args.exact_k, strict=args.strict,
        capacity_fraction=parse_fraction(args.capacity_fraction))
    doc = reports.certificate_doc(result, gctx, wctx)
    _emit_doc(args, doc)
    base = os.path.dirname(os.path.abspath(args.out)) if args.out else None
    reports.verify_doc(doc, base)  # self-check before claiming success
    return 0 if result.kind == "compression" else 2


def _cmd_compress_verify(args) -> int:
    doc = reports.load_doc(args.path)
    if doc.get("kind") not in ("compression", "cut"):
        raise CliError("not a certificate file")
    ok, msg = reports.verify_report(args.path)
    print(("ok: " if ok else "FAIL: ") + msg)
    return 0 if ok else 1


def _finish_separator(args, g, gctx, w, wctx, H, res, params=None) -> int:
    doc = reports.separator_doc(res, H, gctx, wctx, params)
    _emit_doc(args, doc)
    base = os.path.dirname(os.path.abspath(args.out)) if args.out else None
    reports.verify_doc(doc, base)
    if res.extras.get("unaccepted"):
        return 2
    return 0


def _cmd_sep_brute(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    H = _resolve_set(args, g, what="subgraph H")
    res = separators.brute_separator(g, H, w, args.K, cap=args.cap)
    return _finish_separator(args, g, gctx, w, wctx, H, res)


def _cmd_sep_asdim(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    H = _resolve_set(args, g, what="subgraph H")
    eps = parse_fraction(args.eps)
    cover = None
    if args.cover:
        cover = separators.CoverFamily.from_doc(reports.load_doc(args.cover))
        separators.validate_cover(g, cover)
    elif args.cover_scale:
        cover = separators.asdim_cover(g, args.cover_scale)
    res = separators.asdim_separator(g, H, w, eps, cover=cover)
    return _finish_separator(args, g, gctx, w, wctx, H, res)


def _cmd_sep_random(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    H = _resolve_set(args, g, what="subgraph H")
    tile = _resolve_set(args, g, dest="tile_spec", what="tile F")
    tiling = separators.build_folner_tiling(g, tile, args.stage)
    res = separators.random_folner_separator(
        g, H, w, tiling, seed=_default_seed(args), max_trials=args.trials)
    return _finish_separator(args, g, gctx, w, wctx, H, res,
                             params={"tile": list(tiling.F)})


def _cmd_sep_transfer(args) -> int:
    g1, g1ctx = _build_window(args)
    g2, g2ctx = _build_window(args, suffix="2")
    w, wctx = _build_weights(args, g1)
    H1 = _resolve_set(args, g1, what="subgraph H1")
    if args.iota == "identity":
        iota = {v: v for v in g1.vertices}
        iota_ctx = {"type": "identity"}
    else:
        doc = reports.load_doc(args.iota)
        iota = dict(doc)
        iota_ctx = {"type": "map", "map": doc}
    qi = separators.build_qi_map(g1, g2, iota, args.c)
    if args.backend == "brute":
        if args.K is None:
            raise CliError("--backend brute needs -K")
        backend = separators.brute_backend(args.K, cap=args.cap)
    else:
        backend = separators.asdim_backend()
    res = separators.qi_transfer(qi, H1, w, backend, parse_fraction(args.eps))
    params = {"window2": g2ctx, "iota": iota_ctx}
    return _finish_separator(args, g1, g1ctx, w, wctx, H1, res, params)


def _cmd_sep_decompose(args) -> int:
    g, gctx = _build_window(args)
    w, wctx = _build_weights(args, g)
    delta = parse_fraction(args.delta)
    stages = [_stage_set(g, n, args.stage_shape)
              for n in _parse_stages(args.stages)]
    if args.backend == "asdim":
        backend = separators.asdim_backend()
    else:
        if args.K is None:
            raise CliError("--backend brute needs -K")
        backend = separators.brute_backend(args.K, cap=args.cap)
    decs = separators.folner_decomposition(g, w, stages, delta, backend)
    doc = reports.decomposition_doc(decs, delta, gctx, wctx, args.backend)
    _emit_doc(args, doc)
    base = os.path.dirname(os.path.abspath(args.out)) if args.out else None
    reports.verify_doc(doc, base)
    return 0


def _cmd_verify(args) -> int:
    ok, msg = reports.verify_report(args.path)
    print(("ok: " if ok else "FAIL: ") + msg)
    return 0 if ok else 1


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="folnerflow",
        description="weighted Folner / compression dichotomy and weighted "
                    "separators on finite Cayley windows")
    sub = ap.add_subparsers(dest="command", required=True)

    g_graph = sub.add_parser("graph", help="build or validate windows")
    gsub = g_graph.add_subparsers(dest="sub", required=True)
    p = gsub.add_parser("build")
    _add_window_flags(p)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_graph_build)
    p = gsub.add_parser("check")
    p.add_argument("path")
    p.set_defaults(fn=_cmd_graph_check)

    g_weight = sub.add_parser("weight", help="weight constructions and checks")
    wsub = g_weight.add_subparsers(dest="sub", required=True)
    p = wsub.add_parser("ball")
    _add_window_flags(p)
    p.add_argument("--center", default=None)
    p.add_argument("--ball-radius", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_weight_ball)
    p = wsub.add_parser("balance")
    _add_window_flags(p)
    _add_weight_flags(p)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_weight_balance)
    p = wsub.add_parser("partition")
    _add_window_flags(p)
    _add_weight_flags(p)
    p.add_argument("--center", default=None)
    p.add_argument("--ball-radius", type=int, required=True)
    p.add_argument("--parts", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_weight_partition)

    g_folner = sub.add_parser("folner", help="Folner defects and search")
    fsub = g_folner.add_subparsers(dest="sub", required=True)
    p = fsub.add_parser("defect")
    _add_window_flags(p)
    _add_weight_flags(p)
    _add_set_flags(p, what="candidate F")
    p.add_argument("--words", default=None,
                   help="semicolon-separated words (default: generators)")
    p.add_argument("--stages", default=None,
                   help="emit a CSV series over stages 'a:b[:step]'")
    p.add_argument("--stage-shape", default="box", choices=["box", "ball"])
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_folner_defect)
    p = fsub.add_parser("search")
    _add_window_flags(p)
    _add_weight_flags(p)
    p.add_argument("--words", default=None)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_folner_search)

    g_mean = sub.add_parser("mean", help="stage means and invariance defects")
    msub = g_mean.add_subparsers(dest="sub", required=True)
    p = msub.add_parser("stage")
    _add_window_flags(p)
    _add_weight_flags(p)
    _add_set_flags(p, what="test set A")
    p.add_argument("--word", default=None)
    p.add_argument("--stages", required=True)
    p.add_argument("--stage-shape", default="box", choices=["box", "ball"])
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_mean_stage)

    g_comp = sub.add_parser("compress", help="dichotomy certificates")
    csub = g_comp.add_subparsers(dest="sub", required=True)
    p = csub.add_parser("solve")
    _add_window_flags(p)
    _add_weight_flags(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--exact-k", action="store_true",
                   help="T = elements of length exactly k (norm parity)")
    p.add_argument("--strict", action="store_true",
                   help="rescale budgets so buyer loads fall strictly below 1/2")
    p.add_argument("--capacity-fraction", default="1/2")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_compress_solve)
    p = csub.add_parser("verify")
    p.add_argument("path")
    p.set_defaults(fn=_cmd_compress_verify)

    g_sep = sub.add_parser("sep", help="(w,eps)-separating sets")
    ssub = g_sep.add_subparsers(dest="sub", required=True)
    p = ssub.add_parser("brute")
    _add_window_flags(p)
    _add_weight_flags(p)
    _add_set_flags(p, what="subgraph H")
    p.add_argument("-K", type=int, required=True, help="component size bound")
    p.add_argument("--cap", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sep_brute)
    p = ssub.add_parser("asdim")
    _add_window_flags(p)
    _add_weight_flags(p)
    _add_set_flags(p, what="subgraph H")
    p.add_argument("--eps", required=True)
    p.add_argument("--cover-scale", type=int, default=None)
    p.add_argument("--cover", default=None, help="cover file")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sep_asdim)
    p = ssub.add_parser("random")
    _add_window_flags(p)
    _add_weight_flags(p)
    _add_set_flags(p, what="subgraph H")
    _add_set_flags(p, name="--tile", dest="tile_spec", what="tile F")
    p.add_argument("--stage", type=int, required=True, help="stage index n")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sep_random)
    p = ssub.add_parser("transfer")
    _add_window_flags(p)
    _add_window_flags(p, suffix="2")
    _add_weight_flags(p)
    _add_set_flags(p, what="subgraph H1")
    p.add_argument("--iota", default="identity",
                   help="'identity' or a JSON map file")
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--backend", default="brute", choices=["brute", "asdim"])
    p.add_argument("-K", type=int, default=None)
    p.add_argument("--cap", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sep_transfer)
    p = ssub.add_parser("decompose")
    _add_window_flags(p)
    _add_weight_flags(p)
    p.add_argument("--stages", required=True)
    p.add_argument("--stage-shape", default="box", choices=["box", "ball"])
    p.add_argument("--delta", required=True)
    p.add_argument("--backend", default="asdim", choices=["asdim", "brute"])
    p.add_argument("-K", type=int, default=None)
    p.add_argument("--cap", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sep_decompose)

    p = sub.add_parser("verify", help="re-verify a report or certificate file")
    p.add_argument("path")
    p.set_defaults(fn=_cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, GraphError, ValueError, KeyError, OSError,
            reports.VerificationFailure) as exc:
        sys.stderr.write(reports.canonical_json({"error": str(exc)}))
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
