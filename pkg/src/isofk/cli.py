"""Command-line interface: ``isofk <command> ...``.

Angles are given in degrees unless ``--radians`` is passed.  Tables go to
stdout or ``--out`` as CSV with ``#`` header lines carrying the run
manifest; JSON outputs embed the manifest under ``"manifest"``.  Exit codes:
0 success, 1 a failed check (or a censored decay fit), 2 invalid input.
"""

import argparse
import csv
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import InvalidDomain, InvalidEmbedding, InvalidParameter, OutOfDomain, TooLarge
from .geometry import IsoradialGraph, build_hexagonal, build_square, build_triangular, check_bap
from .weights import dual_p, p_of_beta, x_crit

INPUT_ERRORS = (InvalidParameter, OutOfDomain, InvalidDomain, InvalidEmbedding, TooLarge, ValueError,
                OSError, KeyError)


class Failed(Exception):
    """A check battery failed; the output has been written already."""


# ---------------------------------------------------------------------------
# helpers


def _threads(args):
    n = getattr(args, "threads", None)
    if n is None:
        env = os.environ.get("ISOFK_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    if n < 1:
        raise InvalidParameter("--threads must be >= 1")
    return n


def _angle(value, args):
    return float(value) if args.radians else np.deg2rad(float(value))


def _angles(text, args):
    vals = [_angle(v, args) for v in text.split(",")]
    if len(vals) != 3:
        raise InvalidParameter("--angles takes three comma-separated values")
    return tuple(vals)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def manifest(args, extra=None):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out") and v is not None}
    m = {"command": args.command, "params": params, "version": __version__}
    if getattr(args, "graph", None):
        m["inputs"] = {args.graph: _digest(args.graph)}
    if extra:
        m.update(extra)
    return m


def _emit(text, args):
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header_rows, fieldnames, rows, args, meta):
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write("# %s: %s\n" % (k, json.dumps(v, sort_keys=True)))
    for line in header_rows:
        buf.write("# %s\n" % line)
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    _emit(buf.getvalue(), args)


def _emit_json(obj, args):
    _emit(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n", args)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _lattice(args):
    if getattr(args, "graph", None):
        with open(args.graph) as fh:
            return IsoradialGraph.from_json(fh.read())
    kind = args.lattice
    if kind == "square":
        alpha = _angle(args.alpha, args) if args.alpha is not None else np.pi / 2
        return build_square(args.n, args.n_rows or args.n, alpha)
    angles = _angles(args.angles, args) if args.angles else (np.pi / 3,) * 3
    if kind == "triangular":
        return build_triangular(args.n, angles)
    if kind == "hexagonal":
        return build_hexagonal(args.n, angles)
    raise InvalidParameter("unknown lattice %r" % kind)


def _domain(args):
    from .presets import named_domain
    return named_domain(args.domain, args.a, args.b)


# ---------------------------------------------------------------------------
# commands


def cmd_lattice(args):
    args.lattice = args.type
    if args.action == "gen":
        g = _lattice(args)
        _emit(g.to_json(), args)
        if args.out:
            with open(args.out + ".manifest.json", "w") as fh:
                json.dump(manifest(args, {"sha256": _digest(args.out)}), fh, indent=2, sort_keys=True)
                fh.write("\n")
        return 0
    # check
    g = _lattice(args)
    theta_min = _angle(args.theta_min, args) if args.theta_min is not None else None
    report = {"manifest": manifest(args), "n_vertices": g.n_vertices, "n_edges": g.n_edges,
              "n_faces": len(g.faces), "theta_range": [float(g.theta.min()), float(g.theta.max())]}
    ok = True
    if theta_min is not None:
        bap = check_bap(g, theta_min)
        report["bap"] = {"pass": bap.passed, "violators": list(map(int, bap.violators))}
        ok = bap.passed
    _emit_json(report, args)
    if not ok:
        raise Failed()
    return 0


def cmd_weights(args):
    g = _lattice(args)
    q, beta = args.q, args.beta
    th = g.theta
    x = x_crit(th, q)
    p = p_of_beta(th, beta, q)
    rows = [{"edge_id": e, "theta": th[e], "x": x[e], "p": p[e], "p_dual": dual_p(p[e], q)}
            for e in range(g.n_edges)]
    _emit_csv([], ["edge_id", "theta", "x", "p", "p_dual"], rows, args, {"manifest": manifest(args)})
    return 0


def check_identities(domain, beta, q, tol=1e-10):
    """Run the exact identity battery; returns ``(entries, skipped)``."""
    from .observable import (ENUM_CAP, boundary_lemma, euler_spread, observable_field, verify_area_boundary,
                             verify_peeling_decay, verify_vertex_relation, verify_winding_bound)

    name = domain.label
    out = []
    skipped = []

    def add(identity, residual, bound, ok, **kw):
        d = {"identity": identity, "domain": name, "beta": beta, "q": q, "residual": float(residual),
             "bound": float(bound), "pass": bool(ok)}
        d.update(kw)
        out.append(d)

    sp = euler_spread(domain, beta, q)
    add("loop_cluster_equivalence", sp, tol, sp < tol)
    fld = observable_field(domain, beta, q)
    for tilde in (False, True):
        r = verify_vertex_relation(fld, tol=tol, tilde=tilde)
        add("vertex_relation" + ("_tilde" if tilde else ""), r["residual"], tol, r["pass"])
    if domain.n_edges <= ENUM_CAP:
        bl = boundary_lemma(fld, tol)
        add("boundary_lemma", bl["residual"], tol, bl["pass"])
    else:
        skipped.append({"identity": "boundary_lemma", "reason": "%d edges exceed the enumeration cap %d"
                        % (domain.n_edges, ENUM_CAP)})
    E = [s for s in range(domain.n_sides) if domain.interior[s]]
    if beta < 1 and E:
        for tilde in (False, True):
            ab = verify_area_boundary(fld, E, tol=tol, tilde=tilde)
            sfx = "_tilde" if tilde else ""
            add("zero_sum" + sfx, ab["zero_sum"], tol, ab["zero_sum"] < tol)
            add("area_boundary" + sfx, ab["lhs"], ab["rhs"], ab["pass"], C1=ab["C1"], C1_check=ab["C1_check"])
            add("C1_consistency" + sfx, abs(ab["C1"] - ab["C1_check"]), 1e-12,
                abs(ab["C1"] - ab["C1_check"]) <= 1e-12 * max(1.0, ab["C1"]))
    if beta <= 1:
        deg = domain.degenerate()
        wb = verify_winding_bound(deg, beta, q)
        add("winding_bound", wb["lhs"], wb["rhs"], wb["lhs"] <= wb["rhs"], C2=wb["C2"])
        add("winding_ab", wb["W_ab"], 2 * np.pi, wb["W_ab"] <= 2 * np.pi + tol)
    if beta < 1:
        deg = domain.degenerate()
        pd = verify_peeling_decay(deg, beta, q)
        for row in pd["rows"]:
            add("peeling_decay", max(row["sum_F"], row["sum_Ft"]), row["bound"], row["pass"], k=row["k"])
    return out, skipped


def cmd_check_identities(args):
    dom = _domain(args)
    rows, skipped = check_identities(dom, args.beta, args.q, args.tol)
    ok = all(r["pass"] for r in rows)
    _emit_json({"manifest": manifest(args), "pass": ok, "results": rows, "skipped": skipped}, args)
    if not ok:
        raise Failed()
    return 0


def cmd_enumerate(args):
    from .observable import exact_measure, two_point_exact
    from .rcmodel import BoundaryCondition, Region

    if args.domain:
        dom = _domain(args)
        mu = exact_measure(dom, args.q, beta=args.beta)
        target = dom
        bc = None
    else:
        g = _lattice(args)
        target = Region.whole(g)
        bc = BoundaryCondition.wired() if args.bc == "wired" else BoundaryCondition.free()
        mu = exact_measure(target, args.q, beta=args.beta, bc=bc)
    res = {"manifest": manifest(args), "n_edges": int(mu.graph.n_edges), "n_configs": int(len(mu.probs)),
           "Z": float(mu.Z), "edge_marginals": mu.edge_marginals()}
    if args.two_point:
        u, v = _ints(args.two_point)
        res["two_point"] = float(two_point_exact(target, args.q, u, v, beta=args.beta, bc=bc))
    _emit_json(res, args)
    return 0


def cmd_observable(args):
    from .observable import observable_field

    dom = _domain(args)
    f = observable_field(dom, args.beta, args.q, method=args.method)
    rows = [{"side": s, "vertex": int(dom.side_keys[s][0]), "face": int(dom.side_keys[s][1]),
             "mid_x": dom.side_mid[s][0], "mid_y": dom.side_mid[s][1], "F": f.F[s], "F_tilde": f.Ft[s],
             "P_on_path": f.P[s]} for s in range(dom.n_sides)]
    _emit_csv(["method: %s" % f.method], list(rows[0]), rows, args, {"manifest": manifest(args)})
    return 0


def cmd_sample(args):
    from .mcmc import GENERATOR, sample, square_patch

    alpha = _angle(args.alpha, args) if args.alpha is not None else np.pi / 2
    g, host = square_patch(args.n, args.n, alpha, args.bc)
    nv = host.n_vertices
    c = int(np.argmin(np.hypot(*(host.vertices - host.vertices.mean(axis=0)).T)))
    bnd = np.array(sorted({int(v) for e in host.boundary_edges() for v in host.edges[e]}))
    obs = {
        "edge_density": lambda om, lab: float(om.mean()),
        "largest_fraction": lambda om, lab: float(np.bincount(lab[:nv]).max() / nv),
        "center_to_boundary": lambda om, lab: float(np.any(lab[bnd] == lab[c])),
    }
    res = sample(g, args.q, args.sweeps, args.burn_in, args.seed, beta=args.beta, observables=obs)
    rows = [{"observable": k, "mean": res[k].mean, "se": res[k].se, "n_batches": res[k].n_batches} for k in obs]
    meta = {"manifest": manifest(args, {"generator": GENERATOR}), "seed": args.seed, "sweeps": args.sweeps,
            "beta": args.beta, "q": args.q, "lattice": "square %dx%d alpha=%r bc=%s" % (args.n, args.n, alpha, args.bc)}
    _emit_csv([], ["observable", "mean", "se", "n_batches"], rows, args, meta)
    return 0


def cmd_decay(args):
    from .mcmc import GENERATOR, decay_fit

    alpha = _angle(args.alpha, args) if args.alpha is not None else np.pi / 2
    fit = decay_fit(args.n, args.beta, args.q, _ints(args.radii), args.sweeps, seed=args.seed,
                    burn_in=args.burn_in, alpha=alpha)
    rows = [{"distance": d, "estimate": e, "se": s} for d, e, s in zip(fit.distances, fit.estimates, fit.errors)]
    meta = {"manifest": manifest(args, {"generator": GENERATOR}), "seed": args.seed, "sweeps": args.sweeps,
            "beta": args.beta, "q": args.q, "lattice": "square %dx%d alpha=%r" % (args.n, args.n, alpha)}
    head = ["slope: %r" % fit.slope, "slope_se: %r" % fit.slope_se, "r2: %r" % fit.r2,
            "censored: %s" % fit.censored, "p_scale_bound: %r" % fit.meta["p_scale_bound"]]
    _emit_csv(head, ["distance", "estimate", "se"], rows, args, meta)
    if fit.censored:
        raise Failed()
    return 0


def cmd_critical_scan(args):
    from .mcmc import GENERATOR, critical_scan

    alpha = _angle(args.alpha, args) if args.alpha is not None else np.pi / 2
    res = critical_scan(args.q, _floats(args.betas), args.n, args.sweeps, seed=args.seed, alpha=alpha,
                        burn_in=args.burn_in, low=args.low, high=args.high, threads=_threads(args))
    rows = res["rows"]
    meta = {"manifest": manifest(args, {"generator": GENERATOR}), "seed": args.seed, "sweeps": args.sweeps,
            "q": args.q, "lattice": "square %dx%d alpha=%r" % (args.n, args.n, alpha)}
    _emit_csv(["crossing_region: %r, %r" % res["region"]], list(rows[0]), rows, args, meta)
    return 0


# ---------------------------------------------------------------------------
# parser


def _lattice_opts(p, need_n=True):
    p.add_argument("--lattice", choices=["square", "triangular", "hexagonal"], default="square")
    p.add_argument("--n", type=int, default=2 if not need_n else None, required=need_n)
    p.add_argument("--n-rows", type=int)
    p.add_argument("--alpha", help="square rhombus angle")
    p.add_argument("--angles", help="three comma-separated angles summing to 180 degrees")
    p.add_argument("--graph", help="JSON graph file instead of a generated lattice")


def build_parser():
    ap = argparse.ArgumentParser(prog="isofk", description="Random-cluster model on isoradial graphs")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--radians", action="store_true", help="angles are in radians")
    common.add_argument("--threads", type=int, help="worker threads (default $ISOFK_THREADS or all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", parents=[common], help="generate or check a lattice")
    p.add_argument("action", choices=["gen", "check"])
    p.add_argument("--type", choices=["square", "triangular", "hexagonal"], default="square")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--n-rows", type=int)
    p.add_argument("--alpha")
    p.add_argument("--angles")
    p.add_argument("--graph")
    p.add_argument("--theta-min", help="check the bounded-angle property")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("weights", parents=[common], help="critical edge weights as CSV")
    _lattice_opts(p, need_n=False)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(func=cmd_weights)

    def dom_opts(p):
        p.add_argument("--domain", default="square3x3")
        p.add_argument("--a", type=int, default=0)
        p.add_argument("--b", type=int, default=0)
        p.add_argument("--q", type=float, required=True)
        p.add_argument("--beta", type=float, required=True)

    p = sub.add_parser("check-identities", parents=[common], help="run the exact identity battery")
    dom_opts(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_check_identities)

    p = sub.add_parser("enumerate", parents=[common], help="exact random-cluster measure")
    p.add_argument("--domain")
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--b", type=int, default=0)
    _lattice_opts(p, need_n=False)
    p.add_argument("--bc", choices=["free", "wired"], default="free")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--two-point", help="u,v vertex pair")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("observable", parents=[common], help="exact parafermionic observables as CSV")
    dom_opts(p)
    p.add_argument("--method", choices=["auto", "enumerate", "transfer"], default="auto")
    p.set_defaults(func=cmd_observable)

    def mc_opts(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alpha")
        p.add_argument("--q", type=float, required=True)
        p.add_argument("--sweeps", type=int, required=True)
        p.add_argument("--burn-in", type=int)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sample", parents=[common], help="heat-bath estimates on a square patch")
    mc_opts(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--bc", choices=["free", "wired"], default="free")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decay", parents=[common], help="fit the two-point decay rate")
    mc_opts(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--radii", default="4:20", help="list a,b,c or range a:b")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("critical-scan", parents=[common], help="order parameters across beta")
    mc_opts(p)
    p.add_argument("--betas", required=True, help="comma-separated beta grid")
    p.add_argument("--low", type=float, default=0.05)
    p.add_argument("--high", type=float, default=0.3)
    p.set_defaults(func=cmd_critical_scan)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "sample" and args.burn_in is None:
            args.burn_in = args.sweeps // 10
        return args.func(args)
    except Failed:
        return 1
    except INPUT_ERRORS as exc:
        sys.stderr.write("isofk: error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
