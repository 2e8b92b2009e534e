"""Exact measures, parafermionic observables and the identity verifiers.

Two independent exact routes are available for the observables:

* ``enumerate``: every configuration is weighted by the cluster measure
  ``prod p^open (1-p)^closed q^k`` and its exploration path is traced.
* ``transfer``: a frontier sweep over the loop representation with
  weights ``prod (beta x_e) sqrt(q)^L`` (see :mod:`isofk.transfer`).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, OutOfDomain, TooLarge
from .rcmodel import ClusterGraph, DobrushinDomain, _as_cluster_graph, boundary_windings
from .transfer import transfer_field
from .weights import c_coefficient, lam, p_of_beta, sigma, x_crit

ENUM_CAP = 22
LOOP_CAP = 18


def all_configs(m):
    """Boolean array of the ``2^m`` configurations in integer order (bit i = edge i)."""
    k = np.arange(2 ** m, dtype=np.int64)
    return ((k[:, None] >> np.arange(m)) & 1).astype(bool)


# ---------------------------------------------------------------------------
# exact cluster measure


@dataclass
class ExactMeasure:
    """Normalised probabilities of every configuration of a small graph."""

    graph: ClusterGraph
    q: float
    p: np.ndarray
    probs: np.ndarray
    Z: float
    k: np.ndarray

    @property
    def configs(self):
        return all_configs(self.graph.n_edges)

    def prob(self, omega):
        idx = int(np.dot(np.asarray(omega, dtype=np.int64), 1 << np.arange(len(omega))))
        return float(self.probs[idx])

    def edge_marginals(self):
        return self.probs @ self.configs


_K_CACHE = {}


def _cluster_counts(cg, chunk=1 << 16):
    key = (id(cg), cg.n, cg.uv.tobytes(), cg.fixed.tobytes())
    if key in _K_CACHE:
        return _K_CACHE[key]
    m = cg.n_edges
    out = np.empty(2 ** m, dtype=np.int64)
    for start in range(0, 2 ** m, chunk):
        k = np.arange(start, min(start + chunk, 2 ** m), dtype=np.int64)
        om = ((k[:, None] >> np.arange(m)) & 1).astype(bool)
        out[start:start + len(k)] = cg.counts(om)
    if len(_K_CACHE) > 8:
        _K_CACHE.clear()
    _K_CACHE[key] = out
    return out


def exact_measure(graph, q, beta=None, bc=None, p=None, cap=ENUM_CAP):
    """Enumerate the random-cluster measure.

    ``graph`` is a region (with ``bc``), a Dobrushin domain or a
    :class:`ClusterGraph`.  Edge probabilities are ``p`` or the critical
    parametrisation at ``beta``.
    """
    cg = _as_cluster_graph(graph, bc)
    m = cg.n_edges
    if m > cap:
        raise TooLarge("%d edges exceed the enumeration cap of %d" % (m, cap))
    if p is None:
        if beta is None:
            raise InvalidParameter("give either p or beta")
        p = np.asarray(p_of_beta(cg.theta, beta, q), dtype=float).reshape(-1)
    p = np.broadcast_to(np.asarray(p, dtype=float), (m,)).copy()
    k = _cluster_counts(cg)
    cfg = all_configs(m)
    logw = cfg @ np.log(np.where(p > 0, p, 1e-300)) + (~cfg) @ np.log(np.where(p < 1, 1 - p, 1e-300))
    logw = logw + k * np.log(q)
    shift = logw.max()
    w = np.exp(logw - shift)
    Z = w.sum()
    return ExactMeasure(cg, float(q), p, w / Z, float(Z * np.exp(shift)), k)


def two_point_exact(graph, q, u, v, beta=None, bc=None, p=None, cap=ENUM_CAP):
    """Exact probability that local vertices ``u`` and ``v`` are connected."""
    mu = exact_measure(graph, q, beta=beta, bc=bc, p=p, cap=cap)
    if u == v:
        return 1.0
    cg = mu.graph
    conn = np.array([lab[u] == lab[v] for lab in (cg.components(om)[1] for om in mu.configs)])
    return float(mu.probs[conn].sum())


# ---------------------------------------------------------------------------
# loop enumeration


@dataclass
class LoopTable:
    """Per-configuration loop data of a Dobrushin domain.

    ``on_path[i, s]`` says whether side ``s`` is on the exploration path of
    configuration ``i`` and ``W[i, s]`` is its winding to ``e_b`` (zero off
    the path).  ``L`` counts closed loops and ``k`` clusters.
    """

    configs: np.ndarray
    k: np.ndarray
    L: np.ndarray
    on_path: np.ndarray
    W: np.ndarray


def trace_loops(domain, cfg):
    """Closed-loop counts, path membership and windings for a stack of configurations."""
    cfg = np.asarray(cfg, dtype=bool)
    S = domain.n_sides
    idx = np.arange(S)
    mask = domain.enter_rh >= 0
    state = np.ones((len(cfg), S), dtype=np.int64)
    state[:, mask] = cfg[:, domain.enter_rh[mask]]
    nxt = domain.nxt[state, idx]
    turn = domain.turn[state, idx]
    rows = np.arange(len(cfg))[:, None]
    rounds = int(np.ceil(np.log2(max(S, 2)))) + 1
    # cycles: close the path by sending e_b back to e_a
    jump = nxt.copy()
    jump[:, domain.e_b] = domain.e_a
    lab = np.tile(idx, (len(cfg), 1))
    for _ in range(rounds):
        lab = np.minimum(lab, lab[rows, jump])
        jump = jump[rows, jump]
    n_cycles = (lab == idx).sum(axis=1)
    on_path = lab == lab[:, [domain.e_a]]
    # windings: e_b absorbs with zero turn
    jump = nxt.copy()
    jump[:, domain.e_b] = domain.e_b
    acc = turn.copy()
    acc[:, domain.e_b] = 0.0
    for _ in range(rounds):
        acc = acc + acc[rows, jump]
        jump = jump[rows, jump]
    W = np.where(on_path, acc, 0.0)
    return n_cycles - 1, on_path, W


def loop_table(domain, cap=LOOP_CAP):
    """Trace loops of every configuration at once by pointer doubling."""
    m = domain.n_edges
    if m > cap:
        raise TooLarge("%d edges exceed the loop enumeration cap of %d" % (m, cap))
    cached = domain._cache.get("loop_table")
    if cached is not None:
        return cached
    cfg = all_configs(m)
    L, on_path, W = trace_loops(domain, cfg)
    k = _cluster_counts(domain.cluster_graph())
    table = LoopTable(cfg, k, L, on_path, W)
    domain._cache["loop_table"] = table
    return table


def euler_spread(domain, beta, q, n_samples=4096, seed=0):
    """Relative spread over configurations of cluster weight / loop weight.

    Every configuration is used within the loop cap; beyond it the check
    runs on ``n_samples`` uniformly drawn configurations (the identity is
    per configuration, so a sample still tests it exactly).
    """
    x = np.asarray(x_crit(domain.theta, q), dtype=float).reshape(-1)
    p = np.asarray(p_of_beta(domain.theta, beta, q), dtype=float).reshape(-1)
    if domain.n_edges <= LOOP_CAP:
        t = loop_table(domain)
        cfg, k, L = t.configs, t.k, t.L
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        cfg = rng.random((n_samples, domain.n_edges)) < 0.5
        L, _, _ = trace_loops(domain, cfg)
        k = domain.cluster_graph().counts(cfg)
    log_cluster = cfg @ np.log(p) + (~cfg) @ np.log(1 - p) + k * np.log(q)
    log_loop = cfg @ np.log(beta * x) + L * 0.5 * np.log(q)
    r = log_cluster - log_loop
    return float(np.expm1(r.max() - r.min()))


# ---------------------------------------------------------------------------
# observables


@dataclass
class ObservableField:
    """``F``, ``F_tilde`` and ``P(side on path)`` over the sides of a domain."""

    domain: DobrushinDomain
    beta: float
    q: float
    F: np.ndarray
    Ft: np.ndarray
    P: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def scale(self):
        return max(1.0, float(np.max(np.abs(self.F))))


def observable_field(domain, beta, q, method="auto", sigma_override=None):
    """Exact parafermionic observables of a Dobrushin domain.

    ``method`` is ``enumerate``, ``transfer`` or ``auto`` (enumerate when
    the domain is within the loop cap).  ``sigma_override`` replaces the
    spin in the exponent only (used to probe the small-spin limit).
    """
    if not q > 4:
        raise OutOfDomain("observables require q > 4")
    if beta <= 0:
        raise InvalidParameter("beta must be positive")
    if method == "auto":
        method = "enumerate" if domain.n_edges <= LOOP_CAP else "transfer"
    s = sigma(q) if sigma_override is None else float(sigma_override)
    if method == "enumerate":
        t = loop_table(domain)
        mu = exact_measure(domain, q, beta=beta)
        pr = mu.probs[:, None]
        F = (pr * np.where(t.on_path, np.exp(s * t.W), 0.0)).sum(axis=0)
        Ft = (pr * np.where(t.on_path, np.exp(-s * t.W), 0.0)).sum(axis=0)
        P = (pr * t.on_path).sum(axis=0)
        return ObservableField(domain, float(beta), float(q), F, Ft, P, method, {"Z": mu.Z})
    if method == "transfer":
        if sigma_override is not None:
            raise InvalidParameter("sigma_override needs the enumerate method")
        F, Ft, P, Z = transfer_field(domain, beta, q)
        return ObservableField(domain, float(beta), float(q), F, Ft, P, method, {"Z_loop": Z})
    raise InvalidParameter("unknown method %r" % (method,))


def _lam_variant(x, theta, q, tilde):
    v = lam(x, theta, q)
    return 1.0 / v if tilde else v


def vertex_residual(field_, k, labeling=0, tilde=False):
    """Residual of the vertex relation at rhombus ``k``.

    Labels ``A, B, C, D`` run counterclockwise with the curves leaving the
    rhombus through ``A`` and ``C``; ``labeling`` picks which exiting side
    is ``A``.  For ``F`` the relation is ``F(B)+F(D) = Lambda (F(A)+F(C))``;
    ``F_tilde`` satisfies it with ``1 / Lambda``.
    """
    dom = field_.domain
    ent, ext = dom.entering_rhombus_sides(k)
    sides = dom.rhombus_sides[k]
    cen = dom.rhombus_center[k]
    ang = {int(s): np.arctan2(*(dom.side_mid[s] - cen)[::-1]) for s in sides}
    ccw = sorted(sides, key=lambda s: ang[int(s)])
    start = ccw.index(ext[labeling])
    A, B, C, D = [ccw[(start + i) % 4] for i in range(4)]
    if {A, C} != set(ext) or {B, D} != set(ent):
        raise InvalidParameter("labeling does not alternate exits and entries")
    vals = field_.Ft if tilde else field_.F
    x = x_crit(dom.theta[k], field_.q)
    L = _lam_variant(field_.beta * x, dom.theta[k], field_.q, tilde)
    lhs = vals[B] + vals[D]
    rhs = L * (vals[A] + vals[C])
    return float(abs(lhs - rhs)), float(max(abs(lhs), abs(rhs)))


def verify_vertex_relation(field_, k=None, labeling=None, tol=1e-10, tilde=False):
    """Maximum relative residual over rhombi (all by default) and labelings."""
    ks = range(field_.domain.n_edges) if k is None else [k]
    labs = (0, 1) if labeling is None else (labeling,)
    worst = 0.0
    for kk in ks:
        for lb in labs:
            r, sc = vertex_residual(field_, kk, lb, tilde)
            worst = max(worst, r / max(1.0, sc))
    return {"residual": worst, "pass": worst < tol}


# ---------------------------------------------------------------------------
# zero-sum identity and the area/boundary inequality


def _face_coefficients(domain, E, beta, q, tilde=False):
    """Coefficients of the zero-sum identity over the rhombi touching ``E``.

    Summing ``Lambda_f * sum_exit F - sum_enter F`` over those rhombi and
    regrouping by side gives ``sum_s c(s) F(s) = 0``.  For ``F_tilde`` the
    roles of entering and exiting sides swap.
    """
    E = set(int(s) for s in E)
    faces = sorted({int(domain.enter_rh[s]) for s in E if domain.enter_rh[s] >= 0}
                   | {int(domain.exit_rh[s]) for s in E if domain.exit_rh[s] >= 0})
    x = np.asarray(x_crit(domain.theta, q), dtype=float).reshape(-1)
    coef = {}
    for f in faces:
        L = lam(beta * x[f], domain.theta[f], q)
        for s in domain.rhombus_sides[f]:
            s = int(s)
            exits = domain.exit_rh[s] == f
            if tilde:
                c = L if not exits else -1.0
            else:
                c = L if exits else -1.0
            coef[s] = coef.get(s, 0.0) + c
    boundary = sorted(s for s in coef if s not in E)
    return coef, boundary, faces


def verify_area_boundary(field_, E, theta_min=None, tol=1e-10, tilde=False):
    """Check ``sum_E F <= C1 sum_{boundary of E} F`` and the zero-sum identity.

    ``C1`` is computed from the coefficients of this domain and, independently,
    from :func:`isofk.weights.c_coefficient`.  Returns a report dict.
    """
    dom, beta, q = field_.domain, field_.beta, field_.q
    if beta >= 1:
        raise InvalidParameter("the area/boundary inequality needs beta < 1")
    E = sorted(set(int(s) for s in E))
    if not E:
        return {"lhs": 0.0, "rhs": 0.0, "C1": 0.0, "C1_check": 0.0, "zero_sum": 0.0, "pass": True,
                "boundary": []}
    if not all(dom.interior[s] for s in E):
        raise InvalidParameter("E must consist of interior diamond edges")
    vals = field_.Ft if tilde else field_.F
    coef, bnd, faces = _face_coefficients(dom, E, beta, q, tilde)
    zero = sum(coef[s] * vals[s] for s in coef)
    scale = max(1.0, sum(abs(coef[s] * vals[s]) for s in coef))
    cE = np.array([coef[s] for s in E])
    cB = np.array([abs(coef[s]) for s in bnd]) if bnd else np.zeros(1)
    C1 = float(cB.max() / cE.min())
    # second route: c(e) = Lambda(beta x_e) - 1 on the rhombus each side of E
    # leaves (enters for F_tilde); boundary sides carry Lambda_f or 1
    own = []
    for s in E:
        f = dom.enter_rh[s] if tilde else dom.exit_rh[s]
        own.append(float(c_coefficient(dom.theta[f], beta, q)))
    touching = [float(lam(beta * x_crit(dom.theta[f], q), dom.theta[f], q)) for f in faces]
    bmax = 0.0
    for s in bnd:
        for f in faces:
            if s in dom.rhombus_sides[f]:
                exits = dom.exit_rh[s] == f
                bmax = max(bmax, (touching[faces.index(f)] if exits != tilde else 1.0))
    C1_check = bmax / min(own)
    lhs = float(sum(vals[s] for s in E))
    rhs_sum = float(sum(vals[s] for s in bnd))
    ok = (cE.min() > 0) and lhs <= C1 * rhs_sum * (1 + tol) + tol and abs(zero) < tol * scale
    return {"lhs": lhs, "rhs": C1 * rhs_sum, "boundary_sum": rhs_sum, "C1": C1, "C1_check": float(C1_check),
            "zero_sum": float(abs(zero) / scale), "pass": bool(ok), "boundary": bnd}


def boundary_lemma(field_, tol=1e-10):
    """Free-arc sides: ``F(e) = exp(sigma W(e, e_b)) P(u <-> wired arc)``.

    The connection probability is computed from the cluster measure, the
    winding from the all-open exploration path (it does not depend on the
    configuration).
    """
    dom, beta, q = field_.domain, field_.beta, field_.q
    s_ = sigma(q)
    mu = exact_measure(dom, q, beta=beta)
    cg = mu.graph
    wired = dom.wired_local()
    labels = np.array([cg.components(om)[1] for om in mu.configs])
    wind = boundary_windings(dom)
    rows = []
    for s in dom.free_arc_sides():
        u = dom.region.local[dom.side_keys[s][0]]
        conn = np.any(labels[:, [u]] == labels[:, wired], axis=1)
        pc = float(mu.probs[conn].sum())
        expect = np.exp(s_ * wind[s]) * pc
        rows.append({"side": int(s), "F": float(field_.F[s]), "expected": float(expect),
                     "residual": float(abs(field_.F[s] - expect))})
    worst = max((r["residual"] for r in rows), default=0.0)
    return {"rows": rows, "residual": worst, "pass": worst < tol}


# ---------------------------------------------------------------------------
# winding bound and peeling


def c2_constant(q, theta_min):
    """``4 + 4 e^{2 pi sigma} / (e^{sigma theta} - 1)``."""
    s = sigma(q)
    return 4.0 + 4.0 * np.exp(2 * np.pi * s) / np.expm1(s * theta_min)


def verify_winding_bound(domain, beta, q, field_=None, tol=1e-10):
    """``sum_{boundary} F <= C2 e^{sigma (W_max - W_min)}`` on the degenerate domain."""
    if beta > 1:
        raise InvalidParameter("the winding bound needs beta <= 1")
    dom = domain if domain.a == domain.b else domain.degenerate()
    fld = field_ if field_ is not None else observable_field(dom, beta, q)
    from .rcmodel import boundary_winding_range
    wmin, wmax = boundary_winding_range(dom)
    C2 = c2_constant(q, dom.theta_min())
    lhs = float(fld.F[dom.boundary_sides].sum())
    rhs = float(C2 * np.exp(sigma(q) * (wmax - wmin)))
    wab = boundary_windings(dom)[dom.e_a]
    return {"lhs": lhs, "rhs": rhs, "C2": float(C2), "W_min": wmin, "W_max": wmax,
            "W_ab": float(wab), "pass": bool(lhs <= rhs and wab <= 2 * np.pi + tol)}


def peel(domain, k):
    """``(E_k, boundary sides of E_k)`` after ``k`` rounds of removing boundary vertices.

    ``E_0`` is the set of interior sides of the domain.  For ``k >= 1`` the
    vertex set loses, at each round, the vertices having a host neighbour
    outside it; ``E_k`` keeps the sides ``(v, f)`` whose two rhombi both
    belong to edges between surviving vertices.
    """
    host = domain.host
    if k < 0:
        raise InvalidParameter("k must be nonnegative")
    if k == 0:
        E = [s for s in range(domain.n_sides) if domain.interior[s]]
    else:
        alive = set(int(v) for v in domain.region.vertices)
        for _ in range(k):
            drop = set()
            for v in alive:
                for e in host.vertex_edges[v]:
                    i, j = host.edges[e]
                    if int(i) not in alive or int(j) not in alive:
                        drop.add(v)
                        break
            alive -= drop
        E = []
        for s in range(domain.n_sides):
            if not domain.interior[s]:
                continue
            ks = [domain.var_edges[r] for r in (domain.enter_rh[s], domain.exit_rh[s])]
            if all(int(v) in alive for e in ks for v in host.edges[e]):
                E.append(s)
    if not E:
        return [], []
    _, bnd, _ = _face_coefficients(domain, E, 0.5, 9.0)
    return E, bnd


def peeling_depth(domain):
    k = 0
    while peel(domain, k + 1)[0]:
        k += 1
    return k + 1


def verify_peeling_decay(domain, beta, q, kmax=None, field_=None, tol=1e-10):
    """Geometric decay of ``sum_{E_k} F`` and ``sum_{E_k} F_tilde`` over the peelings."""
    if beta >= 1:
        raise InvalidParameter("peeling decay needs beta < 1")
    dom = domain if domain.a == domain.b else domain.degenerate()
    fld = field_ if field_ is not None else observable_field(dom, beta, q)
    depth = peeling_depth(dom)
    kmax = depth if kmax is None else kmax
    layers = [peel(dom, k) for k in range(kmax + 1)]
    c1s, c1t = [], []
    for E, _ in layers:
        if E:
            c1s.append(verify_area_boundary(fld, E)["C1"])
            c1t.append(verify_area_boundary(fld, E, tilde=True)["C1"])
    C1 = max(c1s + c1t) if c1s else 0.0
    wb = verify_winding_bound(dom, beta, q, fld)
    pref = C1 * wb["C2"] * np.exp(sigma(q) * (wb["W_max"] - wb["W_min"]))
    ratio = C1 / (1 + C1)
    rows, ok = [], True
    prev = None
    for k, (E, _) in enumerate(layers):
        sF = float(fld.F[E].sum()) if E else 0.0
        sFt = float(fld.Ft[E].sum()) if E else 0.0
        bound = float(pref * ratio ** k)
        step_ok = True
        if prev is not None and E:
            step_ok = sF <= ratio * prev[0] * (1 + tol) + tol and sFt <= ratio * prev[1] * (1 + tol) + tol
        row_ok = sF <= bound * (1 + tol) and sFt <= bound * (1 + tol) and step_ok
        rows.append({"k": k, "size": len(E), "sum_F": sF, "sum_Ft": sFt, "bound": bound,
                     "step_ok": bool(step_ok), "pass": bool(row_ok)})
        ok = ok and row_ok
        prev = (sF, sFt)
    return {"C1": C1, "C2": wb["C2"], "rows": rows, "depth": depth, "pass": bool(ok)}
