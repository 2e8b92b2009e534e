"""Heat-bath Monte Carlo for the random-cluster measure.

An edge is resampled from its exact conditional law given the rest of the
configuration: open with probability ``p`` if its endpoints are already
connected (through open edges and the boundary wiring), otherwise with
probability ``p / (p + q (1 - p))``.  The connectivity query is a
bidirectional breadth-first search that stops as soon as the two searches
meet or one of them runs out of vertices.

Uniform variates are drawn from numpy's PCG64 generator with an explicit
seed, in blocks of whole sweeps, so a run is reproducible bit for bit.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidParameter
from .rcmodel import ClusterGraph
from .weights import p_of_beta

GENERATOR = "numpy.random.PCG64"


# ---------------------------------------------------------------------------
# numba kernels


@numba.njit(cache=True, nogil=True)
def _connected(u, v, skip, omega, indptr, nbr, eid, markA, markB, gen, qa, qb):
    if u == v:
        return True
    markA[u] = gen
    markB[v] = gen
    qa[0] = u
    qb[0] = v
    ha, ta, hb, tb = 0, 1, 0, 1
    while True:
        # one vertex from each side in turn
        if ha == ta:
            return False
        x = qa[ha]
        ha += 1
        for k in range(indptr[x], indptr[x + 1]):
            e = eid[k]
            if e == skip or (e >= 0 and omega[e] == 0):
                continue
            w = nbr[k]
            if markB[w] == gen:
                return True
            if markA[w] != gen:
                markA[w] = gen
                qa[ta] = w
                ta += 1
        if hb == tb:
            return False
        x = qb[hb]
        hb += 1
        for k in range(indptr[x], indptr[x + 1]):
            e = eid[k]
            if e == skip or (e >= 0 and omega[e] == 0):
                continue
            w = nbr[k]
            if markA[w] == gen:
                return True
            if markB[w] != gen:
                markB[w] = gen
                qb[tb] = w
                tb += 1


@numba.njit(cache=True, nogil=True)
def _sweeps(omega, eu, ev, p_conn, p_disc, indptr, nbr, eid, markA, markB, gen0, qa, qb, uni, n_sweeps):
    m = omega.shape[0]
    gen = gen0
    k = 0
    for _ in range(n_sweeps):
        for e in range(m):
            gen += 1
            if _connected(eu[e], ev[e], e, omega, indptr, nbr, eid, markA, markB, gen, qa, qb):
                pe = p_conn[e]
            else:
                pe = p_disc[e]
            omega[e] = 1 if uni[k] < pe else 0
            k += 1
    return gen


@numba.njit(cache=True, nogil=True)
def _sweeps_trace(omega, eu, ev, p_conn, p_disc, indptr, nbr, eid, markA, markB, gen0, qa, qb, uni, n_sweeps, codes):
    m = omega.shape[0]
    gen = gen0
    for s in range(n_sweeps):
        gen = _sweeps(omega, eu, ev, p_conn, p_disc, indptr, nbr, eid, markA, markB, gen, qa, qb,
                      uni[s * m:(s + 1) * m], 1)
        c = 0
        for e in range(m):
            c |= np.int64(omega[e]) << e
        codes[s] = c
    return gen


@numba.njit(cache=True, nogil=True)
def _find(parent, x):
    r = x
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nx = parent[x]
        parent[x] = r
        x = nx
    return r


@numba.njit(cache=True, nogil=True)
def _labels(n, omega, eu, ev, fu, fv):
    parent = np.arange(n)
    for e in range(omega.shape[0]):
        if omega[e]:
            a = _find(parent, eu[e])
            b = _find(parent, ev[e])
            if a != b:
                parent[max(a, b)] = min(a, b)
    for e in range(fu.shape[0]):
        a = _find(parent, fu[e])
        b = _find(parent, fv[e])
        if a != b:
            parent[max(a, b)] = min(a, b)
    for x in range(n):
        parent[x] = _find(parent, x)
    return parent


def cluster_labels(graph, omega):
    """Root label of every vertex (union-find over open and fixed edges)."""
    return _labels(graph.n, np.asarray(omega, dtype=np.uint8), graph.uv[:, 0], graph.uv[:, 1],
                   graph.fixed[:, 0], graph.fixed[:, 1])


# ---------------------------------------------------------------------------
# chain


def conditional_open_probability(p, q, connected):
    """Exact conditional probability that an edge is open."""
    return p if connected else p / (p + q * (1.0 - p))


class Chain:
    """Heat-bath chain on a :class:`ClusterGraph`.

    Parameters
    ----------
    graph : ClusterGraph
    p : array_like
        Edge probabilities.
    q : float
        Cluster weight, at least 1.
    seed : int
    init : {"closed", "open"}
    """

    def __init__(self, graph, p, q, seed=0, init="closed"):
        if q < 1:
            raise InvalidParameter("heat-bath sampling requires q >= 1")
        self.graph = graph
        self.q = float(q)
        self.p = np.broadcast_to(np.asarray(p, dtype=float), (graph.n_edges,)).copy()
        if np.any((self.p < 0) | (self.p > 1)):
            raise InvalidParameter("edge probabilities must lie in [0, 1]")
        self.seed = int(seed)
        self.rng = np.random.Generator(np.random.PCG64(self.seed))
        self.omega = np.full(graph.n_edges, 1 if init == "open" else 0, dtype=np.uint8)
        self.sweep_count = 0
        self.p_conn = self.p.copy()
        self.p_disc = self.p / (self.p + self.q * (1.0 - self.p))
        self._build_adjacency()
        n = graph.n
        self._markA = np.zeros(n, dtype=np.int64)
        self._markB = np.zeros(n, dtype=np.int64)
        self._qa = np.zeros(n, dtype=np.int64)
        self._qb = np.zeros(n, dtype=np.int64)
        self._gen = 0

    def _build_adjacency(self):
        g = self.graph
        src = np.concatenate([g.uv[:, 0], g.uv[:, 1], g.fixed[:, 0], g.fixed[:, 1]])
        dst = np.concatenate([g.uv[:, 1], g.uv[:, 0], g.fixed[:, 1], g.fixed[:, 0]])
        ids = np.concatenate([np.arange(g.n_edges), np.arange(g.n_edges),
                              -np.ones(2 * len(g.fixed), dtype=np.int64)])
        order = np.argsort(src, kind="stable")
        self._nbr = dst[order].astype(np.int64)
        self._eid = ids[order].astype(np.int64)
        self._indptr = np.zeros(g.n + 1, dtype=np.int64)
        np.add.at(self._indptr, src + 1, 1)
        self._indptr = np.cumsum(self._indptr)
        self._eu = g.uv[:, 0].astype(np.int64)
        self._ev = g.uv[:, 1].astype(np.int64)

    def connected_off(self, e):
        """Whether the endpoints of edge ``e`` are connected without ``e``."""
        self._gen += 1
        return bool(_connected(self._eu[e], self._ev[e], e, self.omega, self._indptr, self._nbr, self._eid,
                               self._markA, self._markB, self._gen, self._qa, self._qb))

    def conditional(self, e):
        return conditional_open_probability(self.p[e], self.q, self.connected_off(e))

    def heatbath_step(self, e, u):
        """Resample edge ``e`` using the uniform variate ``u``."""
        self.omega[e] = 1 if u < self.conditional(e) else 0
        return self

    def sweep(self, n=1, block=None):
        """Run ``n`` sequential sweeps over the edges in index order."""
        m = self.graph.n_edges
        block = block or max(1, min(n, 2_000_000 // max(m, 1)))
        done = 0
        while done < n:
            k = min(block, n - done)
            uni = self.rng.random(k * m)
            self._gen = _sweeps(self.omega, self._eu, self._ev, self.p_conn, self.p_disc, self._indptr,
                                self._nbr, self._eid, self._markA, self._markB, self._gen, self._qa, self._qb,
                                uni, k)
            done += k
        self.sweep_count += n
        return self

    def trace(self, n):
        """Run ``n`` sweeps and return the configuration code after each one.

        Bit ``i`` of a code is edge ``i``; only for graphs with at most 62 edges.
        """
        m = self.graph.n_edges
        if m > 62:
            raise InvalidParameter("configuration codes need at most 62 edges")
        codes = np.empty(n, dtype=np.int64)
        block = max(1, 2_000_000 // max(m, 1))
        done = 0
        while done < n:
            k = min(block, n - done)
            uni = self.rng.random(k * m)
            self._gen = _sweeps_trace(self.omega, self._eu, self._ev, self.p_conn, self.p_disc, self._indptr,
                                      self._nbr, self._eid, self._markA, self._markB, self._gen, self._qa,
                                      self._qb, uni, k, codes[done:done + k])
            done += k
        self.sweep_count += n
        return codes

    def state(self):
        return ChainState(self.omega.copy(), self.q, self.p.copy(), self.seed,
                          self.rng.bit_generator.state, self.sweep_count)

    def labels(self):
        return cluster_labels(self.graph, self.omega)


@dataclass
class ChainState:
    """Snapshot of a chain: configuration, parameters, generator state and sweep count."""
    omega: np.ndarray
    q: float
    p: np.ndarray
    seed: int
    rng_state: dict
    sweeps: int
    generator: str = GENERATOR


# ---------------------------------------------------------------------------
# estimators


def batch_means(values, n_batches=None):
    """Batch means and standard error; at least 20 batches."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 20:
        raise InvalidParameter("need at least 20 samples for batch means")
    if n_batches is None:
        size = max(1, int(np.floor(np.sqrt(n))))
        n_batches = max(20, n // size)
    n_batches = max(20, min(int(n_batches), n))
    size = n // n_batches
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    se = float(means.std(ddof=1) / np.sqrt(n_batches))
    return means, se


@dataclass
class EstimatorSeries:
    name: str
    values: np.ndarray
    batch_means: np.ndarray = None
    se: float = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.batch_means is None:
            self.batch_means, self.se = batch_means(self.values)

    @property
    def mean(self):
        return float(self.values.mean())

    @property
    def n_batches(self):
        return len(self.batch_means)


def _observable_fns(graph, observables):
    out = {}
    for name in observables:
        if callable(observables[name]):
            out[name] = observables[name]
        else:
            raise InvalidParameter("observable %r is not callable" % name)
    return out


def sample(graph, q, sweeps, burn_in=0, seed=0, beta=None, p=None, observables=None, init="closed",
           every=1):
    """Run a chain and record observables once per ``every`` sweeps after burn-in.

    ``observables`` maps names to functions ``f(omega, labels) -> float``.
    The default records the edge density.  Returns a dict of
    :class:`EstimatorSeries` and the final :class:`Chain` under ``"_chain"``.
    """
    if not sweeps > burn_in >= 0:
        raise InvalidParameter("need sweeps > burn_in >= 0")
    if p is None:
        if beta is None:
            raise InvalidParameter("give either p or beta")
        p = p_of_beta(graph.theta, beta, q)
    chain = Chain(graph, p, q, seed=seed, init=init)
    if observables is None:
        observables = {"edge_density": lambda om, lab: float(om.mean())}
    fns = _observable_fns(graph, observables)
    chain.sweep(burn_in)
    n_rec = (sweeps - burn_in) // every
    rec = {k: np.empty(n_rec) for k in fns}
    for i in range(n_rec):
        chain.sweep(every)
        lab = chain.labels()
        for k, f in fns.items():
            rec[k][i] = f(chain.omega, lab)
    out = {k: EstimatorSeries(k, v) for k, v in rec.items()}
    out["_chain"] = chain
    return out


def connection_observable(u, v):
    return lambda om, lab: float(lab[u] == lab[v])


def config_index_observable():
    def f(om, lab):
        return float(np.dot(om.astype(np.int64), 1 << np.arange(len(om))))
    return f


# ---------------------------------------------------------------------------
# lattice helpers


def square_patch(n_cols, n_rows=None, alpha=np.pi / 2, bc="free"):
    """Cluster graph of a rectangular patch with free or wired boundary.

    Returns ``(graph, host)``; wired boundary uses one ghost vertex joined
    to every outer vertex.
    """
    from .geometry import build_square
    from .rcmodel import BoundaryCondition, Region

    n_rows = n_cols if n_rows is None else n_rows
    host = build_square(n_cols, n_rows, alpha)
    reg = Region.whole(host)
    b = BoundaryCondition.wired() if bc == "wired" else BoundaryCondition.free()
    return reg.cluster_graph(b), host


def square_dual_patch(n_cols, n_rows=None, alpha=np.pi / 2):
    """Planar dual of a free rectangular patch, with the outer face split in four.

    Vertices ``0..F-1`` are the faces (row-major), then ``T, B, L, R`` for
    the outer regions above, below, left and right.  The four are joined by
    fixed open edges, which realises the wired boundary of the dual.  Dual
    edge ``k`` crosses primal edge ``k`` and carries ``pi - theta``.
    """
    from .geometry import build_square

    n_rows = n_cols if n_rows is None else n_rows
    host = build_square(n_cols, n_rows, alpha)
    F = len(host.faces)
    T, B, L, R = F, F + 1, F + 2, F + 3
    vy = host.vertices[:, 1]
    vx = host.vertices[:, 0]
    ymax, xmax = vy.max(), vx.max()
    uv = []
    for e, (i, j) in enumerate(host.edges):
        l, r = (int(f) for f in host.edge_faces[e])
        ends = []
        for f in (l, r):
            if f >= 0:
                ends.append(f)
                continue
            if abs(vy[i] - vy[j]) < 1e-9:      # horizontal boundary edge
                ends.append(T if abs(vy[i] - ymax) < 1e-9 else B)
            else:
                ends.append(R if abs(vx[i] - xmax) < 1e-9 else L)
        uv.append(ends)
    fixed = [(T, B), (T, L), (T, R)]
    g = ClusterGraph(F + 4, np.array(uv), np.array(fixed), theta=np.pi - host.theta)
    return g, host, (T, B, L, R)


def crossing_lr(host):
    """Observable: open left-right crossing of a free rectangular patch."""
    vx = host.vertices[:, 0]
    left = np.nonzero(np.abs(vx - vx.min()) < 1e-9)[0]
    right = np.nonzero(np.abs(vx - vx.max()) < 1e-9)[0]

    def f(om, lab):
        return float(bool(np.intersect1d(lab[left], lab[right]).size))
    return f


def dual_crossing_tb(graph, ends):
    """Observable: dual-open path from the top outer region to the bottom one.

    Dual edges into the left and right outer regions and the boundary wiring
    are ignored, so a path may not pass around the side of the patch.
    """
    T, B, L, R = ends
    side = (np.isin(graph.uv[:, 0], (L, R)) | np.isin(graph.uv[:, 1], (L, R))).astype(np.uint8)
    free_graph = ClusterGraph(graph.n, graph.uv)

    def f(om, lab):
        lab2 = cluster_labels(free_graph, om * (1 - side))
        return float(lab2[T] == lab2[B])
    return f


# ---------------------------------------------------------------------------
# decay and critical scans


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r2: float
    slope_se: float
    distances: np.ndarray
    estimates: np.ndarray
    errors: np.ndarray
    censored: bool
    meta: dict = field(default_factory=dict)

    @property
    def rate(self):
        return -self.slope


def _displacement_pairs(host, step):
    """Vertex pairs of a square patch separated by ``step`` lattice steps along an axis."""
    v = host.vertices
    xs = np.unique(np.round(v[:, 0], 9))
    ys = np.unique(np.round(v[:, 1], 9))
    nx, ny = len(xs), len(ys)
    ix = np.searchsorted(xs, np.round(v[:, 0], 9))
    iy = np.searchsorted(ys, np.round(v[:, 1], 9))
    grid = -np.ones((nx, ny), dtype=np.int64)
    grid[ix, iy] = np.arange(len(v))
    a = np.concatenate([grid[:-step, :].ravel(), grid[:, :-step].ravel()]) if step < min(nx, ny) else np.zeros(0, int)
    b = np.concatenate([grid[step:, :].ravel(), grid[:, step:].ravel()]) if step < min(nx, ny) else np.zeros(0, int)
    return a, b


def decay_fit(n, beta, q, radii, sweeps, seed=0, burn_in=None, alpha=np.pi / 2, bc="free"):
    """Fit ``log P(x <-> y)`` against ``|x - y|`` on an ``n x n`` square patch.

    Connection probabilities are averaged over every pair of vertices
    separated by ``r`` lattice steps along a lattice axis.  A radius whose
    estimate is zero makes the fit censored (it is reported, not raised).
    """
    if not beta < 1:
        raise InvalidParameter("decay fits need beta < 1")
    graph, host = square_patch(n, n, alpha, bc)
    burn_in = sweeps // 10 if burn_in is None else burn_in
    step_len = float(host.edge_lengths()[0])
    pairs = {r: _displacement_pairs(host, r) for r in radii}
    obs = {}
    for r in radii:
        a, b = pairs[r]
        obs["r%d" % r] = (lambda a, b: (lambda om, lab: float(np.mean(lab[a] == lab[b]))))(a, b)
    res = sample(graph, q, sweeps, burn_in, seed, beta=beta, observables=obs)
    est = np.array([res["r%d" % r].mean for r in radii])
    err = np.array([res["r%d" % r].se for r in radii])
    d = np.array(radii, dtype=float) * step_len
    censored = bool(np.any(est <= 0))
    keep = est > 0
    if keep.sum() >= 2:
        y = np.log(est[keep])
        xk = d[keep]
        A = np.vstack([xk, np.ones_like(xk)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        fit = A @ coef
        ss_res = float(np.sum((y - fit) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
        dof = max(1, keep.sum() - 2)
        s2 = ss_res / dof
        slope_se = float(np.sqrt(s2 / np.sum((xk - xk.mean()) ** 2)))
        slope, icpt = float(coef[0]), float(coef[1])
    else:
        slope = icpt = r2 = slope_se = float("nan")
    p = float(np.mean(p_of_beta(host.theta, beta, q)))
    meta = {"seed": seed, "generator": GENERATOR, "sweeps": sweeps, "burn_in": burn_in, "n": n,
            "beta": beta, "q": q, "p_scale_bound": float(-np.log(p) / step_len)}
    return DecayFit(slope, icpt, r2, slope_se, d, est, err, censored, meta)


def critical_scan(q, betas, n, sweeps, seed=0, alpha=np.pi / 2, burn_in=None, low=0.05, high=0.3, threads=1):
    """Finite-size order parameters across a grid of ``beta``.

    For each ``beta`` and each of the free and wired boundary conditions we
    estimate the probability that the central vertex connects to the patch
    boundary (``*_boundary``) and the largest cluster fraction
    (``*_largest``).  The free chain starts all closed, the wired chain all
    open.

    The crossing region is ``[beta_lo, beta_hi]``: ``beta_lo`` is the largest
    ``beta`` at which even the wired boundary connection probability stays
    below ``low``, and ``beta_hi`` the smallest at which even the free one
    exceeds ``high``.
    """
    if not (min(betas) < 1 < max(betas)):
        raise InvalidParameter("the beta grid must straddle 1")
    burn_in = sweeps // 5 if burn_in is None else burn_in
    gf, host = square_patch(n, n, alpha, "free")
    gw, _ = square_patch(n, n, alpha, "wired")
    nv = host.n_vertices
    c = int(np.argmin(np.hypot(*(host.vertices - host.vertices.mean(axis=0)).T)))
    bnd = np.array(sorted({int(v) for e in host.boundary_edges() for v in host.edges[e]}))

    def to_boundary(om, lab):
        return float(np.any(lab[bnd] == lab[c]))

    def largest(om, lab):
        return float(np.bincount(lab[:nv]).max() / nv)

    obs = {"boundary": to_boundary, "largest": largest}
    jobs = []
    for k, b in enumerate(betas):
        jobs.append((k, b, "free", gf, "closed", seed + 2 * k))
        jobs.append((k, b, "wired", gw, "open", seed + 2 * k + 1))

    def run(job):
        k, b, bc, g, init, s = job
        return sample(g, q, sweeps, burn_in, s, beta=b, observables=obs, init=init)

    # each chain has its own seed, so the result does not depend on threads
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as ex:
        results = list(ex.map(run, jobs))
    rows = [{"beta": float(b)} for b in betas]
    for (k, b, bc, *_), res in zip(jobs, results):
        for name in obs:
            rows[k]["%s_%s" % (bc, name)] = res[name].mean
            rows[k]["%s_%s_se" % (bc, name)] = res[name].se
    sub = [r["beta"] for r in rows if r["wired_boundary"] < low]
    sup = [r["beta"] for r in rows if r["free_boundary"] > high]
    lo = max(sub) if sub else float("nan")
    hi = min(sup) if sup else float("nan")
    meta = {"seed": seed, "generator": GENERATOR, "sweeps": sweeps, "burn_in": burn_in, "n": n, "q": q,
            "alpha": alpha, "low": low, "high": high}
    return {"rows": rows, "region": (lo, hi), "meta": meta}


def duality_check(q, beta, n, sweeps, seed=0, alpha=np.pi / 2, burn_in=None):
    """Compare P(no primal left-right crossing) at ``beta`` (free) with
    P(dual top-bottom crossing) at ``1 / beta`` on the wired dual patch.

    The two events coincide under planar duality, so the estimates must
    agree within sampling error.
    """
    burn_in = sweeps // 5 if burn_in is None else burn_in
    gp, host = square_patch(n, n, alpha, "free")
    gd, _, ends = square_dual_patch(n, n, alpha)
    lr = crossing_lr(host)
    sp = sample(gp, q, sweeps, burn_in, seed, beta=beta, observables={"no_lr": lambda om, lab: 1.0 - lr(om, lab)})
    sd = sample(gd, q, sweeps, burn_in, seed + 1, beta=1.0 / beta, observables={"tb": dual_crossing_tb(gd, ends)})
    a, b = sp["no_lr"], sd["tb"]
    se = float(np.hypot(a.se, b.se))
    return {"beta": beta, "primal": a.mean, "primal_se": a.se, "dual": b.mean, "dual_se": b.se,
            "z": _zscore(a.mean - b.mean, se)}


def _zscore(diff, se):
    if se > 0:
        return float(abs(diff) / se)
    return 0.0 if diff == 0 else float("inf")
