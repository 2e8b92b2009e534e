"""Exact observables by a frontier sweep over the loop representation.

The loop weight of a configuration is ``prod_{open} beta x_e * sqrt(q)^L``.
Cells (rhombi, exterior glue arcs, and the two terminal arcs at ``e_a`` and
``e_b``) are added one at a time.  A state is the set of partial curves
("pieces") whose ends sit on sides with one unprocessed cell; each piece
carries its total turning, so all configurations sharing a state share
every future winding increment.  Per piece we accumulate

    V[c][s] = sum over configurations of w * exp(c * W(s, head))

for the sides ``s`` it contains and the three channels ``c = sigma,
-sigma, 0``, stored divided by the state weight ``Z``.  Joining piece
``A`` to piece ``B`` gives ``V = V_A exp(c W_B) + V_B``; closing a loop
multiplies ``Z`` by ``sqrt(q)``; states that coincide are combined by a
``Z``-weighted average.
"""

import numpy as np

from .errors import TooLarge
from .weights import sigma, x_crit

SRC = -1
SNK = -2


def _cells(domain):
    """List of cells ``(position, options)``; each option is ``(weight_key, arcs)``."""
    S = domain.n_sides
    cells = []
    # rhombi
    for k in range(domain.n_edges):
        ent = [s for s in domain.rhombus_sides[k] if domain.enter_rh[s] == k]
        opts = []
        for state in (0, 1):
            arcs = [(int(s), int(domain.nxt[state, s]), float(domain.turn[state, s])) for s in ent]
            opts.append((("edge", k) if state else None, arcs))
        cells.append((domain.rhombus_center[k], opts))
    # exterior glue arcs
    for s in range(S):
        if domain.interior[s] or domain.exit_rh[s] < 0 or s == domain.e_b:
            continue
        t = int(domain.nxt[0, s])
        pos = 0.5 * (domain.side_mid[s] + domain.side_mid[t])
        cells.append((pos, [(None, [(s, t, float(domain.turn[0, s]))])]))
    cells.append((domain.side_mid[domain.e_a], [(None, [(SRC, int(domain.e_a), 0.0)])]))
    cells.append((domain.side_mid[domain.e_b], [(None, [(int(domain.e_b), SNK, 0.0)])]))
    return cells


def _order(cells):
    pos = np.array([c[0] for c in cells])
    span = pos.max(axis=0) - pos.min(axis=0)
    major = 0 if span[0] >= span[1] else 1
    return np.lexsort((pos[:, 1 - major], pos[:, major]))


class _Piece:
    __slots__ = ("tail", "head", "w", "v")

    def __init__(self, tail, head, w, v):
        self.tail, self.head, self.w, self.v = tail, head, w, v


def transfer_field(domain, beta, q, max_states=200000):
    """Return ``(F, F_tilde, P_on_path, Z)`` arrays over the sides of ``domain``.

    ``Z`` is the loop-weight partition function.
    """
    s_ = sigma(q)
    chans = np.array([s_, -s_, 0.0])
    x = np.asarray(x_crit(domain.theta, q), dtype=float).reshape(-1)
    bx = beta * x
    sq = np.sqrt(q)
    S = domain.n_sides
    cells = _cells(domain)
    order = _order(cells)
    # which cell holds each side as head (arc ends there) or tail
    cell_head = {}
    cell_tail = {}
    for ci, (_, opts) in enumerate(cells):
        for t, h, _w in opts[0][1]:
            if t >= 0:
                cell_tail[t] = ci
            if h >= 0:
                cell_head[h] = ci
    done = np.zeros(len(cells), dtype=bool)

    # state: key -> [Z, list of pieces]
    states = {(): [1.0, []]}
    for ci in order:
        _, opts = cells[ci]
        done[ci] = True
        new = {}
        for key, (Z, pieces) in states.items():
            for wkey, arcs in opts:
                w = bx[wkey[1]] if wkey is not None else 1.0
                res = _apply(pieces, arcs, w, sq, chans, S, cell_head, cell_tail, done)
                if res is None:
                    continue
                factor, npieces = res
                nkey = tuple(sorted((p.tail, p.head, round(p.w, 9)) for p in npieces))
                z = Z * w * factor
                if nkey in new:
                    ent = new[nkey]
                    tot = ent[0] + z
                    a, b = ent[0] / tot, z / tot
                    # pieces may be shared between states: build new ones
                    other = {(p.tail, p.head): p.v for p in npieces}
                    ent[1] = [_Piece(p.tail, p.head, p.w, a * p.v + b * other[(p.tail, p.head)])
                              for p in ent[1]]
                    ent[0] = tot
                else:
                    new[nkey] = [z, npieces]
        states = new
        if len(states) > max_states:
            raise TooLarge("transfer sweep exceeded %d states" % max_states)
    if len(states) != 1:
        raise RuntimeError("sweep did not close into a single path")
    (key, (Z, pieces)), = states.items()
    if key[0][:2] != (SRC, SNK):
        raise RuntimeError("final piece is not the exploration path")
    v = pieces[0].v
    return v[0], v[1], v[2], Z


def _apply(pieces, arcs, w, sq, chans, S, cell_head, cell_tail, done):
    """Add the arcs of one cell option to a state.  Returns (loop factor, pieces)."""
    cur = list(pieces)
    factor = 1.0
    for t, h, turn in arcs:
        v = np.zeros((3, S))
        if t >= 0 and not done[cell_head[t]]:
            v[:, t] = np.exp(chans * turn)
        if h >= 0 and not done[cell_tail[h]]:
            v[:, h] = 1.0
        piece = _Piece(t, h, turn, v)
        # join at the tail: some piece A ends at t
        if t >= 0 and done[cell_head[t]]:
            a = next(p for p in cur if p.head == t)
            cur.remove(a)
            piece = _Piece(a.tail, piece.head, a.w + piece.w, a.v * np.exp(chans * piece.w)[:, None] + piece.v)
        # join at the head: some piece B starts at h
        if h >= 0 and done[cell_tail[h]]:
            if piece.tail == h:
                factor *= sq          # closed loop; its sides are not on the path
                continue
            b = next(p for p in cur if p.tail == h)
            cur.remove(b)
            piece = _Piece(piece.tail, b.head, piece.w + b.w, piece.v * np.exp(chans * b.w)[:, None] + b.v)
        cur.append(piece)
    return factor, cur
