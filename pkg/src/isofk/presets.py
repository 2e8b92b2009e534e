"""Ready-made Dobrushin domains on standard lattice patches.

Each domain is cut from a larger host patch so that every face around the
domain exists in the host (the exterior gluing of the loop representation
walks through those faces).
"""

import numpy as np

from .errors import InvalidParameter
from .geometry import build_hexagonal, build_square, build_triangular
from .rcmodel import DobrushinDomain


def _interior_faces(host):
    bnd = set()
    for e in host.boundary_edges():
        bnd.update(int(v) for v in host.edges[e])
    return [f for f, face in enumerate(host.faces) if not bnd.intersection(face)]


def _faces_near(host, faces, center, count):
    c = np.asarray(center, dtype=float)
    d = [np.hypot(*(host.centers[f] - c)) for f in faces]
    order = np.argsort(d, kind="stable")
    return [faces[i] for i in order[:count]]


def square_domain(n_cols, n_rows=None, alpha=np.pi / 2, a=0, b=0):
    """``n_cols x n_rows`` block of the square lattice with a one-face margin."""
    n_rows = n_cols if n_rows is None else n_rows
    host = build_square(n_cols + 2, n_rows + 2, alpha)
    faces = _interior_faces(host)
    return DobrushinDomain.from_faces(host, faces, a, b, label="square%dx%d" % (n_cols, n_rows))


def triangular_domain(n, angles=(np.pi / 3,) * 3, a=0, b=0, n_faces=None):
    """Rhombic ``n x n`` block (``2 n^2`` triangles) of a triangular lattice.

    With ``n_faces`` the domain is instead the ``n_faces`` triangles closest
    to the center of the block.
    """
    host = build_triangular(n + 2, angles)
    m = n + 2
    faces = [2 * (j * m + i) + t for j in range(1, n + 1) for i in range(1, n + 1) for t in (0, 1)]
    if n_faces is not None:
        cen = np.mean(host.centers[faces], axis=0)
        faces = _faces_near(host, faces, cen, n_faces)
    return DobrushinDomain.from_faces(host, faces, a, b, label="triangular%d" % n)


def hexagonal_domain(n_faces=1, angles=(np.pi / 3,) * 3, a=0, b=0):
    """The ``n_faces`` hexagons closest to the middle of a hexagonal patch."""
    if n_faces < 1:
        raise InvalidParameter("n_faces must be >= 1")
    k = max(3, int(np.ceil(np.sqrt(n_faces))) + 2)
    host = build_hexagonal(k, angles)
    faces = _interior_faces(host)
    cen = np.mean(host.vertices, axis=0)
    faces = _faces_near(host, faces, cen, n_faces)
    return DobrushinDomain.from_faces(host, faces, a, b, label="hexagonal%d" % n_faces)


def single_edge_domain(theta=np.pi / 2):
    """Domain consisting of one edge, so the diamond graph is a single rhombus."""
    host = build_square(3, 2, theta)
    e = host.edge_id(5, 6)   # horizontal edge between the two interior vertices
    x, y = (int(v) for v in host.edges[e])
    return DobrushinDomain(host, [x, y], 0, 0, [e], label="edge")


NAMED = {
    "square2x2": lambda **k: square_domain(2, 2, **k),
    "square3x3": lambda **k: square_domain(3, 3, **k),
    "square4x4": lambda **k: square_domain(4, 4, **k),
    "square5x5": lambda **k: square_domain(5, 5, **k),
    "triangular2": lambda **k: triangular_domain(2, **k),
    "hexagonal2": lambda **k: hexagonal_domain(2, **k),
    "edge": lambda **k: single_edge_domain(),
}


def named_domain(name, a=0, b=0):
    if name not in NAMED:
        raise InvalidParameter("unknown domain %r (choose from %s)" % (name, ", ".join(sorted(NAMED))))
    if name == "edge":
        return NAMED[name]()
    return NAMED[name](a=a, b=b)
