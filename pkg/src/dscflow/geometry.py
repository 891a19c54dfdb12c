"""Per-cell geometric algebra of the hexahedral scattering cell.

Corner convention
-----------------
Vertex k of a cell has reference coordinates ``(k & 1, (k >> 1) & 1,
(k >> 2) & 1)``, i.e. bit 0 is the local x direction, bit 1 local y,
bit 2 local z.

Edge convention
---------------
Edge ``4*mu + nu`` (nu = 0..3) is one of the four edges parallel to
reference direction mu, ordered by the base corner's remaining two bits
read as a 2-bit integer.  The node vector ``b_mu`` is the average of
those four edges; it connects the centroids of the two faces pierced by
direction mu exactly.

Face convention
---------------
Faces ``2*mu`` and ``2*mu + 1`` are the low/high faces pierced by
``b_mu``: face ``2*mu`` sits at (node - b_mu/2), face ``2*mu + 1`` at
(node + b_mu/2).  Face vectors are the bilinear-patch area vectors
(half cross product of the diagonals), stored outward.  The alternating
orientation sign ``(-1)**face`` of the interface algebra is kept out of
the stored vectors and enters the flux coefficients through the update
formulas, so a uniform outward storage is used throughout.

All conventions are pinned by the linear-exactness property: for
Z(x) = a.x + c sampled at the vertex-mean cell centroid and the four
vertex-mean face centroids, the directional differences equal b_mu . a
and the reconstructed gradient equals a, on every non-degenerate cell.
"""

import numpy as np

from .errors import DegenerateCell, SingularBasis

# Edge 4*mu+nu endpoints (tail, head) in corner indices.
EDGE_VERTS = (
    (0, 1), (2, 3), (4, 5), (6, 7),   # parallel to local x
    (0, 2), (1, 3), (4, 6), (5, 7),   # parallel to local y
    (0, 4), (1, 5), (2, 6), (3, 7),   # parallel to local z
)

# Corner cycles of the six faces, ordered so that the diagonal cross
# product points outward.
FACE_CYCLES = (
    (0, 4, 6, 2),   # face 0: low x
    (1, 3, 7, 5),   # face 1: high x
    (0, 1, 5, 4),   # face 2: low y
    (2, 6, 7, 3),   # face 3: high y
    (0, 2, 3, 1),   # face 4: low z
    (4, 5, 7, 6),   # face 5: high z
)

# Orientation sign (-1)**face of the interface algebra.
FACE_SIGN = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])

# Axis pierced by each face, floor(face/2).
FACE_AXIS = np.array([0, 0, 1, 1, 2, 2], dtype=np.int64)

_DEGENERACY_RTOL = 1e-14


class CellGeometry:
    """Vector system of one hexahedral cell.

    Attributes
    ----------
    edges : (12, 3) edge vectors following the labelling above.
    node_vectors : (3, 3) rows b_0, b_1, b_2 (average of 4 parallel edges).
    face_vectors : (6, 3) outward oriented area vectors, m^2.
    face_centroids : (6, 3) vertex-mean face centroids.
    centroid : (3,) vertex-mean cell centroid.
    volume : scalar, m^3 (divergence-theorem formula).
    basis : (3, 3) matrix with columns b_mu in the global frame.
    dual : (3, 3) adjoint inverse of `basis`; converts directional
        differences along the b_mu into Cartesian gradient components.
    flux_coeffs : (6, 3) s[face][mu] = sum_nu f[face][nu] * dual[nu][mu],
        contracting outward face vectors with the dual basis.
    """

    __slots__ = ("edges", "node_vectors", "face_vectors", "face_centroids",
                 "centroid", "volume", "basis", "dual", "flux_coeffs")

    def __init__(self, edges, node_vectors, face_vectors, face_centroids,
                 centroid, volume, basis, dual, flux_coeffs):
        self.edges = edges
        self.node_vectors = node_vectors
        self.face_vectors = face_vectors
        self.face_centroids = face_centroids
        self.centroid = centroid
        self.volume = volume
        self.basis = basis
        self.dual = dual
        self.flux_coeffs = flux_coeffs


def _as_vertices(v):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (8, 3):
        raise ValueError(f"expected 8 vertices of 3 coordinates, got shape {arr.shape}")
    return arr


def edge_vectors(v):
    """Return the 12 edge vectors of the canonical labelling."""
    v = _as_vertices(v)
    out = np.empty((12, 3))
    for k, (tail, head) in enumerate(EDGE_VERTS):
        out[k] = v[head] - v[tail]
    return out


def node_vectors(v):
    """Node vectors b_mu = mean of the four edges parallel to direction mu."""
    e = edge_vectors(v)
    return np.stack([e[4 * mu:4 * mu + 4].mean(axis=0) for mu in range(3)])


def face_vectors_outward(v):
    """Outward area vectors of the six (possibly warped) quad faces.

    The bilinear-patch area integral equals half the cross product of
    the two diagonals.
    """
    v = _as_vertices(v)
    out = np.empty((6, 3))
    for face, cyc in enumerate(FACE_CYCLES):
        d1 = v[cyc[2]] - v[cyc[0]]
        d2 = v[cyc[3]] - v[cyc[1]]
        out[face] = 0.5 * np.cross(d1, d2)
    return out


def face_centroids(v):
    v = _as_vertices(v)
    return np.stack([v[list(cyc)].mean(axis=0) for cyc in FACE_CYCLES])


def cell_volume(v, cell_id=None):
    """Cell volume by the divergence-theorem centroid formula.

    V = (1/3) sum_faces centroid . outward_area; exact for planar faces,
    second order for warped ones, and consistent with the scheme's own
    surface-integral discretisation.
    """
    f = face_vectors_outward(v)
    c = face_centroids(v)
    vol = float(np.sum(c * f)) / 3.0
    if not np.isfinite(vol) or vol <= 0.0:
        where = "" if cell_id is None else f" (cell {cell_id})"
        raise DegenerateCell(f"non-positive cell volume {vol:.3e}{where}")
    return vol


def dual_basis(b):
    """Return (basis, dual) for three node vectors given as rows of `b`.

    `basis` has columns b_mu; `dual` is its adjoint inverse, so that
    dual @ (scalar products of b_mu with a) reconstructs the vector a.

    Raises SingularBasis when |det basis| < 1e-14 * max|b|^3.
    """
    b = np.asarray(b, dtype=float)
    basis = b.T.copy()
    det = float(np.linalg.det(basis))
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    if abs(det) < _DEGENERACY_RTOL * max(scale, np.finfo(float).tiny) ** 3:
        raise SingularBasis(f"node vectors nearly dependent, det={det:.3e}")
    dual = np.linalg.inv(basis.T)
    return basis, dual


def flux_coefficients(face_vecs, dual):
    """s[face][mu] = sum_nu f[face][nu] * dual[nu][mu] for the six faces."""
    return np.asarray(face_vecs) @ np.asarray(dual)


def build_cell_geometry(v, cell_id=None):
    """Construct the full CellGeometry of one cell from its 8 vertices.

    Raises DegenerateCell when the volume is non-positive or the node
    vector basis is numerically singular; the message names the cell.
    """
    v = _as_vertices(v)
    if not np.all(np.isfinite(v)):
        where = "" if cell_id is None else f" (cell {cell_id})"
        raise DegenerateCell(f"non-finite vertex coordinates{where}")
    e = edge_vectors(v)
    b = np.stack([e[4 * mu:4 * mu + 4].mean(axis=0) for mu in range(3)])
    f = face_vectors_outward(v)
    fc = face_centroids(v)
    centroid = v.mean(axis=0)
    vol = cell_volume(v, cell_id=cell_id)
    try:
        basis, dual = dual_basis(b)
    except SingularBasis as exc:
        where = "" if cell_id is None else f" (cell {cell_id})"
        raise DegenerateCell(f"{exc}{where}") from exc
    s = flux_coefficients(f, dual)
    return CellGeometry(e, b, f, fc, centroid, vol, basis, dual, s)


def build_geometry_arrays(vertices, cells):
    """Vectorised geometry for all cells of a mesh.

    Parameters
    ----------
    vertices : (nv, 3) float array.
    cells : (nc, 8) int array of corner ids in the canonical order.

    Returns a dict of arrays: node_vectors (nc,3,3) rows b_mu,
    face_vectors (nc,6,3) outward, face_centroids (nc,6,3),
    centroid (nc,3), volume (nc,), dual (nc,3,3), flux_coeffs (nc,6,3),
    flux_diag (nc,) = sum_faces 2*(-1)^face * s[face][axis(face)].

    Raises DegenerateCell naming the first offending cell.
    """
    verts = np.asarray(vertices, dtype=float)
    cells = np.asarray(cells)
    corner = verts[cells]                     # (nc, 8, 3)

    edges = np.empty((len(cells), 12, 3))
    for k, (tail, head) in enumerate(EDGE_VERTS):
        edges[:, k] = corner[:, head] - corner[:, tail]
    bvecs = np.stack([edges[:, 4 * mu:4 * mu + 4].mean(axis=1) for mu in range(3)], axis=1)

    fvecs = np.empty((len(cells), 6, 3))
    fcent = np.empty((len(cells), 6, 3))
    for face, cyc in enumerate(FACE_CYCLES):
        d1 = corner[:, cyc[2]] - corner[:, cyc[0]]
        d2 = corner[:, cyc[3]] - corner[:, cyc[1]]
        fvecs[:, face] = 0.5 * np.cross(d1, d2)
        fcent[:, face] = corner[:, list(cyc)].mean(axis=1)

    centroid = corner.mean(axis=1)
    volume = np.einsum("cfk,cfk->c", fcent, fvecs) / 3.0

    basis = np.swapaxes(bvecs, 1, 2)          # columns b_mu
    det = np.linalg.det(basis)
    scale = np.max(np.abs(bvecs), axis=(1, 2))
    bad = ~np.isfinite(volume) | (volume <= 0.0)
    bad |= np.abs(det) < _DEGENERACY_RTOL * np.maximum(scale, np.finfo(float).tiny) ** 3
    if np.any(bad):
        cid = int(np.argmax(bad))
        raise DegenerateCell(
            f"cell {cid} degenerate: volume={volume[cid]:.3e}, det(basis)={det[cid]:.3e}")

    dual = np.linalg.inv(np.swapaxes(basis, 1, 2))
    svals = np.einsum("cfn,cnm->cfm", fvecs, dual)
    flux_diag = np.zeros(len(cells))
    for face in range(6):
        flux_diag += 2.0 * FACE_SIGN[face] * svals[:, face, FACE_AXIS[face]]

    return {
        "node_vectors": bvecs,
        "face_vectors": fvecs,
        "face_centroids": fcent,
        "centroid": centroid,
        "volume": volume,
        "dual": dual,
        "flux_coeffs": svals,
        "flux_diag": flux_diag,
    }
