"""Cell complexes: connectivity, validation, generators and text I/O.

A Mesh owns immutable numpy arrays; the field state and the solver
kernels only ever read them.  Face identity is keyed by the sorted
global vertex ids of the quad, which matches shared faces regardless of
orientation (and closes the annulus seam automatically).

Boundary conditions are stored per boundary face as a wall kind
(no-slip / free-slip) plus a temperature condition (fixed value /
adiabatic).  Generators label boundary faces with group names (e.g.
"xmin", "inner") so scenario configs can assign conditions by group.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import (DegenerateCell, InvalidDimensions, MeshFormatError,
                     UnknownTag)

WALL_NOSLIP = 0
WALL_FREESLIP = 1
TCOND_FIXED = 0
TCOND_ADIABATIC = 1

_WALL_NAMES = {"noslip": WALL_NOSLIP, "freeslip": WALL_FREESLIP}
_TCOND_NAMES = {"fixed": TCOND_FIXED, "adiabatic": TCOND_ADIABATIC}
_WALL_STR = {v: k for k, v in _WALL_NAMES.items()}
_TCOND_STR = {v: k for k, v in _TCOND_NAMES.items()}

DENOM_RTOL = 1e-12


@dataclass(frozen=True)
class BoundaryTag:
    """Wall kind plus temperature condition of one boundary face."""
    wall: str = "noslip"
    tcond: str = "adiabatic"
    value: float = 0.0

    def __post_init__(self):
        if self.wall not in _WALL_NAMES:
            raise UnknownTag(f"unknown wall kind '{self.wall}'")
        if self.tcond not in _TCOND_NAMES:
            raise UnknownTag(f"unknown temperature condition '{self.tcond}'")

    @property
    def name(self):
        return f"{self.wall}_{self.tcond}"


def parse_tag(name, value=None):
    """Parse a 'wall_tcond' tag name (mesh file format) into a BoundaryTag."""
    parts = name.split("_")
    if len(parts) != 2:
        raise UnknownTag(f"unknown boundary tag '{name}'")
    wall, tcond = parts
    if tcond == "fixed":
        if value is None:
            raise UnknownTag(f"tag '{name}' requires a temperature value")
        return BoundaryTag(wall, tcond, float(value))
    return BoundaryTag(wall, tcond)


class Mesh:
    """Hexahedral cell complex with per-cell geometry and face adjacency.

    Arrays
    ------
    vertices : (nv, 3)       cells : (nc, 8) int32, canonical corner order
    neighbor, neighbor_face : (nc, 6) neighbor cell id (-1 at boundary)
        and its local face index
    iface_* : flattened interior face records (cell_a, face_a, cell_b, face_b)
    bface_cell, bface_face : boundary face records
    bnd_wall, bnd_tcond, bnd_tvalue : resolved boundary conditions
    bnd_group : python list of group labels per boundary face
    plus the geometry arrays of geometry.build_geometry_arrays.
    """

    def __init__(self, vertices, cells, boundary_tags=None, boundary_groups=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.cells = np.ascontiguousarray(cells, dtype=np.int32)
        if self.cells.ndim != 2 or self.cells.shape[1] != 8:
            raise InvalidDimensions("cells must be an (n, 8) index array")

        geo = geometry.build_geometry_arrays(self.vertices, self.cells)
        self.node_vectors = geo["node_vectors"]
        self.face_vectors = np.ascontiguousarray(geo["face_vectors"])
        self.face_centroids = np.ascontiguousarray(geo["face_centroids"])
        self.centroid = np.ascontiguousarray(geo["centroid"])
        self.volume = np.ascontiguousarray(geo["volume"])
        self.dual = np.ascontiguousarray(geo["dual"])
        self.flux_coeffs = np.ascontiguousarray(geo["flux_coeffs"])
        self.flux_diag = np.ascontiguousarray(geo["flux_diag"])

        self._build_adjacency()

        nbf = len(self.bface_cell)
        self.bnd_wall = np.zeros(nbf, dtype=np.int8)
        self.bnd_tcond = np.full(nbf, TCOND_ADIABATIC, dtype=np.int8)
        self.bnd_tvalue = np.zeros(nbf, dtype=float)
        self.bnd_group = ["" for _ in range(nbf)]
        if boundary_groups is not None:
            self.bnd_group = list(boundary_groups)
        if boundary_tags is not None:
            for k, tag in enumerate(boundary_tags):
                self._apply_tag(k, tag)

        # Outward unit normals at boundary faces (free-slip projection).
        fv = self.face_vectors[self.bface_cell, self.bface_face]
        area = np.linalg.norm(fv, axis=1)
        self.bnd_normal = fv / np.maximum(area, np.finfo(float).tiny)[:, None]

    # -- adjacency ----------------------------------------------------

    def _build_adjacency(self):
        nc = len(self.cells)
        key_of = {}
        neighbor = np.full((nc, 6), -1, dtype=np.int32)
        neighbor_face = np.full((nc, 6), -1, dtype=np.int8)
        iface = []
        for c in range(nc):
            corners = self.cells[c]
            for f, cyc in enumerate(geometry.FACE_CYCLES):
                key = tuple(sorted(int(corners[i]) for i in cyc))
                other = key_of.pop(key, None)
                if other is None:
                    key_of[key] = (c, f)
                else:
                    oc, of = other
                    neighbor[c, f] = oc
                    neighbor_face[c, f] = of
                    neighbor[oc, of] = c
                    neighbor_face[oc, of] = f
                    iface.append((oc, of, c, f))
        bface = sorted(key_of.values())
        self.neighbor = neighbor
        self.neighbor_face = neighbor_face
        arr = np.array(iface, dtype=np.int32).reshape(-1, 4)
        self.iface_cell_a = np.ascontiguousarray(arr[:, 0])
        self.iface_face_a = np.ascontiguousarray(arr[:, 1])
        self.iface_cell_b = np.ascontiguousarray(arr[:, 2])
        self.iface_face_b = np.ascontiguousarray(arr[:, 3])
        barr = np.array(bface, dtype=np.int32).reshape(-1, 2)
        self.bface_cell = np.ascontiguousarray(barr[:, 0])
        self.bface_face = np.ascontiguousarray(barr[:, 1])
        # boundary slot lookup: (cell, face) -> boundary record index
        self._bnd_index = {(int(c), int(f)): k
                           for k, (c, f) in enumerate(zip(self.bface_cell, self.bface_face))}

    def _apply_tag(self, k, tag):
        self.bnd_wall[k] = _WALL_NAMES[tag.wall]
        self.bnd_tcond[k] = _TCOND_NAMES[tag.tcond]
        self.bnd_tvalue[k] = tag.value

    # -- public surface -----------------------------------------------

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_interior_faces(self):
        return len(self.iface_cell_a)

    @property
    def n_boundary_faces(self):
        return len(self.bface_cell)

    def boundary_index(self, cell, face):
        return self._bnd_index[(int(cell), int(face))]

    def boundary_tag(self, k):
        return BoundaryTag(_WALL_STR[int(self.bnd_wall[k])],
                           _TCOND_STR[int(self.bnd_tcond[k])],
                           float(self.bnd_tvalue[k]))

    def set_boundary(self, assignments):
        """Assign BoundaryTags by group name ({group: BoundaryTag})."""
        groups = set(self.bnd_group)
        for name in assignments:
            if name not in groups:
                raise UnknownTag(f"mesh has no boundary group '{name}'")
        for k, group in enumerate(self.bnd_group):
            if group in assignments:
                self._apply_tag(k, assignments[group])

    def cell_size(self):
        """Isotropic cell extent V**(1/3) per cell."""
        return np.cbrt(self.volume)


# -- generators --------------------------------------------------------


def _axis_coords(n, length, ratio):
    """Cut positions for n cells over `length` with geometric grading."""
    if ratio is None or ratio == 1.0:
        return np.linspace(0.0, length, n + 1)
    w = ratio ** np.arange(n)
    x = np.concatenate([[0.0], np.cumsum(w)])
    return x * (length / x[-1])


def generate_box(nx, ny, nz, lengths=(1.0, 1.0, 1.0), grading=None):
    """Structured box mesh with boundary groups xmin..zmax.

    `grading` is an optional per-axis tuple of geometric ratios between
    successive cell widths (1.0 = uniform).
    """
    if min(nx, ny, nz) < 1:
        raise InvalidDimensions("cell counts must be >= 1")
    if min(lengths) <= 0:
        raise InvalidDimensions("box lengths must be positive")
    gr = grading or (None, None, None)
    xs = _axis_coords(nx, lengths[0], gr[0])
    ys = _axis_coords(ny, lengths[1], gr[1])
    zs = _axis_coords(nz, lengths[2], gr[2])

    def vid(i, j, k):
        return (k * (ny + 1) + j) * (nx + 1) + i

    verts = np.array([(xs[i], ys[j], zs[k])
                      for k in range(nz + 1)
                      for j in range(ny + 1)
                      for i in range(nx + 1)])
    cells = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                cells.append([vid(i, j, k), vid(i + 1, j, k),
                              vid(i, j + 1, k), vid(i + 1, j + 1, k),
                              vid(i, j, k + 1), vid(i + 1, j, k + 1),
                              vid(i, j + 1, k + 1), vid(i + 1, j + 1, k + 1)])
    mesh = Mesh(verts, np.array(cells, dtype=np.int32))
    group_of_face = {0: "xmin", 1: "xmax", 2: "ymin", 3: "ymax", 4: "zmin", 5: "zmax"}
    for k in range(mesh.n_boundary_faces):
        mesh.bnd_group[k] = group_of_face[int(mesh.bface_face[k])]
    return mesh


def generate_annulus(nr, ntheta, nz, r_inner, r_outer, length):
    """Body-fitted annulus mesh, periodic in theta.

    Local cell x is radial, y azimuthal, z axial.  The vertex ring
    starts at theta = pi/2 so the mesh is mirror symmetric about the
    x = 0 plane (for even ntheta).  Boundary groups: inner, outer,
    zmin, zmax.
    """
    if nr < 1 or nz < 1:
        raise InvalidDimensions("cell counts must be >= 1")
    if ntheta < 8:
        raise InvalidDimensions("ntheta must be >= 8")
    if not (0.0 < r_inner < r_outer):
        raise InvalidDimensions("need 0 < r_inner < r_outer")
    if length <= 0:
        raise InvalidDimensions("length must be positive")

    rs = np.linspace(r_inner, r_outer, nr + 1)
    zs = np.linspace(0.0, length, nz + 1)
    thetas = np.pi / 2.0 + 2.0 * np.pi * np.arange(ntheta) / ntheta

    def vid(i, j, k):
        # j wraps: the theta seam shares vertices
        return (k * ntheta + (j % ntheta)) * (nr + 1) + i

    verts = np.array([(r * np.cos(t), r * np.sin(t), z)
                      for z in zs
                      for t in thetas
                      for r in rs])
    cells = []
    for k in range(nz):
        for j in range(ntheta):
            for i in range(nr):
                cells.append([vid(i, j, k), vid(i + 1, j, k),
                              vid(i, j + 1, k), vid(i + 1, j + 1, k),
                              vid(i, j, k + 1), vid(i + 1, j, k + 1),
                              vid(i, j + 1, k + 1), vid(i + 1, j + 1, k + 1)])
    mesh = Mesh(verts, np.array(cells, dtype=np.int32))
    group_of_face = {0: "inner", 1: "outer", 4: "zmin", 5: "zmax"}
    for k in range(mesh.n_boundary_faces):
        f = int(mesh.bface_face[k])
        if f not in group_of_face:
            raise MeshFormatError("annulus seam failed to close")
        mesh.bnd_group[k] = group_of_face[f]
    return mesh


def mirror_cell_map(ntheta, nr, nz):
    """Cell index map of the x -> -x reflection of generate_annulus."""
    def cid(i, j, k):
        return (k * ntheta + j) * nr + i
    out = np.empty(nr * ntheta * nz, dtype=np.int64)
    for k in range(nz):
        for j in range(ntheta):
            for i in range(nr):
                out[cid(i, j, k)] = cid(i, (ntheta - 1 - j) % ntheta, k)
    return out


# -- validation --------------------------------------------------------


@dataclass
class MeshReport:
    volume_min: float
    volume_max: float
    worst_skew: float
    findings: list

    @property
    def ok(self):
        return not self.findings


def validate_mesh(mesh):
    """Scan the mesh for quality failures without aborting mid-scan.

    Checks per cell: positive volume, consistent orientation sign of
    (-1)^face * s[face][axis] (required for well-conditioned interface
    updates), and per interior face: non-vanishing update denominator
    and area agreement of the two slots.  `worst_skew` is the largest
    angle deviation (in cosine terms, 1 - cos) between outward face
    normals and the node-to-node line.
    """
    findings = []
    s = mesh.flux_coeffs
    sgn = geometry.FACE_SIGN
    ax = geometry.FACE_AXIS

    oriented = sgn[None, :] * s[:, np.arange(6), ax]         # (nc, 6)
    sign_ok = np.all(oriented < 0, axis=1) | np.all(oriented > 0, axis=1)
    for c in np.nonzero(~sign_ok)[0]:
        findings.append(("InconsistentOrientation", int(c),
                         f"cell {c}: mixed signs of oriented flux coefficients"))

    vol = mesh.volume
    ca, fa = mesh.iface_cell_a, mesh.iface_face_a
    cb, fb = mesh.iface_cell_b, mesh.iface_face_b
    sa = s[ca, fa, ax[fa]]
    sb = s[cb, fb, ax[fb]]
    denom = sa + sgn[fa] * sgn[fb] * sb
    scale = np.abs(sa) + np.abs(sb)
    bad = np.abs(denom) < DENOM_RTOL * scale
    for k in np.nonzero(bad)[0]:
        findings.append(("NearSingularDenominator", int(ca[k]),
                         f"interior face ({int(ca[k])},{int(fa[k])})|({int(cb[k])},{int(fb[k])}): "
                         f"denominator {denom[k]:.3e}"))

    area_a = np.linalg.norm(mesh.face_vectors[ca, fa], axis=1)
    area_b = np.linalg.norm(mesh.face_vectors[cb, fb], axis=1)
    mis = np.abs(area_a - area_b) > 1e-12 * np.maximum(area_a, area_b)
    for k in np.nonzero(mis)[0]:
        findings.append(("FaceAreaMismatch", int(ca[k]),
                         f"interior face ({int(ca[k])},{int(fa[k])}): "
                         f"areas {area_a[k]!r} vs {area_b[k]!r}"))

    worst = 0.0
    if len(ca):
        d = mesh.centroid[cb] - mesh.centroid[ca]
        d /= np.maximum(np.linalg.norm(d, axis=1), np.finfo(float).tiny)[:, None]
        n = mesh.face_vectors[ca, fa] / np.maximum(area_a, np.finfo(float).tiny)[:, None]
        worst = float(np.max(1.0 - np.sum(d * n, axis=1)))

    return MeshReport(float(vol.min()), float(vol.max()), worst, findings)


# -- text format ---------------------------------------------------------


def write_mesh(mesh, path):
    """Write the line-oriented mesh text format (17 significant digits)."""
    lines = [f"VERTICES {mesh.n_vertices}"]
    for x, y, z in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g} {z:.17g}")
    lines.append(f"CELLS {mesh.n_cells}")
    for row in mesh.cells:
        lines.append(" ".join(str(int(i)) for i in row))
    lines.append(f"BOUNDARY {mesh.n_boundary_faces}")
    for k in range(mesh.n_boundary_faces):
        tag = mesh.boundary_tag(k)
        entry = (f"{int(mesh.bface_cell[k])} {int(mesh.bface_face[k])} {tag.name}")
        if tag.tcond == "fixed":
            entry += f" {tag.value:.17g}"
        lines.append(entry)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    """Read the mesh text format written by write_mesh."""
    with open(path) as fh:
        tokens = [ln.split() for ln in fh if ln.strip()]
    pos = 0

    def expect(word):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos][0] != word:
            raise MeshFormatError(f"expected '{word}' section in {path}")
        n = int(tokens[pos][1])
        pos += 1
        return n

    nv = expect("VERTICES")
    verts = np.array([[float(x) for x in tokens[pos + i]] for i in range(nv)])
    pos += nv
    nc = expect("CELLS")
    cells = np.array([[int(x) for x in tokens[pos + i]] for i in range(nc)], dtype=np.int32)
    pos += nc
    nb = expect("BOUNDARY")
    entries = tokens[pos:pos + nb]
    if len(entries) != nb:
        raise MeshFormatError(f"truncated BOUNDARY section in {path}")

    mesh = Mesh(verts, cells)
    seen = set()
    for row in entries:
        cell, face = int(row[0]), int(row[1])
        try:
            k = mesh.boundary_index(cell, face)
        except KeyError:
            raise MeshFormatError(
                f"({cell},{face}) tagged in {path} is not a boundary face") from None
        tag = parse_tag(row[2], row[3] if len(row) > 3 else None)
        mesh._apply_tag(k, tag)
        seen.add(k)
    if len(seen) != mesh.n_boundary_faces:
        missing = mesh.n_boundary_faces - len(seen)
        raise MeshFormatError(f"{missing} boundary faces missing a tag in {path}")
    return mesh
