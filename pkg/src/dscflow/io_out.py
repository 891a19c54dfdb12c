"""Field output: legacy-ASCII VTK unstructured grids and probe CSVs.

Numbers are written at 9 significant digits with fixed ordering, so
reruns of the same scenario produce byte-identical files.
"""

import numpy as np

from .errors import InvalidProbe, IoError

# corner order of a VTK hexahedron relative to the canonical binary order
_VTK_HEX_ORDER = (0, 1, 3, 2, 4, 5, 7, 6)
_VTK_HEX_TYPE = 12


def write_vtk(mesh, state, path):
    """Legacy ASCII unstructured-grid file with cell data T, p, u."""
    state.check_finite()
    lines = [
        "# vtk DataFile Version 3.0",
        "dscflow fields",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    for x, y, z in mesh.vertices:
        lines.append(f"{x:.9g} {y:.9g} {z:.9g}")
    nc = mesh.n_cells
    lines.append(f"CELLS {nc} {nc * 9}")
    for row in mesh.cells:
        ordered = " ".join(str(int(row[i])) for i in _VTK_HEX_ORDER)
        lines.append(f"8 {ordered}")
    lines.append(f"CELL_TYPES {nc}")
    lines.extend([str(_VTK_HEX_TYPE)] * nc)
    lines.append(f"CELL_DATA {nc}")
    lines.append("SCALARS T double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(f"{v:.9g}" for v in state.T_node)
    lines.append("SCALARS p double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(f"{v:.9g}" for v in state.p_node)
    lines.append("VECTORS u double")
    lines.extend(f"{u[0]:.9g} {u[1]:.9g} {u[2]:.9g}" for u in state.u_node)
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


class ProbeRecorder:
    """Collects per-probe samples over time; one CSV row per sample.

    Header documents the units: t in s, T in K, u components in m/s,
    p in Pa.
    """

    def __init__(self, mesh, probe_cells):
        self.probes = [int(c) for c in probe_cells]
        for c in self.probes:
            if not (0 <= c < mesh.n_cells):
                raise InvalidProbe(f"probe cell {c} outside mesh (0..{mesh.n_cells - 1})")
        self.rows = []

    def sample(self, state):
        row = [state.time]
        for c in self.probes:
            row.extend([state.T_node[c], *state.u_node[c], state.p_node[c]])
        self.rows.append(row)

    def header(self):
        cols = ["t[s]"]
        for c in self.probes:
            cols.extend([f"T{c}[K]", f"ux{c}[m/s]", f"uy{c}[m/s]",
                         f"uz{c}[m/s]", f"p{c}[Pa]"])
        return ",".join(cols)

    def write(self, path):
        try:
            with open(path, "w") as fh:
                fh.write(self.header() + "\n")
                for row in self.rows:
                    fh.write(",".join(f"{v:.9g}" for v in row) + "\n")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc


def write_probe_csv(mesh, samples, probes, path):
    """One-shot CSV writer for precollected (state-like) samples.

    `samples` is an iterable of states (each carrying .time, .T_node,
    .u_node, .p_node).
    """
    rec = ProbeRecorder(mesh, probes)
    for state in samples:
        rec.sample(state)
    rec.write(path)


def read_vtk_points_cells(path):
    """Minimal reader for the files written above (round-trip checks)."""
    with open(path) as fh:
        tokens = fh.read().split()
    idx = tokens.index("POINTS")
    n_points = int(tokens[idx + 1])
    pts = np.array(tokens[idx + 3:idx + 3 + 3 * n_points], dtype=float).reshape(-1, 3)
    cidx = tokens.index("CELLS")
    n_cells = int(tokens[cidx + 1])
    total = int(tokens[cidx + 2])
    raw = np.array(tokens[cidx + 3:cidx + 3 + total], dtype=int)
    cells = raw.reshape(n_cells, 9)[:, 1:]
    return pts, cells
