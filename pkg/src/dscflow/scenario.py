"""Assemble runnable objects (mesh, state, source) from a ScenarioConfig."""

import numpy as np

from .errors import SchemaError
from .mesh import generate_annulus, generate_box, read_mesh
from .reflection import HeatSource
from .state import initialize


def build_mesh(cfg):
    m = cfg.mesh
    if m["type"] == "box":
        mesh = generate_box(m["nx"], m["ny"], m["nz"], lengths=m["lengths"],
                            grading=m["grading"])
    elif m["type"] == "annulus":
        mesh = generate_annulus(m["nr"], m["ntheta"], m["nz"],
                                m["r_inner"], m["r_outer"], m["length"])
    else:
        mesh = read_mesh(m["file"])
    if cfg.boundary:
        mesh.set_boundary(cfg.boundary)
    return mesh


def build_source(cfg, mesh):
    src = cfg.source
    kind = src["kind"]
    if kind == "none":
        return HeatSource(0.0)
    if kind == "constant":
        return HeatSource(float(src["q"]))
    if kind == "inner_shell":
        cells = shell_cells(mesh, src["group"])
        q = np.zeros(mesh.n_cells)
        q[cells] = float(src["q"])
        return HeatSource(lambda pts, t, q=q: q)
    if kind == "box_region":
        x0, y0, z0, x1, y1, z1 = src["region"]
        lo = np.array([x0, y0, z0])
        hi = np.array([x1, y1, z1])
        inside = np.all((mesh.centroid >= lo) & (mesh.centroid <= hi), axis=1)
        q = np.where(inside, float(src["q"]), 0.0)
        return HeatSource(lambda pts, t, q=q: q)
    if kind == "cell_table":
        q = np.zeros(mesh.n_cells)
        with open(src["table"]) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                cell_txt, val_txt = line.replace(",", " ").split()
                cell = int(cell_txt)
                if not (0 <= cell < mesh.n_cells):
                    raise SchemaError([f"source table cell {cell} out of range"])
                q[cell] = float(val_txt)
        return HeatSource(lambda pts, t, q=q: q)
    raise SchemaError([f"unknown source kind {kind!r}"])


def shell_cells(mesh, group):
    """Cells adjacent to a named boundary group (skin-effect proxy)."""
    cells = sorted({int(mesh.bface_cell[k])
                    for k in range(mesh.n_boundary_faces)
                    if mesh.bnd_group[k] == group})
    if not cells:
        raise SchemaError([f"no boundary faces in group {group!r}"])
    return np.array(cells, dtype=np.int64)


def build_state(cfg, mesh):
    ini = cfg.initial
    return initialize(mesh, T0=ini["temperature"], u0=ini["velocity"],
                      p0=ini["pressure"])


def build_scenario(cfg):
    """(mesh, state, props, source, run_config) from a parsed config."""
    mesh = build_mesh(cfg)
    state = build_state(cfg, mesh)
    props = cfg.fluid_properties()
    source = build_source(cfg, mesh)
    return mesh, state, props, source, cfg.run_config()
