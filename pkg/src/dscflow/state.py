"""Field storage on the staggered port/node time grid.

Node values (cell centers) live at half steps t + tau/2; port values
(cell faces) live at integer steps with two retained levels: `*_port`
holds the current level t, `*_port_prev` the level t - tau.  The
tangential assembly of the interface updates reads the previous level,
so rotation happens at the start of a step, before the new ports are
written into the current level.

Interior faces keep identical values in both (cell, local face) slots;
the connection writes one value to both.
"""

import numpy as np

from .errors import NonFiniteUpdate

FIELD_IDS = ("T", "p", "ux", "uy", "uz")


class FieldState:
    """Temperature, velocity and pressure samples of one mesh."""

    def __init__(self, mesh):
        nc = mesh.n_cells
        self.mesh = mesh
        self.step_index = 0
        self.time = 0.0
        self.T_node = np.zeros(nc)
        self.p_node = np.zeros(nc)
        self.u_node = np.zeros((nc, 3))
        self.T_port = np.zeros((nc, 6))
        self.T_port_prev = np.zeros((nc, 6))
        self.p_port = np.zeros((nc, 6))
        self.p_port_prev = np.zeros((nc, 6))
        self.u_port = np.zeros((nc, 6, 3))
        self.u_port_prev = np.zeros((nc, 6, 3))

    def node_arrays(self):
        return {"T": self.T_node, "p": self.p_node, "u": self.u_node}

    def port_arrays(self, field):
        """(current, previous) port arrays of a scalar field id."""
        if field == "T":
            return self.T_port, self.T_port_prev
        if field == "p":
            return self.p_port, self.p_port_prev
        raise KeyError(field)

    def rotate_port_history(self):
        """Previous level <- current level (step index bumped by the scheduler)."""
        self.T_port_prev[:] = self.T_port
        self.p_port_prev[:] = self.p_port
        self.u_port_prev[:] = self.u_port

    def copy(self):
        out = FieldState(self.mesh)
        out.step_index = self.step_index
        out.time = self.time
        for name in ("T_node", "p_node", "u_node", "T_port", "T_port_prev",
                     "p_port", "p_port_prev", "u_port", "u_port_prev"):
            getattr(out, name)[:] = getattr(self, name)
        return out

    def check_finite(self):
        """NaN/Inf scan after a full cycle; names the first offending cell."""
        for name in ("T_node", "p_node", "u_node", "T_port", "p_port", "u_port"):
            arr = getattr(self, name)
            finite = np.isfinite(arr)
            if not finite.all():
                cell = int(np.nonzero(~finite.reshape(len(arr), -1).all(axis=1))[0][0])
                raise NonFiniteUpdate(
                    f"non-finite {name} at cell {cell}, step {self.step_index}")


def _sample(spec, points):
    """Evaluate an initial-condition spec (constant or callable) at points."""
    if callable(spec):
        vals = np.asarray(spec(points), dtype=float)
        return vals
    return np.full(len(points), float(spec))


def _sample_vector(spec, points):
    if callable(spec):
        return np.asarray(spec(points), dtype=float).reshape(len(points), 3)
    return np.tile(np.asarray(spec, dtype=float).reshape(1, 3), (len(points), 1))


def initialize(mesh, T0=300.0, u0=(0.0, 0.0, 0.0), p0=0.0):
    """Cold-start state: nodes sampled at cell centroids, ports at face
    centroids, both port history levels equal to the initial sample.

    Constants or callables over an (n, 3) coordinate array are accepted.
    """
    state = FieldState(mesh)
    cc = mesh.centroid
    state.T_node[:] = _sample(T0, cc)
    state.p_node[:] = _sample(p0, cc)
    state.u_node[:] = _sample_vector(u0, cc)

    fc = mesh.face_centroids.reshape(-1, 3)
    state.T_port[:] = _sample(T0, fc).reshape(mesh.n_cells, 6)
    state.p_port[:] = _sample(p0, fc).reshape(mesh.n_cells, 6)
    state.u_port[:] = _sample_vector(u0, fc).reshape(mesh.n_cells, 6, 3)
    state.T_port_prev[:] = state.T_port
    state.p_port_prev[:] = state.p_port
    state.u_port_prev[:] = state.u_port
    state.check_finite()
    return state
