"""Nodal updates: gradients at cell centers and the Boussinesq physics.

Temperature:  T += tau * ( -u.grad(T) + (alpha/V) * sum(face fluxes) + q )
Velocity:     u += tau * ( -(u.grad)u - grad(p)/rho
                           + (mu/(V rho)) * sum(face fluxes per component)
                           + beta*(T - T_inf)*g )

All right-hand sides use the pre-update nodal values together with the
freshly connected ports.  Advection is collocated (nodal velocity and
nodal gradients, no upwinding), which restricts the scheme to low cell
Peclet numbers.

In the full cycle the pressure-gradient term of the velocity update is
applied by the projection loop (with the self-consistently solved
pressure) rather than here; `update_velocity` keeps the term behind the
`include_pressure_gradient` switch for standalone use.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import NonFiniteUpdate


@dataclass
class FluidProperties:
    """Constant material properties of the Boussinesq model.

    alpha: thermal diffusivity, m^2/s.    mu: dynamic viscosity, Pa s.
    rho_inf: reference density, kg/m^3.   beta_exp: thermal expansion, 1/K.
    T_inf: reference temperature, K.      g: gravitational acceleration, m/s^2.
    """
    alpha: float
    mu: float
    rho_inf: float
    beta_exp: float
    T_inf: float
    g: tuple = (0.0, 0.0, -9.81)

    def __post_init__(self):
        if self.alpha <= 0 or self.mu <= 0 or self.rho_inf <= 0:
            raise ValueError("alpha, mu and rho_inf must be positive")
        if not np.all(np.isfinite([self.beta_exp, self.T_inf, *self.g])):
            raise ValueError("non-finite fluid property")
        self.g = tuple(float(c) for c in self.g)

    @property
    def nu(self):
        """Kinematic viscosity mu/rho_inf."""
        return self.mu / self.rho_inf


@dataclass
class HeatSource:
    """Volumetric source q(x, t) in K/s (temperature-equation units).

    `cell_values(mesh, t)` returns the per-cell samples used by the
    nodal update (midpoint rule: centroid sample).
    """
    spec: object = 0.0

    def cell_values(self, mesh, t=0.0):
        if callable(self.spec):
            vals = np.asarray(self.spec(mesh.centroid, t), dtype=float)
            if vals.shape != (mesh.n_cells,):
                vals = np.broadcast_to(vals, (mesh.n_cells,)).copy()
        else:
            vals = np.full(mesh.n_cells, float(self.spec))
        if not np.all(np.isfinite(vals)):
            raise NonFiniteUpdate("heat source evaluated to a non-finite value")
        return vals


def nodal_gradient(mesh, state, cell, field):
    """Cell-center gradient from current port differences."""
    from .connection import _field_views
    _, curr, _ = _field_views(state, field)
    d = curr[cell, 1::2] - curr[cell, 0::2]
    return mesh.dual[cell] @ d


def _flux_sum_cell(mesh, state, cell, field):
    from .connection import face_flux
    return sum(face_flux(mesh, state, cell, f, field) for f in range(6))


def update_temperature(mesh, state, cell, props, tau, q=0.0):
    """New nodal temperature of one cell (pure; does not write state)."""
    u = state.u_node[cell]
    gT = nodal_gradient(mesh, state, cell, "T")
    flux = _flux_sum_cell(mesh, state, cell, "T")
    acc = -float(u @ gT) + (props.alpha / mesh.volume[cell]) * flux + q
    T_new = state.T_node[cell] + tau * acc
    if not np.isfinite(T_new):
        raise NonFiniteUpdate(f"temperature update non-finite at cell {cell}")
    return float(T_new)


def update_velocity(mesh, state, cell, props, tau,
                    include_pressure_gradient=True):
    """New nodal velocity of one cell (pure; does not write state)."""
    u = state.u_node[cell]
    gU = [nodal_gradient(mesh, state, cell, f) for f in ("ux", "uy", "uz")]
    buoy = props.beta_exp * (state.T_node[cell] - props.T_inf)
    gP = nodal_gradient(mesh, state, cell, "p")
    out = np.empty(3)
    for k, fid in enumerate(("ux", "uy", "uz")):
        flux = _flux_sum_cell(mesh, state, cell, fid)
        acc = -float(u @ gU[k])
        if include_pressure_gradient:
            acc -= gP[k] / props.rho_inf
        acc += props.mu / (mesh.volume[cell] * props.rho_inf) * flux
        acc += buoy * props.g[k]
        out[k] = u[k] + tau * acc
    if not np.all(np.isfinite(out)):
        raise NonFiniteUpdate(f"velocity update non-finite at cell {cell}")
    return out


def reflect_step(mesh, state, props, q_cells, tau, include_pressure_gradient=False):
    """Backend sweep updating all nodal T and u in place."""
    g = np.asarray(props.g, dtype=float)
    K.reflect(state.T_node, state.u_node,
              state.T_port, state.T_port_prev, state.p_port,
              state.u_port, state.u_port_prev,
              mesh.flux_coeffs, mesh.dual, mesh.volume, q_cells,
              tau, props.alpha, props.mu, props.rho_inf,
              props.beta_exp, props.T_inf, g, include_pressure_gradient)
