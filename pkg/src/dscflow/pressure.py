"""Divergence cleaning: compensation pressure solve and velocity correction.

The cleaning finds, per outer iteration, the cell pressure field whose
discrete flux integral compensates the current face-velocity divergence,

    (tau/rho) * sum_faces flux(p) = integral of u . dF over the cell,

then decrements interior face velocities and nodal velocities by
(tau/rho) grad p.  Each relaxation sweep solves the one-unknown cell
equations with ports frozen; coupling travels through the port refresh
(a connection sweep for p) between sweeps.  The pure-Neumann system is
gauged by pinning the cell-0 pressure at zero and projecting the mean
out of the right-hand side.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .connection import connect_scalar_sweep
from .errors import NotConverged, SorDiverged


@dataclass
class SorParams:
    """Relaxation and stopping control of the cleaning loop.

    eps_global is the stopping bound on sum_cells |divergence integral|
    (m^3/s); eps_cell the inner residual bound of the pressure solve in
    the same units.  Both default to automatic scales resolved at run
    time: eps_global = 1e-8 * U_ref * A_total and eps_cell spread over
    the cells.
    """
    omega: float = 1.5
    eps_global: float = None
    eps_cell: float = None
    max_inner: int = 200
    max_outer: int = 50

    def __post_init__(self):
        if not (0.0 < self.omega < 2.0):
            raise ValueError("omega must lie in (0, 2)")
        for eps in (self.eps_global, self.eps_cell):
            if eps is not None and eps <= 0:
                raise ValueError("tolerances must be positive")


@dataclass
class ProjectionStats:
    outer_iterations: int
    sweeps: int
    sum_abs_div: float
    max_abs_div: float
    eps_global: float
    converged: bool


def divergence_integrals(mesh, state, out=None):
    """Gauss integral of u . dF over every cell boundary."""
    if out is None:
        out = np.empty(mesh.n_cells)
    K.divergence(state.u_port, mesh.face_vectors, out)
    return out


def divergence_integral(mesh, state, cell):
    """Single-cell divergence integral (reference implementation)."""
    total = 0.0
    for f in range(6):
        total += float(state.u_port[cell, f] @ mesh.face_vectors[cell, f])
    return total


def resolve_tolerances(mesh, state, params, u_floor=1e-9):
    """Concrete (eps_global, eps_cell) for this mesh and state."""
    eps_global = params.eps_global
    if eps_global is None:
        u_ref = max(float(np.max(np.abs(state.u_node))) if state.u_node.size else 0.0,
                    float(np.max(np.abs(state.u_port))) if state.u_port.size else 0.0,
                    u_floor)
        a_total = float(np.sum(np.linalg.norm(
            mesh.face_vectors.reshape(-1, 3), axis=1)))
        eps_global = 1e-8 * u_ref * a_total
    eps_cell = params.eps_cell
    if eps_cell is None:
        eps_cell = eps_global / max(mesh.n_cells, 1)
    return eps_global, eps_cell


def solve_pressure(mesh, state, params, rhs_flux, rho_over_tau, eps_cell):
    """Relaxation solve of the compensation equations; returns sweep count.

    `rhs_flux` is the right-hand side in flux units ((rho/tau) * I per
    cell); its mean is projected out for compatibility.  The nodal
    pressure is updated in place (warm start from the current field) and
    the pressure ports are re-established after every sweep.  Raises
    SorDiverged when the residual grows over 10 consecutive sweeps.
    """
    rhs = rhs_flux - rhs_flux.mean()
    tau_over_rho = 1.0 / rho_over_tau
    prev_res = math.inf
    growth = 0
    sweeps = 0
    for sweeps in range(1, params.max_inner + 1):
        K.pressure_sweep(state.p_node, state.p_port, state.p_port_prev,
                         mesh.flux_coeffs, mesh.flux_diag, rhs, params.omega)
        connect_scalar_sweep(mesh, state, "p")
        res = K.pressure_residual(state.p_node, state.p_port, state.p_port_prev,
                                  mesh.flux_coeffs, mesh.flux_diag, rhs)
        res_div = res * tau_over_rho
        if res_div < eps_cell:
            break
        growth = growth + 1 if res_div > prev_res else 0
        if growth >= 10:
            raise SorDiverged(
                f"pressure residual grew over {growth} sweeps (last {res_div:.3e})")
        prev_res = res_div

    # gauge: pin cell 0 at zero (a uniform shift is connection-exact)
    shift = float(state.p_node[0])
    if shift != 0.0:
        state.p_node -= shift
        state.p_port -= shift
    return sweeps


def correct_velocity(mesh, state, props, tau):
    """u -= (tau/rho) grad p on interior face ports and all nodes.

    Interior faces take the mean of the two adjacent gradient
    reconstructions; boundary ports keep their wall values (the normal
    pressure gradient vanishes there by the zero-flux rule).
    """
    coef = tau / props.rho_inf
    K.correct_velocity(state.u_node, state.u_port,
                       state.p_node, state.p_port, state.p_port_prev,
                       mesh.dual, mesh.flux_coeffs,
                       mesh.iface_cell_a, mesh.iface_face_a,
                       mesh.iface_cell_b, mesh.iface_face_b, coef)


def projection_loop(mesh, state, props, tau, params, u_floor=1e-9):
    """Repeat {divergence, solve, correct} until the global bound holds.

    Returns ProjectionStats; raises NotConverged when the outer cap is
    reached above tolerance (the caller decides warn versus abort).  An
    infinite eps_global degenerates to exactly one cleaning pass.
    """
    eps_global, eps_cell = resolve_tolerances(mesh, state, params, u_floor)
    rho_over_tau = props.rho_inf / tau

    div = divergence_integrals(mesh, state)
    sum_div = float(np.sum(np.abs(div)))
    max_div = float(np.max(np.abs(div))) if len(div) else 0.0
    if math.isfinite(eps_global) and sum_div < eps_global:
        return ProjectionStats(0, 0, sum_div, max_div, eps_global, True)

    sweeps = 0
    outer = 0
    converged = False
    while outer < params.max_outer:
        outer += 1
        sweeps += solve_pressure(mesh, state, params, rho_over_tau * div,
                                 rho_over_tau, eps_cell)
        correct_velocity(mesh, state, props, tau)
        divergence_integrals(mesh, state, out=div)
        sum_div = float(np.sum(np.abs(div)))
        max_div = float(np.max(np.abs(div)))
        if sum_div < eps_global:
            converged = True
            break

    stats = ProjectionStats(outer, sweeps, sum_div, max_div, eps_global, converged)
    if not converged:
        exc = NotConverged(
            f"divergence cleaning at sum|I| = {sum_div:.3e} "
            f"(bound {eps_global:.3e}) after {outer} outer iterations",
            residual=sum_div, iterations=outer)
        exc.stats = stats
        raise exc
    return stats
