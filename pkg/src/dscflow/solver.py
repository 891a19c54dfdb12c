"""Cycle scheduler: connection -> divergence cleaning -> reflection.

State layout at the start of step m (t = m*tau): ports current at t,
ports previous at t - tau, nodes at t + tau/2.  A step rotates the port
history, connects all fields to t + tau, cleans the face and node
velocities, reflects the nodes to t + 3*tau/2, and bumps the index.
The velocity pressure force is applied inside the cleaning loop with
the freshly solved pressure, so the reflection sweep runs without its
standalone pressure-gradient term.

Also here: the time-increment policy, steady-state monitor, and the
incident/outgoing channel decomposition used as a scheduler diagnostic.
"""

import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .connection import connect_step
from .errors import NotConverged, ReconstructionMismatch
from .pressure import SorParams, projection_loop
from .reflection import HeatSource, reflect_step


@dataclass
class RunConfig:
    """Batch run control.

    tau_policy: "fixed" uses tau_value; "auto" recomputes
    safety * min(h^2 / (6 max(alpha, nu)), h / (|u| + u_floor)) every
    tau_recompute_every steps with h = V**(1/3).
    """
    t_end: float
    tau_policy: str = "auto"
    tau_value: float = 0.0
    safety: float = 0.4
    tau_recompute_every: int = 10
    u_floor: float = 1e-9
    sor: SorParams = field(default_factory=SorParams)
    steady_tol: float = 0.0
    steady_check_every: int = 100
    monitor_every: int = 0
    on_not_converged: str = "warn"
    max_steps: int = 0

    def __post_init__(self):
        if self.tau_policy not in ("auto", "fixed"):
            raise ValueError("tau_policy must be 'auto' or 'fixed'")
        if self.tau_policy == "fixed" and self.tau_value <= 0:
            raise ValueError("fixed tau requires tau_value > 0")
        if not (0.0 < self.safety <= 1.0):
            raise ValueError("safety must lie in (0, 1]")
        if self.on_not_converged not in ("warn", "abort"):
            raise ValueError("on_not_converged must be 'warn' or 'abort'")


@dataclass
class StepStats:
    step: int
    time: float
    tau: float
    pressure_outer: int
    pressure_sweeps: int
    sum_abs_div: float


def auto_timestep(mesh, state, props, safety=0.4, u_floor=1e-9):
    """Stability-guided increment from diffusive and advective bounds."""
    h = mesh.cell_size()
    diff = max(props.alpha, props.mu / props.rho_inf)
    lim = h * h / (6.0 * diff)
    speed = np.linalg.norm(state.u_node, axis=1) + u_floor
    lim = np.minimum(lim, h / speed)
    return safety * float(lim.min())


def step(mesh, state, props, tau, q_cells=None, sor=None, on_not_converged="warn"):
    """Advance the state by one full cycle of length tau."""
    if q_cells is None:
        q_cells = np.zeros(mesh.n_cells)
    if sor is None:
        sor = SorParams()

    state.rotate_port_history()
    connect_step(mesh, state)
    try:
        pstats = projection_loop(mesh, state, props, tau, sor)
    except NotConverged as exc:
        if on_not_converged == "abort":
            raise
        warnings.warn(f"step {state.step_index}: {exc}", RuntimeWarning)
        pstats = exc.stats
    reflect_step(mesh, state, props, q_cells, tau)
    state.step_index += 1
    state.time += tau
    state.check_finite()
    return StepStats(state.step_index, state.time, tau,
                     pstats.outer_iterations, pstats.sweeps, pstats.sum_abs_div)


def monitor_steady_state(state, prev, tol):
    """True when the largest relative change of T and u since the
    previous snapshot is below tol."""
    dT = float(np.max(np.abs(state.T_node - prev.T_node))) if state.T_node.size else 0.0
    refT = max(float(np.max(np.abs(prev.T_node))), np.finfo(float).tiny)
    du = float(np.max(np.abs(state.u_node - prev.u_node))) if state.u_node.size else 0.0
    refU = max(float(np.max(np.abs(prev.u_node))), 1e-12)
    return max(dT / refT, du / refU) < tol


@dataclass
class RunResult:
    steps: int
    time: float
    steady: bool
    last: StepStats


def run(mesh, state, props, config, source=None, observer=None, monitor_stream=None):
    """Time loop with monitoring, steady detection and an observer hook.

    `observer(state, stats)` is called after every step; monitor lines
    go to `monitor_stream` (default stdout) every monitor_every steps.
    """
    source = source or HeatSource(0.0)
    stream = monitor_stream if monitor_stream is not None else sys.stdout
    q_cells = source.cell_values(mesh, state.time)
    q_static = not callable(source.spec)

    tau = (config.tau_value if config.tau_policy == "fixed"
           else auto_timestep(mesh, state, props, config.safety, config.u_floor))
    snapshot = state.copy() if config.steady_tol > 0 else None
    steady = False
    stats = None

    while state.time < config.t_end - 1e-15 * max(config.t_end, 1.0):
        if config.max_steps and state.step_index >= config.max_steps:
            break
        if (config.tau_policy == "auto"
                and state.step_index % max(config.tau_recompute_every, 1) == 0):
            tau = auto_timestep(mesh, state, props, config.safety, config.u_floor)
        tau_step = min(tau, config.t_end - state.time)
        if not q_static:
            q_cells = source.cell_values(mesh, state.time)
        stats = step(mesh, state, props, tau_step, q_cells, config.sor,
                     config.on_not_converged)
        if observer is not None:
            observer(state, stats)
        if config.monitor_every and stats.step % config.monitor_every == 0:
            _monitor_line(stream, state, stats)
        if snapshot is not None and stats.step % max(config.steady_check_every, 1) == 0:
            if monitor_steady_state(state, snapshot, config.steady_tol):
                steady = True
                break
            snapshot = state.copy()
    return RunResult(state.step_index, state.time, steady, stats)


def _monitor_line(stream, state, stats):
    umax = float(np.max(np.linalg.norm(state.u_node, axis=1)))
    tmax = float(np.max(state.T_node))
    stream.write(
        f"step={stats.step} t={stats.time:.6g} max|u|={umax:.6g} "
        f"maxT={tmax:.6g} p_outer={stats.pressure_outer} "
        f"sum|I|={stats.sum_abs_div:.6g}\n")
    stream.flush()


# -- scattering-channel diagnostic --------------------------------------


class ScatteringRecorder:
    """Records port/node histories of one scalar field for the channel
    decomposition (diagnostic mode only; copies arrays every step)."""

    def __init__(self, mesh, field="T"):
        self.field = field
        self.ports = []     # z^p(k tau), (nc, 6) each
        self.nodes = []     # z^n(k tau + tau/2), (nc,) each

    def _port_array(self, state):
        return {"T": state.T_port, "p": state.p_port}[self.field]

    def _node_array(self, state):
        return {"T": state.T_node, "p": state.p_node}[self.field]

    def record(self, state):
        self.ports.append(self._port_array(state).copy())
        self.nodes.append(self._node_array(state).copy())


def scattering_decomposition(ports, nodes, tol=1e-12):
    """Incident/outgoing splitting of a recorded port/node history.

    ports[k] are the port values at t = k tau, nodes[k] the node values
    at t = k tau + tau/2 (zero prehistory before k = 0).  Returns
    (z_in, z_out) per step and verifies the reconstruction identities;
    a violation indicates a scheduler bug and raises
    ReconstructionMismatch.
    """
    if len(ports) != len(nodes):
        raise ValueError("need one node record per port record")
    z_in, z_out = [], []
    out_prev = 0.0
    scale = max((float(np.max(np.abs(p))) for p in ports), default=0.0)
    scale = max(scale, max((float(np.max(np.abs(n))) for n in nodes), default=0.0), 1.0)
    for k in range(len(ports)):
        zi = ports[k] - out_prev
        zo = nodes[k][:, None] - zi
        err_p = float(np.max(np.abs(out_prev + zi - ports[k]))) if k else 0.0
        err_n = float(np.max(np.abs(zi + zo - nodes[k][:, None])))
        if max(err_p, err_n) > tol * scale:
            raise ReconstructionMismatch(
                f"reconstruction error {max(err_p, err_n):.3e} at record {k}")
        z_in.append(zi)
        z_out.append(zo)
        out_prev = zo
    return z_in, z_out
