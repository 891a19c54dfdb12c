"""Interface (port) updates: flux continuity, boundaries, face gradients.

The sweep entry point `connect_step` runs the backend kernels over all
faces; the per-face functions below implement the same algebra one slot
at a time and exist for tests, diagnostics and the dense pressure
oracle.  Both must agree; tests/test_backends.py checks it.

Time alignment: the normal slot couples the node value (half step
behind the new port level) with the current port; tangential slots are
opposite-face differences at the previous port level.  Rotation of the
port history therefore happens before a connection sweep.
"""

import numpy as np

from . import _kernels as K
from .errors import NearSingularDenominator, UnknownTag
from .geometry import FACE_AXIS, FACE_SIGN
from .mesh import TCOND_FIXED, WALL_NOSLIP, WALL_FREESLIP

_SCALARS = ("T", "p")


def _field_views(state, field):
    """(node, curr, prev) views of a scalar field id."""
    if field == "T":
        return state.T_node, state.T_port, state.T_port_prev
    if field == "p":
        return state.p_node, state.p_port, state.p_port_prev
    if field in ("ux", "uy", "uz"):
        k = "xyz".index(field[1])
        return state.u_node[:, k], state.u_port[:, :, k], state.u_port_prev[:, :, k]
    raise KeyError(field)


def assemble_znode(mesh, state, cell, face, field):
    """Interface contraction input vector for one (cell, face) slot.

    Component floor(face/2) is 2*(-1)^face times the node value; the
    other two components are opposite-face port differences at the
    previous level.
    """
    nodev, _, prev = _field_views(state, field)
    m = int(FACE_AXIS[face])
    z = np.empty(3)
    for mu in range(3):
        if mu == m:
            z[mu] = 2.0 * FACE_SIGN[face] * nodev[cell]
        else:
            z[mu] = prev[cell, 2 * mu + 1] - prev[cell, 2 * mu]
    return z


def connect_interior_face(mesh, state, iface_index, field):
    """Flux-continuity update of one interior face; returns the new
    physical port value (written to both slots)."""
    ca = int(mesh.iface_cell_a[iface_index])
    fa = int(mesh.iface_face_a[iface_index])
    cb = int(mesh.iface_cell_b[iface_index])
    fb = int(mesh.iface_face_b[iface_index])
    _, curr, _ = _field_views(state, field)

    za = assemble_znode(mesh, state, ca, fa, field)
    zb = assemble_znode(mesh, state, cb, fb, field)
    sa = mesh.flux_coeffs[ca, fa]
    sb = mesh.flux_coeffs[cb, fb]
    na = float(sa @ za)
    nb = float(sb @ zb)
    da = sa[FACE_AXIS[fa]]
    db = sb[FACE_AXIS[fb]]
    denom = da + FACE_SIGN[fa] * FACE_SIGN[fb] * db
    if abs(denom) <= 1e-12 * (abs(da) + abs(db)):
        raise NearSingularDenominator(
            f"interface ({ca},{fa})|({cb},{fb}): denominator {denom:.3e}")
    zp = (na + nb) / denom
    value = 0.5 * FACE_SIGN[fa] * zp
    curr[ca, fa] = value
    curr[cb, fb] = value
    return value


def _zero_flux_value(mesh, state, cell, face, field):
    nodev, _, prev = _field_views(state, field)
    m = int(FACE_AXIS[face])
    s = mesh.flux_coeffs[cell, face]
    tang = 0.0
    for mu in range(3):
        if mu != m:
            tang += s[mu] * (prev[cell, 2 * mu + 1] - prev[cell, 2 * mu])
    denom = 2.0 * FACE_SIGN[face] * s[m]
    if abs(denom) <= np.finfo(float).tiny:
        return float(nodev[cell])
    return float(nodev[cell] + tang / denom)


def connect_boundary_face(mesh, state, bnd_index, field):
    """Boundary rule for one face slot of one field.

    Temperature: fixed value or zero flux.  Pressure: always zero
    normal flux.  Velocity: no-slip zeroes all components; free-slip
    removes the outward-normal projection of the per-component
    zero-flux values.
    """
    cell = int(mesh.bface_cell[bnd_index])
    face = int(mesh.bface_face[bnd_index])

    if field == "T":
        _, curr, _ = _field_views(state, field)
        if mesh.bnd_tcond[bnd_index] == TCOND_FIXED:
            value = float(mesh.bnd_tvalue[bnd_index])
        else:
            value = _zero_flux_value(mesh, state, cell, face, "T")
        curr[cell, face] = value
        return value
    if field == "p":
        value = _zero_flux_value(mesh, state, cell, face, "p")
        state.p_port[cell, face] = value
        return value
    if field == "u":
        wall = int(mesh.bnd_wall[bnd_index])
        if wall == WALL_NOSLIP:
            value = np.zeros(3)
        elif wall == WALL_FREESLIP:
            cand = np.array([_zero_flux_value(mesh, state, cell, face, f)
                             for f in ("ux", "uy", "uz")])
            normal = mesh.bnd_normal[bnd_index]
            value = cand - float(cand @ normal) * normal
        else:
            raise UnknownTag(f"wall kind {wall}")
        state.u_port[cell, face] = value
        return value
    raise KeyError(field)


def face_flux(mesh, state, cell, face, field):
    """Discrete flux f . grad(Z) through one face, after connection."""
    nodev, curr, prev = _field_views(state, field)
    m = int(FACE_AXIS[face])
    s = mesh.flux_coeffs[cell, face]
    total = 0.0
    for mu in range(3):
        if mu == m:
            total += s[mu] * (2.0 * FACE_SIGN[face] * (nodev[cell] - curr[cell, face]))
        else:
            total += s[mu] * (prev[cell, 2 * mu + 1] - prev[cell, 2 * mu])
    return float(total)


def face_gradient(mesh, state, cell, face, field, average=True):
    """Reconstructed gradient vector at one face.

    For interior faces the two adjacent reconstructions are averaged
    (single-valued face quantity); pass average=False for the one-sided
    value.
    """
    own = _face_gradient_one(mesh, state, cell, face, field)
    nb = int(mesh.neighbor[cell, face])
    if not average or nb < 0:
        return own
    other = _face_gradient_one(mesh, state, nb, int(mesh.neighbor_face[cell, face]), field)
    return 0.5 * (own + other)


def _face_gradient_one(mesh, state, cell, face, field):
    nodev, curr, prev = _field_views(state, field)
    m = int(FACE_AXIS[face])
    d = np.empty(3)
    for mu in range(3):
        if mu == m:
            d[mu] = 2.0 * FACE_SIGN[face] * (nodev[cell] - curr[cell, face])
        else:
            d[mu] = prev[cell, 2 * mu + 1] - prev[cell, 2 * mu]
    return mesh.dual[cell] @ d


def connect_step(mesh, state):
    """Full connection sweep over all faces for T, u and p."""
    for field in _SCALARS:
        connect_scalar_sweep(mesh, state, field)
    connect_velocity_sweep(mesh, state)


def connect_scalar_sweep(mesh, state, field):
    nodev, curr, prev = _field_views(state, field)
    if field == "T":
        bmode = np.ascontiguousarray(
            np.where(mesh.bnd_tcond == TCOND_FIXED, K.BMODE_FIXED, K.BMODE_ZEROFLUX)
        ).astype(np.int8)
        bval = mesh.bnd_tvalue
    else:
        bmode = np.full(mesh.n_boundary_faces, K.BMODE_ZEROFLUX, dtype=np.int8)
        bval = np.zeros(mesh.n_boundary_faces)
    bad = K.connect_scalar(nodev, curr, prev, mesh.flux_coeffs,
                           mesh.iface_cell_a, mesh.iface_face_a,
                           mesh.iface_cell_b, mesh.iface_face_b,
                           mesh.bface_cell, mesh.bface_face, bmode, bval)
    if bad >= 0:
        raise NearSingularDenominator(
            f"interior face {bad} "
            f"({int(mesh.iface_cell_a[bad])},{int(mesh.iface_face_a[bad])}): "
            "vanishing update denominator")


def connect_velocity_sweep(mesh, state):
    bad = K.connect_velocity(state.u_node, state.u_port, state.u_port_prev,
                             mesh.flux_coeffs,
                             mesh.iface_cell_a, mesh.iface_face_a,
                             mesh.iface_cell_b, mesh.iface_face_b,
                             mesh.bface_cell, mesh.bface_face,
                             mesh.bnd_wall, mesh.bnd_normal)
    if bad >= 0:
        raise NearSingularDenominator(
            f"interior face {bad}: vanishing update denominator (velocity)")
