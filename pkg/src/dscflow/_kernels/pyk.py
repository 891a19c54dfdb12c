"""Pure numpy implementation of the hot solver kernels.

This is the fallback backend; the compiled extension mirrors these
functions operation-for-operation (same accumulation orders, compiled
with FP contraction off), so both backends produce identical results.

Conventions shared by all kernels:
  * ports are (n_cells, 6[, 3]) arrays, slot = (cell, local face);
  * the interface sign is (-1)**face, the pierced axis floor(face / 2);
  * tangential assemblies read the *previous* port level, the normal
    slot couples the node value with the *current* port level.
"""

import numpy as np

SGN = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
AXIS = np.array([0, 0, 1, 1, 2, 2], dtype=np.int64)

BMODE_FIXED = 0
BMODE_ZEROFLUX = 1
WALL_NOSLIP = 0
WALL_FREESLIP = 1

DENOM_RTOL = 1e-12
_TINY = np.finfo(float).tiny


def _tang_diffs(prev):
    """Directional port differences (n, 3): prev[2m+1] - prev[2m]."""
    return prev[:, 1::2] - prev[:, 0::2]


def _zn_faces(nodev, td, svals, cells, faces):
    """Full interface contraction N for slots (cells, faces).

    N = sum_mu s[c,f,mu] * (2*(-1)^f * node[c]  if mu == floor(f/2)
                            else td[c, mu]), accumulated in ascending mu.
    """
    m = AXIS[faces]
    normal = 2.0 * SGN[faces] * nodev[cells]
    acc = None
    for mu in range(3):
        vals = np.where(m == mu, normal, td[cells, mu])
        term = svals[cells, faces, mu] * vals
        acc = term if acc is None else acc + term
    return acc


def connect_scalar(nodev, curr, prev, svals, ica, ifa, icb, ifb,
                   bfc, bff, bmode, bval):
    """Interface update sweep for one scalar field.

    Writes the new physical port value into both slots of every interior
    face and applies fixed-value / zero-flux rules at boundary faces.
    Returns -1 on success, else the index of the first interior face
    with a numerically vanishing update denominator.
    """
    td = _tang_diffs(prev)

    if len(ica):
        na = _zn_faces(nodev, td, svals, ica, ifa)
        nb = _zn_faces(nodev, td, svals, icb, ifb)
        sa = svals[ica, ifa, AXIS[ifa]]
        sb = svals[icb, ifb, AXIS[ifb]]
        denom = sa + SGN[ifa] * SGN[ifb] * sb
        bad = np.abs(denom) <= DENOM_RTOL * (np.abs(sa) + np.abs(sb))
        if np.any(bad):
            return int(np.argmax(bad))
        zp = (na + nb) / denom
        phys = 0.5 * SGN[ifa] * zp
        curr[ica, ifa] = phys
        curr[icb, ifb] = phys

    if len(bfc):
        m = AXIS[bff]
        sm = svals[bfc, bff, m]
        tang = None
        for mu in range(3):
            term = np.where(m == mu, 0.0, svals[bfc, bff, mu] * td[bfc, mu])
            tang = term if tang is None else tang + term
        denom = 2.0 * SGN[bff] * sm
        safe = np.abs(denom) > _TINY
        zero_flux = nodev[bfc] + np.where(safe, tang / np.where(safe, denom, 1.0), 0.0)
        curr[bfc, bff] = np.where(bmode == BMODE_FIXED, bval, zero_flux)
    return -1


def connect_velocity(un, uc, upv, svals, ica, ifa, icb, ifb,
                     bfc, bff, bwall, bnormal):
    """Interface update sweep for the velocity vector.

    Interior faces connect each Cartesian component as an independent
    scalar.  Boundaries: no-slip zeroes the port; free-slip starts from
    the per-component zero-flux value and removes the outward-normal
    projection.
    """
    for k in range(3):
        td = _tang_diffs(upv[:, :, k])
        if len(ica):
            na = _zn_faces(un[:, k], td, svals, ica, ifa)
            nb = _zn_faces(un[:, k], td, svals, icb, ifb)
            sa = svals[ica, ifa, AXIS[ifa]]
            sb = svals[icb, ifb, AXIS[ifb]]
            denom = sa + SGN[ifa] * SGN[ifb] * sb
            bad = np.abs(denom) <= DENOM_RTOL * (np.abs(sa) + np.abs(sb))
            if np.any(bad):
                return int(np.argmax(bad))
            zp = (na + nb) / denom
            phys = 0.5 * SGN[ifa] * zp
            uc[ica, ifa, k] = phys
            uc[icb, ifb, k] = phys

    if len(bfc):
        m = AXIS[bff]
        sm = svals[bfc, bff, m]
        denom = 2.0 * SGN[bff] * sm
        safe = np.abs(denom) > _TINY
        cand = np.empty((len(bfc), 3))
        for k in range(3):
            td = _tang_diffs(upv[:, :, k])
            tang = None
            for mu in range(3):
                term = np.where(m == mu, 0.0, svals[bfc, bff, mu] * td[bfc, mu])
                tang = term if tang is None else tang + term
            cand[:, k] = un[bfc, k] + np.where(safe, tang / np.where(safe, denom, 1.0), 0.0)
        undot = (cand[:, 0] * bnormal[:, 0] + cand[:, 1] * bnormal[:, 1]
                 + cand[:, 2] * bnormal[:, 2])
        noslip = bwall == WALL_NOSLIP
        for k in range(3):
            slip = cand[:, k] - undot * bnormal[:, k]
            uc[bfc, bff, k] = np.where(noslip, 0.0, slip)
    return -1


def divergence(uc, fout, out):
    """Discrete Gauss integral of the face velocities per cell."""
    acc = None
    for f in range(6):
        term = (uc[:, f, 0] * fout[:, f, 0] + uc[:, f, 1] * fout[:, f, 1]
                + uc[:, f, 2] * fout[:, f, 2])
        acc = term if acc is None else acc + term
    out[:] = acc


def _flux_sum(nodev, curr, td, svals):
    """sum over faces of the discrete flux f . grad(Z), per cell."""
    acc = None
    for f in range(6):
        m = int(AXIS[f])
        fl = None
        for mu in range(3):
            if mu == m:
                vals = 2.0 * SGN[f] * (nodev - curr[:, f])
            else:
                vals = td[:, mu]
            term = svals[:, f, mu] * vals
            fl = term if fl is None else fl + term
        acc = fl if acc is None else acc + fl
    return acc


def _nodal_grad(curr, gmat):
    """Gradient from current port differences: dual @ (port diffs)."""
    d = curr[:, 1::2] - curr[:, 0::2]
    out = np.empty_like(d)
    for nu in range(3):
        out[:, nu] = (gmat[:, nu, 0] * d[:, 0] + gmat[:, nu, 1] * d[:, 1]
                      + gmat[:, nu, 2] * d[:, 2])
    return out


def reflect(Tn, un, Tc, Tpv, pc, uc, upv, svals, gmat, vol, q,
            tau, alpha, mu_dyn, rho, beta_exp, T_inf, g, include_pgrad):
    """Nodal update of temperature and velocity (one half-step).

    Advection uses nodal values and nodal gradients; diffusion uses the
    per-face flux sums; buoyancy uses the pre-update temperature.  The
    pressure-gradient term is optional: the full step applies it inside
    the projection loop instead.
    """
    tdT = _tang_diffs(Tpv)
    gT = _nodal_grad(Tc, gmat)
    ST = _flux_sum(Tn, Tc, tdT, svals)
    advT = un[:, 0] * gT[:, 0] + un[:, 1] * gT[:, 1] + un[:, 2] * gT[:, 2]
    accT = -advT + (alpha / vol) * ST + q
    T_new = Tn + tau * accT

    gU = [_nodal_grad(uc[:, :, k], gmat) for k in range(3)]
    if include_pgrad:
        gP = _nodal_grad(pc, gmat)
    buoy = beta_exp * (Tn - T_inf)
    u_new = np.empty_like(un)
    for k in range(3):
        tdU = _tang_diffs(upv[:, :, k])
        SU = _flux_sum(un[:, k], uc[:, :, k], tdU, svals)
        adv = (un[:, 0] * gU[k][:, 0] + un[:, 1] * gU[k][:, 1]
               + un[:, 2] * gU[k][:, 2])
        acc = -adv
        if include_pgrad:
            acc = acc - gP[:, k] * (1.0 / rho)
        acc = acc + (mu_dyn / (vol * rho)) * SU
        acc = acc + buoy * g[k]
        u_new[:, k] = un[:, k] + tau * acc

    Tn[:] = T_new
    un[:] = u_new


def pressure_sweep(pn, pc, ppv, svals, sdiag, rhs, omega):
    """One relaxation sweep of the cell-local compensation equations.

    With ports held fixed, each cell equation has the single unknown
    pn[c]; the sweep is therefore order-independent.  Coupling between
    cells happens through the port refresh between sweeps.
    """
    td = _tang_diffs(ppv)
    off = None
    for f in range(6):
        m = int(AXIS[f])
        fl = None
        for mu in range(3):
            if mu == m:
                vals = -2.0 * SGN[f] * pc[:, f]
            else:
                vals = td[:, mu]
            term = svals[:, f, mu] * vals
            fl = term if fl is None else fl + term
        off = fl if off is None else off + fl
    p_new = (rhs - off) / sdiag
    pn[:] = (1.0 - omega) * pn + omega * p_new


def pressure_residual(pn, pc, ppv, svals, sdiag, rhs):
    """max |flux(p) - rhs| over cells, with the current (refreshed) ports."""
    td = _tang_diffs(ppv)
    off = None
    for f in range(6):
        m = int(AXIS[f])
        fl = None
        for mu in range(3):
            if mu == m:
                vals = -2.0 * SGN[f] * pc[:, f]
            else:
                vals = td[:, mu]
            term = svals[:, f, mu] * vals
            fl = term if fl is None else fl + term
        off = fl if off is None else off + fl
    res = sdiag * pn + off - rhs
    return float(np.max(np.abs(res))) if len(res) else 0.0


def _face_grad(pn, pc, td, gmat, cells, faces):
    """Face gradient of the pressure at slots (cells, faces)."""
    m = AXIS[faces]
    normal = 2.0 * SGN[faces] * (pn[cells] - pc[cells, faces])
    d = np.empty((len(cells), 3))
    for mu in range(3):
        d[:, mu] = np.where(m == mu, normal, td[cells, mu])
    out = np.empty((len(cells), 3))
    for nu in range(3):
        out[:, nu] = (gmat[cells, nu, 0] * d[:, 0] + gmat[cells, nu, 1] * d[:, 1]
                      + gmat[cells, nu, 2] * d[:, 2])
    return out


def correct_velocity(un, uc, pn, pc, ppv, gmat, svals, ica, ifa, icb, ifb, coef):
    """Subtract coef * grad(p) from interior face ports and all nodes.

    Interior faces use the mean of the two adjacent reconstructions and
    write one shared value; boundary ports keep their wall conditions.
    """
    td = _tang_diffs(ppv)
    if len(ica):
        ga = _face_grad(pn, pc, td, gmat, ica, ifa)
        gb = _face_grad(pn, pc, td, gmat, icb, ifb)
        gavg = 0.5 * (ga + gb)
        for k in range(3):
            uc[ica, ifa, k] -= coef * gavg[:, k]
            uc[icb, ifb, k] -= coef * gavg[:, k]
    gnode = _nodal_grad(pc, gmat)
    for k in range(3):
        un[:, k] -= coef * gnode[:, k]
