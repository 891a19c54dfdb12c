# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled solver kernels.

Mirrors _kernels/pyk.py operation-for-operation; both backends must
stay interchangeable (the equivalence is enforced by tests/test_backends.py).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef double[6] SGN_C = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0]
cdef int[6] AXIS_C = [0, 0, 1, 1, 2, 2]

DEF DENOM_RTOL = 1e-12

BMODE_FIXED = 0
BMODE_ZEROFLUX = 1
WALL_NOSLIP = 0
WALL_FREESLIP = 1

_TINY = np.finfo(float).tiny
cdef double TINY_C = _TINY


cdef inline double _zn_one(double[:, :, ::1] svals, double[:, ::1] td,
                           double nodev, Py_ssize_t c, int f) nogil:
    cdef int m = AXIS_C[f]
    cdef double sg = SGN_C[f]
    cdef double acc = 0.0
    cdef int mu
    for mu in range(3):
        if mu == m:
            acc += svals[c, f, mu] * (2.0 * sg * nodev)
        else:
            acc += svals[c, f, mu] * td[c, mu]
    return acc


def connect_scalar(double[::1] nodev, double[:, ::1] curr, double[:, ::1] prev,
                   double[:, :, ::1] svals,
                   int[::1] ica, int[::1] ifa, int[::1] icb, int[::1] ifb,
                   int[::1] bfc, int[::1] bff,
                   signed char[::1] bmode, double[::1] bval):
    cdef Py_ssize_t nif = ica.shape[0]
    cdef Py_ssize_t nbf = bfc.shape[0]
    cdef Py_ssize_t nc = nodev.shape[0]
    cdef double[:, ::1] td = np.empty((nc, 3))
    cdef Py_ssize_t c, k
    cdef int fa, fb, m, mu
    cdef Py_ssize_t ca, cb
    cdef double na, nb, sa, sb, denom, zp, phys, tang, sm

    with nogil:
        for c in range(nc):
            for mu in range(3):
                td[c, mu] = prev[c, 2 * mu + 1] - prev[c, 2 * mu]

        for k in range(nif):
            ca = ica[k]; fa = ifa[k]
            cb = icb[k]; fb = ifb[k]
            na = _zn_one(svals, td, nodev[ca], ca, fa)
            nb = _zn_one(svals, td, nodev[cb], cb, fb)
            sa = svals[ca, fa, AXIS_C[fa]]
            sb = svals[cb, fb, AXIS_C[fb]]
            denom = sa + SGN_C[fa] * SGN_C[fb] * sb
            if fabs(denom) <= DENOM_RTOL * (fabs(sa) + fabs(sb)):
                with gil:
                    return k
            zp = (na + nb) / denom
            phys = 0.5 * SGN_C[fa] * zp
            curr[ca, fa] = phys
            curr[cb, fb] = phys

        for k in range(nbf):
            ca = bfc[k]; fa = bff[k]
            m = AXIS_C[fa]
            if bmode[k] == 0:      # fixed value
                curr[ca, fa] = bval[k]
            else:                  # zero flux
                sm = svals[ca, fa, m]
                tang = 0.0
                for mu in range(3):
                    if mu != m:
                        tang += svals[ca, fa, mu] * td[ca, mu]
                denom = 2.0 * SGN_C[fa] * sm
                if fabs(denom) > TINY_C:
                    curr[ca, fa] = nodev[ca] + tang / denom
                else:
                    curr[ca, fa] = nodev[ca]
    return -1


def connect_velocity(double[:, ::1] un, double[:, :, ::1] uc, double[:, :, ::1] upv,
                     double[:, :, ::1] svals,
                     int[::1] ica, int[::1] ifa, int[::1] icb, int[::1] ifb,
                     int[::1] bfc, int[::1] bff,
                     signed char[::1] bwall, double[:, ::1] bnormal):
    cdef Py_ssize_t nif = ica.shape[0]
    cdef Py_ssize_t nbf = bfc.shape[0]
    cdef Py_ssize_t nc = un.shape[0]
    cdef double[:, ::1] td = np.empty((nc, 3))
    cdef double[3] cand
    cdef Py_ssize_t c, k, comp
    cdef int fa, fb, m, mu
    cdef Py_ssize_t ca, cb
    cdef double na, nb, sa, sb, denom, zp, phys, tang, sm, undot

    for comp in range(3):
        with nogil:
            for c in range(nc):
                for mu in range(3):
                    td[c, mu] = upv[c, 2 * mu + 1, comp] - upv[c, 2 * mu, comp]
            for k in range(nif):
                ca = ica[k]; fa = ifa[k]
                cb = icb[k]; fb = ifb[k]
                na = _zn_one(svals, td, un[ca, comp], ca, fa)
                nb = _zn_one(svals, td, un[cb, comp], cb, fb)
                sa = svals[ca, fa, AXIS_C[fa]]
                sb = svals[cb, fb, AXIS_C[fb]]
                denom = sa + SGN_C[fa] * SGN_C[fb] * sb
                if fabs(denom) <= DENOM_RTOL * (fabs(sa) + fabs(sb)):
                    with gil:
                        return k
                zp = (na + nb) / denom
                phys = 0.5 * SGN_C[fa] * zp
                uc[ca, fa, comp] = phys
                uc[cb, fb, comp] = phys

    # boundary: zero-flux candidates per component, then wall rule
    for k in range(nbf):
        ca = bfc[k]; fa = bff[k]
        m = AXIS_C[fa]
        sm = svals[ca, fa, m]
        denom = 2.0 * SGN_C[fa] * sm
        for comp in range(3):
            tang = 0.0
            for mu in range(3):
                if mu != m:
                    tang += svals[ca, fa, mu] * (upv[ca, 2 * mu + 1, comp] - upv[ca, 2 * mu, comp])
            if fabs(denom) > TINY_C:
                cand[comp] = un[ca, comp] + tang / denom
            else:
                cand[comp] = un[ca, comp]
        if bwall[k] == 0:          # no slip
            uc[ca, fa, 0] = 0.0
            uc[ca, fa, 1] = 0.0
            uc[ca, fa, 2] = 0.0
        else:                      # free slip: remove normal projection
            undot = (cand[0] * bnormal[k, 0] + cand[1] * bnormal[k, 1]
                     + cand[2] * bnormal[k, 2])
            for comp in range(3):
                uc[ca, fa, comp] = cand[comp] - undot * bnormal[k, comp]
    return -1


def divergence(double[:, :, ::1] uc, double[:, :, ::1] fout, double[::1] out):
    cdef Py_ssize_t nc = uc.shape[0]
    cdef Py_ssize_t c
    cdef int f
    cdef double acc
    with nogil:
        for c in range(nc):
            acc = 0.0
            for f in range(6):
                acc += (uc[c, f, 0] * fout[c, f, 0] + uc[c, f, 1] * fout[c, f, 1]
                        + uc[c, f, 2] * fout[c, f, 2])
            out[c] = acc


cdef inline double _flux_sum_one(double nodev, double[:, ::1] curr,
                                 double* td, double[:, :, ::1] svals,
                                 Py_ssize_t c) nogil:
    cdef double acc = 0.0, fl
    cdef int f, m, mu
    for f in range(6):
        m = AXIS_C[f]
        fl = 0.0
        for mu in range(3):
            if mu == m:
                fl += svals[c, f, mu] * (2.0 * SGN_C[f] * (nodev - curr[c, f]))
            else:
                fl += svals[c, f, mu] * td[mu]
        acc += fl
    return acc


def reflect(double[::1] Tn, double[:, ::1] un,
            double[:, ::1] Tc, double[:, ::1] Tpv, double[:, ::1] pc,
            double[:, :, ::1] uc, double[:, :, ::1] upv,
            double[:, :, ::1] svals, double[:, :, ::1] gmat, double[::1] vol,
            double[::1] q, double tau, double alpha, double mu_dyn, double rho,
            double beta_exp, double T_inf, double[::1] g, bint include_pgrad):
    cdef Py_ssize_t nc = Tn.shape[0]
    cdef Py_ssize_t c
    cdef int k, mu, nu, m
    cdef double[3] tdT, dT, gT, dP, gP
    cdef double[3][3] tdU, dU, gU
    cdef double[3] u_old, u_new
    cdef double ST, SU, advT, adv, accT, acc, buoy, T_old, T_new

    with nogil:
        for c in range(nc):
            T_old = Tn[c]
            for k in range(3):
                u_old[k] = un[c, k]

            for mu in range(3):
                tdT[mu] = Tpv[c, 2 * mu + 1] - Tpv[c, 2 * mu]
                dT[mu] = Tc[c, 2 * mu + 1] - Tc[c, 2 * mu]
                dP[mu] = pc[c, 2 * mu + 1] - pc[c, 2 * mu]
                for k in range(3):
                    tdU[k][mu] = upv[c, 2 * mu + 1, k] - upv[c, 2 * mu, k]
                    dU[k][mu] = uc[c, 2 * mu + 1, k] - uc[c, 2 * mu, k]
            for nu in range(3):
                gT[nu] = (gmat[c, nu, 0] * dT[0] + gmat[c, nu, 1] * dT[1]
                          + gmat[c, nu, 2] * dT[2])
                gP[nu] = (gmat[c, nu, 0] * dP[0] + gmat[c, nu, 1] * dP[1]
                          + gmat[c, nu, 2] * dP[2])
                for k in range(3):
                    gU[k][nu] = (gmat[c, nu, 0] * dU[k][0] + gmat[c, nu, 1] * dU[k][1]
                                 + gmat[c, nu, 2] * dU[k][2])

            ST = _flux_sum_one(T_old, Tc, &tdT[0], svals, c)
            advT = u_old[0] * gT[0] + u_old[1] * gT[1] + u_old[2] * gT[2]
            accT = -advT + (alpha / vol[c]) * ST + q[c]
            T_new = T_old + tau * accT

            buoy = beta_exp * (T_old - T_inf)
            for k in range(3):
                SU = 0.0
                for nu in range(6):
                    m = AXIS_C[nu]
                    acc = 0.0
                    for mu in range(3):
                        if mu == m:
                            acc += svals[c, nu, mu] * (2.0 * SGN_C[nu] * (u_old[k] - uc[c, nu, k]))
                        else:
                            acc += svals[c, nu, mu] * tdU[k][mu]
                    SU += acc
                adv = u_old[0] * gU[k][0] + u_old[1] * gU[k][1] + u_old[2] * gU[k][2]
                acc = -adv
                if include_pgrad:
                    acc = acc - gP[k] * (1.0 / rho)
                acc = acc + (mu_dyn / (vol[c] * rho)) * SU
                acc = acc + buoy * g[k]
                u_new[k] = u_old[k] + tau * acc

            Tn[c] = T_new
            for k in range(3):
                un[c, k] = u_new[k]


def pressure_sweep(double[::1] pn, double[:, ::1] pc, double[:, ::1] ppv,
                   double[:, :, ::1] svals, double[::1] sdiag,
                   double[::1] rhs, double omega):
    cdef Py_ssize_t nc = pn.shape[0]
    cdef Py_ssize_t c
    cdef int f, m, mu
    cdef double[3] td
    cdef double off, fl, p_new
    with nogil:
        for c in range(nc):
            for mu in range(3):
                td[mu] = ppv[c, 2 * mu + 1] - ppv[c, 2 * mu]
            off = 0.0
            for f in range(6):
                m = AXIS_C[f]
                fl = 0.0
                for mu in range(3):
                    if mu == m:
                        fl += svals[c, f, mu] * (-2.0 * SGN_C[f] * pc[c, f])
                    else:
                        fl += svals[c, f, mu] * td[mu]
                off += fl
            p_new = (rhs[c] - off) / sdiag[c]
            pn[c] = (1.0 - omega) * pn[c] + omega * p_new


def pressure_residual(double[::1] pn, double[:, ::1] pc, double[:, ::1] ppv,
                      double[:, :, ::1] svals, double[::1] sdiag, double[::1] rhs):
    cdef Py_ssize_t nc = pn.shape[0]
    cdef Py_ssize_t c
    cdef int f, m, mu
    cdef double[3] td
    cdef double off, fl, res, worst = 0.0
    with nogil:
        for c in range(nc):
            for mu in range(3):
                td[mu] = ppv[c, 2 * mu + 1] - ppv[c, 2 * mu]
            off = 0.0
            for f in range(6):
                m = AXIS_C[f]
                fl = 0.0
                for mu in range(3):
                    if mu == m:
                        fl += svals[c, f, mu] * (-2.0 * SGN_C[f] * pc[c, f])
                    else:
                        fl += svals[c, f, mu] * td[mu]
                off += fl
            res = sdiag[c] * pn[c] + off - rhs[c]
            if res < 0:
                res = -res
            if res > worst:
                worst = res
    return worst


cdef inline void _face_grad_one(double[::1] pn, double[:, ::1] pc,
                                double[:, ::1] ppv, double[:, :, ::1] gmat,
                                Py_ssize_t c, int f, double* out) nogil:
    cdef double[3] d
    cdef int m = AXIS_C[f]
    cdef int mu, nu
    for mu in range(3):
        if mu == m:
            d[mu] = 2.0 * SGN_C[f] * (pn[c] - pc[c, f])
        else:
            d[mu] = ppv[c, 2 * mu + 1] - ppv[c, 2 * mu]
    for nu in range(3):
        out[nu] = (gmat[c, nu, 0] * d[0] + gmat[c, nu, 1] * d[1]
                   + gmat[c, nu, 2] * d[2])


def correct_velocity(double[:, ::1] un, double[:, :, ::1] uc,
                     double[::1] pn, double[:, ::1] pc, double[:, ::1] ppv,
                     double[:, :, ::1] gmat, double[:, :, ::1] svals,
                     int[::1] ica, int[::1] ifa, int[::1] icb, int[::1] ifb,
                     double coef):
    cdef Py_ssize_t nif = ica.shape[0]
    cdef Py_ssize_t nc = un.shape[0]
    cdef Py_ssize_t k, c
    cdef int fa, fb, nu, mu
    cdef Py_ssize_t ca, cb
    cdef double[3] ga, gb, gavg, d, gn
    with nogil:
        for k in range(nif):
            ca = ica[k]; fa = ifa[k]
            cb = icb[k]; fb = ifb[k]
            _face_grad_one(pn, pc, ppv, gmat, ca, fa, &ga[0])
            _face_grad_one(pn, pc, ppv, gmat, cb, fb, &gb[0])
            for nu in range(3):
                gavg[nu] = 0.5 * (ga[nu] + gb[nu])
                uc[ca, fa, nu] -= coef * gavg[nu]
                uc[cb, fb, nu] -= coef * gavg[nu]
        for c in range(nc):
            for mu in range(3):
                d[mu] = pc[c, 2 * mu + 1] - pc[c, 2 * mu]
            for nu in range(3):
                gn[nu] = (gmat[c, nu, 0] * d[0] + gmat[c, nu, 1] * d[1]
                          + gmat[c, nu, 2] * d[2])
                un[c, nu] -= coef * gn[nu]
