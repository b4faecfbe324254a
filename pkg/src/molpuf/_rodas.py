"""Compiled kernels: mass-action evaluation, banded LU and a Rodas4 stepper.

Everything here works on flat arrays in the solver's (bandwidth-reducing)
species ordering.  The Python-facing layer lives in :mod:`molpuf.kinetics`.
"""

import numpy as np
from numba import njit

# Rodas4 in the transformed form of Hairer & Wanner (Solving ODEs II, VI.4).
GAMMA = 0.25
A21 = 1.544
A31, A32 = 0.9466785280815826, 0.2557011698983284
A41, A42, A43 = 3.314825187068521, 2.896124015972201, 0.9986419139977817
A51, A52, A53, A54 = 1.221224509226641, 6.019134481288629, 12.53708332932087, -0.687886036105895
C21 = -5.6688
C31, C32 = -2.430093356833875, -0.2063599157091915
C41, C42, C43 = -0.1073529058151375, -9.594562251023355, -20.47028614809616
C51, C52, C53, C54 = 7.496443313967647, -10.24680431464352, -33.99990352819905, 11.7089089320616
C61, C62, C63, C64, C65 = (8.083246795921522, -7.981132988064893, -31.52159432874371,
                           16.31930543123136, -6.058818238834054)

OK = 0
STEP_LIMIT = 1
STEP_UNDERFLOW = 2
NONFINITE = 3

STOP_NEVER = 0
STOP_FIRST = 1
STOP_ALL = 2


@njit(cache=True)
def rates(x, r1, r2, k, v):
    for r in range(k.shape[0]):
        a = k[r]
        if r1[r] >= 0:
            a *= x[r1[r]]
        if r2[r] >= 0:
            a *= x[r2[r]]
        v[r] = a


@njit(cache=True)
def rhs(x, r1, r2, k, net_ptr, net_idx, net_coef, v, out):
    rates(x, r1, r2, k, v)
    out[:] = 0.0
    for r in range(k.shape[0]):
        vr = v[r]
        for q in range(net_ptr[r], net_ptr[r + 1]):
            out[net_idx[q]] += net_coef[q] * vr


@njit(cache=True)
def neg_jacobian_band(x, r1, r2, k, jac_rxn, jac_slot, jac_pos, jac_coef, ab):
    """Write -J into the flattened column-major band ``ab``."""
    ab[:] = 0.0
    for q in range(jac_rxn.shape[0]):
        r = jac_rxn[q]
        if jac_slot[q] == 0:
            other = x[r2[r]] if r2[r] >= 0 else 1.0
        else:
            other = x[r1[r]] if r1[r] >= 0 else 1.0
        ab[jac_pos[q]] -= jac_coef[q] * k[r] * other


@njit(cache=True)
def band_lu(ab, n, kl, ku, ipiv):
    """In-place banded LU with partial pivoting (the dgbtf2 algorithm).

    ``ab`` is a flattened column-major band: A[i, j] lives at
    ``j*ldab + kl+ku+i-j`` with ``ldab = 2*kl+ku+1``.  Returns the upper
    bandwidth actually used by U, or -1 for an exactly singular matrix.
    """
    kv = kl + ku
    ldab = 2 * kl + ku + 1
    ju = 0
    uband = ku
    for j in range(n):
        cj = j * ldab + kv
        km = min(kl, n - 1 - j)
        jp = 0
        best = abs(ab[cj])
        for p in range(1, km + 1):
            a = abs(ab[cj + p])
            if a > best:
                best = a
                jp = p
        ipiv[j] = j + jp
        if best == 0.0:
            return -1
        ju = max(ju, min(j + ku + jp, n - 1))
        if ju - j > uband:
            uband = ju - j
        if jp != 0:
            for c in range(j, ju + 1):
                base = c * ldab + kv - c
                tmp = ab[base + j]
                ab[base + j] = ab[base + j + jp]
                ab[base + j + jp] = tmp
        inv = 1.0 / ab[cj]
        for p in range(1, km + 1):
            ab[cj + p] *= inv
        for c in range(j + 1, ju + 1):
            base = c * ldab + kv + j - c
            ajc = ab[base]
            if ajc != 0.0:
                for p in range(1, km + 1):
                    ab[base + p] -= ab[cj + p] * ajc
    return uband


@njit(cache=True)
def band_solve(ab, n, kl, ku, uband, ipiv, b):
    kv = kl + ku
    ldab = 2 * kl + ku + 1
    for j in range(n):
        l = ipiv[j]
        if l != j:
            tmp = b[l]
            b[l] = b[j]
            b[j] = tmp
        bj = b[j]
        if bj != 0.0:
            cj = j * ldab + kv
            km = min(kl, n - 1 - j)
            for p in range(1, km + 1):
                b[j + p] -= ab[cj + p] * bj
    for j in range(n - 1, -1, -1):
        base = j * ldab + kv - j
        b[j] /= ab[base + j]
        bj = b[j]
        if bj != 0.0:
            for i in range(max(0, j - uband), j):
                b[i] -= ab[base + i] * bj


@njit(cache=True)
def _err_norm(err, y, ynew, rtol, atol):
    e = 0.0
    for i in range(y.shape[0]):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        q = abs(err[i]) / sc
        if q > e:
            e = q
    return e


@njit(cache=True)
def integrate_core(
    y0, t0, t_end, rtol, atol, h_init, max_steps,
    r1, r2, k, net_ptr, net_idx, net_coef,
    jac_rxn, jac_slot, jac_pos, jac_coef, kl, ku,
    watch_idx, watch_thr, stop_mode, record_every,
):
    n = y0.shape[0]
    nr = k.shape[0]
    nw = watch_idx.shape[0]
    kv = kl + ku
    ldab = 2 * kl + ku + 1

    v = np.empty(nr)
    jab = np.empty(ldab * n)
    ab = np.empty(ldab * n)
    ipiv = np.empty(n, dtype=np.int64)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    ys = np.empty(n)
    fs = np.empty(n)
    fy = np.empty(n)
    fnew = np.empty(n)
    ynew = np.empty(n)

    y = y0.copy()
    t = t0
    rhs(y, r1, r2, k, net_ptr, net_idx, net_coef, v, fy)

    cap = 256
    rec_t = np.empty(cap)
    rec_y = np.empty((cap, n))
    nrec = 0
    rec_t[0] = t
    rec_y[0, :] = y
    nrec = 1

    ev_found = np.zeros(nw, dtype=np.bool_)
    ev_t0 = np.zeros(nw)
    ev_t1 = np.zeros(nw)
    ev_w0 = np.zeros((nw, nw))
    ev_w1 = np.zeros((nw, nw))
    ev_f0 = np.zeros((nw, nw))
    ev_f1 = np.zeros((nw, nw))
    ev_err = np.zeros(nw)
    acc_err = np.zeros(nw)

    span = t_end - t
    if h_init > 0.0:
        h = h_init
    else:
        # scale-free guess, refined by the controller within a few steps
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d0 = max(d0, abs(y[i]) / sc)
            d1 = max(d1, abs(fy[i]) / sc)
        if d0 < 1e-5 or d1 < 1e-5:
            h = 1e-6 * span
        else:
            h = 0.01 * d0 / d1
    h = min(h, span)

    nsteps = 0
    nrej = 0
    max_clamp = 0.0
    status = OK
    need_jac = True
    last_rejected = False

    while t < t_end:
        if nsteps + nrej >= max_steps:
            status = STEP_LIMIT
            break
        if h < 1e-14 * max(abs(t), span):
            status = STEP_UNDERFLOW
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True

        if need_jac:
            neg_jacobian_band(y, r1, r2, k, jac_rxn, jac_slot, jac_pos, jac_coef, jab)
            need_jac = False
        ab[:] = jab
        fac = 1.0 / (GAMMA * h)
        for j in range(n):
            ab[j * ldab + kv] += fac
        ub = band_lu(ab, n, kl, ku, ipiv)
        if ub < 0:
            h *= 0.5
            nrej += 1
            continue

        k1[:] = fy
        band_solve(ab, n, kl, ku, ub, ipiv, k1)

        for i in range(n):
            ys[i] = y[i] + A21 * k1[i]
        rhs(ys, r1, r2, k, net_ptr, net_idx, net_coef, v, fs)
        for i in range(n):
            k2[i] = fs[i] + C21 * k1[i] / h
        band_solve(ab, n, kl, ku, ub, ipiv, k2)

        for i in range(n):
            ys[i] = y[i] + A31 * k1[i] + A32 * k2[i]
        rhs(ys, r1, r2, k, net_ptr, net_idx, net_coef, v, fs)
        for i in range(n):
            k3[i] = fs[i] + (C31 * k1[i] + C32 * k2[i]) / h
        band_solve(ab, n, kl, ku, ub, ipiv, k3)

        for i in range(n):
            ys[i] = y[i] + A41 * k1[i] + A42 * k2[i] + A43 * k3[i]
        rhs(ys, r1, r2, k, net_ptr, net_idx, net_coef, v, fs)
        for i in range(n):
            k4[i] = fs[i] + (C41 * k1[i] + C42 * k2[i] + C43 * k3[i]) / h
        band_solve(ab, n, kl, ku, ub, ipiv, k4)

        for i in range(n):
            ys[i] = y[i] + A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]
        rhs(ys, r1, r2, k, net_ptr, net_idx, net_coef, v, fs)
        for i in range(n):
            k5[i] = fs[i] + (C51 * k1[i] + C52 * k2[i] + C53 * k3[i] + C54 * k4[i]) / h
        band_solve(ab, n, kl, ku, ub, ipiv, k5)

        for i in range(n):
            ys[i] += k5[i]
        rhs(ys, r1, r2, k, net_ptr, net_idx, net_coef, v, fs)
        for i in range(n):
            k6[i] = fs[i] + (C61 * k1[i] + C62 * k2[i] + C63 * k3[i]
                             + C64 * k4[i] + C65 * k5[i]) / h
        band_solve(ab, n, kl, ku, ub, ipiv, k6)
        for i in range(n):
            ynew[i] = ys[i] + k6[i]

        finite = True
        for i in range(n):
            if not np.isfinite(ynew[i]):
                finite = False
                break
        err = _err_norm(k6, y, ynew, rtol, atol) if finite else 1e10

        if err > 1.0:
            nrej += 1
            h *= max(0.2, 0.9 * err ** -0.25)
            last_rejected = True
            continue

        # accepted
        nsteps += 1
        t_prev = t
        t = t_end if last else t + h
        for i in range(n):
            if ynew[i] < 0.0:
                if -ynew[i] > max_clamp:
                    max_clamp = -ynew[i]
                ynew[i] = 0.0
        rhs(ynew, r1, r2, k, net_ptr, net_idx, net_coef, v, fnew)

        for w in range(nw):
            acc_err[w] += abs(k6[watch_idx[w]])
        for w in range(nw):
            if ev_found[w]:
                continue
            a = y[watch_idx[w]] - watch_thr[w]
            b = ynew[watch_idx[w]] - watch_thr[w]
            if (a < 0.0 and b >= 0.0) or (a > 0.0 and b <= 0.0):
                ev_found[w] = True
                ev_t0[w] = t_prev
                ev_t1[w] = t
                for u in range(nw):
                    ev_w0[w, u] = y[watch_idx[u]]
                    ev_w1[w, u] = ynew[watch_idx[u]]
                    ev_f0[w, u] = fy[watch_idx[u]]
                    ev_f1[w, u] = fnew[watch_idx[u]]
                ev_err[w] = acc_err[w]

        y[:] = ynew
        fy[:] = fnew
        need_jac = True

        if record_every > 0 and (nsteps % record_every == 0 or t >= t_end):
            if nrec == cap:
                cap *= 2
                nt = np.empty(cap)
                ny = np.empty((cap, n))
                nt[:nrec] = rec_t[:nrec]
                ny[:nrec] = rec_y[:nrec]
                rec_t = nt
                rec_y = ny
            rec_t[nrec] = t
            rec_y[nrec, :] = y
            nrec += 1

        if nw > 0 and stop_mode != STOP_NEVER:
            nfound = 0
            for w in range(nw):
                if ev_found[w]:
                    nfound += 1
            if (stop_mode == STOP_FIRST and nfound > 0) or (stop_mode == STOP_ALL and nfound == nw):
                break

        fac_new = 0.9 * max(err, 1e-10) ** -0.25
        fac_new = min(6.0, max(0.2, fac_new))
        if last_rejected:
            fac_new = min(fac_new, 1.0)
        last_rejected = False
        h *= fac_new

    if record_every > 0 and rec_t[nrec - 1] != t:
        if nrec == cap:
            cap += 1
            nt = np.empty(cap)
            ny = np.empty((cap, n))
            nt[:nrec] = rec_t[:nrec]
            ny[:nrec] = rec_y[:nrec]
            rec_t = nt
            rec_y = ny
        rec_t[nrec] = t
        rec_y[nrec, :] = y
        nrec += 1
    if record_every <= 0:
        rec_t[1] = t
        rec_y[1, :] = y
        nrec = 2 if t != t0 else 1

    return (status, t, y, nsteps, nrej, max_clamp, rec_t[:nrec], rec_y[:nrec],
            ev_found, ev_t0, ev_t1, ev_w0, ev_w1, ev_f0, ev_f1, ev_err)
