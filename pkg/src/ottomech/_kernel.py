"""Batched numba kernel advancing trajectory states through one stroke.

The kernel applies, per time step and per trajectory,

    1. a Strang-split unitary step of H(delta_mid) = D(delta) + V with
       D = -delta n_a + omega_m n_b (diagonal phases) and
       V = 2 G x_a x_b   (diagonalized once per stroke: x = W diag(l) W^T),
    2. the Euler-Maruyama measurement update (dispersive or absorptive),
    3. the first-order MCWF bath update (jump or non-Hermitian drift),
    4. the trapezoid work increment -(<n_a>_k + <n_a>_{k+1})/2 * d(delta),

and records quadrature second moments at requested steps.  Each
trajectory's inner loop is strictly sequential and touches only its own
state and its own pre-drawn random numbers, so results are bit-identical
for any batch composition and any number of numba threads.

States are (n_photon, n_phonon) complex matrices; mode operators act as
row/column shifts, so nothing here ever builds a dense two-mode matrix.

Status codes: 0 ok, 1 norm collapse, 2 jump probability above 0.1.
"""

import numpy as np
from numba import njit, prange

STATUS_OK = 0
STATUS_NORM_COLLAPSE = 1
STATUS_JUMP_PROB = 2

SCHEME_NONE = 0
SCHEME_ABSORPTIVE = 1
SCHEME_DISPERSIVE = 2

#: number of symmetrized quadrature second moments recorded per point:
#: upper triangle of <{r_i, r_j}>/2 over r = (x_a, p_a, x_b, p_b)
N_MOMENTS = 10


@njit(cache=True, fastmath=True)
def _lmul(W, src, out):
    # out = W @ src, real W
    d1, d2 = src.shape
    for i in range(d1):
        for j in range(d2):
            out[i, j] = 0.0 + 0.0j
    for i in range(d1):
        for k in range(d1):
            w = W[i, k]
            for j in range(d2):
                out[i, j] += w * src[k, j]


@njit(cache=True, fastmath=True)
def _rmul(src, W, out):
    # out = src @ W, real W
    d1, d2 = src.shape
    for i in range(d1):
        for j in range(d2):
            out[i, j] = 0.0 + 0.0j
        for k in range(d2):
            v = src[i, k]
            for j in range(d2):
                out[i, j] += v * W[k, j]


@njit(cache=True, fastmath=True)
def _split_step(psi, t1, t2, pha_k, phb, vph, Wa, WaT, Wb, WbT, coupling_on):
    d1, d2 = psi.shape
    for i in range(d1):
        p = pha_k[i]
        for j in range(d2):
            psi[i, j] *= p * phb[j]
    if coupling_on == 1:
        _lmul(WaT, psi, t1)
        _rmul(t1, Wb, t2)
        for i in range(d1):
            for j in range(d2):
                t2[i, j] *= vph[i, j]
        _lmul(Wa, t2, t1)
        _rmul(t1, WbT, psi)
    for i in range(d1):
        p = pha_k[i]
        for j in range(d2):
            psi[i, j] *= p * phb[j]


@njit(cache=True, fastmath=True)
def _norm2(psi):
    d1, d2 = psi.shape
    n = 0.0
    for i in range(d1):
        for j in range(d2):
            v = psi[i, j]
            n += v.real * v.real + v.imag * v.imag
    return n


@njit(cache=True, fastmath=True)
def _scale(psi, s):
    d1, d2 = psi.shape
    for i in range(d1):
        for j in range(d2):
            psi[i, j] *= s


@njit(cache=True, fastmath=True)
def _mode_occupations(psi):
    # (<n_a>, <n_b>, norm^2) in one pass
    d1, d2 = psi.shape
    na = 0.0
    nb = 0.0
    nn = 0.0
    for i in range(d1):
        for j in range(d2):
            v = psi[i, j]
            p = v.real * v.real + v.imag * v.imag
            na += i * p
            nb += j * p
            nn += p
    return na / nn, nb / nn, nn


@njit(cache=True, fastmath=True)
def _sse_dispersive(psi, lam, sqrt_lam, dt, dw, renorm):
    # drift/diffusion of the QND unraveling; diagonal in the Fock basis
    d1, d2 = psi.shape
    mu = 0.0
    nn = 0.0
    for i in range(d1):
        row = 0.0
        for j in range(d2):
            v = psi[i, j]
            row += v.real * v.real + v.imag * v.imag
        mu += i * row
        nn += row
    mu /= nn
    out_n2 = 0.0
    for i in range(d1):
        dev = i - mu
        f = 1.0 - 0.5 * lam * dt * dev * dev + sqrt_lam * dev * dw
        for j in range(d2):
            psi[i, j] *= f
            v = psi[i, j]
            out_n2 += v.real * v.real + v.imag * v.imag
    if out_n2 < 1e-16:
        return STATUS_NORM_COLLAPSE
    if renorm:
        _scale(psi, 1.0 / np.sqrt(out_n2))
    return STATUS_OK


@njit(cache=True, fastmath=True)
def _sse_absorptive(psi, tphi, sq_a, lam, sqrt_lam, dt, dw, renorm):
    d1, d2 = psi.shape
    # tphi = a psi ; c = <a + a^dag> = 2 Re <psi|a psi> / <psi|psi>
    nn = 0.0
    cre = 0.0
    for i in range(d1):
        for j in range(d2):
            v = psi[i, j]
            nn += v.real * v.real + v.imag * v.imag
            if i < d1 - 1:
                w = sq_a[i + 1] * psi[i + 1, j]
                tphi[i, j] = w
                cre += v.real * w.real + v.imag * w.imag
            else:
                tphi[i, j] = 0.0 + 0.0j
    c = 2.0 * cre / nn
    out_n2 = 0.0
    for i in range(d1):
        for j in range(d2):
            v = psi[i, j]
            phi = tphi[i, j]
            drift = -0.5 * lam * (i * v - c * phi + 0.25 * c * c * v)
            v = v + dt * drift + sqrt_lam * dw * (phi - 0.5 * c * v)
            psi[i, j] = v
            out_n2 += v.real * v.real + v.imag * v.imag
    if out_n2 < 1e-16:
        return STATUS_NORM_COLLAPSE
    if renorm:
        _scale(psi, 1.0 / np.sqrt(out_n2))
    return STATUS_OK


@njit(cache=True, fastmath=True)
def _jump_step(psi, sq_a, sq_b, dt, kappa, gdn, gup, drift_fac, u_jump, u_chan):
    d1, d2 = psi.shape
    # <n_a>, <n_b>, and the truncated <b b^dag> (top phonon level gives 0:
    # nothing can be created above the cutoff)
    na = 0.0
    nb = 0.0
    bbd = 0.0
    nn = 0.0
    for i in range(d1):
        for j in range(d2):
            v = psi[i, j]
            p = v.real * v.real + v.imag * v.imag
            na += i * p
            nb += j * p
            if j < d2 - 1:
                bbd += (j + 1.0) * p
            nn += p
    na /= nn
    nb /= nn
    bbd /= nn
    p1 = dt * kappa * na
    p2 = dt * gdn * nb
    p3 = dt * gup * bbd
    ptot = p1 + p2 + p3
    if ptot > 0.1:
        return STATUS_JUMP_PROB, 0
    if u_jump < ptot:
        r = u_chan * ptot
        if r < p1:
            # photon loss: psi <- a psi
            for j in range(d2):
                for i in range(d1 - 1):
                    psi[i, j] = sq_a[i + 1] * psi[i + 1, j]
                psi[d1 - 1, j] = 0.0 + 0.0j
        elif r < p1 + p2:
            # phonon loss: psi <- b psi
            for i in range(d1):
                for j in range(d2 - 1):
                    psi[i, j] = sq_b[j + 1] * psi[i, j + 1]
                psi[i, d2 - 1] = 0.0 + 0.0j
        else:
            # phonon gain: psi <- b^dag psi
            for i in range(d1):
                for j in range(d2 - 1, 0, -1):
                    psi[i, j] = sq_b[j] * psi[i, j - 1]
                psi[i, 0] = 0.0 + 0.0j
        n2 = _norm2(psi)
        if n2 < 1e-24:
            return STATUS_NORM_COLLAPSE, 0
        _scale(psi, 1.0 / np.sqrt(n2))
        return STATUS_OK, 1
    # no jump: first-order non-Hermitian drift, always renormalized
    n2 = 0.0
    for i in range(d1):
        for j in range(d2):
            psi[i, j] *= drift_fac[i, j]
            v = psi[i, j]
            n2 += v.real * v.real + v.imag * v.imag
    if n2 < 1e-16:
        return STATUS_NORM_COLLAPSE, 0
    _scale(psi, 1.0 / np.sqrt(n2))
    return STATUS_OK, 0


@njit(cache=True, fastmath=True)
def _moments(psi, f1, f2, f3, f4, sq_a, sq_b, out):
    """Symmetrized second moments of (x_a, p_a, x_b, p_b).

    Re<phi_i|phi_j> with phi_i = r_i|psi> equals <{r_i, r_j}>/2 for
    Hermitian quadratures; the state need not be normalized (moments are
    divided by the norm).
    """
    d1, d2 = psi.shape
    inv_s2 = 1.0 / np.sqrt(2.0)
    for i in range(d1):
        for j in range(d2):
            lo = sq_a[i + 1] * psi[i + 1, j] if i < d1 - 1 else 0.0 + 0.0j
            hi = sq_a[i] * psi[i - 1, j] if i > 0 else 0.0 + 0.0j
            f1[i, j] = (lo + hi) * inv_s2
            f2[i, j] = 1j * (hi - lo) * inv_s2
    for i in range(d1):
        for j in range(d2):
            lo = sq_b[j + 1] * psi[i, j + 1] if j < d2 - 1 else 0.0 + 0.0j
            hi = sq_b[j] * psi[i, j - 1] if j > 0 else 0.0 + 0.0j
            f3[i, j] = (lo + hi) * inv_s2
            f4[i, j] = 1j * (hi - lo) * inv_s2
    nn = _norm2(psi)
    idx = 0
    for aa in range(4):
        fa = f1 if aa == 0 else (f2 if aa == 1 else (f3 if aa == 2 else f4))
        for bb in range(aa, 4):
            fb = f1 if bb == 0 else (f2 if bb == 1 else (f3 if bb == 2 else f4))
            acc = 0.0
            for i in range(d1):
                for j in range(d2):
                    va = fa[i, j]
                    vb = fb[i, j]
                    acc += va.real * vb.real + va.imag * vb.imag
            out[idx] = acc / nn
            idx += 1


@njit(cache=True, fastmath=True, parallel=True)
def run_stroke(
    psis,            # (B, da, db) complex128, updated in place
    pha,             # (nsteps, da) complex128
    phb,             # (db,) complex128
    vph,             # (da, db) complex128
    Wa, WaT, Wb, WbT,  # (d, d) float64
    sq_a, sq_b,      # (da+1,), (db+1,) float64, sq[n] = sqrt(n)
    coupling_on,     # int (0: G = 0, skip the x_a x_b transform)
    scheme,          # int
    lam, dt,
    jumps_on,        # int (0/1)
    kappa, gdn, gup,
    drift_fac,       # (da, db) float64
    dknots,          # (nsteps+1,) float64
    dws, jus, cus,   # (B, nsteps) float64
    renorm,          # int (0/1)
    rec_steps,       # (n_rec,) int64, sorted values in [0, nsteps]
    mom_out,         # (B, n_rec, N_MOMENTS) float64
    snap_steps,      # (n_snap,) int64
    snap_out,        # (B, n_snap, da, db) complex128
    work_out,        # (B,) float64
    jumps_out,       # (B,) int64
    status_out,      # (B,) int64
    err_step_out,    # (B,) int64
):
    B = psis.shape[0]
    nsteps = pha.shape[0]
    n_rec = rec_steps.shape[0]
    n_snap = snap_steps.shape[0]
    sqrt_lam = np.sqrt(lam)
    for t in prange(B):
        psi = psis[t]
        tmp1 = np.empty_like(psi)
        tmp2 = np.empty_like(psi)
        f3 = np.empty_like(psi)
        f4 = np.empty_like(psi)
        status = STATUS_OK
        ri = 0
        si = 0
        if ri < n_rec and rec_steps[ri] == 0:
            _moments(psi, tmp1, tmp2, f3, f4, sq_a, sq_b, mom_out[t, ri])
            ri += 1
        if si < n_snap and snap_steps[si] == 0:
            snap_out[t, si, :, :] = psi
            si += 1
        n_prev, _, _ = _mode_occupations(psi)
        work = 0.0
        njumps = 0
        for k in range(nsteps):
            _split_step(psi, tmp1, tmp2, pha[k], phb, vph, Wa, WaT, Wb, WbT, coupling_on)
            if scheme == SCHEME_DISPERSIVE:
                status = _sse_dispersive(psi, lam, sqrt_lam, dt, dws[t, k], renorm)
            elif scheme == SCHEME_ABSORPTIVE:
                status = _sse_absorptive(psi, tmp1, sq_a, lam, sqrt_lam, dt, dws[t, k], renorm)
            if status != STATUS_OK:
                err_step_out[t] = k
                break
            if jumps_on == 1:
                status, jumped = _jump_step(
                    psi, sq_a, sq_b, dt, kappa, gdn, gup, drift_fac,
                    jus[t, k], cus[t, k],
                )
                if status != STATUS_OK:
                    err_step_out[t] = k
                    break
                njumps += jumped
            n_new, _, _ = _mode_occupations(psi)
            work += -0.5 * (n_prev + n_new) * (dknots[k + 1] - dknots[k])
            n_prev = n_new
            while ri < n_rec and rec_steps[ri] == k + 1:
                _moments(psi, tmp1, tmp2, f3, f4, sq_a, sq_b, mom_out[t, ri])
                ri += 1
            while si < n_snap and snap_steps[si] == k + 1:
                snap_out[t, si, :, :] = psi
                si += 1
        work_out[t] += work
        jumps_out[t] += njumps
        status_out[t] = status
