"""Compiled inner loops: nonlocal sum, finite-volume fluxes, IMEX stepping.

Everything here works on plain arrays so that numba can compile it; the
public wrappers in ``solver`` assemble those arrays from the high-level
objects.  Fields are cell averages on a uniform grid.
"""

import math

import numpy as np
from numba import njit

# FMA contraction and reciprocal division only; NaN/inf semantics are kept so
# blow-ups stay detectable.
FAST = {"contract", "arcp"}

# integrate() status codes
DONE = 0
STEADY = 1
UNDERFLOW = 2
NONFINITE = 3
NEGATIVE = 4
MAX_STEPS = 5

SCHEME_CN = 0
SCHEME_ARS = 1

ARS_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
ARS_DELTA = 1.0 - 1.0 / (2.0 * ARS_GAMMA)


@njit(cache=True, fastmath=FAST)
def poly_eval(u, coeffs, out):
    for i in range(u.size):
        acc = 0.0
        for k in range(coeffs.size - 1, -1, -1):
            acc = acc * u[i] + coeffs[k]
        out[i] = acc


@njit(cache=True, fastmath=FAST)
def nonlocal_sum(hu, w, band_lo, band_hi, offset, periodic, uniform, ext, prefix, out):
    """Weighted antisymmetric sum of ``hu`` over the sensing window of every cell.

    ``ext`` (length M + 2m) receives a wrapped copy of ``hu``; ``prefix``
    (length M + 2m + 1) its running sums.  Rows that wrap are overwritten by
    the explicit boundary bands on bounded domains.
    """
    M = hu.size
    m = w.size
    for k in range(m):
        ext[k] = hu[M - m + k]
        ext[M + m + k] = hu[k]
    for i in range(M):
        ext[m + i] = hu[i]
    if uniform:
        # shifting by hu[0] limits cancellation in the running sums
        ref = hu[0]
        prefix[0] = 0.0
        for k in range(M + 2 * m):
            prefix[k + 1] = prefix[k] + (ext[k] - ref)
        c = w[0]
        last = w[m - 1]
        for i in range(M):
            inner = prefix[i + 2 * m] - prefix[i + m + 1] - prefix[i + m] + prefix[i + 1]
            out[i] = c * inner + last * (ext[i + 2 * m] - ext[i])
    else:
        for i in range(M):
            acc = 0.0
            for j in range(1, m + 1):
                acc += w[j - 1] * (ext[i + m + j] - ext[i + m - j])
            out[i] = acc
    if not periodic:
        for r in range(m):
            acc = 0.0
            for c in range(m - r, 2 * m + 1):
                acc += band_lo[r, c] * hu[r + c - m]
            out[r] = acc
            i = M - m + r
            acc = 0.0
            for c in range(0, M - i + m):
                acc += band_hi[r, c] * hu[i + c - m]
            out[i] = acc
        for i in range(M):
            out[i] += offset[i]


@njit(cache=True, fastmath=FAST)
def limited_slope(dm, dp):
    """Upwind-biased third-order slope, limited by the van Leer bound."""
    if dm * dp <= 0.0:
        return 0.0
    third = (dm + 2.0 * dp) / 3.0
    harmonic = 2.0 * dm * dp / (dm + dp)
    return third if abs(third) < abs(harmonic) else harmonic


@njit(cache=True, fastmath=FAST)
def advection(u, K, alpha, dx, periodic, pad, out):
    """``-(F_{i+1/2} - F_{i-1/2}) / dx`` with ``F = alpha * Kbar * u_face``; returns max |a|.

    ``pad`` (length >= M + 4) holds ``u`` with two ghost cells per side:
    wrapped when periodic, mirrored otherwise.  Wall fluxes are zero.
    """
    M = u.size
    for i in range(M):
        pad[i + 2] = u[i]
    if periodic:
        pad[0] = u[M - 2]
        pad[1] = u[M - 1]
        pad[M + 2] = u[0]
        pad[M + 3] = u[1]
    else:
        pad[0] = u[1]
        pad[1] = u[0]
        pad[M + 2] = u[M - 1]
        pad[M + 3] = u[M - 2]
    half_alpha = 0.5 * alpha
    inv_dx = 1.0 / dx
    amax = 0.0
    nf = M if periodic else M - 1
    first_flux = 0.0
    prev = 0.0
    for f in range(nf):
        kn = K[f + 1] if f + 1 < M else K[0]
        a = half_alpha * (K[f] + kn)
        p = f + 2
        if a >= 0.0:
            face = pad[p] + 0.5 * limited_slope(pad[p] - pad[p - 1], pad[p + 1] - pad[p])
        else:
            face = pad[p + 1] + 0.5 * limited_slope(pad[p + 1] - pad[p + 2], pad[p] - pad[p + 1])
        flux = a * face
        amax = max(amax, abs(a))
        if f == 0:
            first_flux = flux
        else:
            out[f] = (prev - flux) * inv_dx
        prev = flux
    if periodic:
        out[0] = (prev - first_flux) * inv_dx
    else:
        out[0] = -first_flux * inv_dx
        out[M - 1] = prev * inv_dx
    return amax


@njit(cache=True, fastmath=FAST)
def laplacian(u, D, dx, periodic, out):
    M = u.size
    c = D / (dx * dx)
    for i in range(M):
        if i > 0:
            left = u[i - 1]
        else:
            left = u[M - 1] if periodic else u[0]
        if i < M - 1:
            right = u[i + 1]
        else:
            right = u[0] if periodic else u[M - 1]
        out[i] = c * (left - 2.0 * u[i] + right)


@njit(cache=True, fastmath=FAST)
def factorize(theta, D, dx, periodic, fac):
    """Factorise ``I - theta * Lap`` into ``fac`` (rows: 1/pivot, sweep coefficient, cyclic correction).

    ``fac[3, 0]`` stores the correction denominator and ``fac[3, 1]`` the
    off-diagonal value.
    """
    M = fac.shape[1]
    c = theta * D / (dx * dx)
    inv = fac[0]
    sc = fac[1]
    z = fac[2]
    diag0 = 1.0 + 2.0 * c
    gamma = -diag0
    for i in range(M):
        d = diag0
        if not periodic and (i == 0 or i == M - 1):
            d = 1.0 + c
        if periodic and i == 0:
            d = diag0 - gamma
        if periodic and i == M - 1:
            d = diag0 - c * c / gamma
        if i > 0:
            d += c * sc[i - 1]
        inv[i] = 1.0 / d
        sc[i] = -c * inv[i]
    fac[3, 1] = -c
    if periodic:
        for i in range(M):
            z[i] = 0.0
        z[0] = gamma
        z[M - 1] = -c
        _sweep(fac, z)
        fac[3, 0] = 1.0 + z[0] - c * z[M - 1] / gamma
        fac[3, 2] = gamma


@njit(cache=True, fastmath=FAST)
def _sweep(fac, x):
    """In-place tridiagonal solve with a stored factorisation."""
    M = x.size
    inv = fac[0]
    sc = fac[1]
    off = fac[3, 1]
    x[0] *= inv[0]
    for i in range(1, M):
        x[i] = (x[i] - off * x[i - 1]) * inv[i]
    for i in range(M - 2, -1, -1):
        x[i] -= sc[i] * x[i + 1]


@njit(cache=True, fastmath=FAST)
def implicit_solve(fac, periodic, rhs, out):
    """Solve ``(I - theta * Lap) x = rhs`` with a factorisation from ``factorize``."""
    M = rhs.size
    for i in range(M):
        out[i] = rhs[i]
    _sweep(fac, out)
    if periodic:
        z = fac[2]
        off = fac[3, 1]
        gamma = fac[3, 2]
        fact = (out[0] + off * out[M - 1] / gamma) / fac[3, 0]
        for i in range(M):
            out[i] -= fact * z[i]


@njit(cache=True, fastmath=FAST)
def adv_op(u, coeffs, w, band_lo, band_hi, offset, periodic, uniform, alpha, dx, ws, prefix, out):
    """Advective tendency of ``u``; returns max |a| over the faces.

    ``ws`` rows 0-3 hold h(u), K, the ghost-padded ``u`` and the wrapped copy
    of h(u); ``prefix`` needs length M + 2m + 1 and ``ws`` at least M + 2m + 4
    columns.
    """
    M = u.size
    K = ws[1, :M]
    if coeffs.size == 2 and coeffs[0] == 0.0 and coeffs[1] == 1.0:
        hu = u
    else:
        hu = ws[0, :M]
        poly_eval(u, coeffs, hu)
    nonlocal_sum(hu, w, band_lo, band_hi, offset, periodic, uniform, ws[3], prefix, K)
    return advection(u, K, alpha, dx, periodic, ws[2], out)


@njit(cache=True, fastmath=FAST)
def rhs_eval(u, coeffs, w, band_lo, band_hi, offset, periodic, uniform, D, alpha, dx, ws, prefix, out):
    lap = ws[4, : u.size]
    laplacian(u, D, dx, periodic, lap)
    amax = adv_op(u, coeffs, w, band_lo, band_hi, offset, periodic, uniform, alpha, dx, ws, prefix, out)
    for i in range(u.size):
        out[i] += lap[i]
    return amax


@njit(cache=True, fastmath=FAST)
def imex_step(u, A0, L0, dt, scheme, fac, coeffs, w, band_lo, band_hi, offset, periodic, uniform,
              D, alpha, dx, ws, prefix, out, low):
    """One IMEX step from ``u`` given its advective (A0) and diffusive (L0) tendencies.

    ``fac`` must factorise ``I - c dt Lap`` with ``c = 1/2`` (CN) or ``gamma``
    (ARS).  ``low`` receives an embedded first-order solution for error control.
    """
    M = u.size
    b = ws[5, :M]
    A1 = ws[6, :M]
    L1 = ws[7, :M]
    if scheme == SCHEME_CN:
        for i in range(M):
            b[i] = u[i] + 0.5 * dt * L0[i] + dt * A0[i]
        implicit_solve(fac, periodic, b, low)
        adv_op(low, coeffs, w, band_lo, band_hi, offset, periodic, uniform, alpha, dx, ws, prefix, A1)
        for i in range(M):
            b[i] = u[i] + 0.5 * dt * L0[i] + 0.5 * dt * (A0[i] + A1[i])
        implicit_solve(fac, periodic, b, out)
    else:
        g = ARS_GAMMA
        d = ARS_DELTA
        stage = ws[8, :M]
        for i in range(M):
            b[i] = u[i] + g * dt * A0[i]
        implicit_solve(fac, periodic, b, stage)
        adv_op(stage, coeffs, w, band_lo, band_hi, offset, periodic, uniform, alpha, dx, ws, prefix, A1)
        laplacian(stage, D, dx, periodic, L1)
        for i in range(M):
            b[i] = u[i] + dt * (d * A0[i] + (1.0 - d) * A1[i]) + dt * (1.0 - g) * L1[i]
            low[i] = u[i] + dt * (A0[i] + L1[i])
        implicit_solve(fac, periodic, b, out)


@njit(cache=True, fastmath=FAST)
def steady_residual(u, f, periodic):
    """max |f|, or on a periodic domain max |f + c u_x| with the least-squares drift ``c``.

    Grid pinning makes an otherwise stationary periodic pattern creep at a
    speed far below any physical time scale; that translation component is
    not counted as unsteadiness.
    """
    M = u.size
    if not periodic:
        r = 0.0
        for i in range(M):
            r = max(r, abs(f[i]))
        return r
    proj = 0.0
    norm = 0.0
    for i in range(M):
        du = u[i + 1 if i + 1 < M else 0] - u[i - 1]
        proj += f[i] * du
        norm += du * du
    c = -proj / norm if norm > 0.0 else 0.0
    r = 0.0
    for i in range(M):
        du = u[i + 1 if i + 1 < M else 0] - u[i - 1]
        r = max(r, abs(f[i] + c * du))
    return r


@njit(cache=True)
def _ladder(dt):
    """Round ``dt`` down to ``2**(k/32)`` so factorisations can be reused."""
    k = math.floor(8.0 * math.log2(dt))
    return 2.0 ** (k / 8.0)


@njit(cache=True)
def integrate(u0, t0, t_end, out_times, snapshots, scheme, coeffs, w, band_lo, band_hi, offset,
              periodic, uniform, D, alpha, dx, rtol, atol, cfl, dt0, ss_tol, max_steps, dt_max):
    """Adaptive IMEX integration with an embedded first-order error estimate.

    Besides the advective CFL limit, steps never exceed ``dt_max``; without
    such a cap the controller lets very large steps hover near uniform states
    instead of letting them decay.

    Fields at ``out_times`` are written to ``snapshots`` by cubic Hermite
    interpolation between accepted steps.  With ``ss_tol > 0`` the run stops
    as soon as ``max|rhs| / max|u| < ss_tol``.

    Returns ``(status, t, u, steps, rejected, n_written)``.
    """
    M = u0.size
    m = w.size
    ws = np.zeros((9, M + 2 * m + 4))
    prefix = np.zeros(M + 2 * m + 1)
    fac = np.zeros((4, M))
    theta_coef = 0.5 if scheme == SCHEME_CN else ARS_GAMMA
    fac_dt = -1.0
    u = u0.copy()
    A0 = np.empty(M)
    L0 = np.empty(M)
    new = np.empty(M)
    low = np.empty(M)
    An = np.empty(M)
    Ln = np.empty(M)
    f0 = np.empty(M)
    amax = adv_op(u, coeffs, w, band_lo, band_hi, offset, periodic, uniform, alpha, dx, ws, prefix, A0)
    laplacian(u, D, dx, periodic, L0)
    t = t0
    n_out = out_times.size
    k_out = 0
    while k_out < n_out and out_times[k_out] <= t0:
        snapshots[k_out, :] = u
        k_out += 1
    dt = dt0
    steps = 0
    rejected = 0
    dt_min = 1e-14 * max(1.0, abs(t_end))
    status = DONE
    while t < t_end:
        umax = 0.0
        for i in range(M):
            f0[i] = A0[i] + L0[i]
            umax = max(umax, abs(u[i]))
        if ss_tol > 0.0 and steady_residual(u, f0, periodic) < ss_tol * umax:
            status = STEADY
            break
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if amax > 0.0:
            dt = min(dt, cfl * dx / amax)
        dt = min(dt, dt_max)
        last = False
        if t + dt >= t_end:
            dt = t_end - t
            last = True
        else:
            dt = _ladder(dt)
        if dt < dt_min:
            status = UNDERFLOW
            break
        if dt != fac_dt:
            factorize(theta_coef * dt, D, dx, periodic, fac)
            fac_dt = dt
        imex_step(u, A0, L0, dt, scheme, fac, coeffs, w, band_lo, band_hi, offset, periodic,
                  uniform, D, alpha, dx, ws, prefix, new, low)
        err = 0.0
        finite = True
        for i in range(M):
            if not np.isfinite(new[i]):
                finite = False
                break
            e = abs(new[i] - low[i]) / (atol + rtol * max(abs(u[i]), abs(new[i])))
            if e > err:
                err = e
        if not finite:
            rejected += 1
            dt *= 0.25
            if dt < dt_min:
                status = NONFINITE
                break
            continue
        if err > 1.0:
            dt *= max(0.2, 0.9 / math.sqrt(err))
            rejected += 1
            continue
        t_new = t_end if last else t + dt
        neg = False
        for i in range(M):
            if new[i] < -10.0 * atol:
                neg = True
        amax = adv_op(new, coeffs, w, band_lo, band_hi, offset, periodic, uniform, alpha, dx, ws, prefix, An)
        laplacian(new, D, dx, periodic, Ln)
        while k_out < n_out and out_times[k_out] <= t_new:
            h = t_new - t
            s = (out_times[k_out] - t) / h
            h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
            h10 = s * (1.0 - s) ** 2
            h01 = s * s * (3.0 - 2.0 * s)
            h11 = s * s * (s - 1.0)
            for i in range(M):
                snapshots[k_out, i] = (h00 * u[i] + h10 * h * f0[i] + h01 * new[i]
                                       + h11 * h * (An[i] + Ln[i]))
            k_out += 1
        u, new = new, u
        A0, An = An, A0
        L0, Ln = Ln, L0
        t = t_new
        steps += 1
        if neg:
            status = NEGATIVE
            break
        dt *= 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 / math.sqrt(err)))
    return status, t, u, steps, rejected, k_out
