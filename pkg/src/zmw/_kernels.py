"""Compiled kernels: linear sieves, multiplicative table fill, banded pair sums.

Everything here is deliberately loop-level code compiled with numba. The
accumulation strategy is fixed-size blocks combined in index order, so results
are bit-identical for any thread count; Kahan compensation is used inside
blocks (fastmath stays off so the compensation survives).
"""

import os

os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import numpy as np
import numba
from numba import njit, prange

BLOCK = 2048


def set_threads(n):
    """Set the worker thread count, clamped to the available pool.

    Returns the effective count. numba cannot grow its pool after import, so
    a request above the launch-time limit is clamped rather than fatal.
    """
    limit = numba.config.NUMBA_NUM_THREADS
    eff = max(1, min(int(n), limit))
    numba.set_num_threads(eff)
    return eff


@njit(cache=True)
def spf_sieve(n):
    """Smallest-prime-factor table for 0..n via a linear sieve."""
    spf = np.zeros(n + 1, np.int32)
    bound = int(1.3 * n / max(np.log(n), 2.0)) + 16
    primes = np.zeros(bound, np.int64)
    cnt = 0
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[cnt] = i
            cnt += 1
        for j in range(cnt):
            p = primes[j]
            if p > spf[i] or i * p > n:
                break
            spf[i * p] = np.int32(p)
    return spf


@njit(cache=True)
def mobius_phi(spf):
    """Mobius and totient tables from a smallest-prime-factor table."""
    n = spf.shape[0] - 1
    mob = np.zeros(n + 1, np.int8)
    phi = np.zeros(n + 1, np.int64)
    if n >= 1:
        mob[1] = 1
        phi[1] = 1
    for i in range(2, n + 1):
        p = spf[i]
        m = i // p
        if m % p == 0:
            mob[i] = 0
            phi[i] = phi[m] * p
        else:
            mob[i] = -mob[m]
            phi[i] = phi[m] * (p - 1)
    return mob, phi


@njit(cache=True)
def prime_power_tau(spf, shifts):
    """tau values at every prime power q = p^e <= n, stored at index q.

    tau_A(p^e) is the degree-e complete homogeneous symmetric polynomial in
    p^(-a) over a in A, built by the one-variable-at-a-time prefix recursion.
    """
    n = spf.shape[0] - 1
    k = shifts.shape[0]
    ppval = np.zeros(n + 1, np.complex128)
    if n >= 1:
        ppval[1] = 1.0 + 0j
    h = np.zeros(64, np.complex128)
    for p in range(2, n + 1):
        if spf[p] != p:
            continue
        emax = 0
        q = 1
        while q <= n // p:
            q *= p
            emax += 1
        h[0] = 1.0 + 0j
        for r in range(1, emax + 1):
            h[r] = 0.0 + 0j
        lp = np.log(np.float64(p))
        for idx in range(k):
            x = np.exp(-shifts[idx] * lp)
            for r in range(1, emax + 1):
                h[r] = h[r] + x * h[r - 1]
        q = 1
        for e in range(1, emax + 1):
            q *= p
            ppval[q] = h[e]
    return ppval


@njit(cache=True)
def fill_tau(spf, ppval):
    """Multiplicative fill: values[n] = prod over prime powers dividing n."""
    n = spf.shape[0] - 1
    val = np.zeros(n + 1, np.complex128)
    pp = np.zeros(n + 1, np.int64)
    if n >= 1:
        val[1] = 1.0 + 0j
        pp[1] = 1
    for i in range(2, n + 1):
        p = spf[i]
        m = i // p
        if m % p == 0:
            q = pp[m] * p
        else:
            q = np.int64(p)
        pp[i] = q
        val[i] = val[i // q] * ppval[q]
    return val


@njit(cache=True)
def kahan_dot(a, b):
    """sum a[i]*b[i] with Kahan compensation, complex inputs."""
    sre = 0.0
    cre = 0.0
    sim = 0.0
    cim = 0.0
    for i in range(a.shape[0]):
        z = a[i] * b[i]
        y = z.real - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = z.imag - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
    return complex(sre, sim)


@njit(cache=True)
def kahan_dot_weighted(a, b, w):
    """sum a[i]*b[i]*w[i], complex a,b and real w, Kahan compensated."""
    sre = 0.0
    cre = 0.0
    sim = 0.0
    cim = 0.0
    for i in range(a.shape[0]):
        z = a[i] * b[i]
        zr = z.real * w[i]
        zi = z.imag * w[i]
        y = zr - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = zi - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
    return complex(sre, sim)


@njit(cache=True)
def kahan_sum(a):
    """Ordered Kahan sum of a 1-d float64 array."""
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        y = a[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


# Off-diagonal banded sums. The grid arrays carry psihat on xi = (j-1)*dxi for
# j = 0..ngrid, i.e. one mirrored point (xi = -dxi) is prepended so the cubic
# stencil i-1..i+2 is valid for every in-band xi >= 0 without branching.


@njit(cache=True, parallel=True)
def banded_sum_real(va, vb, x_max, scale, expneg, gre, gim, inv_dxi, logs, invs, out_re, out_im):
    nblocks = out_re.shape[0]
    ng = gre.shape[0]
    for blk in prange(nblocks):
        m0 = 2 + blk * BLOCK
        m1 = min(x_max, m0 + BLOCK - 1)
        sre = 0.0
        cre = 0.0
        sim = 0.0
        cim = 0.0
        for m in range(m0, m1 + 1):
            am = va[m]
            bm = vb[m]
            lm = logs[m]
            wm = invs[m]
            nlo = int(np.ceil(m * expneg))
            if nlo < 1:
                nlo = 1
            for n in range(nlo, m):
                xi = scale * (lm - logs[n])
                x = xi * inv_dxi + 1.0
                i = int(x)
                if i > ng - 3:
                    continue
                u = x - i
                w0 = -u * (u - 1.0) * (u - 2.0) / 6.0
                w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
                w2 = -(u + 1.0) * u * (u - 2.0) / 2.0
                w3 = (u + 1.0) * u * (u - 1.0) / 6.0
                pr = w0 * gre[i - 1] + w1 * gre[i] + w2 * gre[i + 1] + w3 * gre[i + 2]
                pi = w0 * gim[i - 1] + w1 * gim[i] + w2 * gim[i + 1] + w3 * gim[i + 2]
                s1 = am * vb[n]
                s2 = va[n] * bm
                ww = wm * invs[n]
                zr = (s1 + s2) * ww * pr
                zi = (s1 - s2) * ww * pi
                y = zr - cre
                t = sre + y
                cre = (t - sre) - y
                sre = t
                y = zi - cim
                t = sim + y
                cim = (t - sim) - y
                sim = t
        out_re[blk] = sre
        out_im[blk] = sim


@njit(cache=True, parallel=True)
def banded_sum_complex(va, vb, x_max, scale, expneg, gre, gim, inv_dxi, logs, invs, out_re, out_im):
    nblocks = out_re.shape[0]
    ng = gre.shape[0]
    for blk in prange(nblocks):
        m0 = 2 + blk * BLOCK
        m1 = min(x_max, m0 + BLOCK - 1)
        sre = 0.0
        cre = 0.0
        sim = 0.0
        cim = 0.0
        for m in range(m0, m1 + 1):
            am = va[m]
            bm = vb[m]
            lm = logs[m]
            wm = invs[m]
            nlo = int(np.ceil(m * expneg))
            if nlo < 1:
                nlo = 1
            for n in range(nlo, m):
                xi = scale * (lm - logs[n])
                x = xi * inv_dxi + 1.0
                i = int(x)
                if i > ng - 3:
                    continue
                u = x - i
                w0 = -u * (u - 1.0) * (u - 2.0) / 6.0
                w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
                w2 = -(u + 1.0) * u * (u - 2.0) / 2.0
                w3 = (u + 1.0) * u * (u - 1.0) / 6.0
                pr = w0 * gre[i - 1] + w1 * gre[i] + w2 * gre[i + 1] + w3 * gre[i + 2]
                pi = w0 * gim[i - 1] + w1 * gim[i] + w2 * gim[i + 1] + w3 * gim[i + 2]
                ww = wm * invs[n]
                c1 = am * vb[n]
                c2 = va[n] * bm
                # c1*psihat(xi) + c2*conj(psihat(xi)), psihat = pr + i*pi
                zr = (c1.real * pr - c1.imag * pi + c2.real * pr + c2.imag * pi) * ww
                zi = (c1.real * pi + c1.imag * pr - c2.real * pi + c2.imag * pr) * ww
                y = zr - cre
                t = sre + y
                cre = (t - sre) - y
                sre = t
                y = zi - cim
                t = sim + y
                cim = (t - sim) - y
                sim = t
        out_re[blk] = sre
        out_im[blk] = sim


@njit(cache=True)
def banded_corr(va, vb, u, h):
    """sum over n <= u of va[n]*vb[n+h], Kahan compensated."""
    sre = 0.0
    cre = 0.0
    sim = 0.0
    cim = 0.0
    for n in range(1, u + 1):
        z = va[n] * vb[n + h]
        y = z.real - cre
        t = sre + y
        cre = (t - sre) - y
        sre = t
        y = z.imag - cim
        t = sim + y
        cim = (t - sim) - y
        sim = t
    return complex(sre, sim)
