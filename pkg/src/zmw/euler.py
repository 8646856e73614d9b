"""Euler products attached to pairs of shift sets.

The two global objects are

    Z(A,B)  = prod over a in A, b in B of zeta(1 + a + b),

    A(A,B)  = prod over p of A_p(A,B),
    A_p     = [prod over a,b of (1 - p^(-1-a-b))] * sum_j tau_A(p^j) tau_B(p^j) p^(-j),

where the j-sum is what the integral over theta of the local zeta data
collapses to (expanding each local factor into a geometric series in
e(theta) p^(-1/2-shift) and integrating keeps exactly the diagonal terms).
A_p(A,B) = 1 + O(p^-2) uniformly for shifts in the working disk, because the
p^-1 terms of the prefactor's expansion cancel against tau_A(p) tau_B(p)/p.

The one-swap arithmetic factor is carried in a second, deliberately
independent form: local factors built from the half-integral sums

    G_A(s, q) = sum over d | q of mu(d)/phi(d) d^s sum over e | d of
                mu(e) e^(-s) g_A(s, q e / d),
    g_A(s, q) = prod over p | q of
                [prod over a (1 - p^(-s-a))] * sum_j tau_A(p^(j+q_p)) p^(-js),

combined over d >= 0, q in {0,1} with weight mu(p^q) and the exponent
p^(-d - d s - q(2 - ah - bh)). Numerically verifying that these collapse to
plain local A-factors of swapped shift sets is the point of the identity
suite; the two code paths share nothing beyond tau itself.

All series are truncated adaptively with geometric tail estimates targeting
1e-15 relative; truncated prime products report a cutoff estimate
c2 * sum_{p > P} p^-2 with c2 fitted from the last local factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .shifts import ShiftSet, as_shift_set, tau_prime_powers, tau_powers_grid
from .special import ArithmeticSieve, zeta

TAIL_TARGET = 1e-15
POLE_EPS = 1e-6
_SMALL_PRIME_CAP = 61

# prime zeta values P(2), P(3): sum over all primes of p^-2, p^-3
_PRIME_ZETA_2 = 0.4522474200410654985
_PRIME_ZETA_3 = 0.1747626392994435364


def _tail_moments(primes: np.ndarray, p_cutoff: int) -> tuple[float, float]:
    """(sum_{p>P} p^-2, sum_{p>P} p^-3) from the prime zeta constants."""
    parr = primes.astype(np.float64)
    s2 = _PRIME_ZETA_2 - float(np.sum(parr ** -2.0))
    s3 = _PRIME_ZETA_3 - float(np.sum(parr ** -3.0))
    return max(s2, 0.0), max(s3, 0.0)


def _fit_tail(primes: np.ndarray, fvals: np.ndarray, p_cutoff: int):
    """Second-order tail compensation for a truncated Euler product.

    Local factors approach 1 like c2 p^-2 + c3 p^-3; fitting (f_p - 1) p^2
    against 1/p over the window p in (P/2, P] and continuing the model past
    the cutoff gives a multiplicative correction exp(c2 S2 + c3 S3). The
    returned estimate scales the fit's spread and residual by S2; it is a
    reported heuristic for the remaining error, not a bound.

    fvals may be (n_primes,) or (n_primes, n_s); the fit is per column and
    the correction has the column shape.
    """
    win = primes.astype(np.float64) > p_cutoff / 2.0
    if int(np.sum(win)) < 5:
        win = np.zeros(primes.shape[0], dtype=bool)
        win[-min(5, primes.shape[0]):] = True
    pw = primes[win].astype(np.float64)
    fw = np.atleast_2d(fvals.T).T[win]
    r = (fw - 1.0) * pw[:, None] ** 2
    X = np.stack([np.ones_like(pw), 1.0 / pw], axis=1)
    coef, *_ = np.linalg.lstsq(X, r, rcond=None)
    resid = r - X @ coef
    s2, s3 = _tail_moments(primes, p_cutoff)
    correction = np.exp(coef[0] * s2 + coef[1] * s3)
    span = np.max(np.abs(r - coef[0][None, :]), axis=0)
    maxres = np.max(np.abs(resid), axis=0)
    est_log = (span + 4.0 * maxres) * s2
    if fvals.ndim == 1:
        return correction[0], float(est_log[0])
    return correction, float(np.max(est_log))


@lru_cache(maxsize=32)
def _primes_upto_cached(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    primes = np.nonzero(mask)[0].astype(np.int64)
    primes.setflags(write=False)
    return primes


def primes_upto(limit: int) -> np.ndarray:
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    return _primes_upto_cached(int(limit))


@dataclass(frozen=True)
class LocalFactor:
    """One Euler factor: value, truncation depth, absolute tail bound."""

    p: int
    truncation_depth: int
    value: complex
    tail_bound: float

    def __post_init__(self):
        if self.truncation_depth < 8:
            raise ValueError("local factors must keep at least 8 series terms")


def Z_product(A, B, eps: float = POLE_EPS) -> complex:
    """prod zeta(1 + a + b); rejects pairs with |a + b| < eps (pole guard)."""
    A = as_shift_set(A)
    B = as_shift_set(B)
    sums = np.array([a + b for a in A for b in B], dtype=np.complex128)
    if sums.size == 0:
        return 1.0 + 0j
    if np.min(np.abs(sums)) < eps:
        raise ValueError(f"Z product has a shift pair within {eps} of the zeta pole")
    return complex(np.prod(zeta(1.0 + sums)))


def _growth_exponents(A: ShiftSet, B: ShiftSet) -> tuple[float, float]:
    a = A.max_neg_real()
    b = B.max_neg_real()
    if a + b >= 0.95:
        raise ValueError(
            f"local factor series diverges: growth exponent {a + b:.3f} >= 0.95"
        )
    return a, b


def local_A_factor(A, B, p: int, j_start: int = 16) -> LocalFactor:
    """A_p(A,B) with the j-sum truncated so the tail estimate is < 1e-15.

    j_start is the initial truncation depth (kept >= 8); the depth doubles
    until the geometric tail estimate clears the target.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    a, b = _growth_exponents(A, B)
    kappa = max(len(A) + len(B) - 2, 0)
    rho0 = float(p) ** (a + b - 1.0)
    j = max(8, int(j_start))
    while True:
        ta = tau_prime_powers(A, p, j)
        tb = tau_prime_powers(B, p, j)
        terms = ta * tb * float(p) ** (-np.arange(j + 1, dtype=np.float64))
        s = complex(np.sum(terms))
        rho = rho0 * ((j + 2.0) / (j + 1.0)) ** kappa
        tail = abs(terms[-1]) * rho / (1.0 - rho) if rho < 1.0 else np.inf
        if tail <= TAIL_TARGET * max(abs(s), 1e-30) or abs(terms[-1]) == 0.0:
            break
        if j >= 8192:
            raise ValueError(f"local factor at p={p} did not converge by j={j}")
        j *= 2
    pref = 1.0 + 0j
    for alpha in A:
        for beta in B:
            pref *= 1.0 - float(p) ** (-(1.0 + alpha + beta))
    return LocalFactor(p=p, truncation_depth=j, value=pref * s, tail_bound=abs(pref) * tail)


def _batch_depth(p0: float, margin: float, slack: int = 6) -> int:
    # geometric ratio p^-margin; depth for 1e-17 with polynomial slack
    return max(8, int(np.ceil(39.2 / (margin * np.log(p0)))) + slack)


def global_A(A, B, p_cutoff: int) -> tuple[complex, float]:
    """Truncated product of A_p over p <= p_cutoff.

    Returns (value, tail_estimate). The estimate combines the per-factor
    series tails with the prime-cutoff term c2 * sum_{p>P} p^-2, c2 fitted
    from the trailing factors; it is a reported heuristic, not a bound.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    a, b = _growth_exponents(A, B)
    if p_cutoff < 3:
        raise ValueError("p_cutoff must be >= 3")
    primes = primes_upto(p_cutoff)
    fvals = np.empty(primes.shape[0], dtype=np.complex128)
    rel_tail = 0.0
    small = primes[primes <= _SMALL_PRIME_CAP]
    for i, p in enumerate(small):
        lf = local_A_factor(A, B, int(p))
        fvals[i] = lf.value
        rel_tail += lf.tail_bound / max(abs(lf.value), 1e-30)
    big = primes[primes > _SMALL_PRIME_CAP]
    if big.size:
        parr = big.astype(np.float64)
        depth = _batch_depth(float(parr[0]), 1.0 - a - b)
        ta = tau_powers_grid(A, parr, depth)
        tb = tau_powers_grid(B, parr, depth)
        pw = parr ** (-np.arange(depth + 1, dtype=np.float64))[:, None]
        sums = np.sum(ta * tb * pw, axis=0)
        last = np.abs(ta[depth] * tb[depth]) * parr ** (-float(depth))
        rho = parr ** (a + b - 1.0) * ((depth + 2.0) / (depth + 1.0)) ** max(len(A) + len(B) - 2, 0)
        rel_tail += float(np.sum(last * rho / (1.0 - rho) / np.maximum(np.abs(sums), 1e-30)))
        lp = np.log(parr)
        pref = np.ones_like(sums)
        for alpha in A:
            for beta in B:
                pref *= 1.0 - np.exp(-(1.0 + alpha + beta) * lp)
        fvals[small.shape[0]:] = pref * sums
    value = complex(np.prod(fvals))
    correction, est_log = _fit_tail(primes, fvals, p_cutoff)
    value *= correction
    return value, (rel_tail + est_log) * abs(value)


def g_local(A, s, p: int, r: int, j_start: int = 16) -> complex:
    """g_A(s, p^r): [prod_a (1 - p^(-s-a))] * sum_j tau_A(p^(j+r)) p^(-js)."""
    A = as_shift_set(A)
    s = complex(s)
    if r < 0:
        raise ValueError("prime-power exponent must be >= 0")
    a = A.max_neg_real()
    margin = s.real - a
    if margin < 0.05:
        raise ValueError(f"g series needs Re s - growth >= 0.05, got {margin:.3f}")
    kappa = max(len(A) - 1, 0)
    rho0 = float(p) ** (-margin)
    j = max(8, int(j_start))
    while True:
        ta = tau_prime_powers(A, p, r + j)
        x = np.exp(-s * np.log(float(p)))
        terms = ta[r : r + j + 1] * x ** np.arange(j + 1)
        total = complex(np.sum(terms))
        rho = rho0 * ((r + j + 2.0) / (r + j + 1.0)) ** kappa
        tail = abs(terms[-1]) * rho / (1.0 - rho)
        if tail <= TAIL_TARGET * max(abs(total), 1e-30) or abs(terms[-1]) == 0.0:
            break
        if j >= 16384:
            raise ValueError(f"g series at p={p} did not converge by j={j}")
        j *= 2
    pref = 1.0 + 0j
    for alpha in A:
        pref *= 1.0 - float(p) ** (-(s + alpha))
    return complex(pref * total)


def G_of(A, s, q: int, sieve: ArithmeticSieve) -> complex:
    """G_A(s, q): the double divisor sum over d | q, e | d (literal form).

    Only squarefree d and e contribute (Mobius weights), so the loops run
    over subsets of the prime support of q.
    """
    A = as_shift_set(A)
    s = complex(s)
    q = int(q)
    if q < 1:
        raise ValueError("modulus must be >= 1")
    if q == 1:
        return 1.0 + 0j
    fac = sieve.factorize(q)
    ps = [p for p, _ in fac]
    es = [e for _, e in fac]
    w = len(ps)
    gcache: dict[tuple[int, int], complex] = {}

    def gval(p: int, r: int) -> complex:
        key = (p, r)
        if key not in gcache:
            gcache[key] = g_local(A, s, p, r)
        return gcache[key]

    total = 0.0 + 0j
    for dmask in range(1 << w):
        mu_d = 1.0
        phi_d = 1.0
        ln_d = 0.0
        for i in range(w):
            if dmask >> i & 1:
                mu_d = -mu_d
                phi_d *= ps[i] - 1
                ln_d += np.log(ps[i])
        inner = 0.0 + 0j
        emask = dmask
        while True:
            # iterate submasks of dmask (e | d)
            mu_e = 1.0
            ln_e = 0.0
            gprod = 1.0 + 0j
            for i in range(w):
                if emask >> i & 1:
                    mu_e = -mu_e
                    ln_e += np.log(ps[i])
                r = es[i] - (dmask >> i & 1) + (emask >> i & 1)
                gprod *= gval(ps[i], r)
            inner += mu_e * np.exp(-s * ln_e) * gprod
            if emask == 0:
                break
            emask = (emask - 1) & dmask
        total += mu_d / phi_d * np.exp(s * ln_d) * inner
    return complex(total)


def _G_prime_power_row(A, s, p: int, m_top: int) -> np.ndarray:
    """G_A(s, p^m) for m = 0..m_top.

    This is the literal divisor sum specialized to a prime-power modulus:
    only d in {1, p} survive the Mobius weight, which collapses to
    G(s, p^m) = [p g(s, p^m) - p^s g(s, p^(m-1))]/(p - 1) for m >= 1,
    and G(s, 1) = 1.
    """
    g = np.array([g_local(A, s, p, r) for r in range(m_top + 1)], dtype=np.complex128)
    out = np.empty(m_top + 1, dtype=np.complex128)
    out[0] = 1.0
    ps = np.exp(complex(s) * np.log(float(p)))
    for m in range(1, m_top + 1):
        out[m] = (p * g[m] - ps * g[m - 1]) / (p - 1.0)
    return out


def _hat_guards(A: ShiftSet, B: ShiftSet, alpha_hat: complex, beta_hat: complex,
                s_min_real: float) -> tuple[ShiftSet, ShiftSet, float]:
    Ap = A.remove(alpha_hat)
    Bp = B.remove(beta_hat)
    ga = Ap.max_neg_real() + max(alpha_hat.real, 0.0)
    gb = Bp.max_neg_real() + max(beta_hat.real, 0.0)
    margin = 1.0 + s_min_real - ga - gb
    if margin < 0.05:
        raise ValueError(
            f"one-swap local series needs Re s > growth - 1 (margin {margin:.3f})"
        )
    if (1.0 - alpha_hat.real) - Ap.max_neg_real() < 0.05:
        raise ValueError("g series for the A side does not converge")
    if (1.0 - beta_hat.real) - Bp.max_neg_real() < 0.05:
        raise ValueError("g series for the B side does not converge")
    return Ap, Bp, margin


def local_A_hat(A, B, alpha_hat, beta_hat, s, p: int, d_start: int = 24) -> complex:
    """One-swap local factor at p in the d,q double-sum form.

    value = [prod over a in A', b in B' of (1 - p^(-1-a-b-s))]
            * sum_{d>=0} sum_{q in {0,1}} mu(p^q) G_A(1-ah, p^(d+q))
              G_B(1-bh, p^(d+q)) p^(-d - ds - q(2 - ah - bh)).
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    alpha_hat = complex(alpha_hat)
    beta_hat = complex(beta_hat)
    s = complex(s)
    Ap, Bp, margin = _hat_guards(A, B, alpha_hat, beta_hat, s.real)
    lp = np.log(float(p))
    y = np.exp(-(1.0 + s) * lp)
    c = np.exp(-(2.0 - alpha_hat - beta_hat) * lp)
    rho = float(p) ** (-margin)
    d_top = max(8, int(d_start))
    while True:
        ga = _G_prime_power_row(A, 1.0 - alpha_hat, p, d_top + 1)
        gb = _G_prime_power_row(B, 1.0 - beta_hat, p, d_top + 1)
        w = ga[: d_top + 1] * gb[: d_top + 1] - c * ga[1 : d_top + 2] * gb[1 : d_top + 2]
        terms = w * y ** np.arange(d_top + 1)
        total = complex(np.sum(terms))
        slack = ((d_top + 2.0) / (d_top + 1.0)) ** (len(A) + len(B))
        tail = abs(terms[-1]) * rho * slack / max(1.0 - rho * slack, 1e-3)
        if tail <= TAIL_TARGET * max(abs(total), 1e-30) or abs(terms[-1]) == 0.0:
            break
        if d_top >= 2048:
            raise ValueError(f"one-swap local sum at p={p} did not converge")
        d_top *= 2
    pref = 1.0 + 0j
    for alpha in Ap:
        for beta in Bp:
            pref *= 1.0 - np.exp(-(1.0 + alpha + beta + s) * lp)
    return complex(pref * total)


def global_A_hat(A, B, alpha_hat, beta_hat, s, p_cutoff: int):
    """Product of local_A_hat over p <= p_cutoff, vectorized over s.

    s may be a scalar or a 1-d array (all entries must satisfy the same
    convergence guard). Returns (value or values, tail_estimate) where the
    estimate aggregates series tails and the prime-cutoff heuristic, taken
    worst-case over the s batch. The G rows are s-independent, so each prime
    contributes its G data once regardless of the batch size.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    alpha_hat = complex(alpha_hat)
    beta_hat = complex(beta_hat)
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    scalar = np.ndim(s) == 0
    s_min = float(np.min(s_arr.real))
    Ap, Bp, margin = _hat_guards(A, B, alpha_hat, beta_hat, s_min)
    if p_cutoff < 3:
        raise ValueError("p_cutoff must be >= 3")
    primes = primes_upto(p_cutoff)
    ns = s_arr.shape[0]
    fvals = np.empty((primes.shape[0], ns), dtype=np.complex128)
    rel_tail = 0.0
    cross = [(alpha, beta) for alpha in Ap for beta in Bp]

    def fold_prime_rows(p_float, ga_row, gb_row, d_top):
        # shared combine step: rows of G values at one prime -> factor(s)
        nonlocal rel_tail
        lp = np.log(p_float)
        c = np.exp(-(2.0 - alpha_hat - beta_hat) * lp)
        w = ga_row[: d_top + 1] * gb_row[: d_top + 1] - c * ga_row[1 : d_top + 2] * gb_row[1 : d_top + 2]
        y = np.exp(-(1.0 + s_arr) * lp)
        tot = np.full(ns, w[d_top], dtype=np.complex128)
        for d in range(d_top - 1, -1, -1):
            tot = tot * y + w[d]
        pref = np.ones_like(tot)
        for alpha, beta in cross:
            pref *= 1.0 - np.exp(-(1.0 + alpha + beta + s_arr) * lp)
        factor = pref * tot
        rho = p_float ** (-margin)
        rel_tail += abs(w[d_top]) * float(np.max(np.abs(y))) ** d_top * rho / max(
            1.0 - rho, 1e-3
        ) / max(float(np.min(np.abs(tot))), 1e-30)
        return factor

    small = primes[primes <= _SMALL_PRIME_CAP]
    for i, p in enumerate(small):
        p = int(p)
        d_top = _batch_depth(float(p), margin, slack=8)
        ga = _G_prime_power_row(A, 1.0 - alpha_hat, p, d_top + 1)
        gb = _G_prime_power_row(B, 1.0 - beta_hat, p, d_top + 1)
        fvals[i] = fold_prime_rows(float(p), ga, gb, d_top)

    big = primes[primes > _SMALL_PRIME_CAP]
    if big.size:
        parr = big.astype(np.float64)
        d_top = _batch_depth(float(parr[0]), margin, slack=4)
        j_top = _batch_depth(float(parr[0]), min((1.0 - alpha_hat.real) - Ap.max_neg_real(),
                                                 (1.0 - beta_hat.real) - Bp.max_neg_real()), slack=4)
        depth = d_top + 2 + j_top
        lp = np.log(parr)

        def g_rows(S: ShiftSet, sprime: complex) -> np.ndarray:
            taus = tau_powers_grid(S, parr, depth)
            x = np.exp(-sprime * lp)
            rows = np.empty((d_top + 2, parr.shape[0]), dtype=np.complex128)
            top = np.zeros(parr.shape[0], dtype=np.complex128)
            for j in range(j_top, -1, -1):
                top = top * x + taus[d_top + 1 + j]
            rows[d_top + 1] = top
            for m in range(d_top, -1, -1):
                rows[m] = taus[m] + x * rows[m + 1]
            pref = np.ones(parr.shape[0], dtype=np.complex128)
            for alpha in S:
                pref *= 1.0 - np.exp(-(sprime + alpha) * lp)
            rows *= pref
            return rows

        gA = g_rows(A, 1.0 - alpha_hat)
        gB = g_rows(B, 1.0 - beta_hat)

        def G_rows(g, sprime):
            G = np.empty_like(g)
            G[0] = 1.0
            ps = np.exp(sprime * lp)
            for m in range(1, g.shape[0]):
                G[m] = (parr * g[m] - ps * g[m - 1]) / (parr - 1.0)
            return G

        GA = G_rows(gA, 1.0 - alpha_hat)
        GB = G_rows(gB, 1.0 - beta_hat)
        c = np.exp(-(2.0 - alpha_hat - beta_hat) * lp)
        w = GA[: d_top + 1] * GB[: d_top + 1] - c * GA[1 : d_top + 2] * GB[1 : d_top + 2]
        y = np.exp(-np.multiply.outer(lp, 1.0 + s_arr))
        tot = np.repeat(w[d_top][:, None], s_arr.shape[0], axis=1)
        for d in range(d_top - 1, -1, -1):
            tot = tot * y + w[d][:, None]
        pref = np.ones_like(tot)
        for alpha, beta in cross:
            pref *= 1.0 - np.exp(-np.multiply.outer(lp, 1.0 + alpha + beta + s_arr))
        factors = pref * tot
        rho = parr ** (-margin)
        ymax = np.max(np.abs(y), axis=1)
        rel_tail += float(np.sum(np.abs(w[d_top]) * ymax ** d_top * rho / (1.0 - rho)
                                 / np.maximum(np.min(np.abs(tot), axis=1), 1e-30)))
        fvals[small.shape[0]:] = factors
    acc = np.prod(fvals, axis=0)
    correction, est_log = _fit_tail(primes, fvals, p_cutoff)
    acc = acc * correction
    tail = (rel_tail + est_log) * float(np.max(np.abs(acc)))
    if scalar:
        return complex(acc[0]), tail
    return acc, tail
