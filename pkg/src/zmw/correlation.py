"""Shifted divisor correlations and their conjectured smooth main term.

The empirical object is D_{A,B}(u,h) = sum_{n<=u} tau_A(n) tau_B(n+h). Its
conjectured main term m_{A,B}(u,h) is assembled from the twisted-average
densities

    P_A(u,q)   = sum over ah in A of G_A(1-ah, q) (u/q)^(-ah)
                 prod over a in A minus ah of zeta(1 - ah + a),

    f_{A,B}(u,d) = sum_{q>=1} mu(q)/q^2 P_A(u,qd) P_B(u,qd),

    m'(u,h)    = sum over d | h of f_{A,B}(u,d)/d,
    m(u,h)     = integral of m'(t,h) dt from 1 to u.

P_A(u,q) is the residue expansion of (1/2pi i) times the |s|=1/8 contour
integral of prod_a zeta(s+1+a) G_A(s+1,q) (u/q)^s, one simple pole per shift,
which is why shifts must be pairwise distinct here. The second slot of P_B is
taken at u, not u+h (the difference is lower order throughout h <= u^0.9 and
keeps f independent of h).

Everything downstream of the G values is a finite combination of powers
u^(-ah-bh), so the whole u-dependence is carried by a small coefficient
matrix per modulus class; the t-integral for m is quadrature over log-spaced
panels as a matter of policy, with the exact power antiderivative serving as
a cross-check in the test suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import banded_corr
from .euler import G_of
from .shifts import SEPARATION_EPS, ShiftSet, ShiftedTauTable, as_shift_set, tau_table
from .special import ArithmeticSieve, build_sieve, zeta

H_EXPONENT = 0.9
MIN_Q_CUTOFF = 50


def _require_simple_poles(S: ShiftSet, label: str) -> None:
    try:
        S.require_separated(SEPARATION_EPS, label)
    except ValueError as exc:
        raise ValueError(
            f"{label} has (nearly) repeated shifts; the residue expansion needs "
            f"simple poles. Perturb the shifts by more than {SEPARATION_EPS}."
        ) from exc


def _zeta_products(S: ShiftSet) -> np.ndarray:
    """For each ah in S: prod over remaining a of zeta(1 - ah + a)."""
    vals = np.empty(len(S), dtype=np.complex128)
    entries = S.entries
    for i, ah in enumerate(entries):
        rest = [a for j, a in enumerate(entries) if j != i]
        if rest:
            vals[i] = np.prod(zeta(1.0 - ah + np.asarray(rest, dtype=np.complex128)))
        else:
            vals[i] = 1.0
    return vals


def _g_of_cached(S: ShiftSet, s: complex, q: int, sieve: ArithmeticSieve, cache: dict) -> complex:
    key = (S._key(), complex(s), int(q))
    out = cache.get(key)
    if out is None:
        out = G_of(S, s, q, sieve)
        cache[key] = out
    return out


def _p_coeffs(S: ShiftSet, q: int, sieve: ArithmeticSieve, cache: dict,
              zprods: np.ndarray) -> np.ndarray:
    """Coefficients c_i with P_S(u,q) = sum_i c_i u^(-ah_i)."""
    out = np.empty(len(S), dtype=np.complex128)
    for i, ah in enumerate(S.entries):
        G = _g_of_cached(S, 1.0 - ah, q, sieve, cache)
        out[i] = G * zprods[i] * np.exp(ah * np.log(float(q)))
    return out


def P_density(A, u: float, q: int, sieve: ArithmeticSieve) -> complex:
    """Average density of sum_{n<=u} tau_A(n) e(n/q), by residue expansion."""
    A = as_shift_set(A)
    A.require_nonempty("density shift set")
    _require_simple_poles(A, "density shift set")
    q = int(q)
    if not (u >= q >= 1):
        raise ValueError(f"need u >= q >= 1, got u={u}, q={q}")
    zprods = _zeta_products(A)
    coeffs = _p_coeffs(A, q, sieve, {}, zprods)
    powers = np.exp(-np.asarray(A.entries) * np.log(float(u)))
    return complex(np.dot(coeffs, powers))


def _f_matrices(A: ShiftSet, B: ShiftSet, d: int, Q_cutoff: int,
                sieve: ArithmeticSieve, cache: dict) -> tuple[np.ndarray, np.ndarray]:
    """Full and last-decade coefficient matrices for f_{A,B}(u, d).

    f(u,d) = sum_{i,j} M[i,j] u^(-ah_i - bh_j); the last-decade matrix holds
    the q in (Q/10, Q] portion and feeds the truncation estimate.
    """
    ck = ("fmat", A._key(), B._key(), int(d), int(Q_cutoff))
    hit = cache.get(ck)
    if hit is not None:
        return hit
    zA = _zeta_products(A)
    zB = _zeta_products(B)
    M = np.zeros((len(A), len(B)), dtype=np.complex128)
    M_dec = np.zeros_like(M)
    q_dec = Q_cutoff // 10
    for q in range(1, Q_cutoff + 1):
        mu = sieve.mu(q)
        if mu == 0:
            continue
        cA = _p_coeffs(A, q * d, sieve, cache, zA)
        cB = _p_coeffs(B, q * d, sieve, cache, zB)
        term = (mu / q ** 2) * np.outer(cA, cB)
        M += term
        if q > q_dec:
            M_dec += term
    cache[ck] = (M, M_dec)
    return M, M_dec


def _power_eval(A: ShiftSet, B: ShiftSet, M: np.ndarray, u: float) -> complex:
    pa = np.exp(-np.asarray(A.entries) * np.log(float(u)))
    pb = np.exp(-np.asarray(B.entries) * np.log(float(u)))
    return complex(pa @ M @ pb)


def f_density(A, B, u: float, d: int, Q_cutoff: int, sieve: ArithmeticSieve,
              cache: dict | None = None, with_tail: bool = False):
    """mu-weighted q-sum of P_A(u,qd) P_B(u,qd), truncated at Q_cutoff.

    The truncation estimate is the magnitude of the last decade's
    contribution (q in (Q/10, Q]); request it with with_tail=True.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    _require_simple_poles(A, "left shift set")
    _require_simple_poles(B, "right shift set")
    d = int(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    if Q_cutoff < MIN_Q_CUTOFF:
        raise ValueError(f"Q_cutoff must be >= {MIN_Q_CUTOFF}")
    if Q_cutoff * d > sieve.limit:
        raise ValueError(
            f"q-sum needs moduli up to {Q_cutoff * d} > sieve limit {sieve.limit}"
        )
    if d > u:
        warnings.warn(f"f evaluated at d={d} > u={u}: outside the calibrated range",
                      stacklevel=2)
    if cache is None:
        cache = {}
    M, M_dec = _f_matrices(A, B, d, Q_cutoff, sieve, cache)
    value = _power_eval(A, B, M, u)
    if with_tail:
        return value, abs(_power_eval(A, B, M_dec, u))
    return value


def m_prime(A, B, u: float, h: int, Q_cutoff: int, sieve: ArithmeticSieve,
            cache: dict | None = None) -> complex:
    """d m/du: sum over d | h of f_{A,B}(u,d)/d."""
    h = int(h)
    if h == 0:
        raise ValueError("h=0 is the diagonal; it belongs to the moment pipeline")
    if h < 0:
        raise ValueError("h must be positive (swap the shift sets for h < 0)")
    if not 1 <= h <= u ** H_EXPONENT:
        raise ValueError(f"need 1 <= h <= u^{H_EXPONENT}, got h={h}, u={u}")
    if cache is None:
        cache = {}
    total = 0.0 + 0j
    for d in sorted(_divisors(h)):
        total += f_density(A, B, u, d, Q_cutoff, sieve, cache=cache) / d
    return total


def _divisors(h: int) -> list[int]:
    out = []
    d = 1
    while d * d <= h:
        if h % d == 0:
            out.append(d)
            if d != h // d:
                out.append(h // d)
        d += 1
    return out


def _log_panels(u: float) -> np.ndarray:
    n_panels = max(1, int(np.ceil(np.log10(u))))
    return np.exp(np.linspace(0.0, np.log(u), n_panels + 1))


def m_main(A, B, u: float, h: int, quadrature_points: int = 32,
           Q_cutoff: int = 200, sieve: ArithmeticSieve | None = None,
           cache: dict | None = None) -> complex:
    """m(u,h): integral of m'(t,h) from 1 to u on log-spaced panels.

    Each panel carries a Gauss-Legendre rule with quadrature_points nodes;
    the integrand is a finite combination of powers t^(-ah-bh), so the rule
    is effectively exact already at modest node counts. m(1,h) = 0 fixes the
    constant of integration.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    if u < 1:
        raise ValueError("u must be >= 1")
    if u == 1:
        return 0.0 + 0j
    h = int(h)
    if not 1 <= h <= u ** H_EXPONENT:
        raise ValueError(f"need 1 <= h <= u^{H_EXPONENT}, got h={h}, u={u}")
    if quadrature_points < 4:
        raise ValueError("quadrature_points must be >= 4")
    if sieve is None:
        sieve = build_sieve(Q_cutoff * h + 1)
    if cache is None:
        cache = {}
    # u-independent coefficient matrix K with m'(t,h) = sum K_ij t^(-ah_i-bh_j)
    K = np.zeros((len(A), len(B)), dtype=np.complex128)
    for d in sorted(_divisors(h)):
        M, _ = _f_matrices(A, B, d, Q_cutoff, sieve, cache)
        K += M / d
    nodes, wts = np.polynomial.legendre.leggauss(int(quadrature_points))
    total = 0.0 + 0j
    bounds = _log_panels(u)
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        t = mid + half * nodes
        pa = np.exp(-np.multiply.outer(np.asarray(A.entries), np.log(t)))
        pb = np.exp(-np.multiply.outer(np.asarray(B.entries), np.log(t)))
        vals = np.einsum("it,ij,jt->t", pa, K, pb)
        total += half * np.dot(wts, vals)
    return complex(total)


def m_main_exact_powers(A, B, u: float, h: int, Q_cutoff: int = 200,
                        sieve: ArithmeticSieve | None = None,
                        cache: dict | None = None) -> complex:
    """Antiderivative form of m(u,h): sum K_ij (u^(1-g) - 1)/(1-g), g=ah+bh.

    Exact for the truncated q-sum; used to validate the quadrature route.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    h = int(h)
    if sieve is None:
        sieve = build_sieve(Q_cutoff * h + 1)
    if cache is None:
        cache = {}
    K = np.zeros((len(A), len(B)), dtype=np.complex128)
    for d in sorted(_divisors(h)):
        M, _ = _f_matrices(A, B, d, Q_cutoff, sieve, cache)
        K += M / d
    g = np.add.outer(np.asarray(A.entries), np.asarray(B.entries))
    anti = (np.exp((1.0 - g) * np.log(u)) - 1.0) / (1.0 - g)
    return complex(np.sum(K * anti))


def D_empirical(tableA: ShiftedTauTable, tableB: ShiftedTauTable, u: int, h: int) -> complex:
    """sum_{n<=u} tau_A(n) tau_B(n+h), exact with compensated accumulation."""
    u = int(u)
    h = int(h)
    if h < 1:
        raise ValueError("h must be >= 1")
    if u < 1:
        raise ValueError("u must be >= 1")
    if u > tableA.n_max:
        raise ValueError(f"u={u} exceeds left table limit {tableA.n_max}")
    if u + h > tableB.n_max:
        raise ValueError(f"u+h={u + h} exceeds right table limit {tableB.n_max}")
    return complex(banded_corr(tableA.values, tableB.values, u, h))


@dataclass(frozen=True)
class CorrelationJob:
    """One batch of correlation comparisons at fixed shift sets.

    h values must stay within the conjecture's uniformity range
    h <= u_max^0.9; the q-sum cutoff is bounded below so the truncation
    heuristic has a decade to look at.
    """

    A: ShiftSet
    B: ShiftSet
    u_max: int
    h_list: tuple[int, ...]
    Q_cutoff: int = 200
    quadrature_points: int = 32

    def __post_init__(self):
        object.__setattr__(self, "A", as_shift_set(self.A))
        object.__setattr__(self, "B", as_shift_set(self.B))
        object.__setattr__(self, "h_list", tuple(int(h) for h in self.h_list))
        if self.u_max < 10:
            raise ValueError("u_max must be >= 10")
        if not self.h_list:
            raise ValueError("h_list must be nonempty")
        hmax = self.u_max ** H_EXPONENT
        for h in self.h_list:
            if not 1 <= h <= hmax:
                raise ValueError(f"h={h} outside [1, u_max^{H_EXPONENT}] = [1, {hmax:.1f}]")
        if self.Q_cutoff < MIN_Q_CUTOFF:
            raise ValueError(f"Q_cutoff must be >= {MIN_Q_CUTOFF}")
        if self.quadrature_points < 4:
            raise ValueError("quadrature_points must be >= 4")
        _require_simple_poles(self.A, "job shift set A")
        _require_simple_poles(self.B, "job shift set B")


def correlation_rows(job: CorrelationJob,
                     tables: tuple[ShiftedTauTable, ShiftedTauTable] | None = None,
                     sieve: ArithmeticSieve | None = None,
                     u_list: tuple[int, ...] | None = None) -> list[dict]:
    """Run one correlation job; one output row per (u, h) pair.

    Row keys match the CSV contract: u, h, D_real, D_imag, m_real, m_imag,
    rel_dev. All G/f coefficient work is shared across rows through one
    cache, so extra u values (for deviation-decay studies) are nearly free
    on the conjectural side.
    """
    us = tuple(int(v) for v in (u_list or (job.u_max,)))
    if max(us) > job.u_max:
        raise ValueError("u_list entries must not exceed u_max")
    hmax = max(job.h_list)
    if tables is None:
        tables = (tau_table(job.A, job.u_max + hmax),
                  tau_table(job.B, job.u_max + hmax))
    tableA, tableB = tables
    if sieve is None:
        sieve = build_sieve(job.Q_cutoff * hmax + 1)
    cache: dict = {}
    rows = []
    for u in us:
        for h in job.h_list:
            D = D_empirical(tableA, tableB, u, h)
            m = m_main(job.A, job.B, u, h, job.quadrature_points,
                       job.Q_cutoff, sieve, cache)
            denom = abs(m)
            rows.append({
                "u": u,
                "h": h,
                "D_real": D.real,
                "D_imag": D.imag,
                "m_real": m.real,
                "m_imag": m.imag,
                "rel_dev": abs(D - m) / denom if denom > 0 else float("inf"),
            })
    return rows
