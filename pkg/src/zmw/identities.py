"""Numeric verification of the prime-power identities behind the arithmetic factors.

Each check evaluates both sides of one identity through independent code
paths (literal series vs closed forms) and reports relative residuals,
|lhs - rhs| / max(|lhs|, |rhs|, 1). Checks are deterministic; the seeded
suites re-emit any failing draw as a standalone reproducer config.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .shifts import ShiftSet, as_shift_set, tau_prime_powers, tau_table
from .special import build_sieve
from .euler import (
    TAIL_TARGET,
    G_of,
    Z_product,
    _G_prime_power_row,
    _hat_guards,
    g_local,
    global_A,
    local_A_factor,
    local_A_hat,
)

TOL_TAUID = 1e-12
TOL_CONVOLUTION = 1e-12
TOL_G_CLOSED_FORM = 1e-10
TOL_LOCAL_IDENTITY = 1e-9
TOL_TELESCOPING = 1e-9
TOL_TRANSLATION_LOCAL = 1e-12
TOL_TRANSLATION_GLOBAL = 1e-9

# the literal divisor-sum route needs a sieve over the modulus
_MAX_LITERAL_MODULUS = 10**6


def _residual(lhs, rhs) -> float:
    scale = max(abs(lhs), abs(rhs), 1.0)
    return float(abs(lhs - rhs) / scale)


def _cnum(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _pairs(S: ShiftSet) -> list[list[float]]:
    return [_cnum(a) for a in S.entries]


@dataclass(frozen=True)
class CheckResult:
    """Residuals of one identity check plus the exact reproducer config."""

    name: str
    config: dict
    residuals: dict
    tolerances: dict
    values: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def mean_residual(self) -> float:
        if not self.residuals:
            return 0.0
        return float(np.mean(list(self.residuals.values())))

    @property
    def n_checks(self) -> int:
        return len(self.residuals)

    @property
    def ok(self) -> bool:
        return all(self.residuals[k] <= self.tolerances[k] for k in self.residuals)

    def payload(self) -> dict:
        vals = {}
        for key, v in self.values.items():
            vals[key] = _cnum(v) if isinstance(v, complex) else v
        return {
            "name": self.name,
            "ok": self.ok,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "n_checks": self.n_checks,
            "config": self.config,
            "residuals": dict(self.residuals),
            "tolerances": dict(self.tolerances),
            "values": vals,
        }


@dataclass(frozen=True)
class SuiteResult:
    """Aggregate over seeded draws; failures carry full reproducer payloads."""

    seed: int
    draws: int
    primes: tuple
    checks: dict
    failures: tuple

    @property
    def ok(self) -> bool:
        return len(self.failures) == 0

    @property
    def max_residual(self) -> float:
        return max((c["max_residual"] for c in self.checks.values()), default=0.0)

    def payload(self) -> dict:
        return {
            "seed": self.seed,
            "draws": self.draws,
            "primes": list(self.primes),
            "ok": self.ok,
            "max_residual": self.max_residual,
            "checks": {k: dict(v) for k, v in self.checks.items()},
            "failures": [dict(f) for f in self.failures],
        }


def _tau_dot(S: ShiftSet, T: ShiftSet, p: int, tail_target: float) -> complex:
    """sum_j tau_S(p^j) tau_T(p^j) p^-j, truncated at term granularity.

    Stops once the geometric tail bound drops below tail_target relative,
    so the truncation error tracks tail_target (the suites rely on that
    scaling to confirm residuals are truncation-dominated).
    """
    margin = 1.0 - S.max_neg_real() - T.max_neg_real()
    if margin < 0.05:
        raise ValueError(f"pair series needs growth margin >= 0.05, got {margin:.3f}")
    kappa = max(len(S) + len(T) - 2, 0)
    rho0 = float(p) ** (-margin)
    cap = 32
    ts = tau_prime_powers(S, p, cap)
    tt = tau_prime_powers(T, p, cap)
    acc = 0.0 + 0j
    j = 0
    while True:
        if j > cap:
            cap *= 2
            if cap > 65536:
                raise ValueError(f"pair series at p={p} did not converge")
            ts = tau_prime_powers(S, p, cap)
            tt = tau_prime_powers(T, p, cap)
        term = ts[j] * tt[j] * float(p) ** (-j)
        acc += term
        rho = min(rho0 * ((j + 2.0) / (j + 1.0)) ** kappa, 0.97)
        tail = abs(term) * rho / (1.0 - rho)
        if j >= 4 and (tail <= tail_target * max(abs(acc), 1e-30) or term == 0.0):
            return complex(acc)
        j += 1


def _goal_series(A: ShiftSet, B: ShiftSet, ah: complex, bh: complex, p: int,
                 tail_target: float) -> complex:
    """sum_{d, q in {0,1}} mu(p^q) G_A(1-ah, p^(d+q)) G_B(1-bh, p^(d+q))
    p^(-d-q(2-ah-bh)), truncated at term granularity."""
    _, _, margin = _hat_guards(A, B, ah, bh, 0.0)
    rho0 = float(p) ** (-margin)
    kappa = len(A) + len(B)
    c = float(p) ** (-(2.0 - ah - bh))
    cap = 24
    ga = _G_prime_power_row(A, 1.0 - ah, p, cap + 1)
    gb = _G_prime_power_row(B, 1.0 - bh, p, cap + 1)
    acc = 0.0 + 0j
    d = 0
    while True:
        if d + 1 > cap:
            cap *= 2
            if cap > 4096:
                raise ValueError(f"goal series at p={p} did not converge")
            ga = _G_prime_power_row(A, 1.0 - ah, p, cap + 1)
            gb = _G_prime_power_row(B, 1.0 - bh, p, cap + 1)
        term = (ga[d] * gb[d] - c * ga[d + 1] * gb[d + 1]) * float(p) ** (-d)
        acc += term
        rho = min(rho0 * ((d + 2.0) / (d + 1.0)) ** kappa, 0.97)
        tail = abs(term) * rho / (1.0 - rho)
        if d >= 4 and (tail <= tail_target * max(abs(acc), 1e-30) or term == 0.0):
            return complex(acc)
        d += 1


def check_tauid(A, p: int, R: int = 10) -> CheckResult:
    """Removal recursion tau_A(p^r) = tau_{A'}(p^r) + p^-a tau_A(p^(r-1))
    for every a in A and 1 <= r <= R."""
    A = as_shift_set(A).require_nonempty("tau recursion check")
    residuals = {}
    tA = tau_prime_powers(A, p, R)
    for a in A.entries:
        tAp = tau_prime_powers(A.remove(a), p, R)
        x = float(p) ** (-a)
        worst = 0.0
        for r in range(1, R + 1):
            worst = max(worst, _residual(tA[r], tAp[r] + x * tA[r - 1]))
        residuals[f"a={a:g}"] = worst
    return CheckResult(
        name="tauid",
        config={"check": "tauid", "A": _pairs(A), "p": int(p), "R": int(R)},
        residuals=residuals,
        tolerances={k: TOL_TAUID for k in residuals},
    )


def check_convolution_id(A_prime, beta_hat, p: int, R: int = 8) -> CheckResult:
    """Geometric convolution sum_{d<=r} p^((r-d) bh) tau_{A'}(p^d)
    = tau_{A' union {-bh}}(p^r) for 0 <= r <= R."""
    Ap = as_shift_set(A_prime)
    bh = complex(beta_hat)
    tAp = tau_prime_powers(Ap, p, R)
    tAL = tau_prime_powers(Ap.with_entry(-bh), p, R)
    x = float(p) ** bh
    worst = 0.0
    for r in range(R + 1):
        conv = sum(x ** (r - d) * tAp[d] for d in range(r + 1))
        worst = max(worst, _residual(conv, tAL[r]))
    residuals = {"all_r": worst}
    return CheckResult(
        name="convolution_id",
        config={"check": "convolution_id", "A_prime": _pairs(Ap),
                "beta_hat": _cnum(bh), "p": int(p), "R": int(R)},
        residuals=residuals,
        tolerances={k: TOL_CONVOLUTION for k in residuals},
    )


def check_G_closed_form(A, alpha_hat, p: int, R: int = 4) -> CheckResult:
    """Literal double divisor sum G_A(1-ah, p^r) against the closed form
    prod_{a in A'}(1 - p^(-1+ah-a)) sum_j tau_{A'}(p^(j+r)) p^(-j(1-ah)),
    which is g_{A'}(1-ah, p^r), for 1 <= r <= R."""
    A = as_shift_set(A).require_nonempty("closed-form check")
    ah = complex(alpha_hat)
    Ap = A.remove(ah)
    q_top = p ** R
    if q_top > _MAX_LITERAL_MODULUS:
        raise ValueError(f"literal route needs p^R <= {_MAX_LITERAL_MODULUS}")
    sieve = build_sieve(q_top)
    residuals = {}
    for r in range(1, R + 1):
        lhs = G_of(A, 1.0 - ah, p ** r, sieve)
        if len(Ap) == 0:
            rhs = 0.0 + 0j  # tau of the empty set vanishes off p^0
        else:
            rhs = g_local(Ap, 1.0 - ah, p, r)
        residuals[f"r={r}"] = _residual(lhs, rhs)
    return CheckResult(
        name="G_closed_form",
        config={"check": "G_closed_form", "A": _pairs(A), "alpha_hat": _cnum(ah),
                "p": int(p), "R": int(R)},
        residuals=residuals,
        tolerances={k: TOL_G_CLOSED_FORM for k in residuals},
    )


def _cross_product(S: ShiftSet, T: ShiftSet, p: int) -> complex:
    out = 1.0 + 0j
    for a in S.entries:
        for b in T.entries:
            out *= 1.0 - float(p) ** (-1.0 - a - b)
    return out


def check_local_identity(A, B, alpha_hat, beta_hat, p: int, s=0.0,
                         tail_target: float = TAIL_TARGET) -> CheckResult:
    """Both forms of the local one-swap identity.

    series_form: prod_{a in A'}(1 - p^(-1+ah-a)) prod_{b in B'}(1 - p^(-1+bh-b))
    (1 - p^(-1+ah+bh)) sum_j tau_{A' u {-bh}} tau_{B' u {-ah}} p^-j equals
    the mu-weighted double sum over G rows. The boundary factors are the
    plain cross products over A' x {-ah} and {-bh} x B'; the full local
    factor of those pairs collapses to 1 and would unbalance the identity.

    hat_form: local_A_hat(s) equals local_A_factor of the swapped sets
    A' u {-bh-s}, B'_s u {-ah}, for each requested s.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    ah = complex(alpha_hat)
    bh = complex(beta_hat)
    try:
        s_values = [complex(v) for v in s]
    except TypeError:
        s_values = [complex(s)]
    Ap = A.remove(ah)
    Bp = B.remove(bh)
    AL = Ap.with_entry(-bh)
    BL = Bp.with_entry(-ah)

    f1 = _cross_product(Ap, ShiftSet._unchecked((-ah,)), p)
    f2 = _cross_product(ShiftSet._unchecked((-bh,)), Bp, p)
    lhs = f1 * f2 * (1.0 - float(p) ** (-1.0 + ah + bh)) * _tau_dot(AL, BL, p, tail_target)
    rhs = _goal_series(A, B, ah, bh, p, tail_target)
    residuals = {"series_form": _residual(lhs, rhs)}
    values = {"series_lhs": complex(lhs), "series_rhs": complex(rhs)}

    for sv in s_values:
        left = local_A_hat(A, B, ah, bh, sv, p)
        swapped_A = Ap.with_entry(-bh - sv)
        swapped_B = Bp.translated(sv).with_entry(-ah)
        right = local_A_factor(swapped_A, swapped_B, p).value
        residuals[f"hat_form s={sv:g}"] = _residual(left, right)
    return CheckResult(
        name="local_identity",
        config={"check": "local_identity", "A": _pairs(A), "B": _pairs(B),
                "alpha_hat": _cnum(ah), "beta_hat": _cnum(bh), "p": int(p),
                "s": [_cnum(v) for v in s_values], "tail_target": tail_target},
        residuals=residuals,
        tolerances={k: TOL_LOCAL_IDENTITY for k in residuals},
        values=values,
    )


def check_intermediate_telescoping(A, B, alpha_hat, beta_hat, p: int, R: int = 8,
                                   tail_target: float = TAIL_TARGET) -> CheckResult:
    """Term-by-term checks of the manipulations that collapse the G double
    sum into the final pair series.

    split: the two-term splitting of G_A G_B - p^(-2+ah+bh) G_A+ G_B+.
    difference: G(1-ah, p^d) - p^(-1+ah) G(1-ah, p^(d+1)) equals
      prod_{a in A'}(1 - p^(-1+ah-a)) tau_{A'}(p^d) (and the B-side mirror).
    rearrangement: the (d, j) double sum re-indexed along r = d + j with the
      inner geometric convolution.
    telescope: the three-term tau combination collapses to consecutive
      differences of tau_{A' u {-bh}} tau_{B' u {-ah}}.
    assembled: the full mu-weighted G sum equals the boundary cross products
      times (1 - p^(-1+ah+bh)) sum_r tau_{A' u {-bh}} tau_{B' u {-ah}} p^-r.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    ah = complex(alpha_hat)
    bh = complex(beta_hat)
    Ap, Bp, _ = _hat_guards(A, B, ah, bh, 0.0)
    AL = Ap.with_entry(-bh)
    BL = Bp.with_entry(-ah)
    pa = float(p) ** (-1.0 + ah)
    pb = float(p) ** (-1.0 + bh)
    pc = float(p) ** (-2.0 + ah + bh)
    ga = _G_prime_power_row(A, 1.0 - ah, p, R + 1)
    gb = _G_prime_power_row(B, 1.0 - bh, p, R + 1)
    prodA = complex(np.prod([1.0 - float(p) ** (-1.0 + ah - a) for a in Ap.entries]) if len(Ap) else 1.0)
    prodB = complex(np.prod([1.0 - float(p) ** (-1.0 + bh - b) for b in Bp.entries]) if len(Bp) else 1.0)
    tAp = tau_prime_powers(Ap, p, R + 1)
    tBp = tau_prime_powers(Bp, p, R + 1)
    tAL = tau_prime_powers(AL, p, R + 1)
    tBL = tau_prime_powers(BL, p, R + 1)

    r_split = 0.0
    r_diff = 0.0
    for d in range(R + 1):
        lhs = ga[d] * gb[d] - pc * ga[d + 1] * gb[d + 1]
        rhs = (ga[d] - pa * ga[d + 1]) * gb[d] + pa * ga[d + 1] * (gb[d] - pb * gb[d + 1])
        r_split = max(r_split, _residual(lhs, rhs))
        r_diff = max(r_diff, _residual(ga[d] - pa * ga[d + 1], prodA * tAp[d]))
        r_diff = max(r_diff, _residual(gb[d] - pb * gb[d + 1], prodB * tBp[d]))

    # rearrangement: doubling depth until both routes are Cauchy-stable
    xb = float(p) ** (-(1.0 - bh))
    pw = float(p) ** bh

    def both_routes(depth: int) -> tuple[complex, complex]:
        tA_d = tau_prime_powers(Ap, p, 2 * depth)
        tB_d = tau_prime_powers(Bp, p, 2 * depth)
        lhs = 0.0 + 0j
        for d in range(depth + 1):
            inner = sum(tB_d[j + d] * xb ** j for j in range(depth + 1))
            lhs += tA_d[d] * float(p) ** (-d) * inner
        rhs = 0.0 + 0j
        for r in range(2 * depth + 1):
            conv = sum(pw ** (r - d) * tA_d[d] for d in range(r + 1))
            rhs += tB_d[r] * float(p) ** (-r) * conv
        return complex(lhs), complex(rhs)

    depth = 24
    lhs3, rhs3 = both_routes(depth)
    while True:
        lhs_n, rhs_n = both_routes(2 * depth)
        stable = max(abs(lhs_n - lhs3), abs(rhs_n - rhs3))
        lhs3, rhs3 = lhs_n, rhs_n
        if stable <= tail_target * max(abs(lhs3), 1.0) or depth >= 768:
            break
        depth *= 2
    r_rearr = _residual(lhs3, rhs3)

    r_tel = 0.0
    pab = float(p) ** (ah + bh)
    for r in range(1, R + 1):
        lhs = tBp[r] * tAL[r] + tAp[r] * tBL[r] - tAp[r] * tBp[r]
        rhs = tAL[r] * tBL[r] - pab * tAL[r - 1] * tBL[r - 1]
        r_tel = max(r_tel, _residual(lhs, rhs))

    assembled_lhs = _goal_series(A, B, ah, bh, p, tail_target)
    assembled_rhs = (prodA * prodB * (1.0 - float(p) ** (-1.0 + ah + bh))
                     * _tau_dot(AL, BL, p, tail_target))
    residuals = {
        "split": r_split,
        "difference": r_diff,
        "rearrangement": r_rearr,
        "telescope": r_tel,
        "assembled": _residual(assembled_lhs, assembled_rhs),
    }
    return CheckResult(
        name="intermediate_telescoping",
        config={"check": "intermediate_telescoping", "A": _pairs(A), "B": _pairs(B),
                "alpha_hat": _cnum(ah), "beta_hat": _cnum(bh), "p": int(p),
                "R": int(R), "tail_target": tail_target},
        residuals=residuals,
        tolerances={k: TOL_TELESCOPING for k in residuals},
    )


def check_translation_identity(A, B, w, z, p: int, P: int | None = None) -> CheckResult:
    """Shift invariance of the arithmetic factor: translating A by w and B by z
    matches translating A by w + z alone, locally at p and (optionally)
    for the full product truncated at P."""
    A = as_shift_set(A)
    B = as_shift_set(B)
    w = complex(w)
    z = complex(z)
    lhs = local_A_factor(A.translated(w), B.translated(z), p).value
    rhs = local_A_factor(A.translated(w + z), B, p).value
    residuals = {"local": _residual(lhs, rhs)}
    tolerances = {"local": TOL_TRANSLATION_LOCAL}
    values = {"local_lhs": complex(lhs), "local_rhs": complex(rhs)}
    if P is not None:
        gl, _ = global_A(A.translated(w), B.translated(z), int(P))
        gr, _ = global_A(A.translated(w + z), B, int(P))
        residuals["global"] = _residual(gl, gr)
        tolerances["global"] = TOL_TRANSLATION_GLOBAL
        values["global_lhs"] = complex(gl)
        values["global_rhs"] = complex(gr)
    return CheckResult(
        name="translation",
        config={"check": "translation", "A": _pairs(A), "B": _pairs(B),
                "w": _cnum(w), "z": _cnum(z), "p": int(p),
                "P": None if P is None else int(P)},
        residuals=residuals,
        tolerances=tolerances,
        values=values,
    )


def check_dirichlet_series(A, B, s, N: int, P: int) -> CheckResult:
    """Truncated sum_n tau_A(n) tau_B(n) n^(-1-s) against the Euler product
    global_A(A_s, B) Z(A_s, B); passes when the gap is inside the sum of the
    two reported tail estimates."""
    A = as_shift_set(A)
    B = as_shift_set(B)
    s = complex(s)
    if s.real < 1.0:
        raise ValueError("series comparison needs Re s >= 1 for a safe tail estimate")
    N = int(N)
    P = int(P)
    if N < 16:
        raise ValueError("series truncation N is too small to estimate a tail")
    tA = tau_table(A, N)
    tB = tA if B == A else tau_table(B, N)
    n = np.arange(1, N + 1, dtype=np.float64)
    terms = tA.values[1:] * tB.values[1:] * np.exp(-(1.0 + s) * np.log(n))
    sum_value = complex(np.sum(terms))
    # the octave sums still decay nearly geometrically, so twice the last one
    # bounds everything beyond N
    sum_tail = 2.0 * float(np.sum(np.abs(terms[N // 2:])))
    A_s = A.translated(s)
    aval, atail = global_A(A_s, B, P)
    zval = Z_product(A_s, B)
    product_value = complex(aval * zval)
    product_tail = abs(zval) * atail
    gap = abs(sum_value - product_value)
    return CheckResult(
        name="dirichlet_series",
        config={"check": "dirichlet_series", "A": _pairs(A), "B": _pairs(B),
                "s": _cnum(s), "N": N, "P": P},
        residuals={"gap": gap},
        tolerances={"gap": sum_tail + product_tail},
        values={"sum_value": sum_value, "sum_tail": sum_tail,
                "product_value": product_value, "product_tail": product_tail},
    )


def _draw_disk(rng, k: int, radius: float = 0.1, sep: float = 1e-3) -> ShiftSet:
    out: list[complex] = []
    while len(out) < k:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if abs(z) > radius:
            continue
        if any(abs(z - u) < sep for u in out):
            continue
        out.append(z)
    return ShiftSet(out)


def _merge(agg: dict, failures: list, draw_index: int, result: CheckResult) -> None:
    slot = agg.setdefault(result.name, {"max_residual": 0.0, "_sum": 0.0, "n_checks": 0})
    slot["max_residual"] = max(slot["max_residual"], result.max_residual)
    slot["_sum"] += sum(result.residuals.values())
    slot["n_checks"] += result.n_checks
    if not result.ok:
        failures.append({"draw": draw_index, **result.payload()})


def _finish(agg: dict) -> dict:
    out = {}
    for name, slot in agg.items():
        out[name] = {
            "max_residual": slot["max_residual"],
            "mean_residual": slot["_sum"] / max(slot["n_checks"], 1),
            "n_checks": slot["n_checks"],
        }
    return out


def identity_suite(seed: int = 0, draws: int = 100, primes=(2, 3, 5, 7),
                   max_size: int = 3) -> SuiteResult:
    """Seeded random-draw suite over the five prime-power identity checks.

    Shifts are drawn uniformly in the disk of radius 0.1 (rejection-sampled
    for 1e-3 pairwise separation); draws are merged in draw order, so the
    result is a pure function of the seed.
    """
    rng = np.random.default_rng(int(seed))
    agg: dict = {}
    failures: list = []
    for i in range(int(draws)):
        kA = int(rng.integers(1, max_size + 1))
        kB = int(rng.integers(1, max_size + 1))
        A = _draw_disk(rng, kA)
        B = _draw_disk(rng, kB)
        p = int(primes[int(rng.integers(len(primes)))])
        ah = A.entries[int(rng.integers(len(A)))]
        bh = B.entries[int(rng.integers(len(B)))]
        _merge(agg, failures, i, check_tauid(A, p, R=10))
        _merge(agg, failures, i, check_convolution_id(A.remove(ah), bh, p, R=8))
        _merge(agg, failures, i, check_G_closed_form(A, ah, p, R=4))
        _merge(agg, failures, i, check_local_identity(A, B, ah, bh, p))
        _merge(agg, failures, i, check_intermediate_telescoping(A, B, ah, bh, p, R=8))
    return SuiteResult(seed=int(seed), draws=int(draws), primes=tuple(int(p) for p in primes),
                       checks=_finish(agg), failures=tuple(failures))


def translation_suite(seed: int = 0, draws: int = 50, P: int | None = 10**4,
                      primes=(2, 3, 5, 7), max_size: int = 3) -> SuiteResult:
    """Seeded draws of the translation identity, local at a random prime and
    (when P is given) for the truncated product."""
    rng = np.random.default_rng(int(seed))
    agg: dict = {}
    failures: list = []
    for i in range(int(draws)):
        kA = int(rng.integers(1, max_size + 1))
        kB = int(rng.integers(1, max_size + 1))
        A = _draw_disk(rng, kA)
        B = _draw_disk(rng, kB)
        p = int(primes[int(rng.integers(len(primes)))])
        w = complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
        z = complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
        _merge(agg, failures, i, check_translation_identity(A, B, w, z, p, P=P))
    return SuiteResult(seed=int(seed), draws=int(draws), primes=tuple(int(p) for p in primes),
                       checks=_finish(agg), failures=tuple(failures))
