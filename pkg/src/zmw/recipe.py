"""Conjectured main terms for weighted Dirichlet-polynomial mean squares.

Three layers, all sharing one smooth weight psi supported on (1,2):

  recipe_R        the full subset-swap expansion: for equal-size subsets
                  U of A and V of B, swap terms
                  T int psi(t) (tT/2pi)^(-sum U - sum V)
                  A(S,T) Z(S,T) dt over the swapped sets
                  S = (A minus U) union (-V), T = (B minus V) union (-U).

  one_swap_term   the |U|=|V|=1 term re-derived through Perron's formula for
                  a polynomial truncated at X: a residue sum over the poles
                  of (2 pi X/(tT))^s / s times the arithmetic factor
                  A_hat(s) times zeta(1+s+a+b) over the reduced cross pairs
                  times zeta(1-ah-bh-s). Only poles right of Re s = -1/4 are
                  kept; the abandoned contour is O(X^(-1/4)) and reported.

  conjectured_I   diagonal term; plus every one-swap term once T <= X.

Residues are taken per pole *cluster*: poles within CLUSTER_TOL of each
other are enclosed by a single contour and their joint contribution is
reconstructed from Laurent coefficients A_m via

  sum of residues inside = Y^c sum_m A_m log(Y)^m / m!,   Y = 2 pi X/(tT),

which is exact whether the cluster is several nearby simple poles or one
genuinely multiple pole (equal shifts make s=0 a double pole; that
configuration is routine, not an error). Distinct clusters must stay
CLUSTER_TOL apart - that is the only separation the residue step needs.

The t-dependence enters the residue data only through Y, so the Laurent
coefficients are computed once per (ah, bh) and reused across the whole
t-quadrature; with the arithmetic factor evaluated on all contour nodes in
one vectorized call, a full one-swap term costs a handful of Euler-product
sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, factorial

import numpy as np

from ._kernels import kahan_dot_weighted, kahan_sum
from .euler import Z_product, global_A, global_A_hat
from .shifts import ShiftSet, ShiftedTauTable, as_shift_set
from .special import ContourSpec, SmoothWeight, laurent_coefficients, zeta

CLUSTER_TOL = 1e-4
T_QUAD_NODES = 64
X_CAP_FACTOR = 0.99
REMAINDER_SIGMA = -0.25


def _t_rule(weight: SmoothWeight, nodes: int = T_QUAD_NODES):
    """Gauss-Legendre nodes on [1,2] with psi folded into the weights."""
    x, w = np.polynomial.legendre.leggauss(int(nodes))
    t = 1.5 + 0.5 * x
    return t, 0.5 * w * weight.psi(t)


def _phase_integral(T: float, exponent: complex, t, wpsi) -> complex:
    """int psi(t) (tT/2pi)^(-exponent) dt on the support (1,2)."""
    return complex(np.sum(wpsi * np.exp(-exponent * np.log(t * T / (2.0 * np.pi)))))


def swap_census(k: int, l: int, max_swaps: int) -> int:
    """Number of (U,V) terms: sum over j <= max_swaps of C(k,j) C(l,j)."""
    return sum(comb(k, j) * comb(l, j) for j in range(min(k, l, max_swaps) + 1))


def recipe_terms(A, B, T: float, weight: SmoothWeight, P: int,
                 max_swaps: int) -> list[dict]:
    """Every subset-swap term, one record per (U,V).

    Each record carries the swapped sets, the phase exponent sum(U)+sum(V),
    the arithmetic and zeta factors at cutoff P, and the term's value
    T int psi (tT/2pi)^(-exponent) A Z dt. Z pole-guard failures identify
    the offending subset pair.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    if T <= 0:
        raise ValueError("T must be positive")
    if max_swaps < 0:
        raise ValueError("max_swaps must be >= 0")
    t, wpsi = _t_rule(weight)
    records = []
    for j in range(min(len(A), len(B), max_swaps) + 1):
        for ui in combinations(range(len(A)), j):
            for vi in combinations(range(len(B)), j):
                U = [A.entries[i] for i in ui]
                V = [B.entries[i] for i in vi]
                S1 = ShiftSet._unchecked(
                    [a for i, a in enumerate(A.entries) if i not in ui]
                    + [-v for v in V])
                S2 = ShiftSet._unchecked(
                    [b for i, b in enumerate(B.entries) if i not in vi]
                    + [-u for u in U])
                try:
                    zf = Z_product(S1, S2)
                except ValueError as exc:
                    raise ValueError(
                        f"swap term U={U}, V={V} fails the Z pole guard: {exc}"
                    ) from exc
                af, af_tail = global_A(S1, S2, P)
                exponent = sum(U) + sum(V)
                phase = _phase_integral(T, exponent, t, wpsi)
                records.append({
                    "swaps": j,
                    "U": tuple(U),
                    "V": tuple(V),
                    "exponent": exponent,
                    "arithmetic": af,
                    "arithmetic_tail": af_tail,
                    "zeta": zf,
                    "value": T * phase * af * zf,
                })
    return records


def recipe_R(A, B, T: float, weight: SmoothWeight, P: int, max_swaps: int) -> complex:
    """Sum of all subset-swap terms with |U| = |V| <= max_swaps."""
    return complex(sum(r["value"] for r in recipe_terms(A, B, T, weight, P, max_swaps)))


def diagonal_term(tableA: ShiftedTauTable, tableB: ShiftedTauTable, T: float,
                  X: float, weight: SmoothWeight) -> complex:
    """T psihat(0) sum_{n<=X} tau_A(n) tau_B(n) / n."""
    X = int(X)
    if X < 1:
        raise ValueError("X must be >= 1")
    if X > tableA.n_max or X > tableB.n_max:
        raise ValueError(f"X={X} exceeds table limits "
                         f"({tableA.n_max}, {tableB.n_max})")
    if T <= 0:
        raise ValueError("T must be positive")
    n = np.arange(X + 1, dtype=np.float64)
    n[0] = 1.0
    z = kahan_dot_weighted(tableA.values[: X + 1], tableB.values[: X + 1], 1.0 / n)
    return T * weight.psihat0 * complex(z)


def _cluster_poles(poles: list[complex], tol: float = CLUSTER_TOL):
    """Group poles by transitive tol-proximity; clusters must stay apart."""
    n = len(poles)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(poles[i] - poles[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(poles[i])
    clusters = sorted(groups.values(), key=lambda g: (np.mean(g).real, np.mean(g).imag))
    for gi in range(len(clusters)):
        for gj in range(gi + 1, len(clusters)):
            gap = min(abs(x - y) for x in clusters[gi] for y in clusters[gj])
            if gap < tol:
                raise ValueError(
                    f"pole clusters are only {gap:.2e} apart (< {tol}); "
                    "perturb the shifts to separate them")
    return clusters


@dataclass(frozen=True)
class OneSwapResult:
    """One (ah, bh) swap term evaluated by clustered residues."""

    value: complex
    remainder_est: float
    pole_centers: tuple[complex, ...]
    cluster_sizes: tuple[int, ...]
    n_poles: int
    per_cluster: tuple[complex, ...]

    def __post_init__(self):
        if sum(self.cluster_sizes) != self.n_poles:
            raise ValueError("cluster sizes must account for every pole")


def one_swap_detail(A, B, alpha_hat, beta_hat, T: float, X: float,
                    weight: SmoothWeight, P: int, nodes: int = 64,
                    arithmetic: str = "hat") -> OneSwapResult:
    """Evaluate one swap term with its error report and pole bookkeeping.

    arithmetic selects how the factor A_hat(s) is produced on contour nodes:
    "hat" uses the d,q double-sum Euler product; "sets" rebuilds it as a
    plain arithmetic factor of the swapped shift sets (the two are provably
    equal; keeping both routes executable makes the equality testable at
    this level too).
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    alpha_hat = complex(alpha_hat)
    beta_hat = complex(beta_hat)
    if T <= 0:
        raise ValueError("T must be positive")
    if not (T <= X <= X_CAP_FACTOR * T * T):
        raise ValueError(
            f"one-swap regime needs T <= X <= {X_CAP_FACTOR} T^2, got T={T}, X={X}")
    if arithmetic not in ("hat", "sets"):
        raise ValueError("arithmetic must be 'hat' or 'sets'")
    Ap = A.remove(alpha_hat)
    Bp = B.remove(beta_hat)
    cross = [(a, b) for a in Ap.entries for b in Bp.entries]
    poles = [0.0 + 0j, -alpha_hat - beta_hat] + [-(a + b) for a, b in cross]
    clusters = _cluster_poles(poles)

    def a_hat(s: np.ndarray) -> np.ndarray:
        if arithmetic == "hat":
            vals, _ = global_A_hat(A, B, alpha_hat, beta_hat, s, P)
            return np.atleast_1d(vals)
        out = np.empty(s.shape[0], dtype=np.complex128)
        for i, sx in enumerate(s):
            left = Ap.with_entry(-beta_hat - sx)
            right = Bp.translated(sx).with_entry(-alpha_hat)
            out[i], _ = global_A(left, right, P)
        return out

    def H(s: np.ndarray) -> np.ndarray:
        vals = a_hat(s) / s * zeta(1.0 - alpha_hat - beta_hat - s)
        for a, b in cross:
            vals = vals * zeta(1.0 + s + a + b)
        return vals

    # Laurent data per cluster (t-independent)
    cluster_data = []
    for grp in clusters:
        center = complex(np.mean(grp))
        others = [x for g in clusters for x in g if g is not grp]
        gap = min((abs(center - x) for x in others), default=np.inf)
        radius = min(1e-3, 0.5 * gap)
        own = max(abs(x - center) for x in grp)
        if own > 0.45 * radius:
            raise ValueError(
                f"pole cluster at {center:.4g} too wide ({own:.2e}) for its "
                f"contour radius {radius:.2e}; perturb the shifts")
        spec = ContourSpec(center=center, radius=radius, nodes=nodes)
        coeffs = laurent_coefficients(H, spec, m_max=len(grp) - 1)
        cluster_data.append((center, len(grp), coeffs))

    zpref = 1.0 + 0j
    for a in Ap.entries:
        zpref *= zeta(1.0 + a - alpha_hat)
    for b in Bp.entries:
        zpref *= zeta(1.0 + b - beta_hat)

    t, wpsi = _t_rule(weight)
    base = np.exp(-(alpha_hat + beta_hat) * np.log(t * T / (2.0 * np.pi)))
    logY = np.log(2.0 * np.pi * X / (t * T))
    per_cluster = []
    for center, size, coeffs in cluster_data:
        poly = np.zeros_like(logY, dtype=np.complex128)
        for m in range(size):
            poly += coeffs[m] * logY ** m / factorial(m)
        contrib = np.exp(center * logY) * poly
        per_cluster.append(T * zpref * complex(np.sum(wpsi * base * contrib)))

    # left-contour remainder: sample |H| on Re s = REMAINDER_SIGMA
    tau = np.linspace(-40.0, 40.0, 33)
    sline = REMAINDER_SIGMA + 1j * tau
    habs = np.abs(H(sline))
    line_mass = float(np.trapezoid(habs, tau)) / (2.0 * np.pi)
    y_line = np.exp(REMAINDER_SIGMA * logY)
    remainder = abs(T) * abs(zpref) * float(np.sum(np.abs(wpsi * base) * y_line)) * line_mass

    value = complex(sum(per_cluster))
    return OneSwapResult(
        value=value,
        remainder_est=remainder,
        pole_centers=tuple(c for c, _, _ in cluster_data),
        cluster_sizes=tuple(sz for _, sz, _ in cluster_data),
        n_poles=len(poles),
        per_cluster=tuple(per_cluster),
    )


def one_swap_term(A, B, alpha_hat, beta_hat, T: float, X: float,
                  weight: SmoothWeight, P: int) -> complex:
    """Value of the (ah, bh) one-swap term (residues right of Re s = -1/4)."""
    return one_swap_detail(A, B, alpha_hat, beta_hat, T, X, weight, P).value


@dataclass(frozen=True)
class ConjecturedMoment:
    """Diagonal plus admitted swap terms, with the error bookkeeping."""

    value: complex
    diagonal: complex
    swaps: tuple[tuple[complex, complex, complex], ...]  # (ah, bh, value)
    remainder_est: float

    def swap_total(self) -> complex:
        return complex(sum(v for _, _, v in self.swaps))


def conjectured_detail(A, B, T: float, X: float, weight: SmoothWeight, P: int,
                       tables: tuple[ShiftedTauTable, ShiftedTauTable]) -> ConjecturedMoment:
    """Assemble the conjectured moment for polynomial length X.

    X < T admits no swap terms (the polynomial is too short for any
    off-diagonal main term); T <= X <= 0.99 T^2 adds every |U|=|V|=1 term.
    Longer X would need two swaps and is out of numeric scope.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    if X > X_CAP_FACTOR * T * T:
        raise ValueError(
            f"X={X} beyond the one-swap regime cap {X_CAP_FACTOR} T^2 = "
            f"{X_CAP_FACTOR * T * T:.4g}")
    tableA, tableB = tables
    diag = diagonal_term(tableA, tableB, T, X, weight)
    swaps = []
    remainder = 0.0
    if X >= T:
        for ah in A.entries:
            for bh in B.entries:
                res = one_swap_detail(A, B, ah, bh, T, X, weight, P)
                swaps.append((ah, bh, res.value))
                remainder += res.remainder_est
    value = diag + sum(v for _, _, v in swaps)
    return ConjecturedMoment(value=complex(value), diagonal=diag,
                             swaps=tuple(swaps), remainder_est=remainder)


def conjectured_I(A, B, T: float, X: float, weight: SmoothWeight, P: int,
                  tables: tuple[ShiftedTauTable, ShiftedTauTable]) -> complex:
    """Conjectured I(T; X): diagonal plus one-swap terms once X >= T."""
    return conjectured_detail(A, B, T, X, weight, P, tables).value
