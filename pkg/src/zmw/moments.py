"""Empirical Dirichlet-polynomial mean squares and the experiment report.

The object is

    I(T; X) = T sum_{m,n <= X} tau_A(m) tau_B(n) psihat((T/2pi) log(m/n))
              / sqrt(mn),

evaluated exactly over the band where psihat is numerically nonzero: with
xi = (T/2pi) log(m/n), the weight's transform is below its cutoff level for
|xi| past the grid reach, so for each m only n in [m e^(-w), m e^w] with
w = 2 pi Xi / T contribute. The double sum is walked once over ordered pairs
n < m, folding in the mirrored pair through psihat(-xi) = conj(psihat(xi)),
plus the diagonal m = n. Work is O(X (1 + X Xi / T)).

Accumulation is compensated and blocked at a fixed width, with an ordered
reduction over blocks, so results are bit-identical across thread counts.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import (BLOCK, banded_sum_complex, banded_sum_real,
                       kahan_dot_weighted, kahan_sum)
from ._version import __version__ as _pkg_version
from .recipe import conjectured_detail
from .shifts import ShiftSet, ShiftedTauTable, as_shift_set, tau_table
from .special import SmoothWeight

def I_empirical(tableA: ShiftedTauTable, tableB: ShiftedTauTable, T: float,
                X: int, weight: SmoothWeight) -> complex:
    """Band-limited evaluation of the weighted mean square at length X."""
    X = int(X)
    if T <= 0:
        raise ValueError("T must be positive")
    if X < 1:
        raise ValueError("X must be >= 1")
    if X > tableA.n_max or X > tableB.n_max:
        raise ValueError(f"X={X} exceeds table limits "
                         f"({tableA.n_max}, {tableB.n_max})")
    scale = T / (2.0 * np.pi)
    halfwidth = weight.xi_max() / scale
    if halfwidth >= np.log(max(X, 2)):
        warnings.warn(
            "band halfwidth exceeds log X: every pair is in band and the "
            "cost is the full quadratic double sum", stacklevel=2)
    n = np.arange(X + 1, dtype=np.float64)
    n[0] = 1.0
    diag = complex(kahan_dot_weighted(tableA.values[: X + 1],
                                      tableB.values[: X + 1], 1.0 / n))
    diag *= weight.psihat0
    if X < 2:
        return T * diag
    logs = np.log(n)
    invs = 1.0 / np.sqrt(n)
    gre, gim = weight.grid_ext()
    expneg = float(np.exp(-halfwidth))
    nblocks = (X - 1 + BLOCK - 1) // BLOCK
    out_re = np.zeros(nblocks, dtype=np.float64)
    out_im = np.zeros(nblocks, dtype=np.float64)
    args = (X, scale, expneg, gre, gim, 1.0 / weight.dxi, logs, invs,
            out_re, out_im)
    if tableA.is_real() and tableB.is_real():
        banded_sum_real(tableA.real_values(), tableB.real_values(), *args)
    else:
        banded_sum_complex(tableA.values, tableB.values, *args)
    off = complex(kahan_sum(out_re), kahan_sum(out_im))
    return T * (diag + off)


@dataclass(frozen=True)
class ExperimentReport:
    """One empirical-vs-conjectured comparison, ready for serialization.

    rel_dev is abs_dev / |conjectured| (inf when the conjectured value is
    zero). Timings are carried separately so deterministic payload
    comparisons can drop them.
    """

    kind: str
    config: dict
    empirical: complex
    conjectured: complex
    breakdown: dict
    abs_dev: float
    rel_dev: float
    error_estimates: list
    timing: dict
    schema_version: int = 1
    version: str = _pkg_version

    def payload(self, include_timing: bool = True) -> dict:
        """JSON-ready dict; complex values become [re, im] pairs."""
        out = {
            "kind": self.kind,
            "schema_version": self.schema_version,
            "version": self.version,
            "config": _jsonify(self.config),
            "empirical": _jsonify(self.empirical),
            "conjectured": _jsonify(self.conjectured),
            "breakdown": _jsonify(self.breakdown),
            "abs_dev": self.abs_dev,
            "rel_dev": self.rel_dev,
            "error_estimates": _jsonify(self.error_estimates),
        }
        if include_timing:
            out["timing"] = _jsonify(self.timing)
        return out


def _jsonify(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, ShiftSet):
        return [[a.real, a.imag] for a in obj.entries]
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    return obj


def _shift_key(z: complex) -> str:
    return format(complex(z), "g")


def I_report(A, B, T: float, X: int, weight: SmoothWeight, P: int,
             tables: tuple[ShiftedTauTable, ShiftedTauTable] | None = None) -> ExperimentReport:
    """Run both sides of the moment comparison with shared tables.

    The report embeds the full configuration, the conjectured breakdown
    (diagonal, per-pair swap terms, remainder estimate), and per-phase
    timings.
    """
    A = as_shift_set(A)
    B = as_shift_set(B)
    X = int(X)
    timing = {}
    t0 = time.perf_counter()
    if tables is None:
        tables = (tau_table(A, X), tau_table(B, X))
    timing["tables_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    emp = I_empirical(tables[0], tables[1], T, X, weight)
    timing["empirical_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    conj = conjectured_detail(A, B, T, X, weight, P, tables)
    timing["conjectured_s"] = time.perf_counter() - t0

    abs_dev = abs(emp - conj.value)
    rel_dev = abs_dev / abs(conj.value) if conj.value != 0 else float("inf")
    breakdown = {
        "diagonal": conj.diagonal,
        "one_swap": {f"{_shift_key(ah)}|{_shift_key(bh)}": v
                     for ah, bh, v in conj.swaps},
        "swap_total": conj.swap_total(),
    }
    return ExperimentReport(
        kind="moment",
        config={
            "A": A, "B": B, "T": T, "X": X, "N": tables[0].n_max, "P": P,
            "Q_cutoff": None,
            "weight": {"cutoff_level": weight.cutoff_level, "dxi": weight.dxi,
                       "xi_max": weight.xi_max()},
        },
        empirical=emp,
        conjectured=conj.value,
        breakdown=breakdown,
        abs_dev=abs_dev,
        rel_dev=rel_dev,
        error_estimates=[{"label": "one_swap_remainder", "value": conj.remainder_est}],
        timing=timing,
    )
