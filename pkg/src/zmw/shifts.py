"""Shift sets and generalized divisor functions.

A shift set A = {a_1, ..., a_k} is a small multiset of complex numbers. The
attached divisor function is

    tau_A(n) = sum over m_1 * ... * m_k = n of m_1^(-a_1) * ... * m_k^(-a_k),

the Dirichlet coefficient of prod_a zeta(s + a). tau_A is multiplicative; at
a prime power, tau_A(p^j) is the degree-j complete homogeneous symmetric
polynomial in the quantities p^(-a). All shifts equal to 0 recovers the
classical k-fold divisor function d_k(n).

Tables of tau_A(n) for n <= N are built by a linear sieve over smallest prime
factors and a multiplicative fill; peak transient memory is about 28 bytes per
entry (16-byte value, 8-byte prime-power part, 4-byte sieve entry).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_RADIUS = 0.25
MAX_CARDINALITY = 8
SEPARATION_EPS = 1e-6

_MAGIC = b"ZMW1"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class ShiftSet:
    """Ordered multiset of complex shifts with value semantics.

    Construction validates cardinality (at most 8 entries) and, unless
    max_radius is None, the disk bound |a| <= max_radius (default 0.25).
    Repeated entries are allowed here; operations whose formulas assume
    simple poles call require_separated() and reject them at their own
    boundary. Equality and hashing compare entry multisets (sorted by real
    part, then imaginary part), so two sets listing the same shifts in a
    different order are equal.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, max_radius: float | None = DEFAULT_RADIUS):
        ent = tuple(complex(a) for a in entries)
        if len(ent) > MAX_CARDINALITY:
            raise ValueError(f"shift set has {len(ent)} entries; at most {MAX_CARDINALITY} supported")
        if max_radius is not None:
            for a in ent:
                if abs(a) > max_radius:
                    raise ValueError(f"shift {a} outside radius {max_radius}")
        self._entries = ent

    @classmethod
    def _unchecked(cls, entries) -> "ShiftSet":
        # for internally derived sets (translates, swap unions) that may
        # legitimately leave the user-facing disk
        obj = cls.__new__(cls)
        obj._entries = tuple(complex(a) for a in entries)
        if len(obj._entries) > MAX_CARDINALITY:
            raise ValueError("derived shift set exceeds supported cardinality")
        return obj

    @property
    def entries(self) -> tuple[complex, ...]:
        return self._entries

    @property
    def k(self) -> int:
        return len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def _key(self):
        return tuple(sorted(self._entries, key=lambda z: (z.real, z.imag)))

    def __eq__(self, other):
        if not isinstance(other, ShiftSet):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        inner = ", ".join(f"{a.real:+.6g}{a.imag:+.6g}i" for a in self._entries)
        return f"ShiftSet([{inner}])"

    def remove(self, a) -> "ShiftSet":
        """Set with one occurrence of a removed (exact match required)."""
        a = complex(a)
        ent = list(self._entries)
        try:
            ent.remove(a)
        except ValueError:
            raise ValueError(f"{a} is not an entry of {self!r}") from None
        return ShiftSet._unchecked(ent)

    def translated(self, w) -> "ShiftSet":
        """A_w = {a + w : a in A}."""
        w = complex(w)
        return ShiftSet._unchecked(a + w for a in self._entries)

    def with_entry(self, a) -> "ShiftSet":
        return ShiftSet._unchecked(self._entries + (complex(a),))

    def negated(self) -> "ShiftSet":
        return ShiftSet._unchecked(-a for a in self._entries)

    def is_real(self) -> bool:
        return all(a.imag == 0.0 for a in self._entries)

    def max_abs(self) -> float:
        return max((abs(a) for a in self._entries), default=0.0)

    def max_abs_real(self) -> float:
        return max((abs(a.real) for a in self._entries), default=0.0)

    def max_neg_real(self) -> float:
        """max over entries of -Re(a); series growth exponent of tau."""
        return max((-a.real for a in self._entries), default=0.0)

    def require_nonempty(self, what: str = "operation") -> "ShiftSet":
        if not self._entries:
            raise ValueError(f"{what} requires at least one shift")
        return self

    def require_separated(self, eps: float = SEPARATION_EPS, what: str = "operation") -> "ShiftSet":
        """Reject entry pairs closer than eps (simple-pole guard)."""
        ent = self._entries
        for i in range(len(ent)):
            for j in range(i + 1, len(ent)):
                if abs(ent[i] - ent[j]) < eps:
                    raise ValueError(
                        f"{what} requires pairwise separated shifts; "
                        f"|{ent[i]} - {ent[j]}| < {eps}"
                    )
        return self


def as_shift_set(shifts) -> ShiftSet:
    """Coerce an iterable of numbers to a ShiftSet (defaults applied)."""
    if isinstance(shifts, ShiftSet):
        return shifts
    return ShiftSet(shifts)


def tau_prime_powers(shifts, p: int, j_max: int) -> np.ndarray:
    """tau_A(p^j) for j = 0..j_max.

    Built by the prefix recursion for complete homogeneous symmetric
    polynomials: adding a variable x = p^(-a) updates
    h[j] <- h[j] + x * h[j-1] in increasing j. Adding the entries of A one
    at a time therefore realizes tau_A(p^j) = tau_{A'}(p^j) + x * tau_A(p^(j-1))
    with A' lacking the last-added shift.
    """
    shifts = as_shift_set(shifts)
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    if not _is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    h = np.zeros(j_max + 1, dtype=np.complex128)
    h[0] = 1.0
    lp = np.log(float(p))
    for a in shifts:
        x = np.exp(-a * lp)
        for r in range(1, j_max + 1):
            h[r] += x * h[r - 1]
    return h


def tau_powers_grid(shifts, primes: np.ndarray, j_max: int) -> np.ndarray:
    """tau_A(p^j) on a vector of primes; shape (j_max+1, len(primes))."""
    shifts = as_shift_set(shifts)
    primes = np.asarray(primes, dtype=np.float64)
    h = np.zeros((j_max + 1, primes.shape[0]), dtype=np.complex128)
    h[0] = 1.0
    lp = np.log(primes)
    for a in shifts:
        x = np.exp(-a * lp)
        for r in range(1, j_max + 1):
            h[r] += x * h[r - 1]
    return h


def tau_at(shifts, n: int) -> complex:
    """tau_A(n) by trial-division factorization (spot checks, small n)."""
    shifts = as_shift_set(shifts)
    if n < 1:
        raise ValueError("n must be >= 1")
    val = 1.0 + 0j
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            val *= tau_prime_powers(shifts, p, e)[e]
        p += 1 if p == 2 else 2
    if m > 1:
        val *= tau_prime_powers(shifts, m, 1)[1]
    return complex(val)


@dataclass(frozen=True)
class ShiftedTauTable:
    """tau_A(n) for 1 <= n <= n_max; values[0] is unused and zero."""

    shifts: ShiftSet
    n_max: int
    values: np.ndarray

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.values.shape != (self.n_max + 1,):
            raise ValueError("values must have shape (n_max+1,)")

    def is_real(self) -> bool:
        return self.shifts.is_real()

    def real_values(self) -> np.ndarray:
        """Contiguous float64 view of the values; shifts must be real."""
        if not self.is_real():
            raise ValueError("table has complex shifts")
        return np.ascontiguousarray(self.values.real)

    def to_file(self, path) -> None:
        """Binary export: 'ZMW1', k, n_max, shifts, then re/im value pairs."""
        ent = self.shifts.entries
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IQ", len(ent), self.n_max))
            for a in ent:
                fh.write(struct.pack("<dd", a.real, a.imag))
            buf = np.empty((self.n_max, 2), dtype="<f8")
            buf[:, 0] = self.values[1:].real
            buf[:, 1] = self.values[1:].imag
            buf.tofile(fh)

    @classmethod
    def from_file(cls, path) -> "ShiftedTauTable":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != _MAGIC:
                raise ValueError(f"bad magic {magic!r}; not a tau table file")
            k, n_max = struct.unpack("<IQ", fh.read(12))
            if k > MAX_CARDINALITY:
                raise ValueError(f"table claims {k} shifts; at most {MAX_CARDINALITY} supported")
            ent = [complex(*struct.unpack("<dd", fh.read(16))) for _ in range(k)]
            buf = np.fromfile(fh, dtype="<f8")
        if buf.shape[0] != 2 * n_max:
            raise ValueError("truncated tau table file")
        values = np.zeros(n_max + 1, dtype=np.complex128)
        values[1:] = buf[0::2] + 1j * buf[1::2]
        return cls(shifts=ShiftSet._unchecked(ent), n_max=int(n_max), values=values)


def tau_table(shifts, n_max: int, spf: np.ndarray | None = None) -> ShiftedTauTable:
    """Table of tau_A(n) for n <= n_max.

    Args:
        shifts: the shift set A.
        n_max: table length; the sieve is linear in n_max.
        spf: optional precomputed smallest-prime-factor table covering n_max
            (shared across tables for different shift sets).
    """
    shifts = as_shift_set(shifts)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if spf is None:
        spf = _kernels.spf_sieve(n_max)
    elif spf.shape[0] < n_max + 1:
        raise ValueError("provided spf table is too short")
    sarr = np.asarray(shifts.entries, dtype=np.complex128)
    ppval = _kernels.prime_power_tau(spf[: n_max + 1], sarr)
    values = _kernels.fill_tau(spf[: n_max + 1], ppval)
    return ShiftedTauTable(shifts=shifts, n_max=n_max, values=values)
