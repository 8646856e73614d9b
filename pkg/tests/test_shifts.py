"""Shift multisets and the generalized divisor tables they generate."""

import numpy as np
import pytest

from zmw.shifts import (
    ShiftSet,
    ShiftedTauTable,
    as_shift_set,
    tau_at,
    tau_powers_grid,
    tau_prime_powers,
    tau_table,
)


def brute_tau(entries, n):
    """Literal sum over ordered factorizations n = m_1 * ... * m_k."""
    if not entries:
        return 1.0 + 0j if n == 1 else 0.0 + 0j
    a = entries[0]
    rest = entries[1:]
    total = 0.0 + 0j
    for m in range(1, n + 1):
        if n % m == 0:
            total += m ** (-a) * brute_tau(rest, n // m)
    return total


class TestShiftSet:
    def test_order_insensitive_equality_and_hash(self):
        s1 = ShiftSet([0.01, -0.02, 0.03j])
        s2 = ShiftSet([0.03j, 0.01, -0.02])
        assert s1 == s2
        assert hash(s1) == hash(s2)

    def test_multiset_keeps_repeats(self):
        s = ShiftSet([0.0, 0.0])
        assert len(s) == 2
        assert s != ShiftSet([0.0])

    def test_radius_enforced(self):
        with pytest.raises(ValueError, match="radius"):
            ShiftSet([0.3])
        # explicit radius lifts the default cap
        assert len(ShiftSet([0.3], max_radius=0.5)) == 1

    def test_cardinality_cap(self):
        with pytest.raises(ValueError, match="entries"):
            ShiftSet([k * 1e-3 for k in range(9)])

    def test_remove_deletes_one_copy(self):
        s = ShiftSet([0.0, 0.0, 0.01])
        r = s.remove(0.0)
        assert sorted(x.real for x in r.entries) == [0.0, 0.01]
        with pytest.raises(ValueError, match="not an entry"):
            s.remove(0.99)

    def test_translated_and_negated(self):
        s = ShiftSet([0.01, -0.02])
        t = s.translated(0.05)
        assert np.allclose(sorted(x.real for x in t.entries), [0.03, 0.06])
        n = s.negated()
        assert set(n.entries) == {-0.01 + 0j, 0.02 + 0j}

    def test_with_entry_appends(self):
        s = ShiftSet([0.01])
        assert len(s.with_entry(-0.02)) == 2

    def test_empty_set_guards(self):
        e = ShiftSet([])
        assert len(e) == 0
        with pytest.raises(ValueError, match="at least one"):
            e.require_nonempty("unit test")

    def test_require_separated(self):
        s = ShiftSet([0.0, 1e-9])
        with pytest.raises(ValueError, match="separated"):
            s.require_separated(1e-6, "unit test")
        s2 = ShiftSet([0.0, 0.01])
        assert s2.require_separated(1e-6, "unit test") is s2

    def test_as_shift_set_passthrough_and_coercion(self):
        s = ShiftSet([0.01])
        assert as_shift_set(s) is s
        assert as_shift_set([0.01]) == s


class TestTauPrimePowers:
    def test_constant_set_counts_factorizations(self):
        # all-zero shifts: tau is the classical k-fold divisor count
        row = tau_prime_powers([0.0, 0.0], 2, 6)
        assert np.allclose(row.real, np.arange(1, 8))
        row3 = tau_prime_powers([0.0, 0.0, 0.0], 2, 5)
        expect = [(j + 1) * (j + 2) // 2 for j in range(6)]
        assert np.allclose(row3.real, expect)

    def test_singleton_is_power(self):
        a = 0.03 - 0.01j
        row = tau_prime_powers([a], 5, 5)
        expect = [5 ** (-a * j) for j in range(6)]
        assert np.allclose(row, expect)

    def test_empty_set_is_indicator_of_one(self):
        row = tau_prime_powers([], 3, 4)
        assert np.allclose(row, [1, 0, 0, 0, 0])

    def test_matches_brute_force(self, rng):
        entries = [complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
                   for _ in range(3)]
        for p in (2, 3):
            row = tau_prime_powers(entries, p, 4)
            for j in range(5):
                assert abs(row[j] - brute_tau(entries, p**j)) < 1e-12

    def test_conjugate_symmetry(self):
        entries = [0.02 + 0.05j, -0.01 - 0.03j]
        conj = [e.conjugate() for e in entries]
        row = tau_prime_powers(entries, 7, 6)
        rowc = tau_prime_powers(conj, 7, 6)
        assert np.allclose(rowc, np.conj(row))

    def test_grid_matches_single_prime(self):
        entries = [0.01, -0.04]
        primes = np.array([2, 3, 5, 7, 11])
        grid = tau_powers_grid(entries, primes, 5)
        for i, p in enumerate(primes):
            assert np.allclose(grid[:, i], tau_prime_powers(entries, int(p), 5))


class TestTauAt:
    def test_multiplicative_assembly(self, rng):
        entries = [complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
                   for _ in range(2)]
        for n in (1, 12, 360, 97, 1024):
            assert abs(tau_at(entries, n) - brute_tau(entries, n)) < 1e-11

    def test_divisor_count_at_composite(self):
        assert tau_at([0.0, 0.0], 60) == pytest.approx(12)  # d(60)
        assert tau_at([0.0, 0.0, 0.0], 8) == pytest.approx(10)  # d_3(8)


class TestTauTable:
    def test_matches_pointwise(self, rng):
        entries = [complex(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08))
                   for _ in range(2)]
        tab = tau_table(entries, 200)
        for n in (1, 2, 17, 96, 180, 200):
            assert abs(tab.values[n] - tau_at(entries, n)) < 1e-12

    def test_index_zero_unused(self):
        tab = tau_table([0.0], 10)
        assert tab.values[0] == 0
        assert np.allclose(tab.values[1:], 1.0)

    def test_real_detection(self):
        assert tau_table([0.01, -0.02], 50).is_real()
        assert not tau_table([0.01j], 50).is_real()
        r = tau_table([0.0, 0.0], 30).real_values()
        assert r.dtype == np.float64
        assert r[12] == 6  # d(12)

    def test_file_round_trip(self, tmp_path):
        tab = tau_table([0.02, -0.01 + 0.03j], 500)
        path = tmp_path / "tau.zmwt"
        tab.to_file(path)
        back = ShiftedTauTable.from_file(path)
        assert back.shifts == tab.shifts
        assert back.n_max == tab.n_max
        assert np.array_equal(back.values, tab.values)

    def test_file_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.zmwt"
        path.write_bytes(b"not a table at all")
        with pytest.raises(ValueError, match="magic|format"):
            ShiftedTauTable.from_file(path)

    def test_file_rejects_truncation(self, tmp_path):
        tab = tau_table([0.01], 100)
        path = tmp_path / "cut.zmwt"
        tab.to_file(path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(ValueError, match="truncat|short|size"):
            ShiftedTauTable.from_file(path)
