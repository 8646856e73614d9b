"""Shifted-correlation machinery: density expansions, the additive-divisor
main term, and the exact empirical correlation sums."""

import numpy as np
import pytest

from zmw.correlation import (
    CorrelationJob,
    D_empirical,
    P_density,
    correlation_rows,
    f_density,
    m_main,
    m_main_exact_powers,
    m_prime,
)
from zmw.euler import G_of
from zmw.shifts import ShiftSet, as_shift_set, tau_table
from zmw.special import zeta

GAMMA = 0.5772156649015329


def p_contour_oracle(A, u, q, sieve, nodes=1024, radius=0.2):
    """(1/2pi i) contour-int G_A(1+s, q) prod_a zeta(1+s+a) (u/q)^s ds.

    Every shift sits inside |s| = radius (the draws below stay in the
    0.15-box), so the integral collects exactly the simple poles the
    residue expansion claims.
    """
    A = as_shift_set(A)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    s = radius * np.exp(1j * theta)
    total = 0.0 + 0j
    logw = np.log(u / q)
    for sv in s:
        val = G_of(A, 1.0 + sv, q, sieve) * np.exp(sv * logw)
        for a in A:
            val *= zeta(1.0 + sv + a)
        total += val * sv  # ds = i s dtheta; the 1/(2 pi i) eats i dtheta
    return complex(total / nodes)


class TestPDensity:
    def test_singleton_power(self, sieve):
        a = 0.03 - 0.02j
        got = P_density([a], 1000.0, 1, sieve)
        assert got == pytest.approx(1000.0 ** (-a), rel=1e-12)

    def test_matches_contour_oracle(self, sieve, rng):
        for _ in range(6):
            k = int(rng.integers(1, 4))
            A = ShiftSet([complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
                          for _ in range(k)])
            try:
                A.require_separated(1e-2, "draw")
            except ValueError:
                continue
            q = int(rng.choice([1, 2, 3, 4, 6, 12]))
            got = P_density(A, 50.0, q, sieve)
            want = p_contour_oracle(A, 50.0, q, sieve)
            assert abs(got - want) <= 1e-8 * max(1.0, abs(want))

    def test_symmetric_pair_limit(self, sieve):
        # A = {d, -d}, q = 1: zeta(1-2d) u^-d + zeta(1+2d) u^d -> log u + 2 gamma
        u = 1000.0
        got = P_density([1e-3, -1e-3], u, 1, sieve)
        assert abs(got - (np.log(u) + 2 * GAMMA)) < 1e-3

    def test_repeated_shifts_rejected(self, sieve):
        with pytest.raises(ValueError, match="simple poles"):
            P_density([0.0, 0.0], 100.0, 1, sieve)

    def test_u_q_ordering(self, sieve):
        with pytest.raises(ValueError, match="u >= q"):
            P_density([0.01], 5.0, 10, sieve)


class TestFDensity:
    def test_matches_direct_q_sum(self, sieve):
        A = ShiftSet([0.02, -0.05])
        B = ShiftSet([0.01])
        u, d, Q = 300.0, 2, 60
        direct = 0.0 + 0j
        for q in range(1, Q + 1):
            mu = sieve.mu(q)
            if mu == 0:
                continue
            direct += (mu / q**2) * P_density(A, u, q * d, sieve) * \
                P_density(B, u, q * d, sieve)
        got = f_density(A, B, u, d, Q, sieve)
        assert abs(got - direct) < 1e-11 * max(1.0, abs(direct))

    def test_tail_shrinks_with_cutoff(self, sieve):
        A = ShiftSet([0.02, -0.05])
        B = ShiftSet([0.01, 0.03])
        _, tail_small = f_density(A, B, 500.0, 1, 60, sieve, with_tail=True)
        _, tail_big = f_density(A, B, 500.0, 1, 600, sieve, with_tail=True)
        assert tail_big < tail_small

    def test_guards(self, sieve):
        A, B = [0.02], [0.01]
        with pytest.raises(ValueError, match="Q_cutoff"):
            f_density(A, B, 100.0, 1, 10, sieve)
        with pytest.raises(ValueError, match="sieve limit"):
            f_density(A, B, 100.0, sieve.limit, 60, sieve)
        with pytest.warns(UserWarning, match="outside the calibrated range"):
            f_density(A, B, 10.0, 40, 60, sieve)


class TestMainTerm:
    def test_m_prime_is_divisor_sum_of_f(self, sieve):
        A = ShiftSet([0.02, -0.05])
        B = ShiftSet([0.01])
        u, h, Q = 400.0, 12, 60
        want = sum(f_density(A, B, u, d, Q, sieve) / d
                   for d in (1, 2, 3, 4, 6, 12))
        got = m_prime(A, B, u, h, Q, sieve)
        assert abs(got - want) < 1e-12 * max(1.0, abs(want))

    def test_m_prime_guards(self, sieve):
        with pytest.raises(ValueError, match="diagonal"):
            m_prime([0.01], [0.02], 100.0, 0, 60, sieve)
        with pytest.raises(ValueError, match="swap the shift sets"):
            m_prime([0.01], [0.02], 100.0, -3, 60, sieve)
        with pytest.raises(ValueError, match="h="):
            m_prime([0.01], [0.02], 100.0, 90, 60, sieve)

    def test_quadrature_matches_antiderivative(self, sieve, rng):
        # the integrand is a finite power combination, so the two routes
        # must agree to roundoff
        for _ in range(4):
            A = ShiftSet([complex(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08))
                          for _ in range(int(rng.integers(1, 3)))])
            B = ShiftSet([complex(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08))
                          for _ in range(int(rng.integers(1, 3)))])
            u = float(rng.integers(100, 5000))
            h = int(rng.choice([1, 2, 6]))
            quad = m_main(A, B, u, h, 32, 80, sieve)
            anti = m_main_exact_powers(A, B, u, h, 80, sieve)
            assert abs(quad - anti) <= 1e-12 * max(1.0, abs(anti))

    def test_m_at_one_is_zero(self, sieve):
        assert m_main([0.01], [0.02], 1.0, 1, 32, 60, sieve) == 0.0


class TestDEmpirical:
    def test_hand_values(self):
        tA = tau_table([0.0, 0.0], 200)
        tB = tau_table([0.0], 200)
        # sum_{n<=10} d(n) * 1 = 27
        assert D_empirical(tA, tB, 10, 1) == pytest.approx(27.0)
        tC = tau_table([0.0], 200)
        assert D_empirical(tC, tC, 100, 5) == pytest.approx(100.0)

    def test_matches_numpy_oracle(self, rng):
        A = [complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)) for _ in range(2)]
        B = [complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)) for _ in range(2)]
        u, hmax = 500, 3
        tA = tau_table(A, u)
        tB = tau_table(B, u + hmax)
        for h in (1, 3):
            want = np.sum(tA.values[1 : u + 1] * tB.values[1 + h : u + h + 1])
            assert abs(D_empirical(tA, tB, u, h) - want) < 1e-10

    def test_bounds(self):
        tA = tau_table([0.0], 50)
        tB = tau_table([0.0], 52)
        with pytest.raises(ValueError, match="exceeds left"):
            D_empirical(tA, tB, 51, 1)
        with pytest.raises(ValueError, match="exceeds right"):
            D_empirical(tA, tB, 50, 3)
        with pytest.raises(ValueError, match="h must be"):
            D_empirical(tA, tB, 10, 0)


class TestRows:
    def test_schema_and_determinism(self):
        job = CorrelationJob(A=ShiftSet([0.02, -0.02]), B=ShiftSet([0.02, -0.02]),
                             u_max=2000, h_list=(1, 2, 3), Q_cutoff=60)
        rows1 = correlation_rows(job)
        rows2 = correlation_rows(job)
        assert rows1 == rows2
        assert [r["h"] for r in rows1] == [1, 2, 3]
        for r in rows1:
            assert set(r) == {"u", "h", "D_real", "D_imag", "m_real", "m_imag", "rel_dev"}
            assert r["u"] == 2000
            # main term should already be in the right ballpark here
            assert r["rel_dev"] < 0.2

    def test_u_list_adds_rows(self):
        job = CorrelationJob(A=ShiftSet([0.02, -0.02]), B=ShiftSet([0.02, -0.02]),
                             u_max=3000, h_list=(1,), Q_cutoff=60)
        rows = correlation_rows(job, u_list=(300, 3000))
        assert [r["u"] for r in rows] == [300, 3000]
        with pytest.raises(ValueError, match="u_max"):
            correlation_rows(job, u_list=(300, 4000))

    def test_job_validation(self):
        ok = dict(A=ShiftSet([0.02]), B=ShiftSet([0.01]), u_max=100, h_list=(1,))
        CorrelationJob(**ok)
        with pytest.raises(ValueError, match="u_max"):
            CorrelationJob(**{**ok, "u_max": 5})
        with pytest.raises(ValueError, match="nonempty"):
            CorrelationJob(**{**ok, "h_list": ()})
        with pytest.raises(ValueError, match="outside"):
            CorrelationJob(**{**ok, "h_list": (80,)})
        with pytest.raises(ValueError, match="Q_cutoff"):
            CorrelationJob(**{**ok, "Q_cutoff": 10})
        with pytest.raises(ValueError, match="simple poles"):
            CorrelationJob(**{**ok, "A": ShiftSet([0.0, 0.0])})
