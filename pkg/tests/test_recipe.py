"""Subset-swap recipe terms and the clustered-residue one-swap evaluation."""

import numpy as np
import pytest
from scipy.integrate import quad

from zmw.euler import Z_product, global_A
from zmw.recipe import (
    ConjecturedMoment,
    OneSwapResult,
    conjectured_detail,
    conjectured_I,
    diagonal_term,
    one_swap_detail,
    one_swap_term,
    recipe_R,
    recipe_terms,
    swap_census,
)
from zmw.shifts import ShiftSet, tau_table
from zmw.special import bump, zeta


class TestCensusAndTerms:
    def test_census_counts(self):
        assert swap_census(3, 3, 3) == 20  # 1 + 9 + 9 + 1
        assert swap_census(3, 3, 1) == 10
        assert swap_census(2, 1, 1) == 3
        assert swap_census(2, 2, 0) == 1

    def test_term_count_matches_census(self, weight):
        A = ShiftSet([0.02, -0.03, 0.05])
        B = ShiftSet([0.01, -0.04, 0.06])
        terms = recipe_terms(A, B, 50.0, weight, 500, 3)
        assert len(terms) == 20
        assert sorted({t["swaps"] for t in terms}) == [0, 1, 2, 3]

    def test_zero_swap_record(self, weight):
        A = ShiftSet([0.03, -0.02 + 0.01j])
        B = ShiftSet([0.01j, -0.04])
        (rec,) = recipe_terms(A, B, 100.0, weight, 2000, 0)
        assert rec["swaps"] == 0 and rec["U"] == () and rec["V"] == ()
        vA, _ = global_A(A, B, 2000)
        want = 100.0 * weight.psihat0 * vA * Z_product(A, B)
        assert abs(rec["value"] - want) <= 1e-12 * abs(want)

    def test_k1_closed_form_against_quadrature(self, weight):
        # k = l = 1: R = T int psi(t) [zeta(1+a+b) + (tT/2pi)^-(a+b)
        # zeta(1-a-b)] dt, arithmetic factors are exactly 1
        a, b = 0.03, 0.02
        T = 50.0
        z1 = complex(zeta(1.0 + a + b))
        z2 = complex(zeta(1.0 - a - b))

        def integrand(t):
            return float(bump(t)) * (z1 + (t * T / (2 * np.pi)) ** (-(a + b)) * z2).real

        want, err = quad(integrand, 1.0, 2.0, epsabs=1e-13, limit=200)
        want *= T
        got = recipe_R(ShiftSet([a]), ShiftSet([b]), T, weight, 2000, 1)
        assert abs(got - want) <= 1e-9 * abs(want)

    def test_pole_guard_names_subsets(self, weight):
        A = ShiftSet([0.01, 0.04])
        B = ShiftSet([-0.01, 0.02])
        with pytest.raises(ValueError, match=r"U=.*V=.*pole"):
            recipe_terms(A, B, 50.0, weight, 500, 1)

    def test_input_guards(self, weight):
        with pytest.raises(ValueError, match="T must be"):
            recipe_terms([0.01], [0.02], 0.0, weight, 500, 0)
        with pytest.raises(ValueError, match="max_swaps"):
            recipe_terms([0.01], [0.02], 10.0, weight, 500, -1)


class TestDiagonal:
    def test_harmonic_hand_value(self, weight):
        tab = tau_table([0.0], 64)
        H10 = sum(1.0 / k for k in range(1, 11))
        d = diagonal_term(tab, tab, 1.0, 10, weight)
        assert abs(d - weight.psihat0 * H10) < 1e-15
        assert abs(diagonal_term(tab, tab, 7.0, 10, weight) - 7 * d) < 1e-12

    def test_bounds(self, weight):
        tab = tau_table([0.0], 64)
        with pytest.raises(ValueError, match="exceeds table"):
            diagonal_term(tab, tab, 1.0, 65, weight)
        with pytest.raises(ValueError, match="X must be"):
            diagonal_term(tab, tab, 1.0, 0, weight)


class TestOneSwap:
    def test_hat_and_sets_routes_agree(self, weight):
        T = 300.0
        X = int(T**1.5)
        r_hat = one_swap_detail([0.02], [0.01], 0.02, 0.01, T, X, weight, 3000,
                                arithmetic="hat")
        r_set = one_swap_detail([0.02], [0.01], 0.02, 0.01, T, X, weight, 3000,
                                arithmetic="sets")
        assert isinstance(r_hat, OneSwapResult)
        assert r_hat.n_poles == 2
        assert r_hat.cluster_sizes == (1, 1)
        assert abs(r_hat.value - r_set.value) <= 1e-9 * abs(r_hat.value)

    def test_value_grows_with_x(self, weight):
        T = 300.0
        mags = [abs(one_swap_term([0.02], [0.01], 0.02, 0.01, T, f * T, weight, 2000))
                for f in (1.2, 2.0, 4.0)]
        assert mags[0] < mags[1] < mags[2]

    def test_coincident_pair_makes_double_pole(self, weight):
        # ah + bh = 0: the zeta pole lands on the 1/s pole; one cluster of 2
        T = 300.0
        X = int(T**1.5)
        det = one_swap_detail([0.01], [-0.01], 0.01, -0.01, T, X, weight, 3000)
        assert det.n_poles == 2
        assert det.cluster_sizes == (2,)
        det2 = one_swap_detail([0.01], [-0.01], 0.01, -0.01, T, X, weight, 3000,
                               arithmetic="sets")
        assert abs(det.value - det2.value) <= 1e-6 * abs(det.value)

    def test_per_cluster_sums_to_value(self, weight):
        det = one_swap_detail([0.02, -0.01], [0.015, -0.025], 0.02, 0.015,
                              300.0, 3000, weight, 1000)
        assert det.n_poles == 3  # 0, -ah-bh, one cross pole
        assert sum(det.cluster_sizes) == det.n_poles
        assert abs(sum(det.per_cluster) - det.value) < 1e-12 * max(1.0, abs(det.value))
        assert det.remainder_est >= 0.0

    def test_near_poles_cluster_without_error(self, weight):
        # 0 and -ah-bh sit 5e-5 apart: one cluster of two, third pole clear
        A = ShiftSet([0.01, 0.02])
        B = ShiftSet([-0.00995, -0.01975])
        det = one_swap_detail(A, B, 0.01, -0.00995, 300.0, 3000.0, weight, 500)
        assert det.n_poles == 3
        assert sorted(det.cluster_sizes) == [1, 2]

    def test_wide_cluster_rejected(self, weight):
        # 0 and -ah-bh merge at 9e-5 spread, but the cross pole at 1.95e-4
        # forces a contour too tight for that spread
        A = ShiftSet([0.01, 0.02])
        B = ShiftSet([-0.00991, -0.019805])
        with pytest.raises(ValueError, match="too wide|perturb"):
            one_swap_detail(A, B, 0.01, -0.00991, 300.0, 3000.0, weight, 500)

    def test_regime_bounds(self, weight):
        with pytest.raises(ValueError, match="one-swap regime"):
            one_swap_detail([0.02], [0.01], 0.02, 0.01, 300.0, 200.0, weight, 500)
        with pytest.raises(ValueError, match="one-swap regime"):
            one_swap_detail([0.02], [0.01], 0.02, 0.01, 300.0, 1e6, weight, 500)
        with pytest.raises(ValueError, match="arithmetic"):
            one_swap_detail([0.02], [0.01], 0.02, 0.01, 300.0, 3000.0, weight, 500,
                            arithmetic="other")


class TestRecipeConsistency:
    def test_zero_cluster_matches_recipe_one_swap(self, weight):
        # the residue at s ~ 0 of each (ah, bh) term reproduces the plain
        # recipe's 1-swap record for that pair; summed over pairs the two
        # bookkeepings must agree
        A = ShiftSet([0.02, -0.01])
        B = ShiftSet([0.015, -0.025])
        T, P = 200.0, 3000
        X = int(T**1.4)
        zero_sum = 0.0 + 0j
        for ah in A.entries:
            for bh in B.entries:
                det = one_swap_detail(A, B, ah, bh, T, X, weight, P)
                zc = [v for c, v in zip(det.pole_centers, det.per_cluster)
                      if abs(c) < 1e-5]
                assert len(zc) == 1, det.pole_centers
                zero_sum += zc[0]
        rec_one = sum(r["value"] for r in recipe_terms(A, B, T, weight, P, 1)
                      if r["swaps"] == 1)
        assert abs(zero_sum - rec_one) <= 1e-6 * abs(rec_one)


class TestConjecturedMoment:
    def test_short_polynomial_is_diagonal_only(self, weight):
        A = ShiftSet([0.01])
        B = ShiftSet([-0.01])
        T = 500.0
        X = 250
        tabs = (tau_table(A, X), tau_table(B, X))
        det = conjectured_detail(A, B, T, X, weight, 1000, tabs)
        assert det.swaps == ()
        assert det.value == det.diagonal
        assert det.remainder_est == 0.0

    def test_additivity_and_census(self, weight):
        A = ShiftSet([0.02, -0.01])
        B = ShiftSet([0.015, -0.025])
        T = 200.0
        X = int(T**1.4)
        tabs = (tau_table(A, X), tau_table(B, X))
        det = conjectured_detail(A, B, T, X, weight, 1000, tabs)
        assert isinstance(det, ConjecturedMoment)
        assert len(det.swaps) == len(A) * len(B)
        assert det.value == pytest.approx(complex(det.diagonal + det.swap_total()))
        assert conjectured_I(A, B, T, X, weight, 1000, tabs) == det.value

    def test_x_cap(self, weight):
        A = ShiftSet([0.01])
        B = ShiftSet([-0.01])
        tabs = (tau_table(A, 100), tau_table(B, 100))
        with pytest.raises(ValueError, match="one-swap regime cap"):
            conjectured_detail(A, B, 10.0, 100.0, weight, 1000, tabs)
