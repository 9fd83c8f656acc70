"""The maximal-average statistic, partial sums, limits, and verdicts."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_max_stat, random_nonneg_function
from nsdyn import zoo
from nsdyn.action import CubeWindow
from nsdyn.errors import DegenerateInputError, InvalidInputError
from nsdyn.hopf import KrengelForm
from nsdyn.maxstat import (
    conservativity_verdict,
    dissipative_limit,
    max_dual_function,
    stat_a_n,
    stat_bounds,
    stat_series,
    sum_dual_partial,
)
from nsdyn.space import L1Function, make_space, truncate_l1

TOL = 1e-9
EXACT = 1e-12


def indicator(action, atoms):
    return L1Function.indicator(action.space, atoms)


class TestMaxDualFunction:
    def test_rotation_window_of_two(self, actions):
        c4 = actions["C4"]
        best = max_dual_function(c4, indicator(c4, [0]), CubeWindow.corner(2, 1))
        assert best.to_dict() == {0: 1.0, 3: 1.0}

    def test_single_term_window_returns_g(self, actions):
        e2 = actions["E2"]
        g = L1Function(e2.space, {0: 3.0, 1: 5.0})
        best = max_dual_function(e2, g, CubeWindow.corner(1, 1))
        assert best.to_dict() == g.to_dict()

    def test_translation_builds_interval(self, actions):
        tr = actions["TR1"]
        best = max_dual_function(tr, indicator(tr, [0]), CubeWindow.corner(4, 1))
        assert best.to_dict() == {s: 1.0 for s in (-3, -2, -1, 0)}

    def test_matches_brute_force_on_finite_fixtures(self, actions):
        rng = random.Random(5)
        for name in ("E2", "C4", "OD3"):
            act = actions[name]
            g = random_nonneg_function(act, rng)
            for n in (2, 3, 5):
                value = stat_a_n(act, g, n)
                brute = brute_max_stat(act, g, n)
                assert value == pytest.approx(brute, rel=EXACT)


class TestStatAn:
    def test_rotation_half(self, actions):
        assert stat_a_n(actions["C4"], indicator(actions["C4"], [0]), 8) == 0.5

    def test_translation_is_constant_one(self, actions):
        tr = actions["TR1"]
        for n in (1, 2, 7, 33):
            assert stat_a_n(tr, indicator(tr, [0]), n) == 1.0

    def test_trivial_axis_decay(self, actions):
        st2 = actions["ST2"]
        assert stat_a_n(st2, indicator(st2, [0]), 10) == pytest.approx(0.1, rel=EXACT)

    def test_invalid_window(self, actions):
        with pytest.raises(InvalidInputError):
            stat_a_n(actions["C4"], indicator(actions["C4"], [0]), 0)


class TestStatSeries:
    def test_rotation_closed_form(self, actions):
        series = stat_series(actions["C4"], indicator(actions["C4"], [0]),
                             (4, 8, 16))
        assert series.values() == [1.0, 0.5, 0.25]

    def test_translation_exact_constancy(self, actions):
        tr = actions["TR1"]
        series = stat_series(tr, indicator(tr, [0]), (2, 4, 8))
        assert series.values() == [1.0, 1.0, 1.0]

    def test_odometer_cocycle_bound(self, actions):
        od = actions["OD3"]
        g = indicator(od, od.space.atoms)
        series = stat_series(od, g, (8, 64))
        # max dual value anywhere is the extreme cylinder ratio 1.5^3
        for record in series.records:
            assert record.a_n <= 3.375 / record.n + 1e-15

    def test_records_track_support_and_window(self, actions):
        series = stat_series(actions["C4"], indicator(actions["C4"], [0]),
                             (4, 8), kind="corner")
        assert [r.n for r in series.records] == [4, 8]
        assert all(r.window == "corner" for r in series.records)
        assert all(r.support == 4 for r in series.records)

    def test_nonincreasing_ns_rejected(self, actions):
        with pytest.raises(InvalidInputError):
            stat_series(actions["C4"], indicator(actions["C4"], [0]), (4, 4))

    def test_csv_shape(self, actions):
        series = stat_series(actions["C4"], indicator(actions["C4"], [0]), (4,))
        text = series.to_csv(include_timing=False)
        lines = text.strip().split("\n")
        assert lines[0] == "n,window,a_n,support,ms"
        assert lines[1] == "4,corner,1.0,4,0"


class TestSumDualPartial:
    def test_trivial_axis_counts_window_height(self, actions):
        st2 = actions["ST2"]
        assert sum_dual_partial(st2, indicator(st2, [0]), 0, 3) == 7.0

    def test_free_orbit_single_hit(self, actions):
        tr = actions["TR1"]
        for n in (1, 5, 40):
            assert sum_dual_partial(tr, indicator(tr, [0]), 0, n) == 1.0

    def test_rotation_counts_multiples(self, actions):
        c4 = actions["C4"]
        g = indicator(c4, [0])
        assert sum_dual_partial(c4, g, 0, 4) == 3.0
        assert sum_dual_partial(c4, g, 0, 8) == 5.0


class TestDissipativeLimit:
    def _form(self, weights):
        W = make_space(list(weights), weights, name="limit-base")
        return KrengelForm(W=W, d=1, radius=1, phi={})

    def test_single_fiber_indicator(self):
        form = self._form({"w": 1.0})
        f = L1Function(form.translation_action().space, {("w", (0,)): 1.0})
        assert dissipative_limit(form, f) == 1.0

    def test_fiber_supremum(self):
        form = self._form({"w": 1.0})
        space = form.translation_action().space
        f = L1Function(space, {("w", (0,)): 2.0, ("w", (5,)): 1.0})
        assert dissipative_limit(form, f) == 2.0

    def test_weighted_fiber_suprema(self):
        form = self._form({"w1": 1.0, "w2": 2.0})
        space = form.translation_action().space
        f = L1Function(space, {("w1", (0,)): 1.0, ("w2", (7,)): 3.0})
        assert dissipative_limit(form, f) == 7.0

    def test_zero_function_rejected(self):
        form = self._form({"w": 1.0})
        f = L1Function(form.translation_action().space, {})
        with pytest.raises(DegenerateInputError):
            dissipative_limit(form, f)


class TestVerdict:
    NS = (4, 8, 16, 32, 64, 128, 256)

    def test_rotation_is_conservative_consistent(self, actions):
        c4 = actions["C4"]
        verdict = conservativity_verdict(
            c4, [indicator(c4, c4.space.atoms)], self.NS)
        assert verdict.label == "conservative-consistent"
        assert verdict.evidence[0]["final"] == 4.0 / 256.0

    def test_translation_is_dissipative_consistent_at_level_one(self, actions):
        tr = actions["TR1"]
        verdict = conservativity_verdict(tr, [indicator(tr, [0])], self.NS)
        assert verdict.label == "dissipative-consistent"
        assert verdict.evidence[0]["final"] == 1.0

    def test_union_is_dissipative_consistent(self, actions):
        mix = actions["MIX"]
        g = indicator(mix, [(0, 0), (1, 0)])
        verdict = conservativity_verdict(mix, [g], self.NS)
        assert verdict.label == "dissipative-consistent"
        assert verdict.evidence[0]["final"] == (4.0 + 256.0) / 256.0

    def test_non_nested_supports_rejected(self, actions):
        c4 = actions["C4"]
        with pytest.raises(InvalidInputError, match="nested"):
            conservativity_verdict(
                c4, [indicator(c4, [0]), indicator(c4, [1])], (4, 8))

    def test_zero_function_rejected(self, actions):
        c4 = actions["C4"]
        with pytest.raises(InvalidInputError, match="zero"):
            conservativity_verdict(
                c4, [L1Function(c4.space, {})], (4, 8))


class TestInvariants:
    def test_bounded_by_norm(self, actions):
        rng = random.Random(3)
        for act in actions.values():
            g = random_nonneg_function(act, rng)
            for n in (1, 3, 9):
                assert stat_a_n(act, g, n) <= g.norm * (1 + 1e-12)

    def test_monotone_in_g(self, actions):
        rng = random.Random(4)
        for act in actions.values():
            g = random_nonneg_function(act, rng)
            bigger = g.add(random_nonneg_function(act, rng))
            for n in (2, 5):
                assert stat_a_n(act, g, n) <= stat_a_n(act, bigger, n) + 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.integers(-20, 20))
    def test_scaling_exact_for_binary_factors(self, exponent):
        # powers of two scale every term without rounding
        c = 2.0 ** exponent
        c4 = zoo.build_fixture("C4")
        g = L1Function(c4.space, {0: 1.0, 1: 0.5})
        for n in (3, 6):
            assert stat_a_n(c4, g.scale(c), n) == c * stat_a_n(c4, g, n)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.001, 1000.0))
    def test_scaling_general_factor(self, c):
        c4 = zoo.build_fixture("C4")
        g = L1Function(c4.space, {0: 1.0, 1: 0.5})
        for n in (3, 6):
            assert stat_a_n(c4, g.scale(c), n) == pytest.approx(
                c * stat_a_n(c4, g, n), rel=1e-14)

    def test_truncation_stability(self, actions):
        # |a_n(f) - a_n(f_eps)| <= ||f - f_eps||  for the corner window
        tr = actions["TR1"]
        full = L1Function(tr.space,
                          {s: 2.0 ** (-abs(s)) for s in range(-6, 7)})
        cut = L1Function(tr.space,
                         {s: 2.0 ** (-abs(s)) for s in range(-2, 3)})
        gap = full.norm - cut.norm
        for n in (2, 5, 11, 20):
            assert abs(stat_a_n(tr, full, n) - stat_a_n(tr, cut, n)) <= gap + 1e-15

    def test_certified_interval_contains_true_value(self, actions):
        tr = actions["TR1"]
        rule = lambda s: 2.0 ** (-abs(s))
        g = truncate_l1(tr.space, rule, 0.5, tail_radius=2)
        tight = truncate_l1(tr.space, rule, 1e-12, tail_radius=43)
        for n in (3, 9):
            lo, hi = stat_bounds(tr, g, n)
            truth = stat_a_n(tr, tight, n)
            assert lo - 1e-12 <= truth <= hi + 1e-12

    def test_compact_support_convergence_bound(self, actions):
        # translation action, f supported in [-m, m] fiber coordinates
        rng = random.Random(9)
        tr = actions["TR1"]
        m = 2
        f = L1Function(tr.space,
                       {s: rng.uniform(0.5, 3.0) for s in range(-m, m + 1)})
        a = max(f(s) for s in f.support)  # single fiber of weight one
        for n in range(2 * m + 2, 40):
            bound = ((n + 2 * m) - (n - 2 * m)) / n * a
            assert abs(stat_a_n(tr, f, n) - a) <= bound + 1e-12

    def test_compact_support_bound_in_dimension_two(self):
        plane = zoo.build(zoo.ZooSpec("translation", {"d": 2}))
        rng = random.Random(10)
        m = 1
        cells = [(i, j) for i in range(-m, m + 1) for j in range(-m, m + 1)]
        f = L1Function(plane.space,
                       {c: rng.uniform(0.5, 3.0) for c in cells})
        a = max(f(c) for c in f.support)
        for n in (2 * m + 2, 8, 16):
            bound = ((n + 2 * m) ** 2 - (n - 2 * m) ** 2) / n ** 2 * a
            assert abs(stat_a_n(plane, f, n) - a) <= bound + 1e-12

    def test_divergence_dichotomy(self, actions):
        st2, c4, tr = actions["ST2"], actions["C4"], actions["TR1"]
        g2 = indicator(st2, [0])
        sums2 = [sum_dual_partial(st2, g2, 0, n) for n in (4, 8, 16, 32)]
        assert all(b > a for a, b in zip(sums2, sums2[1:]))
        g4 = indicator(c4, [0])
        sums4 = [sum_dual_partial(c4, g4, 0, n) for n in (4, 8, 16, 32)]
        assert all(b > a for a, b in zip(sums4, sums4[1:]))
        g1 = indicator(tr, [0])
        assert (sum_dual_partial(tr, g1, 0, 5)
                == sum_dual_partial(tr, g1, 0, 50) == 1.0)


class TestCenteredWindow:
    """The symmetric cube J_n is first class, normalized by (2n+1)^d."""

    def test_rotation_closed_form(self, actions):
        c4 = actions["C4"]
        g = indicator(c4, [0])
        for n in (2, 4, 8, 16):
            assert stat_a_n(c4, g, n, "centered") == pytest.approx(
                4.0 / (2 * n + 1), rel=EXACT)

    def test_translation_still_constant(self, actions):
        tr = actions["TR1"]
        g = indicator(tr, [0])
        for n in (1, 3, 9):
            assert stat_a_n(tr, g, n, "centered") == 1.0

    def test_series_records_window_kind(self, actions):
        series = stat_series(actions["C4"], indicator(actions["C4"], [0]),
                             (2, 4), kind="centered")
        assert all(r.window == "centered" for r in series.records)


class TestVerdictSequences:
    def test_nested_sequence_on_translation(self, actions):
        # a_n = (2m + n)/n per series; both settle near 1 by n = 128
        tr = actions["TR1"]
        gs = [indicator(tr, range(-1, 2)), indicator(tr, range(-2, 3))]
        verdict = conservativity_verdict(tr, gs, (8, 16, 32, 64, 128))
        assert verdict.label == "dissipative-consistent"
        assert len(verdict.evidence) == 2
        for ev in verdict.evidence:
            assert ev["stabilized"]
            assert ev["final"] == pytest.approx(1.0, rel=0.05)
