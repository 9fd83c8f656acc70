"""Skew product construction, measure preservation, extension statistic."""

import random

import pytest

from conftest import sample_atoms
from nsdyn import zoo
from nsdyn.action import CubeWindow, make_action, vec_add
from nsdyn.errors import ConstructionError, InvalidInputError
from nsdyn.maharam import (
    MaharamAction,
    Rect,
    check_measure_preservation,
    extend,
    extension_stat,
    push_rect,
)
from nsdyn.space import L1Function, integrate, make_space, rel_dev

TOL = 1e-9
EXACT = 1e-12


@pytest.fixture(scope="module")
def extensions(actions):
    return {name: extend(act) for name, act in actions.items()}


class TestExtend:
    def test_two_atom_skew_map(self, extensions):
        ext = extensions["E2"]
        atom, y = ext.skew_point((1,), (0, 1.0))
        assert atom == 1
        assert y == pytest.approx(0.5, rel=EXACT)

    def test_uniform_rotation_has_unit_fiber_factor(self, extensions):
        ext = extensions["C4"]
        for s in range(4):
            assert ext.fiber_factor((1,), s) == 1.0

    def test_odometer_fiber_factor(self, extensions):
        ext = extensions["OD3"]
        assert ext.fiber_factor((1,), "000") == pytest.approx(1.5, rel=EXACT)

    def test_fiber_factor_is_reciprocal_of_cocycle(self, extensions):
        for name, ext in extensions.items():
            for s in sample_atoms(ext.base, 1):
                for t in CubeWindow.centered(2, ext.base.d):
                    assert ext.fiber_factor(t, s) == pytest.approx(
                        1.0 / ext.base.rn_derivative(t, s), rel=EXACT)

    def test_failed_cocycle_precondition(self):
        space = make_space([0, 1, 2], [1.0, 2.0, 4.0])
        bad = make_action(space, [{0: 1, 1: 2, 2: 0}, {0: 1, 1: 0, 2: 2}],
                          name="noncommuting")
        with pytest.raises(ConstructionError) as excinfo:
            extend(bad)
        assert excinfo.value.report is not None
        assert not excinfo.value.report.passed


class TestPushRect:
    def test_two_atom_rect(self, extensions):
        out = push_rect(extensions["E2"], (1,), Rect(0, 0.0, 1.0))
        assert out == Rect(1, 0.0, 0.5)

    def test_zero_element_is_identity(self, extensions):
        r = Rect(0, 0.25, 2.0)
        assert push_rect(extensions["C4"], (0,), r) == r

    def test_odometer_rect(self, extensions):
        out = push_rect(extensions["OD3"], (1,), Rect("000", 0.0, 1.0))
        assert out.atom == "100"
        assert out.b == pytest.approx(1.5, rel=EXACT)

    def test_skew_group_law(self, extensions):
        rng = random.Random(21)
        for name, ext in extensions.items():
            atoms = sample_atoms(ext.base, 1)
            for _ in range(5):
                atom = rng.choice(atoms)
                a = rng.uniform(0.0, 3.0)
                r = Rect(atom, a, a + rng.uniform(0.1, 2.0))
                for t in CubeWindow.centered(2, ext.base.d):
                    for u in CubeWindow.centered(1, ext.base.d):
                        two_steps = push_rect(ext, t, push_rect(ext, u, r))
                        joint = push_rect(ext, vec_add(t, u), r)
                        assert two_steps.atom == joint.atom
                        assert two_steps.a == pytest.approx(joint.a, rel=EXACT, abs=1e-15)
                        assert two_steps.b == pytest.approx(joint.b, rel=EXACT)

    def test_invalid_interval(self):
        with pytest.raises(InvalidInputError):
            Rect(0, 1.0, 1.0)
        with pytest.raises(InvalidInputError):
            Rect(0, -0.5, 1.0)


class TestMeasurePreservation:
    def test_two_atom_example(self, extensions):
        report = check_measure_preservation(
            extensions["E2"], (1,), [Rect(0, 0.0, 1.0)])
        (rect, before, after, dev) = report.entries[0]
        assert before == 1.0
        assert after == pytest.approx(1.0, rel=EXACT)
        assert report.passed

    def test_zero_element_trivially_equal(self, extensions):
        report = check_measure_preservation(
            extensions["OD3"], (0,), [Rect("000", 0.0, 2.0)])
        assert report.max_rel_deviation == 0.0

    def test_odometer_example(self, extensions):
        report = check_measure_preservation(
            extensions["OD3"], (1,), [Rect("000", 0.0, 1.0)])
        (rect, before, after, dev) = report.entries[0]
        assert before == pytest.approx(0.216, rel=EXACT)
        assert after == pytest.approx(0.216, rel=EXACT)
        assert report.passed

    def test_random_rects_all_fixtures(self, extensions):
        rng = random.Random(31)
        for name, ext in extensions.items():
            atoms = sample_atoms(ext.base, 2)
            rects = []
            for i in range(10):
                a = 10.0 * i + rng.uniform(0.0, 4.0)
                rects.append(Rect(rng.choice(atoms), a, a + rng.uniform(0.1, 5.0)))
            for t in CubeWindow.centered(2, ext.base.d):
                report = check_measure_preservation(ext, t, rects)
                assert report.passed, (name, t, report.max_rel_deviation)

    def test_overlapping_rects_rejected(self, extensions):
        with pytest.raises(InvalidInputError, match="overlap"):
            check_measure_preservation(
                extensions["E2"], (1,),
                [Rect(0, 0.0, 1.0), Rect(0, 0.5, 2.0)])

    def test_report_serializes(self, extensions):
        doc = check_measure_preservation(
            extensions["E2"], (1,), [Rect(0, 0.0, 1.0)]).as_dict()
        assert doc["passed"] is True
        assert doc["rects"][0]["before"] == 1.0


class TestExtensionStat:
    def test_two_atom_example(self, extensions):
        lhs, rhs = extension_stat(extensions["E2"], 1, 8)
        assert lhs == pytest.approx(0.5, rel=EXACT)
        assert rhs == pytest.approx(0.5, rel=EXACT)

    def test_rotation_example(self, extensions):
        lhs, rhs = extension_stat(extensions["C4"], 1, 8)
        assert lhs == pytest.approx(0.5, rel=EXACT)
        assert rhs == pytest.approx(0.5, rel=EXACT)

    def test_single_term_window_is_exhaustion_mass(self, extensions):
        for name in ("E2", "C4", "OD3"):
            ext = extensions[name]
            space = ext.base.space
            mass = integrate(space,
                             L1Function.indicator(space, space.exhaustion(1)))
            lhs, rhs = extension_stat(ext, 1, 1)
            assert lhs == pytest.approx(mass, rel=EXACT)
            assert rhs == pytest.approx(mass, rel=EXACT)

    def test_sides_agree_on_lazy_fixture(self, extensions):
        lhs, rhs = extension_stat(extensions["TR1"], 2, 16)
        assert rel_dev(lhs, rhs) <= EXACT
        # m * (2m + n) / n for the interval exhaustion of the integers
        assert lhs == pytest.approx(2.0 * (4 + 16) / 16.0, rel=EXACT)

    def test_invalid_parameters(self, extensions):
        with pytest.raises(InvalidInputError):
            extension_stat(extensions["E2"], 0, 4)
        with pytest.raises(InvalidInputError):
            extension_stat(extensions["E2"], 1, 0)


class TestExtensionLimits:
    def test_dissipative_base_stabilizes_at_m(self, extensions):
        # on the free translation the extension statistic is m(2m+n)/n -> m
        ext = extensions["TR1"]
        for m in (1, 2):
            values = {n: extension_stat(ext, m, n)[0] for n in (16, 32, 128)}
            for n, v in values.items():
                assert v == pytest.approx(m * (2 * m + n) / n, rel=EXACT)
            bound = (4.0 * m / 128) * m
            assert abs(values[128] - m) <= bound

    def test_conservative_bases_decay(self, extensions):
        for name in ("E2", "C4", "OD3"):
            ext = extensions[name]
            first = extension_stat(ext, 1, 2)[0]
            last = extension_stat(ext, 1, 128)[0]
            assert last <= first / 10.0


class TestExtensionStatHigherDimension:
    def test_trivial_axis_closed_form(self, actions):
        # S_m is the interval [-m, m], only the first axis moves, so the
        # window maximum covers 2m + n atoms and the value is m(2m+n)/n^2
        ext = extend(actions["ST2"])
        for m in (1, 2):
            for n in (4, 8, 16):
                lhs, rhs = extension_stat(ext, m, n)
                assert rel_dev(lhs, rhs) <= EXACT
                assert lhs == pytest.approx(m * (2 * m + n) / n ** 2,
                                            rel=EXACT)


def brute_extension_value(action, m, n):
    """Third, fully direct assembly of the extension statistic.

    Enumerates every candidate base atom and scans the window with plain
    apply/rn_derivative calls; shares no window-walking code with the two
    assemblies under test.
    """
    from nsdyn.action import CubeWindow

    space = action.space
    s_m = set(space.exhaustion(m))
    window = list(CubeWindow.corner(n, action.d))
    candidates = set()
    for a in sorted(s_m, key=repr):
        for t in window:
            candidates.add(action.apply(tuple(-x for x in t), a))
    total = 0.0
    for s in sorted(candidates, key=repr):
        best = 0.0
        for t in window:
            if action.apply(t, s) in s_m:
                best = max(best, action.rn_derivative(t, s))
        total += space.weight(s) * m * best
    return total / len(window)


class TestExtensionBruteForce:
    def test_three_assemblies_agree_on_random_weights(self):
        rng = random.Random(77)
        for _ in range(5):
            size = rng.randint(2, 6)
            act = zoo.build(zoo.ZooSpec(
                "cyclic", {"N": size,
                           "weights": [rng.uniform(0.1, 10.0)
                                       for _ in range(size)]}))
            ext = extend(act)
            for m, n in ((1, 3), (1, 7), (2, 5)):
                lhs, rhs = extension_stat(ext, m, n)
                brute = brute_extension_value(act, m, n)
                assert lhs == pytest.approx(brute, rel=EXACT)
                assert rhs == pytest.approx(brute, rel=EXACT)
