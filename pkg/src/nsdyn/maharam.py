"""The Maharam skew product on S x (0, infinity) and its exact verification.

A nonsingular action phi_t with cocycle w_t extends to the product of the
space with the half line (carrying Lebesgue measure) by

    skew_t(s, y) = (phi_t(s), y / w_t(s))

and this extension preserves the product measure: an atom rectangle
{s} x (a, b] of mass mu(s) * (b - a) maps to a rectangle of identical mass,
because the fiber is scaled by exactly the reciprocal of the weight ratio.
Restricting product sets to finite unions of atom x interval rectangles
keeps every pushforward exact; no quadrature is involved anywhere.

``extension_stat`` evaluates the maximal-average statistic of the extension
for the indicator of S_m x (0, m) in two independent ways: once by direct
fiber integration on the product side, once through the base maximal
statistic.  The two assemblies agree because the fiber integral of the
pushed indicator collapses to m * max_t [w_t(s) * 1_{S_m}(phi_t(s))]; that
collapse is what ties conservativity of the skew product to conservativity
of the base, so the pair is returned rather than one number computed twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .action import CubeWindow, NsAction, as_vec, check_cocycle, iter_window_orbit
from .errors import ConstructionError, InvalidInputError
from .maxstat import max_dual_function
from .space import L1Function, atom_key, integrate, rel_dev


@dataclass(frozen=True)
class Rect:
    """An atom x interval rectangle {atom} x (a, b] in the product space.

    Intervals are half open so disjointness is unambiguous; endpoint sets
    carry no Lebesgue mass, so all measure identities are unaffected.
    """

    atom: object
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b < math.inf):
            raise InvalidInputError(
                f"rectangle interval ({self.a}, {self.b}] is invalid; "
                "need 0 <= a < b < infinity")

    def measure(self, space) -> float:
        return space.weight(self.atom) * (self.b - self.a)

    def overlaps(self, other: "Rect") -> bool:
        return (self.atom == other.atom
                and self.a < other.b and other.a < self.b)


@dataclass(frozen=True)
class MaharamAction:
    """The measure-preserving skew product over a base action."""

    base: NsAction

    def fiber_factor(self, t, s) -> float:
        """Scaling of the fiber coordinate: exactly 1 / w_t(s)."""
        return 1.0 / self.base.rn_derivative(t, s)

    def skew_point(self, t, point):
        """Image of a product point (s, y)."""
        s, y = point
        return self.base.apply(t, s), y * self.fiber_factor(t, s)


def extend(action: NsAction, *, radius: int = 2,
           rel_tol: float = 1e-9) -> MaharamAction:
    """Wrap an action in its Maharam extension.

    Precondition: the cocycle identity holds on a centered window of the
    given radius.  A failing check aborts construction and carries the
    violation report.
    """
    report = check_cocycle(action, radius, rel_tol=rel_tol)
    if not report.passed:
        t, u, atom, dev = report.violations[0]
        raise ConstructionError(
            f"cocycle identity fails for action {action.name!r} at "
            f"t={t}, u={u}, atom={atom!r} (relative deviation {dev:.3e}); "
            "the skew product is only defined over a consistent cocycle",
            report=report)
    return MaharamAction(action)


def push_rect(ext: MaharamAction, t, r: Rect) -> Rect:
    """Pushforward of a rectangle: exact interval arithmetic on endpoints."""
    w = ext.base.rn_derivative(t, r.atom)
    return Rect(ext.base.apply(t, r.atom), r.a / w, r.b / w)


@dataclass
class MeasureReport:
    """Per-rectangle comparison of product mass before and after the skew map."""

    t: tuple
    rel_tol: float
    entries: list
    max_rel_deviation: float

    @property
    def passed(self) -> bool:
        return self.max_rel_deviation <= self.rel_tol

    def as_dict(self) -> dict:
        from .jsonio import atom_to_json
        return {
            "t": list(self.t),
            "rel_tol": self.rel_tol,
            "max_rel_deviation": self.max_rel_deviation,
            "passed": self.passed,
            "rects": [
                {"atom": atom_to_json(r.atom), "a": r.a, "b": r.b,
                 "before": before, "after": after, "deviation": dev}
                for r, before, after, dev in self.entries],
        }


def check_measure_preservation(ext: MaharamAction, t, rects: Sequence[Rect],
                               rel_tol: float = 1e-9) -> MeasureReport:
    """Compare the product mass of each rectangle with that of its image."""
    rects = list(rects)
    ordered = sorted(rects, key=lambda r: (atom_key(r.atom), r.a))
    for r1, r2 in zip(ordered, ordered[1:]):
        if r1.overlaps(r2):
            raise InvalidInputError(
                f"rectangles overlap on atom {r1.atom!r}: "
                f"({r1.a}, {r1.b}] and ({r2.a}, {r2.b}]")
    space = ext.base.space
    entries = []
    worst = 0.0
    tvec = as_vec(t, ext.base.d)
    for r in rects:
        image = push_rect(ext, tvec, r)
        before = r.measure(space)
        after = image.measure(space)
        dev = rel_dev(before, after)
        worst = max(worst, dev)
        entries.append((r, before, after, dev))
    return MeasureReport(tvec, rel_tol, entries, worst)


def extension_stat(ext: MaharamAction, m: int, n: int) -> tuple[float, float]:
    """Both assemblies of the extension statistic for 1_{S_m x (0, m)}.

    Returns ``(lhs, rhs)`` where

    * ``lhs`` integrates the product side directly: for each base atom s the
      fiber contribution is m * max_t [w_t(s) * 1_{S_m}(phi_t(s))] over the
      corner window, summed against mu and divided by n^d;
    * ``rhs`` is (m / n^d) times the integral of the base window maximum of
      the dual images of 1_{S_m}.

    The contract is agreement to relative 1e-12: they are the same finite
    sum assembled along two different routes.
    """
    if m < 1 or n < 1:
        raise InvalidInputError("extension statistic needs m >= 1 and n >= 1")
    base = ext.base
    space = base.space
    s_m = space.exhaustion(m)
    s_m_set = set(s_m)
    window = CubeWindow.corner(n, base.d)

    # product-side assembly: fiber integral per base atom
    candidates = set()
    for a in s_m:
        for _t, s in iter_window_orbit(base, a, window, inverse=True):
            candidates.add(s)
    lhs_terms = []
    for s in sorted(candidates, key=atom_key):
        log_s = space.log_weight(s)
        best = 0.0
        for _t, img in iter_window_orbit(base, s, window):
            if img in s_m_set:
                w = math.exp(space.log_weight(img) - log_s)
                if w > best:
                    best = w
        lhs_terms.append(space.weight(s) * m * best)
    lhs = math.fsum(lhs_terms) / window.size

    # base-side assembly through the maximal statistic
    indicator = L1Function.indicator(space, s_m)
    rhs = m * integrate(space, max_dual_function(base, indicator, window)) \
        / window.size
    return lhs, rhs
