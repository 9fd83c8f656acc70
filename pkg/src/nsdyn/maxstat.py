"""Window maxima of dual images and the normalized maximal-average statistic.

For a nonnegative integrable g and a cube window of lattice vectors, the
central quantity is

    a_n = (1 / |window|) * integral of  max_{t in window} (dual_t g)(s)

over the space.  Its large-n behaviour separates conservative from
dissipative behaviour: it decays to zero when every orbit returns (the max
is shared between ever more window positions), and it stabilizes at the
positive level  sum_w tau(w) * sup_s f(w, s)  on a translation action,
which is the normal form of a dissipative action.

The verdict produced here is explicitly a finite-n heuristic label
("consistent with"), never a proof.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

from .action import CubeWindow, NsAction, iter_window_orbit
from .errors import DegenerateInputError, InvalidInputError
from .space import L1Function, atom_key, integrate


def max_dual_function(action: NsAction, g: L1Function,
                      window: CubeWindow) -> L1Function:
    """The pointwise maximum s -> max_{t in window} (dual_t g)(s).

    Assembled support-first: every pair (t, s) with (dual_t g)(s) > 0 has
    phi_t(s) in the support of g, so walking phi_{-t} over the window from
    each support atom enumerates all contributions exactly once per t.  The
    per-atom maximum is an order-independent reduction, so the result does
    not depend on the scan order.
    """
    if g.space is not action.space:
        raise InvalidInputError("g is defined over a different space")
    space = action.space
    acc: dict = {}
    for sp, v in g.items():
        numer = v * space.weight(sp)
        for _t, s in iter_window_orbit(action, sp, window, inverse=True):
            val = numer / space.weight(s)
            if val > acc.get(s, 0.0):
                acc[s] = val
    return L1Function(space, acc, truncation_error=g.truncation_error)


def stat_a_n(action: NsAction, g: L1Function, n: int,
             kind: str = "corner") -> float:
    """The maximal-average statistic a_n for one window size.

    Normalization is always by the exact window cardinality: n^d for the
    corner cube, (2n+1)^d for the centered cube J_n.
    """
    window = CubeWindow(kind, n, action.d)
    best = max_dual_function(action, g, window)
    return integrate(action.space, best) / window.size


def stat_bounds(action: NsAction, g: L1Function, n: int,
                kind: str = "corner") -> tuple[float, float]:
    """a_n together with its certified truncation interval.

    When g was produced by a certified truncation, |a_n(f) - a_n(g)| is at
    most the recorded truncation error, so the true statistic of the
    untruncated function lies in the returned interval.
    """
    value = stat_a_n(action, g, n, kind)
    eps = g.truncation_error
    return max(0.0, value - eps), value + eps


@dataclass(frozen=True)
class StatRecord:
    n: int
    window: str
    a_n: float
    support: int
    ms: float


@dataclass
class StatSeries:
    """Records of a_n over increasing n, with support sizes and wall times."""

    records: list[StatRecord] = field(default_factory=list)

    CSV_HEADER = "n,window,a_n,support,ms"

    def values(self) -> list[float]:
        return [r.a_n for r in self.records]

    def to_csv(self, include_timing: bool = True) -> str:
        lines = [self.CSV_HEADER]
        for r in self.records:
            ms = f"{r.ms:.3f}" if include_timing else "0"
            lines.append(f"{r.n},{r.window},{r.a_n!r},{r.support},{ms}")
        return "\n".join(lines) + "\n"


def stat_series(action: NsAction, g: L1Function, ns: Sequence[int],
                kind: str = "corner") -> StatSeries:
    """Sweep the statistic over an increasing list of window sizes."""
    ns = list(ns)
    if not ns:
        raise InvalidInputError("the list of window sizes is empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InvalidInputError(f"window sizes must be strictly increasing: {ns}")
    series = StatSeries()
    for n in ns:
        t0 = time.perf_counter()
        window = CubeWindow(kind, n, action.d)
        best = max_dual_function(action, g, window)
        value = integrate(action.space, best) / window.size
        ms = (time.perf_counter() - t0) * 1000.0
        series.records.append(
            StatRecord(n, kind, value, len(best.support), ms))
    return series


def sum_dual_partial(action: NsAction, g: L1Function, s, n: int) -> float:
    """Partial orbit sum  sum_{t in J_n} (dual_t g)(s)  at a single atom.

    Divergence of these partial sums in n is the signature of a conservative
    atom; on a free dissipative orbit they are eventually constant.
    """
    window = CubeWindow.centered(n, action.d)
    space = action.space
    inv_w = space.weight(s)
    terms = [g(atom) * space.weight(atom) / inv_w
             for _t, atom in iter_window_orbit(action, s, window)
             if g(atom) > 0.0]
    return math.fsum(terms)


def dissipative_limit(form, f: L1Function) -> float:
    """The limit level of a_n on a translation normal form.

    ``form`` is a Krengel normal form; ``f`` lives on the atoms (w, s) of
    its translation action, w a base point and s a lattice vector.  The
    limit equals  sum_w tau(w) * max_s f(w, s): each base fiber eventually
    contributes its supremum at full window density.
    """
    if not f.support:
        raise DegenerateInputError(
            "the limit needs a function with nonempty support")
    fiber_max: dict = {}
    for atom, v in f.items():
        if not (isinstance(atom, tuple) and len(atom) == 2):
            raise InvalidInputError(
                f"atom {atom!r} is not a (base point, lattice vector) pair")
        w = atom[0]
        if v > fiber_max.get(w, 0.0):
            fiber_max[w] = v
    tau = form.W.weight
    return math.fsum(tau(w) * fiber_max[w]
                     for w in sorted(fiber_max, key=atom_key))


@dataclass
class Verdict:
    """A heuristic conservativity label with the evidence that produced it.

    ``conservative-consistent``: every series decayed below theta_dec times
    its initial value.  ``dissipative-consistent``: some series stabilized
    (last value within theta_stab relative of the value at half the largest
    n) at a positive level.  Anything else is ``inconclusive``.
    """

    label: str
    evidence: list
    theta_dec: float
    theta_stab: float

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "theta_dec": self.theta_dec,
            "theta_stab": self.theta_stab,
            "evidence": self.evidence,
        }


def conservativity_verdict(action: NsAction, g_sequence: Sequence[L1Function],
                           ns: Sequence[int], kind: str = "corner",
                           theta_dec: float = 0.1,
                           theta_stab: float = 0.05) -> Verdict:
    """Label the action from finite-n behaviour of the statistic.

    ``g_sequence`` must be nonzero functions with nested increasing supports
    (ideally increasing to the whole space).  The decision rule is fixed and
    documented on :class:`Verdict`; the thresholds were calibrated once
    against the closed forms of the example zoo.
    """
    gs = list(g_sequence)
    if not gs:
        raise InvalidInputError("g sequence is empty")
    for g in gs:
        if not g.support:
            raise InvalidInputError("g sequence contains the zero function")
    for a, b in zip(gs, gs[1:]):
        if not set(a.support) <= set(b.support):
            raise InvalidInputError(
                "supports of the g sequence must be nested increasing")
    evidence = []
    all_decayed = True
    any_stabilized = False
    for idx, g in enumerate(gs):
        series = stat_series(action, g, ns, kind)
        vals = series.values()
        n_last = series.records[-1].n
        half_candidates = [r for r in series.records if r.n <= n_last / 2]
        ev = {
            "series": idx,
            "norm": g.norm,
            "initial_n": series.records[0].n,
            "initial": vals[0],
            "final_n": n_last,
            "final": vals[-1],
            "decayed": vals[-1] <= theta_dec * vals[0],
            "stabilized": False,
        }
        if half_candidates:
            half = half_candidates[-1]
            ev["half_n"] = half.n
            ev["half_value"] = half.a_n
            if vals[-1] > 0.0:
                ev["stabilized"] = (
                    abs(vals[-1] - half.a_n) <= theta_stab * vals[-1])
        all_decayed = all_decayed and ev["decayed"]
        any_stabilized = any_stabilized or ev["stabilized"]
        evidence.append(ev)
    if all_decayed:
        label = "conservative-consistent"
    elif any_stabilized:
        label = "dissipative-consistent"
    else:
        label = "inconclusive"
    return Verdict(label, evidence, theta_dec, theta_stab)
