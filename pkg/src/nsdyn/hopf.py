"""Hopf conservative/dissipative decomposition and the Krengel normal form.

On a purely atomic space the Hopf dichotomy is decided orbit by orbit.  An
atom with a nontrivial stabilizer element revisits every value infinitely
often, so its partial dual sums diverge and the atom is conservative.  An
atom on a free orbit satisfies

    sum_t (dual_t g)(s) = (1 / mu(s)) * sum over the orbit of g * mu
                        <= ||g|| / mu(s) < infinity,

so the atom is dissipative.  Freeness of an infinite orbit is not decidable
from a finite window, so it must be declared by the builder of the action;
absent a declaration the label stays undetermined at the given radius.

A dissipative action is equivalent to the translation action

    psi_t(w, s) = (w, t + s)

on W x Z^d with a product measure tau (x) counting measure.  The normal
form recovered here picks one representative per explored orbit and tabulates
the conjugacy Phi(w, t) = phi_t(w); :func:`verify_equivalence` then checks
equivariance and measure equivalence exactly on the explored region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

from .action import (
    CubeWindow,
    NsAction,
    as_vec,
    iter_window_orbit,
    make_action,
    vec_add,
)
from .errors import DomainError, InvalidInputError
from .space import AtomSpace, L1Function, atom_key, make_space

CONSERVATIVE = "conservative"
DISSIPATIVE = "dissipative"
UNDETERMINED = "undetermined"


@dataclass
class OrbitRecord:
    """The explored window of one orbit plus its discovered stabilizer."""

    seed: object
    radius: int
    visits: dict                 # t -> phi_t(seed), lex order of insertion
    stabilizer: tuple            # nonzero t with phi_t(seed) == seed

    @property
    def free_in_window(self) -> bool:
        return len(set(self.visits.values())) == len(self.visits)


def orbit_explore(action: NsAction, s, radius: int) -> OrbitRecord:
    """Enumerate {(t, phi_t(s)) : t in centered(radius)} and the stabilizer."""
    if radius < 1:
        raise InvalidInputError("radius must be >= 1")
    window = CubeWindow.centered(radius, action.d)
    zero = (0,) * action.d
    visits = {}
    stab = []
    for t, atom in iter_window_orbit(action, s, window):
        visits[t] = atom
        if atom == s and t != zero:
            stab.append(t)
    return OrbitRecord(s, radius, visits, tuple(stab))


@dataclass
class HopfDecomposition:
    """Per-atom conservative/dissipative labels from a finite exploration.

    The decision rule is fixed: an atom is conservative when a nonzero
    stabilizer element appears within the radius; dissipative when the
    explored window is collision-free and the action declares the orbit
    free; undetermined otherwise.  Labels are constant along orbits.
    """

    radius: int
    labels: dict = field(default_factory=dict)

    def label(self, atom) -> str:
        return self.labels[atom]

    def summary(self) -> str:
        kinds = set(self.labels.values())
        if kinds == {CONSERVATIVE}:
            return CONSERVATIVE
        if kinds == {DISSIPATIVE}:
            return DISSIPATIVE
        if not kinds or UNDETERMINED in kinds:
            return UNDETERMINED
        return "mixed"

    def as_dict(self) -> dict:
        from .jsonio import atom_to_json
        return {
            "radius": self.radius,
            "summary": self.summary(),
            "labels": [
                {"atom": atom_to_json(a), "label": lbl}
                for a, lbl in sorted(self.labels.items(),
                                     key=lambda kv: atom_key(kv[0]))],
        }


def hopf_decompose(action: NsAction, radius: int,
                   atoms: Iterable = None) -> HopfDecomposition:
    """Label atoms (all of a finite space, S_radius of a lazy one)."""
    if radius < 1:
        raise InvalidInputError("radius must be >= 1")
    if atoms is None:
        atoms = (action.space.atoms if action.space.finite
                 else action.space.exhaustion(radius))
    result = HopfDecomposition(radius)
    for s in sorted(atoms, key=atom_key):
        record = orbit_explore(action, s, radius)
        if record.stabilizer:
            result.labels[s] = CONSERVATIVE
        elif record.free_in_window and action.declared_free(s) is True:
            result.labels[s] = DISSIPATIVE
        else:
            result.labels[s] = UNDETERMINED
    return result


@dataclass
class KrengelForm:
    """A translation normal form (W, tau) with the conjugacy table Phi.

    ``phi[(w, t)]`` is the original atom phi_t(w) for each representative w
    and each t in the explored centered window.  The translation action
    psi_t(w, s) = (w, t + s) on W x Z^d is implicit; ``translation_action``
    materializes it.
    """

    W: AtomSpace
    d: int
    radius: int
    phi: dict

    _cached_action: NsAction = field(default=None, repr=False, compare=False)

    @property
    def representatives(self) -> tuple:
        return self.W.atoms

    def tau(self, w) -> float:
        return self.W.weight(w)

    def translation_action(self) -> NsAction:
        if self._cached_action is None:
            self._cached_action = build_translation_action(self.W, self.d)
        return self._cached_action

    def map_to_form(self, f: L1Function) -> L1Function:
        """Carry a base-space function to normal-form coordinates via Phi."""
        inverse = {atom: key for key, atom in self.phi.items()}
        values = {}
        for atom, v in f.items():
            if atom not in inverse:
                raise InvalidInputError(
                    f"support atom {atom!r} lies outside the explored "
                    f"conjugacy table (radius {self.radius})")
            w, t = inverse[atom]
            values[(w, t)] = v
        return L1Function(self.translation_action().space, values,
                          truncation_error=f.truncation_error)

    def as_dict(self) -> dict:
        from .jsonio import atom_to_json
        return {
            "d": self.d,
            "radius": self.radius,
            "representatives": [
                {"atom": atom_to_json(w), "tau": self.W.weight(w)}
                for w in self.W.atoms],
            "table": [
                {"w": atom_to_json(w), "t": list(t),
                 "atom": atom_to_json(img)}
                for (w, t), img in sorted(
                    self.phi.items(),
                    key=lambda kv: (atom_key(kv[0][0]), kv[0][1]))],
        }


def krengel_normal_form(action: NsAction, region: Iterable, *,
                        radius: int = 4,
                        labels: HopfDecomposition = None) -> KrengelForm:
    """Recover the translation normal form over a finite dissipative region.

    Orbits are merged within the centered window of the given radius; two
    region atoms on the same orbit collapse to one representative, chosen as
    the minimal region atom in the space's total order (a normalization;
    any other choice gives an equivalent form).  The weight of each
    representative is its own atom mass.

    Raises when a region atom is not labeled dissipative, or when explored
    orbit patches of two representatives collide (the radius is then too
    small to separate or merge the orbits involved).
    """
    region = sorted(set(region), key=atom_key)
    space = action.space
    for s in region:
        if s not in space:
            raise DomainError(f"region atom {s!r} is not in the space")
    if labels is None:
        labels = hopf_decompose(action, radius, atoms=region)
    for s in region:
        lbl = labels.label(s)
        if lbl != DISSIPATIVE:
            raise InvalidInputError(
                f"region atom {s!r} is labeled {lbl}; the normal form only "
                "exists over dissipative atoms")
    window = CubeWindow.centered(radius, action.d)

    # union-find over the region: same orbit within the radius collapses
    parent = {s: s for s in region}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx == ry:
            return
        lo, hi = sorted((rx, ry), key=atom_key)
        parent[hi] = lo

    region_set = set(region)
    for s in region:
        for _t, img in iter_window_orbit(action, s, window):
            if img in region_set and img != s:
                union(s, img)
    reps = sorted({find(s) for s in region}, key=atom_key)

    w_space = make_space(atoms=reps, weights={r: space.weight(r) for r in reps},
                         name=f"{action.name}-orbit-base")
    if not reps:
        return KrengelForm(W=w_space, d=action.d, radius=radius, phi={})
    phi = {}
    seen = {}
    for w in reps:
        for t, img in iter_window_orbit(action, w, window):
            if img in seen:
                other = seen[img]
                raise InvalidInputError(
                    f"explored orbit patches overlap: atom {img!r} is "
                    f"reached from {other[0]!r} at t={other[1]} and from "
                    f"{w!r} at t={t}; increase the radius so the orbits "
                    "merge, or shrink the region")
            seen[img] = (w, t)
            phi[(w, t)] = img
    return KrengelForm(W=w_space, d=action.d, radius=radius, phi=phi)


@dataclass
class EquivalenceReport:
    """Outcome of checking a normal form against its action."""

    radius: int
    equivariance_checked: int
    support_checked: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "radius": self.radius,
            "equivariance_checked": self.equivariance_checked,
            "support_checked": self.support_checked,
            "failures": self.failures,
            "passed": self.passed,
        }


def verify_equivalence(action: NsAction, form: KrengelForm,
                       radius: int) -> EquivalenceReport:
    """Check the conjugacy exactly on the explored region.

    (i) Equivariance: Phi(w, s + t) == phi_t(Phi(w, s)) for all pairs with
    both s and s + t in the tabulated window (exact atom equality).
    (ii) Measure equivalence in the atomic sense: the pushforward of mu
    under Phi^{-1} and tau (x) counting measure have the same support on the
    explored region, that is both weights are strictly positive wherever the
    table is defined.

    Failures are report entries, never exceptions.
    """
    from .jsonio import atom_to_json
    if radius < 1:
        raise InvalidInputError("radius must be >= 1")
    window = CubeWindow.centered(min(radius, form.radius), action.d)
    failures = []
    eq_checked = 0
    sup_checked = 0
    by_rep: dict = {}
    for (w, t), img in form.phi.items():
        by_rep.setdefault(w, {})[t] = img
    for w in sorted(by_rep, key=atom_key):
        table = by_rep[w]
        coords = [t for t in window if t in table]
        for s in coords:
            for t in window:
                st = vec_add(s, t)
                if st not in table:
                    continue
                eq_checked += 1
                expected = table[st]
                try:
                    got = action.apply(t, table[s])
                except DomainError as exc:
                    failures.append({
                        "kind": "equivariance", "w": atom_to_json(w),
                        "s": list(s), "t": list(t), "error": str(exc)})
                    continue
                if got != expected:
                    failures.append({
                        "kind": "equivariance", "w": atom_to_json(w),
                        "s": list(s), "t": list(t),
                        "expected": atom_to_json(expected),
                        "got": atom_to_json(got)})
        for s in coords:
            sup_checked += 1
            try:
                mu = action.space.weight(table[s])
                tau = form.W.weight(w)
            except DomainError as exc:
                failures.append({
                    "kind": "support", "w": atom_to_json(w), "s": list(s),
                    "error": str(exc)})
                continue
            if not (mu > 0.0 and tau > 0.0):
                failures.append({
                    "kind": "support", "w": atom_to_json(w), "s": list(s),
                    "mu": mu, "tau": tau})
    return EquivalenceReport(window.n, eq_checked, sup_checked, failures)


def build_translation_action(W: AtomSpace, d: int, *,
                             name: str = None) -> NsAction:
    """The translation action psi_t(w, s) = (w, t + s) on W x Z^d.

    Atoms are pairs (w, s) with s a d-tuple of ints; the weight of (w, s)
    is tau(w), so every one-step weight is exactly 1 and the product measure
    is invariant.  The exhaustion is S_m = W_m x [-m, m]^d.  All orbits are
    free, and the builder declares them so.
    """
    if d < 1:
        raise InvalidInputError("dimension must be >= 1")
    if name is None:
        name = f"translation({W.name or 'W'}, d={d})"

    def contains(atom):
        if not (isinstance(atom, tuple) and len(atom) == 2):
            return False
        w, s = atom
        if w not in W:
            return False
        return (isinstance(s, tuple) and len(s) == d
                and all(isinstance(x, int) and not isinstance(x, bool)
                        for x in s))

    def weight(atom):
        return W.weight(atom[0])

    def exhaustion(m):
        box = product(range(-m, m + 1), repeat=d)
        cells = [tuple(c) for c in box]
        return [(w, c) for w in W.exhaustion(m) for c in cells]

    space = make_space(atoms=None, weights=weight, exhaustion=exhaustion,
                       contains=contains, name=f"{name}-space")

    def shift(axis, delta):
        def move(atom):
            w, s = atom
            return (w, s[:axis] + (s[axis] + delta,) + s[axis + 1:])
        return move

    gens = [(shift(i, +1), shift(i, -1)) for i in range(d)]
    return make_action(space, gens, name=name, free_orbits=True)
