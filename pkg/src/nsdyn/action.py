"""Nonsingular Z^d-actions, Radon-Nikodym cocycles, and dual operators.

An action is given by d invertible generator maps T_1..T_d that are meant to
commute.  phi_t for a lattice vector t is always evaluated along the
canonical axis-ordered path: t_1 steps of T_1, then t_2 steps of T_2, and so
on.  Commutativity (hence path independence) is a testable property rather
than an assumption; :func:`check_cocycle` detects violations because the
cocycle identity fails exactly where composition order matters.

On a purely atomic space the Radon-Nikodym derivative w_t = d(mu o phi_t)/dmu
at an atom s is the weight ratio mu(phi_t(s)) / mu(s).  It is evaluated in
log space (the per-step log ratios telescope to a single difference of
endpoint log weights) and exponentiated once, so closed orbit loops give
exactly 1.0 and cocycles spanning many orders of magnitude stay stable.

The dual (transfer) operator acts on nonnegative integrable functions by

    (dual_t g)(s) = g(phi_t(s)) * w_t(s)

and preserves the L1 norm.  It is the L1 dual of the composition operator of
phi_{-t}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Iterator

from .errors import (
    ConstructionError,
    DomainError,
    ExplorationLimitError,
    InvalidInputError,
)
from .space import AtomSpace, L1Function, atom_key, rel_dev


@dataclass(frozen=True)
class CubeWindow:
    """A finite cube of lattice vectors, iterated in lexicographic order.

    ``corner``: {t : 0 <= t_i <= n-1}, cardinality n^d.
    ``centered``: {t : -n <= t_i <= n}, cardinality (2n+1)^d.
    """

    kind: str
    n: int
    d: int

    def __post_init__(self):
        if self.kind not in ("corner", "centered"):
            raise InvalidInputError(f"unknown window kind {self.kind!r}")
        if self.n < 1:
            raise InvalidInputError(f"window size must be >= 1, got {self.n}")
        if self.d < 1:
            raise InvalidInputError(f"dimension must be >= 1, got {self.d}")

    @classmethod
    def corner(cls, n: int, d: int) -> "CubeWindow":
        return cls("corner", n, d)

    @classmethod
    def centered(cls, n: int, d: int) -> "CubeWindow":
        return cls("centered", n, d)

    def axis_bounds(self) -> tuple[int, int]:
        """Inclusive per-axis range (lo, hi)."""
        if self.kind == "corner":
            return 0, self.n - 1
        return -self.n, self.n

    @property
    def size(self) -> int:
        lo, hi = self.axis_bounds()
        return (hi - lo + 1) ** self.d

    def __iter__(self) -> Iterator[tuple]:
        lo, hi = self.axis_bounds()
        return product(range(lo, hi + 1), repeat=self.d)

    def __contains__(self, t) -> bool:
        lo, hi = self.axis_bounds()
        return len(t) == self.d and all(lo <= x <= hi for x in t)


def as_vec(t, d: int) -> tuple:
    """Normalize a group element to a d-tuple of ints (plain int when d=1)."""
    if isinstance(t, bool):
        raise InvalidInputError("group elements are integer vectors")
    if isinstance(t, int):
        if d != 1:
            raise InvalidInputError(
                f"scalar group element {t} for a {d}-dimensional action")
        return (t,)
    vec = tuple(t)
    if len(vec) != d:
        raise InvalidInputError(
            f"group element {vec} has length {len(vec)}, expected {d}")
    for x in vec:
        if isinstance(x, bool) or not isinstance(x, int):
            raise InvalidInputError(f"group element {vec} has a non-int entry")
    return vec


def vec_add(t: tuple, u: tuple) -> tuple:
    return tuple(a + b for a, b in zip(t, u))


def vec_neg(t: tuple) -> tuple:
    return tuple(-a for a in t)


class _Generator:
    __slots__ = ("fwd", "inv")

    def __init__(self, fwd: Callable, inv: Callable):
        self.fwd = fwd
        self.inv = inv

    @classmethod
    def from_permutation(cls, perm: dict) -> "_Generator":
        inverse = {}
        for src, dst in perm.items():
            if dst in inverse:
                raise ConstructionError(
                    f"generator is not invertible: atoms {inverse[dst]!r} and "
                    f"{src!r} share the image {dst!r}")
            inverse[dst] = src
        return cls(perm.__getitem__, inverse.__getitem__)


class _Budget:
    """Counts single generator applications during one operation."""

    __slots__ = ("remaining",)

    def __init__(self, limit: int):
        self.remaining = limit

    def spend(self, axis: int, t=None):
        self.remaining -= 1
        if self.remaining < 0:
            raise ExplorationLimitError(
                f"exploration budget exhausted while stepping axis {axis}"
                + (f" near t={t}" if t is not None else ""),
                axis=axis, t=t)


class NsAction:
    """A nonsingular Z^d-action on an atomic space.

    Immutable and shareable.  Built with :func:`make_action`; the zoo module
    provides ready-made examples.
    """

    __slots__ = ("space", "d", "name", "exploration_budget", "_gens",
                 "_free_orbit_fn")

    def __init__(self, space, d, gens, name, free_orbit_fn, exploration_budget):
        self.space = space
        self.d = d
        self.name = name
        self._gens = gens
        self._free_orbit_fn = free_orbit_fn
        self.exploration_budget = exploration_budget

    def declared_free(self, atom):
        """Builder-declared orbit freeness: True, False, or None (unknown)."""
        if self._free_orbit_fn is None:
            return None
        return self._free_orbit_fn(atom)

    def step(self, axis: int, atom, forward: bool = True):
        """Apply a single generator (or its inverse) once."""
        gen = self._gens[axis]
        return gen.fwd(atom) if forward else gen.inv(atom)

    def apply(self, t, s):
        """phi_t(s) along the canonical axis-ordered composition path."""
        if s not in self.space:
            raise DomainError(
                f"atom {s!r} is not in the space of action {self.name!r}")
        vec = as_vec(t, self.d)
        budget = _Budget(self.exploration_budget)
        atom = s
        for axis, steps in enumerate(vec):
            atom = self._walk_axis(axis, atom, steps, budget, vec)
        return atom

    def _walk_axis(self, axis, atom, steps, budget, t=None):
        forward = steps >= 0
        for _ in range(abs(steps)):
            budget.spend(axis, t)
            atom = self.step(axis, atom, forward)
        return atom

    def rn_derivative(self, t, s) -> float:
        """w_t(s) = mu(phi_t(s)) / mu(s), computed in log space."""
        end = self.apply(t, s)
        return math.exp(self.space.log_weight(end) - self.space.log_weight(s))

    def dual_apply(self, t, g: L1Function) -> L1Function:
        """The dual operator image s -> g(phi_t(s)) * w_t(s).

        The support of the result is phi_{-t} of the support of g, so it
        stays finite; the L1 norm of a nonnegative g is preserved.
        """
        if g.space is not self.space:
            raise DomainError("function is defined over a different space")
        minus = vec_neg(as_vec(t, self.d))
        out = {}
        for sp, v in g.items():
            s = self.apply(minus, sp)
            out[s] = v * (self.space.weight(sp) / self.space.weight(s))
        return L1Function(self.space, out, truncation_error=g.truncation_error)

    def __repr__(self):
        return f"NsAction({self.name!r}, d={self.d}, space={self.space.name!r})"


def make_action(space: AtomSpace, generators, *, name: str = "",
                free_orbits=None, exploration_budget: int = 10 ** 6,
                validate: bool = True) -> NsAction:
    """Build a Z^d-action from d invertible generators.

    Each generator is either a dict (finite permutation, with the inverse
    derived and bijectivity enforced) or a ``(forward, inverse)`` pair of
    callables.  ``free_orbits`` optionally declares orbit freeness: a bool,
    or a callable ``atom -> bool | None``.  Freeness of a lazy orbit cannot
    be inferred from a finite window, so it is never guessed.

    Validation samples every atom of a finite space (the exhaustion set S_2
    of a lazy one) and checks that each generator is a bijection with the
    declared inverse and that images stay inside the space with positive
    weight (nonsingularity).
    """
    gens = []
    for g in generators:
        if isinstance(g, _Generator):
            gens.append(g)
        elif isinstance(g, dict):
            gens.append(_Generator.from_permutation(g))
        else:
            fwd, inv = g
            gens.append(_Generator(fwd, inv))
    if not gens:
        raise ConstructionError("an action needs at least one generator")
    d = len(gens)
    if free_orbits is None or callable(free_orbits):
        free_fn = free_orbits
    else:
        flag = bool(free_orbits)
        free_fn = lambda atom: flag
    action = NsAction(space, d, tuple(gens), name, free_fn, exploration_budget)
    if validate:
        _validate_action(action)
    return action


def _validate_action(action: NsAction):
    space = action.space
    samples = space.atoms if space.finite else space.exhaustion(2)
    for axis in range(action.d):
        for s in samples:
            try:
                img = action.step(axis, s)
                back = action.step(axis, img, forward=False)
                pre = action.step(axis, s, forward=False)
                again = action.step(axis, pre)
                space.weight(img)  # nonsingularity: images carry positive mass
                space.weight(pre)
            except (KeyError, DomainError) as exc:
                raise ConstructionError(
                    f"generator {axis} of action {action.name!r} is not "
                    f"defined around atom {s!r}: {exc}") from exc
            if back != s or again != s:
                raise ConstructionError(
                    f"generator {axis} of action {action.name!r} is not "
                    f"inverted by its declared inverse at atom {s!r}")


def iter_window_orbit(action: NsAction, s, window: CubeWindow, *,
                      inverse: bool = False):
    """Yield ``(t, phi_t(s))`` for every t in the window, in lex order.

    With ``inverse=True`` the second component is phi_{-t}(s) instead.  The
    walk is incremental, one generator application per step, so a whole
    window costs O(|window|) applications instead of O(|window| * n).
    """
    if s not in action.space:
        raise DomainError(
            f"atom {s!r} is not in the space of action {action.name!r}")
    if window.d != action.d:
        raise InvalidInputError(
            f"window dimension {window.d} does not match action dimension "
            f"{action.d}")
    lo, hi = window.axis_bounds()
    budget = _Budget(action.exploration_budget)
    sign = -1 if inverse else 1

    def rec(axis, atom):
        if axis == action.d:
            yield (), atom
            return
        cur = action._walk_axis(axis, atom, sign * lo, budget)
        for v in range(lo, hi + 1):
            for rest, leaf in rec(axis + 1, cur):
                yield (v,) + rest, leaf
            if v < hi:
                budget.spend(axis)
                cur = action.step(axis, cur, forward=(sign > 0))

    yield from rec(0, s)


@dataclass
class CocycleReport:
    """Outcome of an exhaustive cocycle-identity check over a window."""

    radius: int
    rel_tol: float
    checked: int
    max_rel_deviation: float
    worst: tuple | None          # (t, u, atom) achieving the max deviation
    violations: list             # (t, u, atom, deviation) above rel_tol

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        from .jsonio import atom_to_json
        return {
            "radius": self.radius,
            "rel_tol": self.rel_tol,
            "checked": self.checked,
            "max_rel_deviation": self.max_rel_deviation,
            "worst": None if self.worst is None else {
                "t": list(self.worst[0]), "u": list(self.worst[1]),
                "atom": atom_to_json(self.worst[2])},
            "violations": [
                {"t": list(t), "u": list(u), "atom": atom_to_json(a),
                 "deviation": dev}
                for t, u, a, dev in self.violations],
            "passed": self.passed,
        }


def check_cocycle(action: NsAction, radius: int, samples: Iterable = None,
                  rel_tol: float = 1e-9) -> CocycleReport:
    """Verify w_{t+u}(s) = w_t(s) * w_u(phi_t(s)) over a centered window.

    Runs over all pairs t, u in centered(radius) and over ``samples`` (all
    atoms of a finite space by default, S_2 of a lazy one).  Violations are
    report entries, not errors.
    """
    if radius < 1:
        raise InvalidInputError("radius must be >= 1")
    if samples is None:
        samples = (action.space.atoms if action.space.finite
                   else action.space.exhaustion(2))
    window = CubeWindow.centered(radius, action.d)
    doubled = CubeWindow.centered(2 * radius, action.d)
    worst_dev = 0.0
    worst = None
    violations = []
    checked = 0
    for s in sorted(samples, key=atom_key):
        # one incremental sweep per base atom gives w_t(s) for all t up to 2r
        log_s = action.space.log_weight(s)
        base = {t: (atom, math.exp(action.space.log_weight(atom) - log_s))
                for t, atom in iter_window_orbit(action, s, doubled)}
        w_cache = {}
        for t in window:
            st, wt = base[t]
            for u in window:
                key = (st, u)
                if key not in w_cache:
                    w_cache[key] = action.rn_derivative(u, st)
                lhs = base[vec_add(t, u)][1]
                rhs = wt * w_cache[key]
                dev = rel_dev(lhs, rhs)
                checked += 1
                if dev > worst_dev:
                    worst_dev = dev
                    worst = (t, u, s)
                if dev > rel_tol:
                    violations.append((t, u, s, dev))
    return CocycleReport(radius, rel_tol, checked, worst_dev, worst, violations)


def check_duality(action: NsAction, t, g: L1Function, A: Iterable
                  ) -> tuple[float, float]:
    """Return the duality pair for a finite atom set A.

    The left number integrates the dual image over A; the right one
    integrates g over {s : phi_t^{-1}(s) in A}, which is the forward image
    of A.  The two sides take genuinely different routes through the action
    (the dual image is assembled along inverse paths, the set on the right
    along forward paths), so they agree up to rounding exactly when the
    declared inverses and the composition order are consistent; a broken
    action surfaces as disagreement.
    """
    atoms = sorted(set(A), key=atom_key)
    for a in atoms:
        if a not in action.space:
            raise DomainError(f"set contains atom {a!r} outside the space")
    tvec = as_vec(t, action.d)
    image = action.dual_apply(tvec, g)
    lhs = math.fsum(image(a) * action.space.weight(a) for a in atoms)
    forward = sorted({action.apply(tvec, a) for a in atoms}, key=atom_key)
    rhs = math.fsum(g(b) * action.space.weight(b) for b in forward)
    return lhs, rhs
