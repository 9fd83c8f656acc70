"""Purely atomic sigma-finite measure spaces and finitely supported functions.

Atoms are opaque hashable identifiers (ints, strings, or nested tuples of
those).  Because all mass sits on atoms, every integral in this package is a
finite sum, evaluated in a fixed sorted order so results are reproducible
bit for bit.

An infinite space is rule-defined: it carries a membership predicate, a
weight rule, and an exhaustion ``m -> S_m`` of nested finite atom sets whose
union is the whole space.  Only finitely supported functions are integrable
directly; anything else enters through :func:`truncate_l1` with a certified
tail bound.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

from .errors import (
    ConstructionError,
    DomainError,
    InvalidInputError,
    UnsupportedInputError,
)

#: default relative tolerance for numerical identity checks
REL_TOL = 1e-9


def atom_key(atom):
    """Total-order sort key covering ints, strings, and nested tuples."""
    if isinstance(atom, bool):
        return (0, int(atom))
    if isinstance(atom, (int, float)):
        return (0, atom)
    if isinstance(atom, str):
        return (1, atom)
    if isinstance(atom, tuple):
        return (2, tuple(atom_key(x) for x in atom))
    return (3, repr(atom))


def rel_dev(a: float, b: float) -> float:
    """Relative deviation |a-b| / max(|a|,|b|), zero when both vanish."""
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


class AtomSpace:
    """A sigma-finite purely atomic measure space.

    Immutable after construction; safe to share between workers.  Use
    :func:`make_space` instead of calling the constructor directly.
    """

    __slots__ = ("name", "finite", "_atoms", "_atom_set", "_weight_fn",
                 "_contains_fn", "_exhaustion_fn", "_exh_cache")

    def __init__(self, name, finite, atoms, weight_fn, contains_fn, exhaustion_fn):
        self.name = name
        self.finite = finite
        self._atoms = atoms
        self._atom_set = frozenset(atoms) if atoms is not None else None
        self._weight_fn = weight_fn
        self._contains_fn = contains_fn
        self._exhaustion_fn = exhaustion_fn
        self._exh_cache = {}

    def __contains__(self, atom) -> bool:
        if self._atom_set is not None:
            return atom in self._atom_set
        return bool(self._contains_fn(atom))

    @property
    def atoms(self) -> tuple:
        """All atoms of a finite space, sorted."""
        if self._atoms is None:
            raise UnsupportedInputError(
                f"space {self.name!r} is infinite; use exhaustion(m)")
        return self._atoms

    def weight(self, atom) -> float:
        """The measure of a single atom (strictly positive)."""
        if atom not in self:
            raise DomainError(f"atom {atom!r} is not in space {self.name!r}")
        w = float(self._weight_fn(atom))
        if not (w > 0.0 and math.isfinite(w)):
            raise ConstructionError(
                f"weight of atom {atom!r} in space {self.name!r} is {w}; "
                "weights must be strictly positive and finite")
        return w

    def log_weight(self, atom) -> float:
        return math.log(self.weight(atom))

    def exhaustion(self, m: int) -> tuple:
        """The finite set S_m of the exhaustion, sorted; monotone in m."""
        if not isinstance(m, int) or m < 0:
            raise InvalidInputError(f"exhaustion index must be an int >= 0, got {m!r}")
        if m not in self._exh_cache:
            atoms = tuple(sorted(self._exhaustion_fn(m), key=atom_key))
            self._exh_cache[m] = atoms
        return self._exh_cache[m]

    def total_mass(self) -> float:
        """Total measure of a finite space."""
        return math.fsum(self.weight(a) for a in self.atoms)

    def __repr__(self):
        kind = "finite" if self.finite else "lazy"
        return f"AtomSpace({self.name!r}, {kind})"


def make_space(atoms=None, weights=None, *, exhaustion=None, contains=None,
               name: str = "") -> AtomSpace:
    """Build and validate an :class:`AtomSpace`.

    ``atoms``
        An iterable of atom ids for a finite space, or ``None`` for a lazy
        rule-defined space (then ``contains`` and ``exhaustion`` are required).
    ``weights``
        A mapping, a callable, a positive scalar, or (finite spaces only) a
        sequence aligned with the given atom order.
    ``exhaustion``
        Callable ``m -> iterable of atoms``.  Finite spaces default to the
        trivial exhaustion, every S_m being the whole universe.
    """
    if atoms is not None:
        given = list(atoms)
        if isinstance(weights, (list, tuple)):
            if len(weights) != len(given):
                raise ConstructionError(
                    f"{len(weights)} weights for {len(given)} atoms")
            weight_map = dict(zip(given, weights))
            weight_fn = weight_map.__getitem__
        elif isinstance(weights, Mapping):
            weight_fn = weights.__getitem__
        elif callable(weights):
            weight_fn = weights
        elif weights is None:
            weight_fn = lambda a: 1.0
        else:
            w0 = float(weights)
            weight_fn = lambda a: w0
        sorted_atoms = tuple(sorted(given, key=atom_key))
        if len(set(sorted_atoms)) != len(sorted_atoms):
            raise ConstructionError("duplicate atom ids in atom list")
        universe = frozenset(sorted_atoms)
        if exhaustion is None:
            exhaustion_fn = lambda m: sorted_atoms
        else:
            exhaustion_fn = exhaustion
        space = AtomSpace(name, True, sorted_atoms, weight_fn,
                          None, exhaustion_fn)
        for a in sorted_atoms:
            space.weight(a)  # raises naming the offending atom
        if exhaustion is not None:
            _check_exhaustion(space, samples=(1, 2, len(sorted_atoms)))
            full = set(space.exhaustion(len(sorted_atoms)))
            if full != universe:
                raise ConstructionError(
                    f"exhaustion of finite space {name!r} never reaches the "
                    "whole universe")
        return space

    # lazy, rule-defined space
    if exhaustion is None:
        raise ConstructionError(
            f"infinite space {name!r} requires an exhaustion rule")
    if contains is None:
        raise ConstructionError(
            f"infinite space {name!r} requires a membership predicate")
    if not callable(weights):
        if weights is None:
            weight_fn = lambda a: 1.0
        else:
            w0 = float(weights)
            weight_fn = lambda a: w0
    else:
        weight_fn = weights
    space = AtomSpace(name, False, None, weight_fn, contains, exhaustion)
    _check_exhaustion(space, samples=(0, 1, 2, 3))
    for a in space.exhaustion(2):
        if a not in space:
            raise ConstructionError(
                f"exhaustion atom {a!r} fails the membership predicate "
                f"of space {name!r}")
        space.weight(a)
    return space


def _check_exhaustion(space, samples):
    prev = None
    prev_m = None
    for m in samples:
        cur = set(space.exhaustion(m))
        if prev is not None and not prev <= cur:
            raise ConstructionError(
                f"exhaustion of space {space.name!r} is not monotone "
                f"between m={prev_m} and m={m}")
        prev, prev_m = cur, m


class L1Function:
    """A finitely supported nonnegative function with a cached L1 norm.

    Values outside the support are zero.  ``truncation_error`` records a
    certified bound on the L1 mass discarded when the function was produced
    by :func:`truncate_l1` (zero otherwise).  Immutable by convention.
    """

    __slots__ = ("space", "_values", "_items", "norm", "truncation_error")

    def __init__(self, space: AtomSpace, values: Mapping, truncation_error: float = 0.0):
        if truncation_error < 0:
            raise InvalidInputError("truncation error must be nonnegative")
        cleaned = {}
        for atom, v in values.items():
            v = float(v)
            if v < 0 or not math.isfinite(v):
                raise InvalidInputError(
                    f"function value at atom {atom!r} is {v}; "
                    "values must be finite and nonnegative")
            if atom not in space:
                raise DomainError(
                    f"function references atom {atom!r} outside space "
                    f"{space.name!r}")
            if v > 0.0:
                cleaned[atom] = v
        self.space = space
        self._values = cleaned
        self._items = tuple(sorted(cleaned.items(), key=lambda kv: atom_key(kv[0])))
        self.norm = math.fsum(v * space.weight(a) for a, v in self._items)
        self.truncation_error = float(truncation_error)

    @classmethod
    def indicator(cls, space: AtomSpace, atoms: Iterable) -> "L1Function":
        return cls(space, {a: 1.0 for a in atoms})

    @property
    def support(self) -> tuple:
        return tuple(a for a, _ in self._items)

    def items(self) -> tuple:
        """(atom, value) pairs in sorted atom order."""
        return self._items

    def __call__(self, atom) -> float:
        return self._values.get(atom, 0.0)

    def to_dict(self) -> dict:
        return dict(self._values)

    def add(self, other: "L1Function") -> "L1Function":
        if other.space is not self.space:
            raise DomainError("cannot add functions on different spaces")
        merged = dict(self._values)
        for a, v in other._items:
            merged[a] = merged.get(a, 0.0) + v
        return L1Function(self.space, merged,
                          self.truncation_error + other.truncation_error)

    def scale(self, c: float) -> "L1Function":
        if c < 0:
            raise InvalidInputError("scaling factor must be nonnegative")
        return L1Function(self.space, {a: c * v for a, v in self._items},
                          c * self.truncation_error)

    def __repr__(self):
        return (f"L1Function(support={len(self._items)}, norm={self.norm!r}, "
                f"space={self.space.name!r})")


def integrate(space: AtomSpace, f: L1Function) -> float:
    """The integral of ``f`` over ``space``: sum of value * weight per atom.

    Deterministic: atoms are visited in sorted order and accumulated with
    exact (fsum) summation.
    """
    if f.space is not space:
        raise DomainError("function is defined over a different space")
    return math.fsum(v * space.weight(a) for a, v in f.items())


def truncate_l1(space: AtomSpace, f, epsilon: float, *,
                tail_radius=None) -> L1Function:
    """Restrict a summable nonnegative rule to a compact (finite) support.

    ``f`` may be an :class:`L1Function` (returned unchanged, it is already
    compactly supported) or a callable rule ``atom -> value``.  For a lazy
    space the caller must certify the tail: ``tail_radius`` is a radius R
    (a number, or a callable ``epsilon -> R``) such that the mass of ``f``
    outside the exhaustion set S_R is at most ``epsilon``.  The result is
    ``f`` restricted to S_R, pointwise below ``f``, with the certified
    truncation error recorded on the returned function.
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if isinstance(f, L1Function):
        if f.space is not space:
            raise DomainError("function is defined over a different space")
        return f
    if not callable(f):
        raise InvalidInputError("f must be an L1Function or a callable rule")
    if space.finite:
        return L1Function(space, {a: f(a) for a in space.atoms})
    if tail_radius is None:
        raise UnsupportedInputError(
            "truncating a rule on an infinite space needs a certified tail "
            "bound: pass tail_radius (a radius R, or a callable epsilon -> R)")
    radius = tail_radius(epsilon) if callable(tail_radius) else tail_radius
    radius = int(radius)
    if radius < 0:
        raise InvalidInputError("tail radius must be nonnegative")
    values = {a: f(a) for a in space.exhaustion(radius)}
    return L1Function(space, values, truncation_error=epsilon)
