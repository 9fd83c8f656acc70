"""Exactly computable example actions with declared ground truth.

Every builder returns an action whose conservative/dissipative status is
known by construction, so the diagnostic machinery can be validated against
it.  Freeness of lazy orbits is declared by the builder and never inferred.

Canonical fixtures, used throughout the tests and available by name:

========  ==========================================================
``E2``    two atoms with weights (1, 2), the swap map; conservative
``C4``    rotation on {0, 1, 2, 3}, uniform weights; conservative
``TR1``   translation s -> s + 1 on the integers; dissipative, free
``ST2``   d = 2 on the integers, only the first axis moves;
          conservative through the trivial axis
``OD3``   depth-3 binary odometer, bit weights (0.4, 0.6); conservative
``MIX``   disjoint union of C4 and TR1; mixed
========  ==========================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .action import NsAction, make_action
from .errors import InvalidInputError
from .hopf import build_translation_action
from .space import make_space


@dataclass(frozen=True)
class GroundTruth:
    """Declared conservativity of a builder's output."""

    label: str                      # conservative | dissipative | mixed
    parts: tuple = None             # ((part index, label), ...) for unions

    def as_dict(self) -> dict:
        out = {"label": self.label}
        if self.parts is not None:
            out["parts"] = {str(i): lbl for i, lbl in self.parts}
        return out


@dataclass
class ZooSpec:
    """A builder name plus its parameter map; JSON friendly."""

    builder: str
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"builder": self.builder, "params": self.params}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


# ---------------------------------------------------------------------------
# cyclic rotations

def _build_cyclic(N=None, sizes=None, weights=None, name=None) -> NsAction:
    if sizes is None:
        sizes = N
    if sizes is None:
        raise InvalidInputError("cyclic builder needs N (an int or int list)")
    if _is_int(sizes):
        sizes = [sizes]
    sizes = list(sizes)
    if not sizes or any(not _is_int(k) or k <= 0 for k in sizes):
        raise InvalidInputError(f"cyclic sizes must be positive ints: {sizes}")
    d = len(sizes)
    if d == 1:
        atoms = list(range(sizes[0]))
    else:
        atoms = [tuple(a) for a in product(*(range(k) for k in sizes))]
    if weights is None:
        weight_arg = 1.0
    elif isinstance(weights, dict):
        weight_arg = weights
    else:
        weights = list(weights)
        if len(weights) != len(atoms):
            raise InvalidInputError(
                f"{len(weights)} weights for {len(atoms)} atoms")
        weight_arg = dict(zip(atoms, weights))
    label = name or f"cyclic({sizes})"
    space = make_space(atoms, weight_arg, name=f"{label}-space")

    def rotate(axis, delta):
        k = sizes[axis]
        if d == 1:
            return lambda a: (a + delta) % k
        return lambda a: a[:axis] + ((a[axis] + delta) % k,) + a[axis + 1:]

    gens = [(rotate(i, +1), rotate(i, -1)) for i in range(d)]
    return make_action(space, gens, name=label, free_orbits=False)


# ---------------------------------------------------------------------------
# nonsingular odometer, truncated at depth K with wrap-around

def _od_inc(bits: str) -> str:
    # add one with carry, least significant bit first; all-ones wraps to zero
    out = []
    carry = True
    for b in bits:
        if carry:
            out.append("0" if b == "1" else "1")
            carry = b == "1"
        else:
            out.append(b)
    return "".join(out)


def _od_dec(bits: str) -> str:
    out = []
    borrow = True
    for b in bits:
        if borrow:
            out.append("1" if b == "0" else "0")
            borrow = b == "0"
        else:
            out.append(b)
    return "".join(out)


def _build_odometer(K, p, d=1, name=None) -> NsAction:
    if not _is_int(K) or K < 1:
        raise InvalidInputError(f"odometer depth K must be a positive int: {K!r}")
    p = float(p)
    if not (0.0 < p < 1.0):
        raise InvalidInputError(
            f"odometer parameter p={p} is invalid; need 0 < p < 1")
    if not _is_int(d) or d < 1:
        raise InvalidInputError(f"dimension must be a positive int: {d!r}")
    words = ["".join(b) for b in product("01", repeat=K)]

    def word_weight(w: str) -> float:
        out = 1.0
        for b in w:
            out *= p if b == "1" else 1.0 - p
        return out

    label = name or f"odometer(K={K}, p={p}, d={d})"
    if d == 1:
        atoms = words
        weight = {w: word_weight(w) for w in words}
        gens = [(_od_inc, _od_dec)]
    else:
        atoms = [tuple(t) for t in product(words, repeat=d)]
        weight = {}
        for a in atoms:
            mass = 1.0
            for w in a:
                mass *= word_weight(w)
            weight[a] = mass

        def turn(axis, fn):
            return lambda a: a[:axis] + (fn(a[axis]),) + a[axis + 1:]

        gens = [(turn(i, _od_inc), turn(i, _od_dec)) for i in range(d)]
    space = make_space(atoms, weight, name=f"{label}-space")
    return make_action(space, gens, name=label, free_orbits=False)


# ---------------------------------------------------------------------------
# translations (dissipative, free)

def _lattice_translation(d: int, name: str) -> NsAction:
    if d == 1:
        def contains(a):
            return _is_int(a)

        def exhaustion(m):
            return range(-m, m + 1)

        def shift(delta):
            return lambda a: a + delta
    else:
        def contains(a):
            return (isinstance(a, tuple) and len(a) == d
                    and all(_is_int(x) for x in a))

        def exhaustion(m):
            return [tuple(c) for c in product(range(-m, m + 1), repeat=d)]

        def shift_axis(axis, delta):
            return lambda a: a[:axis] + (a[axis] + delta,) + a[axis + 1:]
    space = make_space(atoms=None, weights=1.0, exhaustion=exhaustion,
                       contains=contains, name=f"{name}-space")
    if d == 1:
        gens = [(shift(+1), shift(-1))]
    else:
        gens = [(shift_axis(i, +1), shift_axis(i, -1)) for i in range(d)]
    return make_action(space, gens, name=name, free_orbits=True)


def _build_translation(tau=None, d=1, name=None) -> NsAction:
    """Translation by Z^d.

    Without ``tau`` the atoms are the lattice points themselves (plain ints
    when d = 1).  With ``tau`` (a mapping of base labels to positive
    weights, or a list assigned to labels 0, 1, ...), the atoms are pairs
    (label, lattice vector) with mass tau(label), the general W x Z^d form.
    """
    if not _is_int(d) or d < 1:
        raise InvalidInputError(f"dimension must be a positive int: {d!r}")
    label = name or f"translation(d={d})"
    if tau is None:
        return _lattice_translation(d, label)
    if isinstance(tau, (list, tuple)):
        tau = {i: w for i, w in enumerate(tau)}
    if not tau:
        raise InvalidInputError("tau must name at least one base point")
    W = make_space(list(tau), tau, name=f"{label}-base")
    return build_translation_action(W, d, name=label)


# ---------------------------------------------------------------------------
# actions with built-in stabilizer directions

def _build_stabilizer(d, active=(0,), name=None) -> NsAction:
    """A Z^d-action on the integer line where only some axes move.

    Every inactive axis contributes a stabilizer element to every orbit, so
    the action is conservative however the active axes translate.
    """
    if not _is_int(d) or d < 1:
        raise InvalidInputError(f"dimension must be a positive int: {d!r}")
    if _is_int(active):
        active = (active,)
    active = tuple(sorted(set(active)))
    if any(not _is_int(i) or not 0 <= i < d for i in active):
        raise InvalidInputError(
            f"active axes {active} must be indices below d={d}")
    if len(active) >= d:
        raise InvalidInputError(
            "at least one axis must stay inactive; a fully active axis set "
            "is a translation, use the translation builder")
    label = name or f"stabilizer(d={d}, active={list(active)})"

    def contains(a):
        return _is_int(a)

    def exhaustion(m):
        return range(-m, m + 1)

    space = make_space(atoms=None, weights=1.0, exhaustion=exhaustion,
                       contains=contains, name=f"{label}-space")

    def shift(delta):
        return lambda a: a + delta

    identity = lambda a: a
    gens = [(shift(+1), shift(-1)) if i in active else (identity, identity)
            for i in range(d)]
    return make_action(space, gens, name=label, free_orbits=False)


# ---------------------------------------------------------------------------
# disjoint unions

def _build_union(parts, name=None) -> NsAction:
    if len(parts) != 2:
        raise InvalidInputError("disjoint_union takes exactly two parts")
    specs = [p if isinstance(p, ZooSpec) else ZooSpec(**p) for p in parts]
    actions = [build(s) for s in specs]
    a, b = actions
    if a.d != b.d:
        raise InvalidInputError(
            f"cannot union actions of different dimension ({a.d} vs {b.d})")
    label = name or f"union({a.name}, {b.name})"
    d = a.d
    finite = a.space.finite and b.space.finite

    def contains(atom):
        if not (isinstance(atom, tuple) and len(atom) == 2):
            return False
        tag, inner = atom
        if tag == 0:
            return inner in a.space
        if tag == 1:
            return inner in b.space
        return False

    def weight(atom):
        tag, inner = atom
        return (a if tag == 0 else b).space.weight(inner)

    def exhaustion(m):
        return ([(0, x) for x in a.space.exhaustion(m)]
                + [(1, x) for x in b.space.exhaustion(m)])

    if finite:
        atoms = [(0, x) for x in a.space.atoms] + [(1, x) for x in b.space.atoms]
        space = make_space(atoms, weight, name=f"{label}-space")
    else:
        space = make_space(atoms=None, weights=weight, exhaustion=exhaustion,
                           contains=contains, name=f"{label}-space")

    def lift(axis, forward):
        def move(atom):
            tag, inner = atom
            part = a if tag == 0 else b
            return (tag, part.step(axis, inner, forward))
        return move

    gens = [(lift(i, True), lift(i, False)) for i in range(d)]

    def free(atom):
        tag, inner = atom
        return (a if tag == 0 else b).declared_free(inner)

    return make_action(space, gens, name=label, free_orbits=free)


def _union_truth(parts) -> GroundTruth:
    specs = [p if isinstance(p, ZooSpec) else ZooSpec(**p) for p in parts]
    labels = [ground_truth(s).label for s in specs]
    if labels[0] == labels[1] and "mixed" not in labels:
        return GroundTruth(labels[0], parts=tuple(enumerate(labels)))
    return GroundTruth("mixed", parts=tuple(enumerate(labels)))


# ---------------------------------------------------------------------------
# registry

_BUILDERS = {
    "cyclic": {
        "build": _build_cyclic,
        "truth": lambda **kw: GroundTruth("conservative"),
        "params": {"N": "int or list of ints (cube side per axis)",
                   "weights": "optional list or mapping of atom weights"},
        "ground_truth": "conservative",
    },
    "odometer": {
        "build": _build_odometer,
        "truth": lambda **kw: GroundTruth("conservative"),
        "params": {"K": "depth (positive int)",
                   "p": "bit weight, 0 < p < 1 (p = 1/2 degenerates to the "
                        "measure-preserving odometer)",
                   "d": "dimension (default 1)"},
        "ground_truth": "conservative",
    },
    "translation": {
        "build": _build_translation,
        "truth": lambda **kw: GroundTruth("dissipative"),
        "params": {"tau": "optional base weights (mapping or list); omitted "
                          "means the bare integer lattice",
                   "d": "dimension (default 1)"},
        "ground_truth": "dissipative",
    },
    "stabilizer": {
        "build": _build_stabilizer,
        "truth": lambda **kw: GroundTruth("conservative"),
        "params": {"d": "dimension", "active": "axes that translate "
                   "(at least one axis must stay inactive)"},
        "ground_truth": "conservative",
    },
    "disjoint_union": {
        "build": _build_union,
        "truth": lambda **kw: _union_truth(kw["parts"]),
        "params": {"parts": "list of two nested builder specs"},
        "ground_truth": "derived from the parts (mixed when they differ)",
    },
}


def build(spec: ZooSpec) -> NsAction:
    """Instantiate a builder spec."""
    if spec.builder not in _BUILDERS:
        raise InvalidInputError(
            f"unknown builder {spec.builder!r}; known: {sorted(_BUILDERS)}")
    try:
        return _BUILDERS[spec.builder]["build"](**spec.params)
    except TypeError as exc:
        raise InvalidInputError(
            f"bad parameters for builder {spec.builder!r}: {exc}") from exc


def ground_truth(spec: ZooSpec) -> GroundTruth:
    """The declared conservativity of a builder spec's output."""
    if spec.builder not in _BUILDERS:
        raise InvalidInputError(
            f"unknown builder {spec.builder!r}; known: {sorted(_BUILDERS)}")
    return _BUILDERS[spec.builder]["truth"](**spec.params)


def zoo_list() -> list:
    """Builder names, parameter schemas, and declared truths, plus fixtures."""
    builders = [
        {"builder": name,
         "params": dict(entry["params"]),
         "ground_truth": entry["ground_truth"]}
        for name, entry in sorted(_BUILDERS.items())
    ]
    return {"builders": builders, "fixtures": sorted(FIXTURES)}


FIXTURES = {
    "E2": ZooSpec("cyclic", {"N": 2, "weights": [1.0, 2.0], "name": "E2"}),
    "C4": ZooSpec("cyclic", {"N": 4, "name": "C4"}),
    "TR1": ZooSpec("translation", {"d": 1, "name": "TR1"}),
    "ST2": ZooSpec("stabilizer", {"d": 2, "active": [0], "name": "ST2"}),
    "OD3": ZooSpec("odometer", {"K": 3, "p": 0.4, "name": "OD3"}),
    "MIX": ZooSpec("disjoint_union", {
        "parts": [{"builder": "cyclic", "params": {"N": 4, "name": "C4"}},
                  {"builder": "translation", "params": {"d": 1, "name": "TR1"}}],
        "name": "MIX"}),
}


def fixture_spec(name: str) -> ZooSpec:
    if name not in FIXTURES:
        raise InvalidInputError(
            f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
    return FIXTURES[name]


def build_fixture(name: str) -> NsAction:
    return build(fixture_spec(name))
