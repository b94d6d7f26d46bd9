"""Sets of ring elements, cyclic subgroups of R*, and tabulated functions."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .rings import RingElem, RingError, RingSpec, _check_same

EXPLICIT = "explicit"
RANDOM_UNITS = "random-units"
RANDOM_ELEMENTS = "random-elements"
GEOMETRIC = "geometric-progression"
INTERVAL = "interval"
SUBGROUP = "subgroup"


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ElemSet:
    """Finite subset of a ring, held as sorted element codes."""

    ring: RingSpec
    codes: tuple[int, ...]
    provenance: str = field(default=EXPLICIT, compare=False)

    @classmethod
    def of(cls, ring: RingSpec, items: Iterable, provenance: str = EXPLICIT) -> ElemSet:
        codes = set()
        for x in items:
            if isinstance(x, RingElem):
                _check_same(ring, x.ring)
                codes.add(x.code)
            else:
                codes.add(ring(x).code)
        return cls(ring, tuple(sorted(codes)), provenance)

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[RingElem]:
        return (RingElem(self.ring, c) for c in self.codes)

    def __contains__(self, x) -> bool:
        code = x.code if isinstance(x, RingElem) else self.ring(x).code
        return code in self._lookup

    @property
    def _lookup(self) -> frozenset[int]:
        try:
            return self.__dict__["_lookup_cache"]
        except KeyError:
            s = frozenset(self.codes)
            object.__setattr__(self, "_lookup_cache", s)
            return s

    def issubset(self, other: ElemSet) -> bool:
        return self._lookup <= other._lookup

    def all_units(self) -> bool:
        return all(x.is_unit() for x in self)

    def __str__(self) -> str:
        return "{" + ", ".join(str(x) for x in self) + "}"


def _same_ring(a: ElemSet, b: ElemSet) -> RingSpec:
    _check_same(a.ring, b.ring)
    return a.ring


def sum_set(A: ElemSet, B: ElemSet) -> ElemSet:
    ring = _same_ring(A, B)
    return ElemSet(ring, tuple(sorted({ring.add_code(x, y) for x in A.codes for y in B.codes})))


def product_set(A: ElemSet, B: ElemSet) -> ElemSet:
    ring = _same_ring(A, B)
    return ElemSet(ring, tuple(sorted({ring.mul_code(x, y) for x in A.codes for y in B.codes})))


# ---------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True)
class SubgroupSet:
    generators: tuple[RingElem, ...]
    elements: ElemSet

    @property
    def ring(self) -> RingSpec:
        return self.elements.ring

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.elements


def subgroup_generate(spec: RingSpec, *gens) -> SubgroupSet:
    """Subgroup of R* generated by the given units (cyclic for one generator)."""
    gens = tuple(spec(g) for g in gens) or (spec.one,)
    for g in gens:
        if not g.is_unit():
            raise RingError(f"generator {g} is not a unit")
    found = {1}
    frontier = [1]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = spec.mul_code(x, g.code)
            if y not in found:
                found.add(y)
                frontier.append(y)
    return SubgroupSet(gens, ElemSet(spec, tuple(sorted(found)), SUBGROUP))


def multiplicative_order(x: RingElem) -> int:
    if not x.is_unit():
        raise RingError(f"{x} is not a unit")
    k, y = 1, x.code
    while y != 1:
        y = x.ring.mul_code(y, x.code)
        k += 1
    return k


def unit_generator(spec: RingSpec) -> RingElem:
    """Smallest-code unit of maximal multiplicative order."""
    best, best_order = spec.one, 1
    for x in spec.units():
        k = multiplicative_order(x)
        if k > best_order:
            best, best_order = x, k
            if k == spec.unit_count:
                break
    return best


# ---------------------------------------------------------------------------
# function tables


@dataclass(frozen=True)
class FuncTable:
    """A function ``domain -> R*`` given by its value table (codes)."""

    domain: ElemSet
    values: tuple[int, ...]  # aligned with domain.codes
    name: str = "table"

    def __post_init__(self) -> None:
        if len(self.values) != len(self.domain.codes):
            raise DomainError("value table is not total on the domain")
        ring = self.domain.ring
        for c in self.values:
            if ring.valuation_code(c) != 0:
                raise DomainError(f"{self.name} takes the non-unit value {ring.from_code(c)}")

    @property
    def ring(self) -> RingSpec:
        return self.domain.ring

    @property
    def _index(self) -> dict[int, int]:
        try:
            return self.__dict__["_index_cache"]
        except KeyError:
            idx = dict(zip(self.domain.codes, self.values))
            object.__setattr__(self, "_index_cache", idx)
            return idx

    def code_at(self, x: int) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise DomainError(f"{self.ring.from_code(x)} is outside the domain of {self.name}") from None

    def __call__(self, x: RingElem) -> RingElem:
        return RingElem(self.ring, self.code_at(x.code))

    def items(self) -> Iterator[tuple[RingElem, RingElem]]:
        ring = self.ring
        for x, y in zip(self.domain.codes, self.values):
            yield RingElem(ring, x), RingElem(ring, y)

    def covers(self, s: ElemSet) -> bool:
        return s.issubset(self.domain)


def tabulate(domain: ElemSet, fn: Callable[[RingElem], RingElem], name: str) -> FuncTable:
    return FuncTable(domain, tuple(domain.ring(fn(x)).code for x in domain), name)


def identity(domain: ElemSet) -> FuncTable:
    return tabulate(domain, lambda x: x, "identity")


def monomial(domain: ElemSet, k: int, coeff: int | RingElem = 1) -> FuncTable:
    c = domain.ring(coeff)
    return tabulate(domain, lambda x: c * x**k, f"monomial-{k}")


def constant(domain: ElemSet, value: int | RingElem) -> FuncTable:
    v = domain.ring(value)
    return tabulate(domain, lambda x: v, f"constant-{v}")


def from_pairs(domain: ElemSet, pairs: Iterable[tuple]) -> FuncTable:
    ring = domain.ring
    table = {ring(x).code: ring(y).code for x, y in pairs}
    missing = [c for c in domain.codes if c not in table]
    if missing:
        raise DomainError(f"table misses {len(missing)} domain points, e.g. {ring.from_code(missing[0])}")
    return FuncTable(domain, tuple(table[c] for c in domain.codes), "table")


def random_table(domain: ElemSet, seed: int, values: ElemSet | None = None) -> FuncTable:
    """Uniformly random unit-valued table, deterministic in ``seed``."""
    ring = domain.ring
    pool = values.codes if values is not None else tuple(u.code for u in ring.units())
    rng = random.Random(seed)
    return FuncTable(domain, tuple(rng.choice(pool) for _ in domain.codes), f"random-{seed}")


def multiplicity(t: FuncTable) -> int:
    """Largest fiber ``max_v |{x : t(x) = v}|`` (0 on an empty domain)."""
    return max(Counter(t.values).values(), default=0)


def _check_domains(g: FuncTable, h: FuncTable) -> None:
    _check_same(g.ring, h.ring)
    if g.domain.codes != h.domain.codes:
        raise DomainError(f"domain mismatch between {g.name} and {h.name}")


def product(g: FuncTable, h: FuncTable) -> FuncTable:
    """Pointwise product ``x -> g(x) h(x)``."""
    _check_domains(g, h)
    ring = g.ring
    vals = tuple(ring.mul_code(a, b) for a, b in zip(g.values, h.values))
    return FuncTable(g.domain, vals, f"({g.name}*{h.name})")


def translate(h: FuncTable, u: RingElem | int, domain: ElemSet | None = None) -> FuncTable:
    """``h_u(x) = h(u x)`` on ``domain`` (default: the domain of ``h``)."""
    ring = h.ring
    u = ring(u)
    if not u.is_unit():
        raise DomainError(f"translation by the non-unit {u}")
    dom = domain if domain is not None else h.domain
    vals = tuple(h.code_at(ring.mul_code(u.code, x)) for x in dom.codes)
    return FuncTable(dom, vals, f"{h.name}_{u}")


def times_identity(g: FuncTable) -> FuncTable:
    """``x -> x g(x)``; the domain must consist of units."""
    return product(g, identity(g.domain))


def g_hu_id(g: FuncTable, h: FuncTable, u: RingElem | int) -> FuncTable:
    return times_identity(product(g, translate(h, u, g.domain)))


def g2_id(g: FuncTable) -> FuncTable:
    return times_identity(product(g, g))


def max_translate_multiplicity(g: FuncTable, h: FuncTable, shifts: ElemSet | None = None) -> int:
    """``max_u mu(g * h_u * id)`` over ``u`` in ``shifts`` (default: the domain of g)."""
    shifts = shifts if shifts is not None else g.domain
    return max((multiplicity(g_hu_id(g, h, u)) for u in shifts), default=0)


def ratio_value_count(g: FuncTable) -> int:
    """``max_z |{g(xz)/g(x) : x in G}|`` for a function on a subgroup G."""
    ring = g.ring
    best = 0
    for z in g.domain.codes:
        ratios = {
            ring.mul_code(g.code_at(ring.mul_code(x, z)), ring.inverse_code(gx))
            for x, gx in zip(g.domain.codes, g.values)
        }
        best = max(best, len(ratios))
    return best


# ---------------------------------------------------------------------------
# the composite maps

F1 = "F1"  # g(x) (h(x) + y)
F2 = "F2"  # g(x) h(y) (x + y)
F3 = "F3"  # x y (g(x) + y)


def f_value(form: str, g: FuncTable, h: FuncTable | None, x: int, y: int) -> int:
    """One value of the selected form, on codes."""
    ring = g.ring
    if form == F1:
        return ring.mul_code(g.code_at(x), ring.add_code(h.code_at(x), y))
    if form == F2:
        return ring.mul_code(ring.mul_code(g.code_at(x), h.code_at(y)), ring.add_code(x, y))
    if form == F3:
        return ring.mul_code(ring.mul_code(x, y), ring.add_code(g.code_at(x), y))
    raise ValueError(f"unknown form {form!r}")


def apply_f(form: str, g: FuncTable, h: FuncTable | None, A: ElemSet, B: ElemSet) -> ElemSet:
    """Image ``{f(a, b) : a in A, b in B}`` as a subset of R."""
    ring = _same_ring(A, B)
    _check_same(ring, g.ring)
    if not g.covers(A):
        raise DomainError(f"A is not inside the domain of {g.name}")
    if form in (F1, F2):
        if h is None:
            raise DomainError(f"form {form} needs h")
        if form == F1 and not h.covers(A):
            raise DomainError(f"A is not inside the domain of {h.name}")
        if form == F2 and not h.covers(B):
            raise DomainError(f"B is not inside the domain of {h.name}")
    image = {f_value(form, g, h, x, y) for x in A.codes for y in B.codes}
    return ElemSet(ring, tuple(sorted(image)))


# ---------------------------------------------------------------------------
# set families


def geometric(spec: RingSpec, base, length: int, start=None) -> ElemSet:
    """``{start * base**i : 0 <= i < length}``; ``start`` defaults to ``base``.

    Collisions are kept collapsed, so the result may be shorter than ``length``.
    """
    b = spec(base)
    if not b.is_unit():
        raise RingError(f"geometric base {b} is not a unit")
    s = spec(start) if start is not None else b
    codes, x = set(), s.code
    for _ in range(length):
        codes.add(x)
        x = spec.mul_code(x, b.code)
    return ElemSet(spec, tuple(sorted(codes)), GEOMETRIC)


def set_family(spec: RingSpec, kind: str, size: int, seed: int | None = None, **params) -> ElemSet:
    """Deterministic set generators.

    ``random-units`` / ``random-elements`` sample ``size`` distinct members with
    ``random.Random(seed)``; ``geometric-progression`` takes ``base`` (and optional
    ``start``); ``interval`` takes ``start`` and ``units_only`` and is restricted to
    integer-modular rings.
    """
    if size < 0:
        raise ValueError("size must be nonnegative")
    if kind in (RANDOM_UNITS, RANDOM_ELEMENTS):
        if seed is None:
            raise ValueError(f"{kind} needs an explicit seed")
        pool = [x.code for x in (spec.units() if kind == RANDOM_UNITS else spec.elements())]
        exclude = {spec(e).code for e in params.get("exclude", ())}
        pool = [c for c in pool if c not in exclude]
        if size > len(pool):
            raise ValueError(f"requested {size} elements from a population of {len(pool)}")
        return ElemSet(spec, tuple(sorted(random.Random(seed).sample(pool, size))), kind)
    if kind == GEOMETRIC:
        return geometric(spec, params.get("base", 2), size, params.get("start"))
    if kind == INTERVAL:
        if spec.family != "integer-modular":
            raise ValueError("interval sets exist only for integer-modular rings")
        start = int(params.get("start", 1))
        units_only = bool(params.get("units_only", False))
        codes: list[int] = []
        x = start
        for _ in range(spec.order):
            if len(codes) == size:
                break
            c = x % spec.order
            if not units_only or spec.valuation_code(c) == 0:
                codes.append(c)
            x += 1
        if len(codes) < size:
            raise ValueError(f"interval of {size} elements does not fit in {spec}")
        return ElemSet(spec, tuple(sorted(set(codes))), INTERVAL)
    if kind == SUBGROUP:
        gens = params.get("generators") or [params.get("generator", 1)]
        return subgroup_generate(spec, *gens).elements
    raise ValueError(f"unknown set family {kind!r}")
