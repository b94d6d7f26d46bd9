"""Finite valuation rings Z/p^r and F_p[x]/(f^r).

Elements are stored as a single integer *code*.  For ``Z/p^r`` the code is the
least nonnegative residue.  For ``F_p[x]/(f^r)`` it packs the fully reduced
coefficient vector ``c_0 + c_1 x + ... + c_{N-1} x^{N-1}`` (``N = r deg f``)
as ``sum c_i p^i``, which makes equality and hashing structural and lets the
graph code index vertices directly by code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

INTEGER_MODULAR = "integer-modular"
POLYNOMIAL_QUOTIENT = "polynomial-quotient"

DEFAULT_ENUMERATION_CAP = 10**6
# addition/multiplication tables are cached below this order
TABLE_CAP = 4096


class RingError(ValueError):
    """Invalid ring construction or element input."""


class MixedRingError(RingError):
    """Operands belong to different rings."""


class NonUnitError(RingError, ArithmeticError):
    """Inverse requested for an element of the maximal ideal."""


class EnumerationCapError(RingError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


# ---------------------------------------------------------------------------
# dense polynomials over F_p, coefficient lists low-to-high, no trailing zeros

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _poly_divmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        c = a[-1] * inv_lead % p
        quot[shift] = c
        for j, y in enumerate(b):
            a[shift + j] = (a[shift + j] - c * y) % p
        _trim(a)
    return _trim(quot), a


def _poly_sub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _poly_inverse_mod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    """Inverse of ``a`` modulo ``m`` in F_p[x] via the extended Euclidean algorithm."""
    r0, r1 = _trim(list(m)), _trim(list(a))
    s0, s1 = [], [1]
    while r1:
        quot, rem = _poly_divmod(r0, r1, p)
        r0, r1 = r1, rem
        s0, s1 = s1, _poly_sub(s0, _poly_mul(quot, s1, p), p)
    if len(r0) != 1:
        raise NonUnitError("polynomial is not invertible modulo f")
    c = pow(r0[0], -1, p)
    return _trim([x * c % p for x in s0])


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Trial division of ``f`` by every monic polynomial of degree <= deg(f)/2."""
    f = _trim(list(f))
    deg = len(f) - 1
    if deg < 1:
        return False
    for k in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            _, rem = _poly_divmod(f, list(low) + [1], p)
            if not rem:
                return False
    return True


def _encode(coeffs: Sequence[int], p: int) -> int:
    code = 0
    for c in reversed(coeffs):
        code = code * p + c
    return code


def _decode(code: int, p: int, length: int) -> list[int]:
    out = []
    for _ in range(length):
        code, c = divmod(code, p)
        out.append(c)
    return out


def _fmt_poly(coeffs: Sequence[int], var: str = "x") -> str:
    terms = []
    for i, c in enumerate(coeffs):
        if not c:
            continue
        if i == 0:
            terms.append(str(c))
        else:
            mono = var if i == 1 else f"{var}^{i}"
            terms.append(mono if c == 1 else f"{c}{mono}")
    return "+".join(terms) if terms else "0"


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RingSpec:
    """A finite valuation ring of order ``q**r``.

    ``f`` holds the coefficients (low-to-high) of the monic irreducible
    polynomial for the polynomial-quotient family and is empty otherwise.
    """

    family: str
    p: int
    r: int
    f: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.family not in (INTEGER_MODULAR, POLYNOMIAL_QUOTIENT):
            raise RingError(f"unknown ring family {self.family!r}")
        if not isinstance(self.r, int) or self.r < 1:
            raise RingError(f"nilpotency degree r must be >= 1, got {self.r!r}")
        if not is_prime(self.p):
            raise RingError(f"p={self.p} is not prime")
        if self.p == 2:
            raise RingError("p=2 is not supported: the residue field must have odd order")
        if self.family == INTEGER_MODULAR:
            if self.f:
                raise RingError("integer-modular rings take no polynomial f")
            return
        f = tuple(int(c) % self.p for c in self.f)
        object.__setattr__(self, "f", f)
        if len(f) < 2 or f[-1] != 1:
            raise RingError(f"f={list(self.f)} must be monic of degree >= 1")
        if not is_irreducible(f, self.p):
            raise RingError(f"f={_fmt_poly(f)} is reducible over F_{self.p}")

    # -- structure ----------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree of the residue field over F_p."""
        return len(self.f) - 1 if self.f else 1

    @property
    def q(self) -> int:
        return self.p**self.degree

    @property
    def order(self) -> int:
        return self.q**self.r

    @property
    def unit_count(self) -> int:
        return self.q**self.r - self.q ** (self.r - 1)

    @property
    def _width(self) -> int:
        # number of F_p coefficients in a polynomial-quotient element
        return self.r * self.degree

    @cached_property
    def _modulus(self) -> tuple[int, ...]:
        m = [1]
        for _ in range(self.r):
            m = _poly_mul(m, self.f, self.p)
        return tuple(m)

    @property
    def label(self) -> str:
        """Text form accepted by :func:`parse_ring`."""
        if self.family == INTEGER_MODULAR:
            return f"zpr:{self.p},{self.r}"
        return f"polyq:{self.p},{self.r}," + ",".join(map(str, self.f))

    def __str__(self) -> str:
        if self.family == INTEGER_MODULAR:
            return f"Z/{self.p ** self.r}"
        mod = _fmt_poly(self.f)
        if self.r > 1:
            mod = f"({mod})^{self.r}" if len(self.f) > 2 or self.f[0] else f"x^{self.r}"
        return f"F_{self.p}[x]/({mod})"

    # -- element construction -------------------------------------------------

    def __call__(self, value: int | RingElem) -> RingElem:
        """The image of an integer under Z -> R (or an element of this ring)."""
        if isinstance(value, RingElem):
            _check_same(self, value.ring)
            return value
        if self.family == INTEGER_MODULAR:
            return RingElem(self, int(value) % self.order)
        return RingElem(self, int(value) % self.p)

    def from_code(self, code: int) -> RingElem:
        if not 0 <= code < self.order:
            raise RingError(f"code {code} out of range for {self}")
        return RingElem(self, int(code))

    def from_coeffs(self, coeffs: Iterable[int]) -> RingElem:
        """Polynomial given low-to-high, reduced modulo f^r."""
        coeffs = [int(c) % self.p for c in coeffs]
        if self.family == INTEGER_MODULAR:
            # evaluate at the uniformizer-free embedding: only constants make sense
            if any(coeffs[1:]):
                raise RingError("integer-modular elements have no x")
            return self(coeffs[0] if coeffs else 0)
        _, rem = _poly_divmod(coeffs, self._modulus, self.p)
        return RingElem(self, _encode(rem, self.p))

    @property
    def zero(self) -> RingElem:
        return RingElem(self, 0)

    @property
    def one(self) -> RingElem:
        return RingElem(self, 1)

    @cached_property
    def uniformizer(self) -> RingElem:
        if self.family == INTEGER_MODULAR:
            return self(self.p)
        return self.from_coeffs(self.f)

    def coeffs(self, code: int) -> list[int]:
        if self.family == INTEGER_MODULAR:
            return [code]
        return _decode(code, self.p, self._width)

    # -- scalar arithmetic on codes -------------------------------------------

    def add_code(self, x: int, y: int) -> int:
        if self.family == INTEGER_MODULAR:
            return (x + y) % self.order
        if self._tables is not None:
            return int(self._tables[0][x, y])
        return _encode([(a + b) % self.p for a, b in zip(self.coeffs(x), self.coeffs(y))], self.p)

    def neg_code(self, x: int) -> int:
        if self.family == INTEGER_MODULAR:
            return -x % self.order
        return _encode([-a % self.p for a in self.coeffs(x)], self.p)

    def sub_code(self, x: int, y: int) -> int:
        return self.add_code(x, self.neg_code(y))

    def mul_code(self, x: int, y: int) -> int:
        if self.family == INTEGER_MODULAR:
            return x * y % self.order
        if self._tables is not None:
            return int(self._tables[1][x, y])
        prod = _poly_mul(_trim(self.coeffs(x)), _trim(self.coeffs(y)), self.p)
        _, rem = _poly_divmod(prod, self._modulus, self.p)
        return _encode(rem, self.p)

    def valuation_code(self, x: int) -> int:
        if x == 0:
            return self.r
        k = 0
        if self.family == INTEGER_MODULAR:
            while x % self.p == 0:
                x //= self.p
                k += 1
            return k
        poly = _trim(self.coeffs(x))
        while True:
            quot, rem = _poly_divmod(poly, self.f, self.p)
            if rem:
                return k
            poly = quot
            k += 1

    def inverse_code(self, x: int) -> int:
        """Residue-field inverse lifted by Newton steps ``b <- b(2 - xb)``.

        Each step doubles the power of z dividing ``1 - xb``.
        """
        if self.valuation_code(x) != 0:
            raise NonUnitError(f"{self.from_code(x)} is not a unit in {self}")
        if self.family == INTEGER_MODULAR:
            b = pow(x % self.p, -1, self.p)
        else:
            _, low = _poly_divmod(_trim(self.coeffs(x)), self.f, self.p)
            b = _encode(_poly_inverse_mod(low, self.f, self.p), self.p)
        two = self(2).code
        precision = 1
        while precision < self.r:
            b = self.mul_code(b, self.sub_code(two, self.mul_code(x, b)))
            precision *= 2
        if self.mul_code(x, b) != 1:
            raise ArithmeticError(f"inverse lift failed for {self.from_code(x)}")
        return b

    # -- vectorized arithmetic on code arrays ---------------------------------

    @cached_property
    def _tables(self) -> tuple[np.ndarray, np.ndarray] | None:
        if self.family == INTEGER_MODULAR or self.order > TABLE_CAP:
            return None
        codes = np.arange(self.order, dtype=np.int64)
        add = self._poly_add_vec(codes[:, None], codes[None, :])
        mul = self._poly_mul_vec(codes[:, None], codes[None, :])
        return add, mul

    def _digits(self, x: np.ndarray) -> np.ndarray:
        powers = self.p ** np.arange(self._width, dtype=np.int64)
        return (np.asarray(x, dtype=np.int64)[..., None] // powers) % self.p

    def _undigits(self, d: np.ndarray) -> np.ndarray:
        powers = self.p ** np.arange(self._width, dtype=np.int64)
        return (d * powers).sum(axis=-1)

    def _poly_add_vec(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self._undigits((self._digits(x) + self._digits(y)) % self.p)

    def _poly_mul_vec(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        p, width = self.p, self._width
        dx, dy = np.broadcast_arrays(self._digits(x), self._digits(y))
        prod = np.zeros(dx.shape[:-1] + (2 * width - 1,), dtype=np.int64)
        for i in range(width):
            prod[..., i : i + width] += dx[..., i : i + 1] * dy
            prod %= p
        mod = np.asarray(self._modulus, dtype=np.int64)
        for k in range(2 * width - 2, width - 1, -1):
            c = prod[..., k : k + 1]
            prod[..., k - width : k + 1] = (prod[..., k - width : k + 1] - c * mod) % p
        return self._undigits(prod[..., :width])

    def add_codes(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
        if self.family == INTEGER_MODULAR:
            return (x + y) % self.order
        if self._tables is not None:
            return self._tables[0][x, y]
        return self._poly_add_vec(x, y)

    def neg_codes(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if self.family == INTEGER_MODULAR:
            return -x % self.order
        return self._undigits(-self._digits(x) % self.p)

    def sub_codes(self, x, y) -> np.ndarray:
        return self.add_codes(x, self.neg_codes(y))

    def mul_codes(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
        if self.family == INTEGER_MODULAR:
            return x * y % self.order
        if self._tables is not None:
            return self._tables[1][x, y]
        return self._poly_mul_vec(x, y)

    @cached_property
    def valuation_table(self) -> np.ndarray:
        """``valuation_table[code]`` for every element (enumerable rings only)."""
        self._check_cap(DEFAULT_ENUMERATION_CAP)
        return np.array([self.valuation_code(c) for c in range(self.order)], dtype=np.int64)

    # -- enumeration ----------------------------------------------------------

    def _check_cap(self, cap: int) -> None:
        if self.order > cap:
            raise EnumerationCapError(
                f"{self} has {self.order} elements, above the enumeration cap {cap}; "
                "use implicit-adjacency paths instead"
            )

    def elements(self, cap: int = DEFAULT_ENUMERATION_CAP) -> list[RingElem]:
        self._check_cap(cap)
        return [RingElem(self, c) for c in range(self.order)]

    def units(self, cap: int = DEFAULT_ENUMERATION_CAP) -> list[RingElem]:
        return [x for x in self.elements(cap) if x.is_unit()]


class RingElem:
    """Immutable element of a :class:`RingSpec`."""

    __slots__ = ("ring", "code")

    ring: RingSpec
    code: int

    def __init__(self, ring: RingSpec, code: int):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "code", code)

    def __setattr__(self, name, value):
        raise AttributeError("RingElem is immutable")

    def _other(self, other) -> int:
        if isinstance(other, RingElem):
            _check_same(self.ring, other.ring)
            return other.code
        if isinstance(other, int):
            return self.ring(other).code
        return NotImplemented

    def __add__(self, other):
        y = self._other(other)
        if y is NotImplemented:
            return y
        return RingElem(self.ring, self.ring.add_code(self.code, y))

    __radd__ = __add__

    def __sub__(self, other):
        y = self._other(other)
        if y is NotImplemented:
            return y
        return RingElem(self.ring, self.ring.sub_code(self.code, y))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return RingElem(self.ring, self.ring.neg_code(self.code))

    def __mul__(self, other):
        y = self._other(other)
        if y is NotImplemented:
            return y
        return RingElem(self.ring, self.ring.mul_code(self.code, y))

    __rmul__ = __mul__

    def __truediv__(self, other):
        y = self._other(other)
        if y is NotImplemented:
            return y
        return self * RingElem(self.ring, self.ring.inverse_code(y))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** -k
        out, base = 1, self.code
        while k:
            if k & 1:
                out = self.ring.mul_code(out, base)
            base = self.ring.mul_code(base, base)
            k >>= 1
        return RingElem(self.ring, out)

    def inverse(self) -> RingElem:
        return RingElem(self.ring, self.ring.inverse_code(self.code))

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def valuation(self) -> int:
        return self.ring.valuation_code(self.code)

    @property
    def coeffs(self) -> list[int]:
        return self.ring.coeffs(self.code)

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.code == other.code and self.ring == other.ring
        if isinstance(other, int):
            return self.code == self.ring(other).code
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, self.code))

    def __lt__(self, other: RingElem) -> bool:
        _check_same(self.ring, other.ring)
        return self.code < other.code

    def __bool__(self):
        return self.code != 0

    def __int__(self):
        return self.code

    def __reduce__(self):
        return (RingElem, (self.ring, self.code))

    def __str__(self):
        if self.ring.family == INTEGER_MODULAR:
            return str(self.code)
        return _fmt_poly(self.coeffs)

    def __repr__(self):
        return f"{self.ring}({self})"


def _check_same(a: RingSpec, b: RingSpec) -> None:
    if a is not b and a != b:
        raise MixedRingError(f"operands from different rings: {a} and {b}")


# ---------------------------------------------------------------------------
# functional surface


def make_ring(family: str, p: int, r: int, f: Sequence[int] | None = None) -> RingSpec:
    return RingSpec(family, int(p), int(r), tuple(f or ()))


def parse_ring(text: str) -> RingSpec:
    """Parse ``zpr:<p>,<r>`` or ``polyq:<p>,<r>,<f0>,<f1>,...``."""
    kind, sep, rest = text.strip().partition(":")
    if not sep:
        raise RingError(f"ring spec {text!r} lacks a family prefix")
    try:
        nums = [int(x) for x in rest.split(",")]
    except ValueError as exc:
        raise RingError(f"ring spec {text!r}: non-integer field") from exc
    if kind == "zpr":
        if len(nums) != 2:
            raise RingError(f"ring spec {text!r}: expected zpr:<p>,<r>")
        return make_ring(INTEGER_MODULAR, *nums)
    if kind == "polyq":
        if len(nums) < 4:
            raise RingError(f"ring spec {text!r}: expected polyq:<p>,<r>,<f coefficients>")
        return make_ring(POLYNOMIAL_QUOTIENT, nums[0], nums[1], nums[2:])
    raise RingError(f"unknown ring family {kind!r} in {text!r}")


def add(a: RingElem, b: RingElem) -> RingElem:
    return a + b


def sub(a: RingElem, b: RingElem) -> RingElem:
    return a - b


def neg(a: RingElem) -> RingElem:
    return -a


def mul(a: RingElem, b: RingElem) -> RingElem:
    return a * b


def is_unit(a: RingElem) -> bool:
    return a.is_unit()


def invert(a: RingElem) -> RingElem:
    return a.inverse()


def valuation(a: RingElem) -> int:
    return a.valuation()


def enumerate_elements(spec: RingSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> list[RingElem]:
    return spec.elements(cap)


def enumerate_units(spec: RingSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> list[RingElem]:
    return spec.units(cap)
