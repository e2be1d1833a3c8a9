"""GF(2^m) arithmetic over the polynomial basis 1, a, a^2, ..., a^(m-1).

Elements are plain ints: bit ``i`` is the coordinate on ``a^i``.  The zero
element has no logarithm; every other element is ``a^e`` for a unique
``e`` in ``Z_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

# Degree -> primitive polynomial (bit k = coefficient of x^k).
# m = 3..6 follow the defining relations a^3=a+1, a^4=a+1, a^5=a^2+1,
# a^6=a+1; m = 7..10 are the usual textbook choices.
PRIMITIVE_POLYS = {
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,  # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
}

MIN_M = 3
MAX_M = 10


class FieldError(ValueError):
    """Raised for an invalid field construction."""


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) with a fixed primitive element ``alpha`` (the residue of x)."""

    m: int
    prim_poly: int
    antilog: tuple = field(repr=False)
    log: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return (1 << self.m) - 1

    @property
    def order(self) -> int:
        return 1 << self.m

    @property
    def basis(self) -> list[int]:
        """Canonical basis ``[1, alpha, ..., alpha^(m-1)]``."""
        return [1 << i for i in range(self.m)]

    def alpha_pow(self, e: int) -> int:
        return self.antilog[e % self.n]

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.antilog[(self.log[a] + self.log[b]) % self.n]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^m)")
        return self.antilog[-self.log[a] % self.n]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            if k == 0:
                return 1
            if k < 0:
                raise ZeroDivisionError("negative power of zero")
            return 0
        return self.antilog[(self.log[a] * k) % self.n]

    def sqrt(self, a: int) -> int:
        # squaring is an automorphism; its inverse is a^(2^(m-1))
        return self.pow(a, 1 << (self.m - 1))

    def trace(self, a: int) -> int:
        t = 0
        x = a
        for _ in range(self.m):
            t ^= x
            x = self.mul(x, x)
        if t not in (0, 1):
            raise FieldError("trace left the prime field")
        return t

    def to_bits(self, a: int) -> list[int]:
        return [(a >> i) & 1 for i in range(self.m)]

    def from_bits(self, bits) -> int:
        bits = list(bits)
        if len(bits) != self.m:
            raise ValueError(f"expected {self.m} bits, got {len(bits)}")
        v = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("bits must be 0/1")
            v |= int(b) << i
        return v

    def mult_order(self, a: int) -> int:
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        e = self.log[a]
        k = 1
        while (e * k) % self.n:
            k += 1
        return k

    def elements(self) -> range:
        return range(self.order)


def _tables(m: int, prim_poly: int) -> tuple[tuple, tuple]:
    n = (1 << m) - 1
    antilog = [0] * n
    log = [-1] * (n + 1)
    x = 1
    for e in range(n):
        if log[x] != -1:
            raise FieldError(f"polynomial {prim_poly:#b} is not primitive (period {e})")
        antilog[e] = x
        log[x] = e
        x <<= 1
        if x >> m:
            x ^= prim_poly
    if x != 1:
        raise FieldError(f"polynomial {prim_poly:#b} is not primitive")
    return tuple(antilog), tuple(log)


def build_field(m: int, prim_poly: int | None = None) -> FieldSpec:
    """Construct GF(2^m), 3 <= m <= 10.

    ``prim_poly`` defaults to the entry in :data:`PRIMITIVE_POLYS`; a custom
    polynomial is checked for primitivity and rejected with
    :class:`FieldError` otherwise.
    """
    if not isinstance(m, int) or not MIN_M <= m <= MAX_M:
        raise ValueError(f"m must be an integer in [{MIN_M}, {MAX_M}], got {m!r}")
    if prim_poly is None:
        return _cached_field(m)
    if prim_poly >> m != 1:
        raise FieldError(f"polynomial {prim_poly:#b} does not have degree {m}")
    antilog, log = _tables(m, prim_poly)
    return FieldSpec(m, prim_poly, antilog, log)


@lru_cache(maxsize=None)
def _cached_field(m: int) -> FieldSpec:
    p = PRIMITIVE_POLYS[m]
    antilog, log = _tables(m, p)
    return FieldSpec(m, p, antilog, log)


def poly_str(p: int) -> str:
    """Render a binary polynomial as ``x^5 + x^2 + 1``."""
    terms = []
    for k in range(p.bit_length() - 1, -1, -1):
        if (p >> k) & 1:
            terms.append("1" if k == 0 else "x" if k == 1 else f"x^{k}")
    return " + ".join(terms) or "0"
