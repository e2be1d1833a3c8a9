"""Reed-Solomon codes with zeros {1, a} or {1, a, a^2} and their binary images.

Bit layout: a codeword ``c = (c_0, ..., c_{n-1})`` expands to an ``m x n``
matrix whose column ``j`` holds the canonical-basis coordinates of ``c_j``.
Flattened vectors are symbol-major: position ``[i, j]`` (0-based ``i``) is
index ``j*m + i``.

A polynomial row ``(h_1(x), ..., h_m(x))`` over ``F2[x]/(x^n - 1)`` stands
for the single binary check ``sum_i sum_j h_i[j] * c_{i,j} = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import gf2
from .gf2m import FieldSpec, build_field, poly_str


class ConstructionError(RuntimeError):
    """A derived object failed its consistency check."""


@dataclass(frozen=True)
class CodeSpec:
    field: FieldSpec
    parity: int = 3

    def __post_init__(self):
        if self.parity not in (2, 3):
            raise ValueError(f"parity must be 2 or 3, got {self.parity}")

    @property
    def m(self) -> int:
        return self.field.m

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def k(self) -> int:
        return self.n - self.parity

    @property
    def d_min(self) -> int:
        return self.parity + 1

    @property
    def zero_exponents(self) -> tuple[int, ...]:
        return tuple(range(self.parity))

    @property
    def nbits(self) -> int:
        return self.m * self.n

    @property
    def info_bit_indices(self) -> np.ndarray:
        """Flattened positions of the systematic (message) bits."""
        return np.arange(self.parity * self.m, self.nbits)

    @property
    def name(self) -> str:
        return f"({self.n},{self.k},{self.d_min})"


def code_spec(m: int, parity: int = 3) -> CodeSpec:
    return CodeSpec(build_field(m), parity)


# --------------------------------------------------------------------------
# F2[x]/(x^n - 1)


@dataclass(frozen=True)
class RingPoly:
    """Element of F2[x]/(x^n - 1); bit j of ``bits`` is the coefficient of x^j."""

    n: int
    bits: int = 0

    @classmethod
    def monomial(cls, n: int, e: int) -> RingPoly:
        return cls(n, 1 << (e % n))

    @classmethod
    def all_ones(cls, n: int) -> RingPoly:
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_coeffs(cls, coeffs) -> RingPoly:
        coeffs = list(coeffs)
        return cls(len(coeffs), gf2.bits_to_int(coeffs))

    def coeffs(self) -> list[int]:
        return [(self.bits >> j) & 1 for j in range(self.n)]

    def __add__(self, other: RingPoly) -> RingPoly:
        self._check(other)
        return RingPoly(self.n, self.bits ^ other.bits)

    def __mul__(self, other: RingPoly) -> RingPoly:
        self._check(other)
        out = 0
        b = other.bits
        for j in range(self.n):
            if (self.bits >> j) & 1:
                out ^= _rotl(b, j, self.n)
        return RingPoly(self.n, out)

    def shift(self, r: int) -> RingPoly:
        """Multiply by x^r."""
        return RingPoly(self.n, _rotl(self.bits, r % self.n, self.n))

    def frobenius(self, l: int) -> RingPoly:
        """Substitute x -> x^(2^l), i.e. raise to the power 2^l."""
        mult = pow(2, l, self.n)
        out = 0
        for j in range(self.n):
            if (self.bits >> j) & 1:
                out |= 1 << ((j * mult) % self.n)
        return RingPoly(self.n, out)

    def weight(self) -> int:
        return bin(self.bits).count("1")

    def is_zero(self) -> bool:
        return self.bits == 0

    def evaluate(self, fld: FieldSpec, x: int) -> int:
        acc = 0
        for j in range(self.n):
            if (self.bits >> j) & 1:
                acc ^= fld.pow(x, j)
        return acc

    def support(self) -> list[int]:
        return [j for j in range(self.n) if (self.bits >> j) & 1]

    def _check(self, other: RingPoly):
        if other.n != self.n:
            raise ValueError("ring polynomials of different lengths")


def _rotl(v: int, r: int, n: int) -> int:
    if r == 0:
        return v
    mask = (1 << n) - 1
    return ((v << r) | (v >> (n - r))) & mask


def shift_table(theta: RingPoly) -> dict[int, int]:
    """Map each cyclic shift ``theta * x^u`` (as bits) to ``u``."""
    table = {}
    for u in range(theta.n):
        table.setdefault(theta.shift(u).bits, u)
    return table


# --------------------------------------------------------------------------
# symbol level


def generator_poly(spec: CodeSpec) -> list[int]:
    """Coefficients (low degree first) of prod over zeros of (x - z)."""
    f = spec.field
    g = [1]
    for s in spec.zero_exponents:
        z = f.alpha_pow(s)
        nxt = [0] * (len(g) + 1)
        for d, c in enumerate(g):
            nxt[d + 1] ^= c
            nxt[d] ^= f.mul(c, z)
        g = nxt
    return g


def encode_rs(spec: CodeSpec, message) -> list[int]:
    """Systematic encoding: positions ``0..p-1`` parity, ``p..n-1`` message."""
    message = [int(v) for v in message]
    if len(message) != spec.k:
        raise ValueError(f"message must have {spec.k} symbols, got {len(message)}")
    f = spec.field
    if any(not 0 <= v < f.order for v in message):
        raise ValueError("message symbol outside the field")
    p = spec.parity
    g = generator_poly(spec)
    rem = [0] * p + message
    for d in range(spec.n - 1, p - 1, -1):
        coef = rem[d]
        if coef:
            for t in range(p + 1):
                rem[d - p + t] ^= f.mul(coef, g[t])
    return rem[:p] + message


def syndromes(spec: CodeSpec, word) -> list[int]:
    """``word(alpha^s)`` for every zero exponent ``s``."""
    f = spec.field
    out = []
    for s in spec.zero_exponents:
        acc = 0
        for j, c in enumerate(word):
            if c:
                acc ^= f.mul(c, f.alpha_pow(s * j))
        out.append(acc)
    return out


def is_codeword(spec: CodeSpec, word) -> bool:
    return not any(syndromes(spec, word))


def random_codeword(spec: CodeSpec, rng: np.random.Generator) -> list[int]:
    msg = rng.integers(0, spec.field.order, size=spec.k)
    return encode_rs(spec, msg)


# --------------------------------------------------------------------------
# binary images


def to_binary_image(fld: FieldSpec, codeword) -> np.ndarray:
    """``m x n`` matrix; column j is the basis expansion of ``c_j``."""
    cw = np.asarray(list(codeword), dtype=np.int64)
    shifts = np.arange(fld.m)[:, None]
    return ((cw[None, :] >> shifts) & 1).astype(np.uint8)


def from_binary_image(fld: FieldSpec, image) -> list[int]:
    image = np.asarray(image)
    if image.shape[0] != fld.m:
        raise ValueError(f"image must have {fld.m} rows")
    weights = 1 << np.arange(fld.m)
    return [int(v) for v in (image.astype(np.int64) * weights[:, None]).sum(axis=0)]


def flatten_image(image) -> np.ndarray:
    """Symbol-major flattening: ``[i, j]`` -> ``j*m + i``."""
    return np.asarray(image).T.reshape(-1)


def unflatten_bits(bits, m: int) -> np.ndarray:
    bits = np.asarray(bits)
    return bits.reshape(-1, m).T


def codeword_to_bits(fld: FieldSpec, codeword) -> np.ndarray:
    return flatten_image(to_binary_image(fld, codeword))


def bits_to_codeword(fld: FieldSpec, bits) -> list[int]:
    return from_binary_image(fld, unflatten_bits(bits, fld.m))


def _block_rows_to_int(blocks: list[RingPoly], m: int) -> int:
    """Expand a polynomial row into a flattened binary vector."""
    v = 0
    for i, h in enumerate(blocks):
        b = h.bits
        j = 0
        while b:
            if b & 1:
                v |= 1 << (j * m + i)
            b >>= 1
            j += 1
    return v


def int_to_blocks(v: int, m: int, n: int) -> list[RingPoly]:
    blocks = [0] * m
    for j in range(n):
        for i in range(m):
            if (v >> (j * m + i)) & 1:
                blocks[i] |= 1 << j
    return [RingPoly(n, b) for b in blocks]


@lru_cache(maxsize=None)
def standard_binary_parity(spec: CodeSpec) -> tuple[int, ...]:
    """Binary expansion of ``H[s][j] = alpha^(s*j)`` over the canonical basis.

    Row ``(s, k)`` checks coordinate ``k`` of ``sum_j c_j alpha^(s*j)``.
    """
    f = spec.field
    m, n = spec.m, spec.n
    rows = []
    for s in spec.zero_exponents:
        for k in range(m):
            v = 0
            for j in range(n):
                a = f.alpha_pow(s * j)
                for i in range(m):
                    if (f.mul(1 << i, a) >> k) & 1:
                        v |= 1 << (j * m + i)
            rows.append(v)
    if gf2.rank(rows) != spec.parity * m:
        raise ConstructionError("standard parity expansion is rank deficient")
    return tuple(rows)


@lru_cache(maxsize=None)
def binary_generator_rows(spec: CodeSpec) -> tuple[int, ...]:
    """Basis of the binary image code from encoding unit messages."""
    f = spec.field
    rows = []
    for t in range(spec.k):
        for i in range(spec.m):
            msg = [0] * spec.k
            msg[t] = 1 << i
            rows.append(gf2.bits_to_int(codeword_to_bits(f, encode_rs(spec, msg))))
    return tuple(rows)


def binary_generator_matrix(spec: CodeSpec) -> np.ndarray:
    """``(m*k) x (m*n)`` systematic generator of the binary image."""
    return gf2.rows_to_matrix(list(binary_generator_rows(spec)), spec.nbits)


def standard_parity_matrix(spec: CodeSpec) -> np.ndarray:
    return gf2.rows_to_matrix(list(standard_binary_parity(spec)), spec.nbits)


# --------------------------------------------------------------------------
# idempotents and the polynomial parity-check matrix

IDEMPOTENT_CONVENTIONS = ("coset", "complement")


def cyclotomic_coset(s: int, n: int) -> list[int]:
    out = []
    x = s % n
    while x not in out:
        out.append(x)
        x = (2 * x) % n
    return sorted(out)


@lru_cache(maxsize=None)
def compute_idempotent(spec: CodeSpec, convention: str = "coset") -> RingPoly:
    """Primitive idempotent attached to the zero ``eps = alpha^-1``.

    ``"coset"``: the transform equals 1 exactly on the cyclotomic coset of
    ``eps``, i.e. ``theta(alpha^i) = 1`` iff ``alpha^i`` is conjugate to
    ``eps``.  ``"complement"`` uses the coset of ``alpha`` instead.
    """
    f = spec.field
    n = spec.n
    if convention == "coset":
        support = cyclotomic_coset(-1, n)
    elif convention == "complement":
        support = cyclotomic_coset(1, n)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    # inverse transform; 1/n = 1 in characteristic 2 for odd n
    coeffs = []
    for j in range(n):
        acc = 0
        for i in support:
            acc ^= f.alpha_pow(-i * j)
        if acc not in (0, 1):
            raise ConstructionError("idempotent coefficient outside F2")
        coeffs.append(acc)
    theta = RingPoly.from_coeffs(coeffs)
    if theta * theta != theta:
        raise ConstructionError("theta^2 != theta")
    return theta


def theta_one(spec: CodeSpec) -> RingPoly:
    return RingPoly.all_ones(spec.n)


def reference_functional(fld: FieldSpec) -> int:
    """Field element ``nu`` whose trace functional ``x -> Tr(nu*x)`` fixes the
    common shift of the u vectors.

    ``nu = 1 / (alpha^(m-1) * lam0)`` with ``lam0`` trace-dual to the unit
    basis vector (``Tr(lam0 * alpha^t) = [t == 0]``).  With it the derived
    vectors coincide with the published u-vector tables.
    """
    m = fld.m
    lam0 = None
    for e in range(fld.n):
        cand = fld.alpha_pow(e)
        if all(fld.trace(fld.mul(cand, fld.alpha_pow(t))) == (t == 0) for t in range(m)):
            lam0 = cand
            break
    if lam0 is None:
        raise ConstructionError("no trace-dual element for the unit vector")
    return fld.inv(fld.mul(fld.alpha_pow(m - 1), lam0))


def extraction_poly(spec: CodeSpec, basis_index: int, s: int, functional: int) -> RingPoly:
    """``sum_j Tr(functional * gamma_i * alpha^(s*j)) x^j``."""
    f = spec.field
    g = f.mul(functional, 1 << basis_index)
    bits = 0
    for j in range(spec.n):
        if f.trace(f.mul(g, f.alpha_pow(s * j))):
            bits |= 1 << j
    return RingPoly(spec.n, bits)


@dataclass(frozen=True)
class UVectors:
    u: tuple[tuple[int, ...], ...]  # one vector per nonzero zero exponent
    convention: str

    @property
    def u1(self) -> tuple[int, ...]:
        return self.u[0]

    @property
    def u2(self) -> tuple[int, ...] | None:
        return self.u[1] if len(self.u) > 1 else None


def _match_shifts(spec: CodeSpec, theta: RingPoly) -> tuple[tuple[int, ...], ...] | None:
    f = spec.field
    table = shift_table(theta)
    nu = reference_functional(f)
    out = []
    for s in spec.zero_exponents[1:]:
        # the functional for the zero alpha^s is nu^s
        func = f.pow(nu, s)
        us = []
        for i in range(spec.m):
            p = extraction_poly(spec, i, s, func)
            if p.bits not in table:
                return None
            us.append(table[p.bits])
        out.append(tuple(us))
    return tuple(out)


@lru_cache(maxsize=None)
def derive_u_vectors(spec: CodeSpec) -> UVectors:
    """Shift exponents placing ``theta * x^u`` in the parity matrix.

    Each block polynomial is computed from the field (trace extraction of
    ``gamma_i * alpha^(s*j)``) and matched against the cyclic shifts of the
    idempotent.  The alternate idempotent convention is tried when the
    first one admits no match.
    """
    for conv in IDEMPOTENT_CONVENTIONS:
        theta = compute_idempotent(spec, conv)
        us = _match_shifts(spec, theta)
        if us is not None:
            return UVectors(us, conv)
    raise ConstructionError("no idempotent convention matches the field expansion")


@lru_cache(maxsize=None)
def idempotent(spec: CodeSpec) -> RingPoly:
    """The idempotent under the convention the u-vector derivation settled on."""
    return compute_idempotent(spec, derive_u_vectors(spec).convention)


@dataclass(frozen=True)
class PolyParityMatrix:
    spec: CodeSpec
    grid: tuple[tuple[RingPoly, ...], ...]
    u: UVectors
    theta: RingPoly

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.grid), self.spec.m

    def binary_rows(self) -> list[int]:
        return [_block_rows_to_int(list(row), self.spec.m) for row in self.grid]

    def binary_matrix(self) -> np.ndarray:
        return gf2.rows_to_matrix(self.binary_rows(), self.spec.nbits)


@lru_cache(maxsize=None)
def build_poly_parity_matrix(spec: CodeSpec) -> PolyParityMatrix:
    m, n = spec.m, spec.n
    u = derive_u_vectors(spec)
    theta = compute_idempotent(spec, u.convention)
    zero = RingPoly(n, 0)
    one = theta_one(spec)
    grid = []
    for i in range(m):
        grid.append(tuple(one if c == i else zero for c in range(m)))
    for vec in u.u:
        for k in range(m):
            grid.append(tuple(theta.shift(vec[c] + k) for c in range(m)))
    H = PolyParityMatrix(spec, tuple(grid), u, theta)
    rows = H.binary_rows()
    if gf2.rank(rows) != spec.parity * m:
        raise ConstructionError("polynomial parity matrix is rank deficient")
    if gf2.rref(rows) != gf2.rref(list(standard_binary_parity(spec))):
        raise ConstructionError("polynomial parity matrix spans the wrong dual space")
    return H


@lru_cache(maxsize=None)
def decoding_matrix(spec: CodeSpec) -> np.ndarray:
    """Binary expansion of the polynomial parity matrix (``p*m`` rows)."""
    mat = build_poly_parity_matrix(spec).binary_matrix()
    mat.setflags(write=False)
    return mat


# --------------------------------------------------------------------------
# M matrix


@dataclass(frozen=True)
class MMatrix:
    """Exponents ``b[i][j]`` of the dual vectors with a zero block ``i`` and
    ``theta * x^b[i][j]`` in every other block ``j`` (diagonal is ``None``).

    Each row is only defined up to a common additive shift; the stored
    representative has its first off-diagonal exponent equal to 0.
    """

    spec: CodeSpec
    b: tuple[tuple[int | None, ...], ...]
    theta: RingPoly

    def row_differences(self, i: int) -> list[int | None]:
        """Exponents of row i relative to its first off-diagonal entry."""
        row = self.b[i]
        ref = next(v for v in row if v is not None)
        return [None if v is None else (v - ref) % self.spec.n for v in row]

    def row_vector(self, i: int, shift: int = 0) -> int:
        blocks = []
        for v in self.b[i]:
            blocks.append(RingPoly(self.spec.n, 0) if v is None else self.theta.shift(v + shift))
        return _block_rows_to_int(blocks, self.spec.m)


@lru_cache(maxsize=None)
def compute_m_matrix(spec: CodeSpec) -> MMatrix:
    """Search the dual space for the rows of the M matrix.

    For row ``i`` we solve for combinations of the standard parity rows whose
    block ``i`` vanishes and whose first other block equals ``theta``; the
    remaining freedom is enumerated and the element whose other blocks are
    all pure shifts of ``theta`` is kept.
    """
    if spec.parity != 3:
        raise ValueError("the M matrix is defined for triple-parity codes")
    m, n = spec.m, spec.n
    theta = idempotent(spec)
    table = shift_table(theta)
    dual = list(standard_binary_parity(spec))
    nvars = len(dual)

    def coeff_mask(pos: int) -> int:
        c = 0
        for t, h in enumerate(dual):
            if (h >> pos) & 1:
                c |= 1 << t
        return c

    masks = [coeff_mask(pos) for pos in range(spec.nbits)]

    def combine(sel: int) -> int:
        v = 0
        for t in range(nvars):
            if (sel >> t) & 1:
                v ^= dual[t]
        return v

    b_rows = []
    for i in range(m):
        k0 = 0 if i != 0 else 1
        eqs = []
        for j in range(n):
            eqs.append((masks[j * m + i], 0))
            eqs.append((masks[j * m + k0], (theta.bits >> j) & 1))
        sol = gf2.solve_affine(eqs, nvars)
        if sol is None:
            raise ConstructionError(f"no dual vector vanishes on block {i + 1}")
        particular, hom = sol
        found = None
        for sel_bits in range(1 << len(hom)):
            sel = particular
            for t, h in enumerate(hom):
                if (sel_bits >> t) & 1:
                    sel ^= h
            blocks = int_to_blocks(combine(sel), m, n)
            exps = []
            for c, blk in enumerate(blocks):
                if c == i:
                    exps.append(None)
                elif blk.bits in table:
                    exps.append(table[blk.bits])
                else:
                    break
            else:
                found = tuple(exps)
                break
        if found is None:
            raise ConstructionError(f"row {i + 1} has no pure-shift representative")
        b_rows.append(found)
    return MMatrix(spec, tuple(b_rows), theta)


# --------------------------------------------------------------------------
# serialization

BUILD_SCHEMA = "rsaut.build/1"


def field_id(fld: FieldSpec) -> str:
    return f"GF(2^{fld.m})"


def build_summary(spec: CodeSpec) -> dict:
    """JSON-ready description of the construction for ``spec``."""
    f = spec.field
    H = build_poly_parity_matrix(spec)
    out = {
        "schema": BUILD_SCHEMA,
        "field": {
            "id": field_id(f),
            "m": f.m,
            "n": f.n,
            "prim_poly": f.prim_poly,
            "prim_poly_str": poly_str(f.prim_poly),
        },
        "code": {"n": spec.n, "k": spec.k, "d_min": spec.d_min, "parity": spec.parity,
                 "zeros": [f"alpha^{s}" for s in spec.zero_exponents]},
        "idempotent": {
            "convention": H.u.convention,
            "support": H.theta.support(),
            "weight": H.theta.weight(),
        },
        "u1": list(H.u.u1),
    }
    if spec.parity == 2:
        out["u"] = list(H.u.u1)
    else:
        out["u2"] = list(H.u.u2)
        out["m_matrix"] = [list(r) for r in compute_m_matrix(spec).b]
    out["binary_rank"] = gf2.rank(H.binary_rows())
    return out
